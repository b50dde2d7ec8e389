#pragma once

// Thin RAII layer over FFTW for batched 1-D complex transforms along one axis
// of a row-major array.

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace wigner::fft {

enum class Direction : int { forward = FFTW_FORWARD, backward = FFTW_BACKWARD };

namespace detail {

// The FFTW planner is not reentrant; execution of a finished plan is.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* plan) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
};

using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

}  // namespace detail

/// Row-major strides for `shape`.
inline std::vector<std::size_t> strides_of(std::span<const std::size_t> shape) {
  std::vector<std::size_t> strides(shape.size(), 1);
  for (std::size_t a = shape.size(); a-- > 1;) strides[a - 1] = strides[a] * shape[a];
  return strides;
}

/// In-place transform of every 1-D line along `axis`. The backward transform
/// is normalized by the line length so forward followed by backward is the
/// identity.
inline void transform_axis(std::span<std::complex<double>> data, std::span<const std::size_t> shape,
                           std::size_t axis, Direction direction) {
  if (axis >= shape.size()) throw std::invalid_argument("transform_axis: axis out of range");
  const std::size_t total =
      std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  if (total != data.size()) throw std::invalid_argument("transform_axis: shape does not match data");
  if (total == 0) return;

  const auto strides = strides_of(shape);
  fftw_iodim line{static_cast<int>(shape[axis]), static_cast<int>(strides[axis]),
                  static_cast<int>(strides[axis])};
  std::vector<fftw_iodim> batch;
  for (std::size_t a = 0; a < shape.size(); ++a) {
    if (a == axis) continue;
    batch.push_back({static_cast<int>(shape[a]), static_cast<int>(strides[a]),
                     static_cast<int>(strides[a])});
  }

  auto* raw = reinterpret_cast<fftw_complex*>(data.data());
  detail::Plan plan;
  {
    std::lock_guard lock(detail::planner_mutex());
    plan.reset(fftw_plan_guru_dft(1, &line, static_cast<int>(batch.size()), batch.data(), raw, raw,
                                  static_cast<int>(direction), FFTW_ESTIMATE));
  }
  if (!plan) throw std::runtime_error("transform_axis: FFTW planning failed");
  fftw_execute(plan.get());

  if (direction == Direction::backward) {
    const double scale = 1.0 / static_cast<double>(shape[axis]);
    for (auto& v : data) v *= scale;
  }
}

/// Angular frequency of FFT bin `k` for `n` samples of spacing `h`, in
/// standard FFT order (0, 1, ..., n/2-1, -n/2, ..., -1).
inline double angular_frequency(std::size_t k, std::size_t n, double h) {
  const auto signed_k = static_cast<long long>(k) - (k >= n / 2 ? static_cast<long long>(n) : 0);
  return 2.0 * 3.14159265358979323846 * static_cast<double>(signed_k) / (static_cast<double>(n) * h);
}

/// True for the unpaired Nyquist bin of an even-length transform.
inline bool is_nyquist(std::size_t k, std::size_t n) { return n % 2 == 0 && k == n / 2; }

}  // namespace wigner::fft
