#pragma once

#include "wigner/errors.hpp"
#include "wigner/evolve.hpp"
#include "wigner/fft.hpp"
#include "wigner/oracle.hpp"
#include "wigner/phasespace.hpp"
#include "wigner/potentials.hpp"
#include "wigner/pseudoparticle.hpp"
#include "wigner/scenario.hpp"
#include "wigner/spectral.hpp"
