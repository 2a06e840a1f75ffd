#pragma once

#include "hawkes/common.hpp"
#include "hawkes/experiments.hpp"
#include "hawkes/gof.hpp"
#include "hawkes/io.hpp"
#include "hawkes/kernels.hpp"
#include "hawkes/mle.hpp"
#include "hawkes/model.hpp"
#include "hawkes/optimize.hpp"
#include "hawkes/periodogram.hpp"
#include "hawkes/quadrature.hpp"
#include "hawkes/rng.hpp"
#include "hawkes/simulation.hpp"
#include "hawkes/spectral.hpp"
#include "hawkes/version.hpp"
#include "hawkes/whittle.hpp"
