#pragma once

// Umbrella header: resolving instantaneous linear mixtures of multivariate
// time series by orthogonalizing the innovations of an autoregressive fit,
// plus the signal-orthogonalization comparator, spectral connectivity
// measures and reproducible synthetic benchmarks.

#include "unmixio/connectivity.hpp"
#include "unmixio/core.hpp"
#include "unmixio/experiments.hpp"
#include "unmixio/generators.hpp"
#include "unmixio/matrix_io.hpp"
#include "unmixio/procrustes.hpp"
#include "unmixio/svg_plot.hpp"
#include "unmixio/unmixing.hpp"
#include "unmixio/var_model.hpp"
