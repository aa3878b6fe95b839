#pragma once

// Umbrella header: a ResNet one-step solver for ODE systems, trained on
// finite-difference targets, with the benchmark suite and experiment
// harness built around it.

#include "flowmap/catalog.hpp"
#include "flowmap/csv.hpp"
#include "flowmap/dataset.hpp"
#include "flowmap/errors.hpp"
#include "flowmap/experiment.hpp"
#include "flowmap/integrators.hpp"
#include "flowmap/metrics.hpp"
#include "flowmap/network.hpp"
#include "flowmap/ode_system.hpp"
#include "flowmap/parallel.hpp"
#include "flowmap/rng.hpp"
#include "flowmap/rollout.hpp"
#include "flowmap/training.hpp"
#include "flowmap/vec.hpp"
#include "flowmap/version.hpp"
