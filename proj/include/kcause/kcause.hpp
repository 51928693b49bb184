#pragma once

// Kernel methods for causal effect estimation: mean embeddings and two-sample
// / independence tests, conditional mean and deconditioning operators, and
// interventional mean embedding estimators for backdoor, two-dataset fusion,
// frontdoor, instrumental and proxy identification, with propensity
// reweighting diagnostics, synthetic scenarios with exact oracles, and a
// config-driven runner.

#include "kcause/csv.hpp"
#include "kcause/dataset.hpp"
#include "kcause/embeddings.hpp"
#include "kcause/errors.hpp"
#include "kcause/estimators.hpp"
#include "kcause/kernels.hpp"
#include "kcause/operators.hpp"
#include "kcause/rng.hpp"
#include "kcause/runner.hpp"
#include "kcause/scenarios.hpp"
#include "kcause/serialization.hpp"
#include "kcause/weighting.hpp"
