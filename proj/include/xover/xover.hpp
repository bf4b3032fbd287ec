#pragma once

// Umbrella header: locally D-optimal crossover designs for generalized
// linear models estimated by GEE, with equivalence-theorem
// verification.

#include "xover/common.hpp"
#include "xover/criteria.hpp"
#include "xover/design.hpp"
#include "xover/glm.hpp"
#include "xover/information.hpp"
#include "xover/optimize.hpp"
#include "xover/report.hpp"
#include "xover/run_config.hpp"
#include "xover/sequence.hpp"
#include "xover/verify.hpp"
#include "xover/working_correlation.hpp"
