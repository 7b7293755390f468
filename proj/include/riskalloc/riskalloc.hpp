#pragma once

#include "riskalloc/closed_form.hpp"
#include "riskalloc/errors.hpp"
#include "riskalloc/indicators.hpp"
#include "riskalloc/joint_models.hpp"
#include "riskalloc/marginals.hpp"
#include "riskalloc/rng.hpp"
#include "riskalloc/rootfind.hpp"
#include "riskalloc/solvers.hpp"
#include "riskalloc/special.hpp"
