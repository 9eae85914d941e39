#pragma once

// Scale-adaptive label-distribution smoothing for count-based severity
// grading: grading scales, smoothed label generation, the multi-task KL
// objective, a small two-headed predictor and the evaluation metrics.

#include "sals/data.hpp"
#include "sals/error.hpp"
#include "sals/labelgen.hpp"
#include "sals/loss.hpp"
#include "sals/metrics.hpp"
#include "sals/model.hpp"
#include "sals/rng.hpp"
#include "sals/scale.hpp"
#include "sals/serialize.hpp"
