// Copyright 2026 The edgetap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "edgetap/constants_io.hpp"
#include "edgetap/error.hpp"
#include "edgetap/estimation.hpp"
#include "edgetap/optimize.hpp"
#include "edgetap/predictor.hpp"
#include "edgetap/rng.hpp"
#include "edgetap/simulation.hpp"
#include "edgetap/skewnormal.hpp"
#include "edgetap/special_fn.hpp"
#include "edgetap/stats.hpp"
#include "edgetap/taplog.hpp"
