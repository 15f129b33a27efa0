/*
 * Copyright 2026 The exaloglog-cpp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef EXALOGLOG_EXALOGLOG_HPP
#define EXALOGLOG_EXALOGLOG_HPP

#include "exaloglog/coefficients.hpp"
#include "exaloglog/estimator.hpp"
#include "exaloglog/martingale.hpp"
#include "exaloglog/ml_solver.hpp"
#include "exaloglog/packed_array.hpp"
#include "exaloglog/params.hpp"
#include "exaloglog/register_pmf.hpp"
#include "exaloglog/serialization.hpp"
#include "exaloglog/sim.hpp"
#include "exaloglog/sketch.hpp"
#include "exaloglog/theory.hpp"
#include "exaloglog/tokens.hpp"

#endif  // EXALOGLOG_EXALOGLOG_HPP
