// Copyright 2026 The dplabel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPLABEL_HPP_
#define DPLABEL_HPP_

#include "dplabel/checks.hpp"
#include "dplabel/core_model.hpp"
#include "dplabel/datagen.hpp"
#include "dplabel/errors.hpp"
#include "dplabel/estimators.hpp"
#include "dplabel/experiment.hpp"
#include "dplabel/linalg.hpp"
#include "dplabel/losses.hpp"
#include "dplabel/metrics.hpp"
#include "dplabel/plot.hpp"
#include "dplabel/privacy.hpp"
#include "dplabel/rng.hpp"

#endif  // DPLABEL_HPP_
