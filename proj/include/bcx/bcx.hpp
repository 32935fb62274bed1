/*
 * Copyright 2026 The bcx Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "bcx/dataset.hpp"
#include "bcx/ensemble.hpp"
#include "bcx/error.hpp"
#include "bcx/forest.hpp"
#include "bcx/ice.hpp"
#include "bcx/metrics.hpp"
#include "bcx/mlp.hpp"
#include "bcx/model.hpp"
#include "bcx/pca.hpp"
#include "bcx/persistence.hpp"
#include "bcx/random.hpp"
#include "bcx/selection.hpp"
#include "bcx/shapley.hpp"
#include "bcx/surrogate.hpp"
#include "bcx/tree.hpp"
