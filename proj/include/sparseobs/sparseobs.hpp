/*
 Copyright 2026 The sparseobs Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef SPARSEOBS_SPARSEOBS_HPP
#define SPARSEOBS_SPARSEOBS_HPP

#include "sparseobs/conditions.hpp"
#include "sparseobs/error.hpp"
#include "sparseobs/experiments.hpp"
#include "sparseobs/io.hpp"
#include "sparseobs/linalg.hpp"
#include "sparseobs/lp_simplex.hpp"
#include "sparseobs/recovery.hpp"
#include "sparseobs/stochastic.hpp"
#include "sparseobs/system_model.hpp"
#include "sparseobs/types.hpp"

#endif  // SPARSEOBS_SPARSEOBS_HPP
