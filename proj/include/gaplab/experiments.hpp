// Copyright 2026 The gaplab Authors
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

#pragma once

#include "gaplab/experiments/common.hpp"
#include "gaplab/experiments/concentration.hpp"
#include "gaplab/experiments/conditional.hpp"
#include "gaplab/experiments/counterexamples.hpp"
#include "gaplab/experiments/dynamics.hpp"
#include "gaplab/experiments/variance.hpp"
