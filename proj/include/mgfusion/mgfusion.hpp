// Copyright (c) 2026 The mgfusion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "mgfusion/bench.hpp"
#include "mgfusion/error.hpp"
#include "mgfusion/joint_decoder.hpp"
#include "mgfusion/keywords.hpp"
#include "mgfusion/manifest.hpp"
#include "mgfusion/metrics.hpp"
#include "mgfusion/phrase_fusion.hpp"
#include "mgfusion/scorers.hpp"
#include "mgfusion/supervision.hpp"
#include "mgfusion/token_fusion.hpp"
#include "mgfusion/vocabulary.hpp"
