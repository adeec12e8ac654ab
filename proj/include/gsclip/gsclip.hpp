// Copyright 2026 The gsclip Authors.
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

#include "gsclip/core.hpp"
#include "gsclip/error.hpp"
#include "gsclip/eval.hpp"
#include "gsclip/generators.hpp"
#include "gsclip/io/cache.hpp"
#include "gsclip/io/container.hpp"
#include "gsclip/io/files.hpp"
#include "gsclip/io/records.hpp"
#include "gsclip/io/report.hpp"
#include "gsclip/random.hpp"
#include "gsclip/selector.hpp"
#include "gsclip/stats.hpp"
#include "gsclip/synth.hpp"
#include "gsclip/text.hpp"
