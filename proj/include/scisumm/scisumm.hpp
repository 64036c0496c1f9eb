// Copyright 2026 The SciSumm Authors. All Rights Reserved.
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

#include "scisumm/attention.hpp"
#include "scisumm/checkpoint.hpp"
#include "scisumm/config.hpp"
#include "scisumm/corpus.hpp"
#include "scisumm/encoder.hpp"
#include "scisumm/extractor.hpp"
#include "scisumm/features.hpp"
#include "scisumm/model.hpp"
#include "scisumm/nn.hpp"
#include "scisumm/ops.hpp"
#include "scisumm/rouge.hpp"
#include "scisumm/synthetic.hpp"
#include "scisumm/tensor.hpp"
#include "scisumm/training.hpp"
#include "scisumm/bench.hpp"
