// Copyright 2026 The profilekit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "profilekit/error.hpp"
#include "profilekit/logstore.hpp"
#include "profilekit/negset.hpp"
#include "profilekit/normal.hpp"
#include "profilekit/parallel.hpp"
#include "profilekit/plot.hpp"
#include "profilekit/profile.hpp"
#include "profilekit/scoring.hpp"
#include "profilekit/similarity.hpp"
#include "profilekit/synth.hpp"
#include "profilekit/theory/bayes.hpp"
#include "profilekit/theory/gp.hpp"
#include "profilekit/theory/manifold.hpp"
#include "profilekit/theory/properties.hpp"
#include "profilekit/theory/skill.hpp"
