// SPDX-License-Identifier: Apache-2.0
//
// alignsim - Monte Carlo simulator for interference alignment with analog CSI feedback
// Copyright (C) 2026 the alignsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
//
// Umbrella header pulling in the whole library.

#pragma once

#include "channel.hpp"
#include "config.hpp"
#include "experiment.hpp"
#include "feedback.hpp"
#include "ia.hpp"
#include "overhead.hpp"
#include "rate.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "util.hpp"
