/*
 * Copyright 2026 The fedanomaly Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "fedanomaly/alignment.hpp"
#include "fedanomaly/bundle.hpp"
#include "fedanomaly/coordinator.hpp"
#include "fedanomaly/errors.hpp"
#include "fedanomaly/federation.hpp"
#include "fedanomaly/graph.hpp"
#include "fedanomaly/io.hpp"
#include "fedanomaly/messages.hpp"
#include "fedanomaly/participant.hpp"
#include "fedanomaly/rng.hpp"
#include "fedanomaly/stats.hpp"
#include "fedanomaly/synth.hpp"
