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

#include <stdexcept>
#include <string>

namespace fedanomaly {

// Malformed or inconsistent input: unknown ids, bad files, out-of-range
// parameters. Maps to CLI exit status 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A record crossing the owner -> coordinator boundary carried something
// other than public-network data. Maps to CLI exit status 2.
class PrivacyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller violated an operation precondition (e.g. scoring a disconnected
// subgraph).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace fedanomaly
