// Copyright 2026 The timebin Authors
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

#include <stdexcept>
#include <string>

namespace timebin {

/// A state failed normalization, Hermiticity, or positivity checks.
struct InvalidStateError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A Kraus set failed the completeness check.
struct InvalidChannelError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A protocol, scan, or experiment configuration is malformed.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// An estimator could not produce a result (degenerate data, non-convergence).
struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace timebin
