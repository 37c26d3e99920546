// Copyright 2026 The burstkit Authors. All Rights Reserved.
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

#include "doctest.h"
#include "grad_suite.hpp"

using namespace burstkit::testing;

TEST_CASE("finite-difference gradients of every op and block") {
  for (const auto& c : grad_cases()) {
    CAPTURE(c.name);
    const GradReport r = c.run(101);
    CHECK(r.checked > 0);
    CHECK(r.max_rel_err < c.tolerance);
    CHECK(4 * r.kinks <= r.checked);
  }
}
