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

#pragma once

namespace burstkit {

/// Kernel thread cap: BURSTKIT_THREADS when set and positive, otherwise the
/// OpenMP default. Applied lazily on first use.
int thread_count();

/// Overrides the thread cap for this process.
void set_thread_count(int threads);

/// Applies BURSTKIT_THREADS once; cheap to call repeatedly.
void ensure_threads_configured();

}  // namespace burstkit
