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

#include "burstkit/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <mutex>

namespace burstkit {

namespace {

std::once_flag g_configured;
int g_threads = 0;

void apply(int threads) {
  g_threads = threads > 0 ? threads : omp_get_max_threads();
  omp_set_num_threads(g_threads);
}

}  // namespace

void ensure_threads_configured() {
  std::call_once(g_configured, [] {
    int requested = 0;
    if (const char* env = std::getenv("BURSTKIT_THREADS")) requested = std::atoi(env);
    apply(requested);
  });
}

int thread_count() {
  ensure_threads_configured();
  return g_threads;
}

void set_thread_count(int threads) {
  ensure_threads_configured();
  apply(threads);
}

}  // namespace burstkit
