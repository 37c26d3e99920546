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

#include "burstkit/autodiff.hpp"

namespace burstkit {

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

Tape& Tape::current() {
  thread_local Tape tape;
  return tape;
}

void Tape::replay_and_consume() {
  // Rules may not append while replaying; move out first so a throwing rule
  // still leaves the tape consumed.
  auto entries = std::move(entries_);
  entries_.clear();
  ++generation_;
  for (auto it = entries.rbegin(); it != entries.rend(); ++it) (*it)();
}

void Tape::clear() {
  entries_.clear();
  ++generation_;
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

template <class T>
void backward(const Tensor<T>& output) {
  if (output.numel() != 1) {
    throw ContractError("backward() needs a scalar output, got " + output.shape().str());
  }
  auto& impl = *output.impl();
  Tape& tape = Tape::current();
  if (!impl.recorded) {
    throw TapeError("backward() on a tensor that was not produced on the tape");
  }
  if (impl.tape_generation != tape.generation()) {
    throw TapeError("backward() on a consumed graph; re-run the forward pass first");
  }
  impl.grad_buffer()[0] += T(1);
  tape.replay_and_consume();
}

template void backward(const Tensor<float>&);
template void backward(const Tensor<double>&);

}  // namespace burstkit
