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

#include <cstdint>
#include <functional>
#include <vector>

#include "burstkit/tensor.hpp"

namespace burstkit {

/// Ordered log of differentiable operations for one thread.
///
/// Every op whose inputs need gradients appends an entry holding its backward
/// rule. backward() replays the entries in reverse recorded order and then
/// consumes the tape; the next forward pass records into a fresh generation.
class Tape {
 public:
  static Tape& current();

  std::uint64_t generation() const { return generation_; }
  std::size_t size() const { return entries_.size(); }

  void record(std::function<void()> rule) { entries_.push_back(std::move(rule)); }
  /// Runs every backward rule newest first, then clears the tape.
  void replay_and_consume();
  /// Drops recorded entries without running them (e.g. after an eval pass).
  void clear();

 private:
  std::vector<std::function<void()>> entries_;
  std::uint64_t generation_ = 1;
};

/// Disables recording on this thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

/// Accumulates d(output)/d(leaf) into every requires_grad leaf reachable from
/// `output`. Throws ContractError for non-scalar outputs and TapeError when the
/// graph was already consumed or never recorded.
template <class T>
void backward(const Tensor<T>& output);

namespace detail {

/// True if any operand participates in differentiation.
template <class T>
bool any_needs_grad(std::initializer_list<const Tensor<T>*> inputs) {
  if (!grad_enabled()) return false;
  for (const auto* t : inputs) {
    if (t != nullptr && !t->empty() && t->impl()->needs_grad()) return true;
  }
  return false;
}

template <class T>
bool any_needs_grad(const std::vector<Tensor<T>>& inputs) {
  if (!grad_enabled()) return false;
  for (const auto& t : inputs) {
    if (!t.empty() && t.impl()->needs_grad()) return true;
  }
  return false;
}

/// Marks `out` as produced by `op` from `parents` and appends `rule`.
template <class T>
void record(Tensor<T>& out, const char* op, std::vector<ImplPtr<T>> parents,
            std::function<void()> rule) {
  auto& impl = *out.impl();
  impl.recorded = true;
  impl.op = op;
  impl.tape_generation = Tape::current().generation();
  impl.parents = std::move(parents);
  Tape::current().record(std::move(rule));
}

}  // namespace detail

}  // namespace burstkit
