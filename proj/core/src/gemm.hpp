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

#include <Eigen/Core>
#include <cstdint>

namespace burstkit::detail {

template <class T>
using RowMajor = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// C (m x n) = [C +] op(A) * op(B), all row-major with leading dimensions
/// lda/ldb/ldc. op(A) is m x k; A is stored k x m when trans_a is set.
template <class T>
void gemm(bool trans_a, bool trans_b, std::int64_t m, std::int64_t n, std::int64_t k, const T* a,
          std::int64_t lda, const T* b, std::int64_t ldb, T* c, std::int64_t ldc, bool accumulate) {
  using Stride = Eigen::OuterStride<>;
  using Map = Eigen::Map<const RowMajor<T>, 0, Stride>;
  Eigen::Map<RowMajor<T>, 0, Stride> cm(c, m, n, Stride(ldc));
  if (!accumulate) cm.setZero();
  if (m == 0 || n == 0 || k == 0) return;
  if (!trans_a && !trans_b) {
    cm.noalias() += Map(a, m, k, Stride(lda)) * Map(b, k, n, Stride(ldb));
  } else if (trans_a && !trans_b) {
    cm.noalias() += Map(a, k, m, Stride(lda)).transpose() * Map(b, k, n, Stride(ldb));
  } else if (!trans_a && trans_b) {
    cm.noalias() += Map(a, m, k, Stride(lda)) * Map(b, n, k, Stride(ldb)).transpose();
  } else {
    cm.noalias() += Map(a, k, m, Stride(lda)).transpose() * Map(b, n, k, Stride(ldb)).transpose();
  }
}

/// Densely packed variant: lda/ldb/ldc follow from the shapes.
template <class T>
void gemm(bool trans_a, bool trans_b, std::int64_t m, std::int64_t n, std::int64_t k, const T* a,
          const T* b, T* c, bool accumulate) {
  gemm<T>(trans_a, trans_b, m, n, k, a, trans_a ? m : k, b, trans_b ? k : n, c, n, accumulate);
}

}  // namespace burstkit::detail
