// Copyright 2026 The DyBit Toolkit Authors
// SPDX-License-Identifier: Apache-2.0
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

// Pairwise summation with a fixed association tree.
//
// A range of n > leaf terms is split at the largest power of two below n.
// Because every split point of a range longer than kSumChunk is a multiple
// of kSumChunk, summing aligned chunks independently and then combining the
// chunk partials with the same rule (leaf = 1) reproduces the serial tree
// exactly. That is what lets the OpenMP kernels return the same bits as the
// serial reference for any thread count.

#ifndef DYBIT_REDUCE_HPP_
#define DYBIT_REDUCE_HPP_

#include <bit>
#include <cstddef>

namespace dybit {

inline constexpr std::size_t kSumLeaf = 16;
inline constexpr std::size_t kSumChunk = 4096;
static_assert(std::has_single_bit(kSumChunk) && kSumChunk >= kSumLeaf);

template <typename Term>
double pairwise_sum(std::size_t begin, std::size_t end, const Term& term,
                    std::size_t leaf = kSumLeaf) {
  const std::size_t n = end - begin;
  if (n <= leaf) {
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) acc += term(i);
    return acc;
  }
  const std::size_t split = std::bit_floor(n - 1);
  return pairwise_sum(begin, begin + split, term, leaf) +
         pairwise_sum(begin + split, end, term, leaf);
}

}  // namespace dybit

#endif  // DYBIT_REDUCE_HPP_
