// SPDX-License-Identifier: Apache-2.0
//
// Answer-level scoring: exact match and bag-of-tokens F1.

#pragma once

#include <vector>

#include "sclm/vocab.hpp"

namespace sclm {

// 1.0 when pred and gold are identical token sequences, else 0.0.
double exact_match(const std::vector<TokenId>& pred,
                   const std::vector<TokenId>& gold);

// Multiset-overlap F1: precision = overlap/|pred|, recall = overlap/|gold|.
// Both empty scores 1.0; exactly one empty scores 0.0. Symmetric in its
// arguments.
double token_f1(const std::vector<TokenId>& pred,
                const std::vector<TokenId>& gold);

}  // namespace sclm
