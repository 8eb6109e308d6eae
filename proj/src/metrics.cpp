// SPDX-License-Identifier: Apache-2.0
#include "sclm/metrics.hpp"

#include <algorithm>
#include <map>

namespace sclm {

double exact_match(const std::vector<TokenId>& pred,
                   const std::vector<TokenId>& gold) {
  return pred == gold ? 1.0 : 0.0;
}

double token_f1(const std::vector<TokenId>& pred,
                const std::vector<TokenId>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  std::map<TokenId, int64_t> pc, gc;
  for (TokenId t : pred) ++pc[t];
  for (TokenId t : gold) ++gc[t];
  int64_t overlap = 0;
  for (const auto& [tok, count] : pc) {
    const auto it = gc.find(tok);
    if (it != gc.end()) overlap += std::min(count, it->second);
  }
  if (overlap == 0) return 0.0;
  const double p = static_cast<double>(overlap) / static_cast<double>(pred.size());
  const double r = static_cast<double>(overlap) / static_cast<double>(gold.size());
  return 2.0 * p * r / (p + r);
}

}  // namespace sclm
