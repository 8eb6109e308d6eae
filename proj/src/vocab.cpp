// SPDX-License-Identifier: Apache-2.0
#include "sclm/vocab.hpp"

#include <cctype>
#include <cstdio>

#include "sclm/errors.hpp"

namespace sclm {

std::vector<TokenId> encode(std::string_view text) {
  std::vector<TokenId> ids;
  ids.reserve(text.size());
  for (unsigned char c : text) ids.push_back(static_cast<TokenId>(c));
  return ids;
}

std::string decode(const std::vector<TokenId>& ids) {
  std::string out;
  out.reserve(ids.size());
  for (TokenId id : ids) {
    if (id < 0 || id >= VOCAB_SIZE) throw ContractError("decode: id out of vocabulary");
    if (is_special(id)) throw ContractError("decode: special id in raw-text decode");
    out.push_back(static_cast<char>(static_cast<unsigned char>(id)));
  }
  return out;
}

std::string token_name(TokenId id) {
  switch (id) {
    case BOS: return "<s>";
    case EOP: return "</s>";
    case EOD: return "</d>";
    case PAD: return "<pad>";
    default: break;
  }
  if (id < 0 || id > 255) throw ContractError("token_name: id out of vocabulary");
  const unsigned char c = static_cast<unsigned char>(id);
  if (std::isprint(c)) return std::string(1, static_cast<char>(c));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "\\x%02x", c);
  return std::string(buf);
}

std::string render_tokens(const std::vector<TokenId>& ids) {
  std::string out;
  for (TokenId id : ids) {
    if (id >= 0 && id <= 255)
      out.push_back(static_cast<char>(static_cast<unsigned char>(id)));
    else
      out += token_name(id);
  }
  return out;
}

}  // namespace sclm
