// SPDX-License-Identifier: Apache-2.0
//
// Byte-level vocabulary: one id per byte plus four specials.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sclm {

using TokenId = int32_t;

inline constexpr TokenId BOS = 256;  // <s>  sequence start
inline constexpr TokenId EOP = 257;  // </s> end of paragraph / example delimiter
inline constexpr TokenId EOD = 258;  // </d> end of document
inline constexpr TokenId PAD = 259;
inline constexpr int32_t VOCAB_SIZE = 260;

inline bool is_special(TokenId id) { return id >= 256; }

// One id per byte; never produces special ids.
std::vector<TokenId> encode(std::string_view text);

// Strict inverse of encode; special ids are a contract violation.
std::string decode(const std::vector<TokenId>& ids);

// Printable form of a single id: the byte (escaped if non-printable) or the
// special's marker.
std::string token_name(TokenId id);

// Lossy rendering for humans: bytes pass through, specials become markers.
std::string render_tokens(const std::vector<TokenId>& ids);

}  // namespace sclm
