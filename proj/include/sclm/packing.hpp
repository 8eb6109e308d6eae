// SPDX-License-Identifier: Apache-2.0
//
// Fixed-length sequence packing. Corpora pack as full paragraphs with EOP
// after each paragraph and EOD after each document; supervised examples pack
// first-fit with EOP between examples and never straddle sequences. Every
// sequence starts with BOS; the tail is padded with PAD.

#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "sclm/vocab.hpp"

namespace sclm {

// Half-open interval over 0-based id indices.
struct Interval {
  int32_t begin = 0;
  int32_t end = 0;
  bool operator==(const Interval&) const = default;
};

struct PackedSequence {
  std::vector<TokenId> ids;         // fixed length n
  std::vector<Interval> doc_spans;  // partition of [0,n): documents, then pad
};

// Location of one packed example: input and target id ranges within
// sequences[seq]. The EOP delimiter that may follow belongs to neither.
struct ExamplePlacement {
  int32_t seq = 0;
  Interval input;
  Interval target;
};

struct PackResult {
  std::vector<PackedSequence> sequences;
  std::vector<ExamplePlacement> placements;  // pack_examples only
  std::vector<std::string> notes;            // split warnings, rejected examples
};

using Document = std::vector<std::string>;  // paragraphs in order
using ExampleIds = std::pair<std::vector<TokenId>, std::vector<TokenId>>;

// Deterministic: documents in order. `rng_seed` is reserved for shuffled
// packing variants and is unused here.
PackResult pack_corpus(const std::vector<Document>& documents, int32_t n,
                       uint64_t rng_seed = 0);

PackResult pack_examples(const std::vector<ExampleIds>& examples, int32_t n);

// Corpus text: documents separated by blank lines, one paragraph per line.
std::vector<Document> parse_corpus_text(std::string_view text);
std::vector<Document> load_corpus_file(const std::string& path);

int64_t non_pad_length(const PackedSequence& seq);

// Throws ContractError on any violated PackedSequence invariant.
void validate_packed(const PackedSequence& seq, int32_t n);

// Binary stream format: "SCLM", version u32, n u32, then per sequence
// n little-endian u16 ids, a u32 doc_span count and u32 begin/end pairs.
void write_packed(std::ostream& out, const std::vector<PackedSequence>& seqs,
                  int32_t n);
std::vector<PackedSequence> read_packed(std::istream& in, int32_t* n_out = nullptr);
void save_packed_file(const std::string& path,
                      const std::vector<PackedSequence>& seqs, int32_t n);
std::vector<PackedSequence> load_packed_file(const std::string& path,
                                             int32_t* n_out = nullptr);

}  // namespace sclm
