// SPDX-License-Identifier: Apache-2.0
#include "sclm/packing.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "sclm/errors.hpp"

namespace sclm {

namespace {

// Accumulates one fixed-length sequence at a time. Every sequence opens with
// BOS; doc_span boundaries close at EOD, at example delimiters, or at flush.
class SequenceBuilder {
 public:
  SequenceBuilder(int32_t n, std::vector<PackedSequence>& out) : n_(n), out_(out) {
    start();
  }

  int32_t len() const { return static_cast<int32_t>(cur_.size()); }
  int32_t room() const { return n_ - len(); }
  int32_t seq_index() const { return static_cast<int32_t>(out_.size()); }

  void push(TokenId id) { cur_.push_back(id); }

  void push_all(const std::vector<TokenId>& ids, size_t from, size_t to) {
    cur_.insert(cur_.end(), ids.begin() + from, ids.begin() + to);
  }

  void close_doc() {
    if (doc_start_ < len()) {
      spans_.push_back({doc_start_, len()});
      doc_start_ = len();
    }
  }

  void flush() {
    close_doc();
    const int32_t pad_from = len();
    if (pad_from < n_) {
      cur_.resize(static_cast<size_t>(n_), PAD);
      spans_.push_back({pad_from, n_});
    }
    out_.push_back({std::move(cur_), std::move(spans_)});
    start();
  }

  // Emits the trailing partial sequence unless it is a bare BOS.
  void finish() {
    if (len() > 1) flush();
  }

 private:
  void start() {
    cur_.clear();
    spans_.clear();
    cur_.push_back(BOS);
    doc_start_ = 0;
  }

  int32_t n_;
  std::vector<PackedSequence>& out_;
  std::vector<TokenId> cur_;
  std::vector<Interval> spans_;
  int32_t doc_start_ = 0;
};

}  // namespace

PackResult pack_corpus(const std::vector<Document>& documents, int32_t n,
                       uint64_t /*rng_seed*/) {
  if (n < 8) throw ContractError("pack_corpus: n must be at least 8");
  PackResult result;
  SequenceBuilder b(n, result.sequences);
  const size_t piece_cap = static_cast<size_t>(n) - 2;  // BOS + EOP reserve

  for (size_t di = 0; di < documents.size(); ++di) {
    const Document& doc = documents[di];
    for (size_t pi = 0; pi < doc.size(); ++pi) {
      const std::vector<TokenId> ids = encode(doc[pi]);
      const size_t pieces = ids.empty() ? 1 : (ids.size() + piece_cap - 1) / piece_cap;
      if (pieces > 1) {
        std::ostringstream msg;
        msg << "split: document " << di << " paragraph " << pi << " of length "
            << ids.size() << " into " << pieces << " pieces";
        result.notes.push_back(msg.str());
      }
      for (size_t p = 0; p < pieces; ++p) {
        const size_t from = p * piece_cap;
        const size_t to = std::min(ids.size(), from + piece_cap);
        const int32_t needed = static_cast<int32_t>(to - from) + 1;  // piece + EOP
        if (b.room() < needed) b.flush();
        b.push_all(ids, from, to);
        b.push(EOP);
      }
    }
    if (b.room() < 1) b.flush();
    b.push(EOD);
    b.close_doc();
  }
  b.finish();
  return result;
}

PackResult pack_examples(const std::vector<ExampleIds>& examples, int32_t n) {
  if (n < 8) throw ContractError("pack_examples: n must be at least 8");
  PackResult result;
  SequenceBuilder b(n, result.sequences);

  for (size_t i = 0; i < examples.size(); ++i) {
    const auto& [input, target] = examples[i];
    const int32_t len = static_cast<int32_t>(input.size() + target.size());
    if (len > n - 2) {
      std::ostringstream msg;
      msg << "rejected: example " << i << " of length " << len << " exceeds "
          << (n - 2);
      result.notes.push_back(msg.str());
      continue;
    }
    if (b.room() < len) b.flush();
    ExamplePlacement place;
    place.seq = b.seq_index();
    place.input = {b.len(), b.len() + static_cast<int32_t>(input.size())};
    place.target = {place.input.end, place.input.end + static_cast<int32_t>(target.size())};
    b.push_all(input, 0, input.size());
    b.push_all(target, 0, target.size());
    // trailing delimiter, dropped only when the example fills the sequence
    if (b.room() >= 1) b.push(EOP);
    b.close_doc();
    result.placements.push_back(place);
  }
  b.finish();
  return result;
}

std::vector<Document> parse_corpus_text(std::string_view text) {
  std::vector<Document> docs;
  Document cur;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      if (!cur.empty()) {
        docs.push_back(std::move(cur));
        cur.clear();
      }
    } else {
      cur.emplace_back(line);
    }
    if (nl == text.size()) break;
    pos = nl + 1;
  }
  if (!cur.empty()) docs.push_back(std::move(cur));
  return docs;
}

std::vector<Document> load_corpus_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_corpus_text(buf.str());
}

int64_t non_pad_length(const PackedSequence& seq) {
  return std::count_if(seq.ids.begin(), seq.ids.end(),
                       [](TokenId id) { return id != PAD; });
}

void validate_packed(const PackedSequence& seq, int32_t n) {
  if (static_cast<int32_t>(seq.ids.size()) != n)
    throw ContractError("packed: sequence length differs from n");
  if (seq.ids.empty() || seq.ids[0] != BOS)
    throw ContractError("packed: sequence must start with BOS");
  for (TokenId id : seq.ids)
    if (id < 0 || id >= VOCAB_SIZE)
      throw ContractError("packed: id out of vocabulary");
  if (seq.doc_spans.empty()) throw ContractError("packed: no doc_spans");
  int32_t expect = 0;
  for (const Interval& s : seq.doc_spans) {
    if (s.begin != expect || s.end <= s.begin)
      throw ContractError("packed: doc_spans must partition [0,n)");
    expect = s.end;
  }
  if (expect != n) throw ContractError("packed: doc_spans must cover [0,n)");
  for (int32_t i = 0; i < n; ++i) {
    if (seq.ids[static_cast<size_t>(i)] != EOD) continue;
    const bool at_edge = std::any_of(
        seq.doc_spans.begin(), seq.doc_spans.end(),
        [i](const Interval& s) { return s.end == i + 1; });
    if (!at_edge) throw ContractError("packed: EOD not at a doc_span right edge");
  }
}

namespace {

void put_u16(std::ostream& out, uint16_t v) {
  const char bytes[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  out.write(bytes, 2);
}

void put_u32(std::ostream& out, uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 4);
}

uint16_t get_u16(std::istream& in) {
  unsigned char bytes[2];
  in.read(reinterpret_cast<char*>(bytes), 2);
  if (!in) throw FormatError("packed file: truncated u16");
  return static_cast<uint16_t>(bytes[0] | (bytes[1] << 8));
}

uint32_t get_u32(std::istream& in) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  if (!in) throw FormatError("packed file: truncated u32");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes[i]) << (8 * i);
  return v;
}

constexpr char kMagic[4] = {'S', 'C', 'L', 'M'};
constexpr uint32_t kPackedVersion = 1;

}  // namespace

void write_packed(std::ostream& out, const std::vector<PackedSequence>& seqs,
                  int32_t n) {
  out.write(kMagic, 4);
  put_u32(out, kPackedVersion);
  put_u32(out, static_cast<uint32_t>(n));
  for (const auto& seq : seqs) {
    validate_packed(seq, n);
    for (TokenId id : seq.ids) put_u16(out, static_cast<uint16_t>(id));
    put_u32(out, static_cast<uint32_t>(seq.doc_spans.size()));
    for (const Interval& s : seq.doc_spans) {
      put_u32(out, static_cast<uint32_t>(s.begin));
      put_u32(out, static_cast<uint32_t>(s.end));
    }
  }
  if (!out) throw IoError("packed file: write failed");
}

std::vector<PackedSequence> read_packed(std::istream& in, int32_t* n_out) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("packed file: bad magic");
  const uint32_t version = get_u32(in);
  if (version != kPackedVersion)
    throw FormatError("packed file: unsupported version " + std::to_string(version));
  const int32_t n = static_cast<int32_t>(get_u32(in));
  if (n < 8 || n > 65536) throw FormatError("packed file: implausible n");
  std::vector<PackedSequence> seqs;
  while (in.peek() != std::char_traits<char>::eof()) {
    PackedSequence seq;
    seq.ids.reserve(static_cast<size_t>(n));
    for (int32_t i = 0; i < n; ++i)
      seq.ids.push_back(static_cast<TokenId>(get_u16(in)));
    const uint32_t count = get_u32(in);
    if (count > static_cast<uint32_t>(n)) throw FormatError("packed file: bad doc_span count");
    for (uint32_t i = 0; i < count; ++i) {
      const int32_t b = static_cast<int32_t>(get_u32(in));
      const int32_t e = static_cast<int32_t>(get_u32(in));
      seq.doc_spans.push_back({b, e});
    }
    try {
      validate_packed(seq, n);
    } catch (const ContractError& e) {
      throw FormatError(std::string("packed file: ") + e.what());
    }
    seqs.push_back(std::move(seq));
  }
  if (n_out) *n_out = n;
  return seqs;
}

void save_packed_file(const std::string& path,
                      const std::vector<PackedSequence>& seqs, int32_t n) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for write: " + path);
  write_packed(out, seqs, n);
}

std::vector<PackedSequence> load_packed_file(const std::string& path, int32_t* n_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open packed file: " + path);
  return read_packed(in, n_out);
}

}  // namespace sclm
