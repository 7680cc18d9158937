#pragma once

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "memroute/error.hpp"
#include "memroute/ranked_list.hpp"
#include "memroute/tokenizer.hpp"

namespace memroute {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;

  void validate() const {
    if (!(k1 >= 0.0) || !std::isfinite(k1)) throw UsageError("bm25: k1 must be >= 0");
    if (!(b >= 0.0 && b <= 1.0)) throw UsageError("bm25: b must lie in [0, 1]");
  }
};

/// Nonnegative BM25 idf: ln(1 + (N - df + 0.5) / (df + 0.5)).
inline double bm25_idf(std::size_t doc_count, std::size_t doc_freq) {
  const double n = static_cast<double>(doc_count);
  const double df = static_cast<double>(doc_freq);
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

inline double bm25_term_weight(double idf, double tf, double doc_length, double avg_doc_length,
                               const Bm25Params& p) {
  const double norm = p.k1 * (1.0 - p.b + p.b * doc_length / avg_doc_length);
  return idf * tf * (p.k1 + 1.0) / (tf + norm);
}

/// Inverted index with BM25 ranking.
///
/// Single writer while building; once built every const member is safe for
/// concurrent use. Documents are append-only.
class LexicalIndex {
 public:
  struct Posting {
    std::uint32_t doc = 0;  // dense document number
    std::uint32_t tf = 0;
    friend bool operator==(const Posting&, const Posting&) = default;
  };

  /// Indexes `text` under `doc_id`. Re-adding an id is a caller bug.
  void add(const std::string& doc_id, std::string_view text) {
    if (doc_id.empty() || doc_id.find_first_of("\t\n\r") != std::string::npos) {
      throw UsageError("lexical index: invalid doc id '" + doc_id + "'");
    }
    if (lookup_.contains(doc_id)) {
      throw UsageError("lexical index: duplicate doc id '" + doc_id + "'");
    }
    const auto doc = static_cast<std::uint32_t>(ids_.size());
    const auto tokens = tokenize(text);
    std::map<std::string_view, std::uint32_t> counts;
    for (const auto& t : tokens) ++counts[t];
    for (const auto& [term, tf] : counts) {
      postings_[std::string(term)].push_back({doc, tf});
    }
    ids_.push_back(doc_id);
    lookup_.emplace(doc_id, doc);
    lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
    total_length_ += tokens.size();
  }

  std::size_t doc_count() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  const std::vector<std::string>& doc_ids() const noexcept { return ids_; }
  std::uint64_t total_length() const noexcept { return total_length_; }

  double avg_doc_length() const noexcept {
    return ids_.empty() ? 0.0 : static_cast<double>(total_length_) / static_cast<double>(ids_.size());
  }

  std::optional<std::uint32_t> doc_length(const std::string& doc_id) const {
    const auto it = lookup_.find(doc_id);
    if (it == lookup_.end()) return std::nullopt;
    return lengths_[it->second];
  }

  std::uint32_t term_frequency(const std::string& term, const std::string& doc_id) const {
    const auto d = lookup_.find(doc_id);
    const auto p = postings_.find(term);
    if (d == lookup_.end() || p == postings_.end()) return 0;
    for (const auto& posting : p->second) {
      if (posting.doc == d->second) return posting.tf;
    }
    return 0;
  }

  std::size_t document_frequency(const std::string& term) const {
    const auto p = postings_.find(term);
    return p == postings_.end() ? 0 : p->second.size();
  }

  bool contains_term(const std::string& term) const { return postings_.contains(term); }

  /// Terms in lexicographic order.
  std::vector<std::string> terms() const {
    std::vector<std::string> out;
    out.reserve(postings_.size());
    for (const auto& [term, _] : postings_) out.push_back(term);
    return out;
  }

  /// Top-k documents by BM25. Each distinct query token contributes once;
  /// zero-score documents are dropped; ties go to the smaller doc id.
  RankedList search(std::string_view query, std::size_t k, const Bm25Params& params = {}) const {
    if (k == 0) throw UsageError("bm25_search: k must be >= 1");
    params.validate();
    RankedList result;
    result.source = "bm25";
    if (ids_.empty()) return result;

    const auto query_terms = distinct_tokens(query);
    if (query_terms.empty()) return result;

    std::vector<double> scores(ids_.size(), 0.0);
    std::vector<bool> touched(ids_.size(), false);
    const double avgdl = avg_doc_length();
    for (const auto& term : query_terms) {
      const auto p = postings_.find(term);
      if (p == postings_.end()) continue;
      const double idf = bm25_idf(ids_.size(), p->second.size());
      for (const auto& posting : p->second) {
        scores[posting.doc] += bm25_term_weight(idf, posting.tf, lengths_[posting.doc], avgdl, params);
        touched[posting.doc] = true;
      }
    }

    std::vector<Hit> hits;
    for (std::size_t d = 0; d < ids_.size(); ++d) {
      if (touched[d] && scores[d] > 0.0) hits.push_back({ids_[d], scores[d]});
    }
    result.items = top_k(std::move(hits), k);
    return result;
  }

  /// Distinct tokens of `text` in first-occurrence order.
  static std::vector<std::string> distinct_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (auto& t : tokenize(text)) {
      if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(std::move(t));
    }
    return out;
  }

  // Line-oriented snapshot, see docs/formats.md.
  static constexpr std::string_view kMagic = "memroute-lexical";
  static constexpr int kFormatVersion = 1;

  void save(std::ostream& out) const {
    out << kMagic << ' ' << kFormatVersion << '\n';
    out << "docs " << ids_.size() << ' ' << total_length_ << '\n';
    for (std::size_t d = 0; d < ids_.size(); ++d) out << ids_[d] << '\t' << lengths_[d] << '\n';
    out << "terms " << postings_.size() << '\n';
    for (const auto& [term, list] : postings_) {
      out << term << '\t' << list.size() << '\t';
      for (std::size_t i = 0; i < list.size(); ++i) {
        if (i) out << ',';
        out << list[i].doc << ':' << list[i].tf;
      }
      out << '\n';
    }
    out << "end\n";
  }

  static LexicalIndex load(std::istream& in) {
    LexicalIndex idx;
    std::string line;
    auto fail = [](const std::string& why) -> CorruptStoreError {
      return CorruptStoreError("lexical index snapshot: " + why);
    };
    if (!std::getline(in, line)) throw fail("missing header");
    {
      std::istringstream hs(line);
      std::string magic;
      int version = 0;
      hs >> magic >> version;
      if (magic != kMagic) throw fail("bad magic");
      if (version != kFormatVersion) throw fail("unsupported version " + std::to_string(version));
    }
    std::size_t ndocs = 0;
    std::uint64_t declared_total = 0;
    if (!std::getline(in, line) || std::sscanf(line.c_str(), "docs %zu %" SCNu64, &ndocs, &declared_total) != 2) {
      throw fail("bad docs line");
    }
    for (std::size_t d = 0; d < ndocs; ++d) {
      if (!std::getline(in, line)) throw fail("truncated doc table");
      const auto tab = line.rfind('\t');
      if (tab == std::string::npos || tab == 0) throw fail("bad doc row");
      std::string id = line.substr(0, tab);
      const auto length = parse_u32(line.substr(tab + 1), fail);
      if (!idx.lookup_.emplace(id, static_cast<std::uint32_t>(d)).second) throw fail("duplicate doc id");
      idx.ids_.push_back(std::move(id));
      idx.lengths_.push_back(length);
      idx.total_length_ += length;
    }
    if (idx.total_length_ != declared_total) throw fail("doc length total mismatch");
    std::size_t nterms = 0;
    if (!std::getline(in, line) || std::sscanf(line.c_str(), "terms %zu", &nterms) != 1) {
      throw fail("bad terms line");
    }
    for (std::size_t t = 0; t < nterms; ++t) {
      if (!std::getline(in, line)) throw fail("truncated postings");
      const auto tab1 = line.find('\t');
      const auto tab2 = tab1 == std::string::npos ? tab1 : line.find('\t', tab1 + 1);
      if (tab2 == std::string::npos) throw fail("bad posting row");
      const std::string term = line.substr(0, tab1);
      const auto df = parse_u32(line.substr(tab1 + 1, tab2 - tab1 - 1), fail);
      std::vector<Posting> list;
      list.reserve(df);
      std::string_view rest = std::string_view(line).substr(tab2 + 1);
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        const auto item = rest.substr(0, comma);
        const auto colon = item.find(':');
        if (colon == std::string_view::npos) throw fail("bad posting entry");
        const auto doc = parse_u32(std::string(item.substr(0, colon)), fail);
        const auto tf = parse_u32(std::string(item.substr(colon + 1)), fail);
        if (doc >= ndocs || tf == 0) throw fail("posting out of range");
        list.push_back({doc, tf});
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      }
      if (list.size() != df) throw fail("document frequency mismatch for '" + term + "'");
      if (!idx.postings_.emplace(term, std::move(list)).second) throw fail("duplicate term");
    }
    if (!std::getline(in, line) || line != "end") throw fail("missing end marker");
    return idx;
  }

  friend bool operator==(const LexicalIndex& a, const LexicalIndex& b) {
    return a.ids_ == b.ids_ && a.lengths_ == b.lengths_ && a.postings_ == b.postings_;
  }

 private:
  template <typename Fail>
  static std::uint32_t parse_u32(const std::string& s, Fail&& fail) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos || s.size() > 10) {
      throw fail("bad integer '" + s + "'");
    }
    const auto v = std::stoull(s);
    if (v > UINT32_MAX) throw fail("integer out of range");
    return static_cast<std::uint32_t>(v);
  }

  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::uint32_t> lookup_;
  std::vector<std::uint32_t> lengths_;
  std::uint64_t total_length_ = 0;
  std::map<std::string, std::vector<Posting>> postings_;
};

/// Free-function form of LexicalIndex::search.
inline RankedList bm25_search(const LexicalIndex& index, std::string_view query, std::size_t k,
                              const Bm25Params& params = {}) {
  return index.search(query, k, params);
}

}  // namespace memroute
