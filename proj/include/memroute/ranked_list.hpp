#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace memroute {

struct Hit {
  std::string doc_id;
  double score = 0.0;

  friend bool operator==(const Hit&, const Hit&) = default;
};

/// Ordered retrieval result. Positions are 1-based ranks; doc ids are unique
/// and scores are non-increasing.
struct RankedList {
  std::vector<Hit> items;
  std::string source;

  std::size_t size() const noexcept { return items.size(); }
  bool empty() const noexcept { return items.empty(); }

  std::vector<std::string> ids() const {
    std::vector<std::string> out;
    out.reserve(items.size());
    for (const auto& h : items) out.push_back(h.doc_id);
    return out;
  }

  void truncate(std::size_t k) {
    if (items.size() > k) items.resize(k);
  }

  friend bool operator==(const RankedList&, const RankedList&) = default;
};

/// Score descending, then doc id ascending. The single ordering used by every
/// retriever so results reproduce across runs and platforms.
inline bool ranks_before(const Hit& a, const Hit& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.doc_id < b.doc_id;
}

/// Sorts `hits` into rank order and keeps the best `k`.
inline std::vector<Hit> top_k(std::vector<Hit> hits, std::size_t k) {
  if (hits.size() > k) {
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(),
                      ranks_before);
    hits.resize(k);
  } else {
    std::sort(hits.begin(), hits.end(), ranks_before);
  }
  return hits;
}

}  // namespace memroute
