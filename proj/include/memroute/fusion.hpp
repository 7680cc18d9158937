#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "memroute/error.hpp"
#include "memroute/ranked_list.hpp"

namespace memroute {

inline constexpr std::size_t kRrfConstant = 60;

/// Candidate depth requested from each retriever before fusing for a final
/// cut of `k`.
inline std::size_t fusion_depth(std::size_t k) { return std::max<std::size_t>(50, 10 * k); }

/// Reciprocal Rank Fusion: score(d) = sum over lists containing d of
/// 1 / (k_const + rank). Input scores are ignored. Output is ordered by fused
/// score, ties by ascending doc id.
inline RankedList rrf_fuse(std::span<const RankedList> lists, std::size_t k_const = kRrfConstant) {
  if (lists.empty()) throw UsageError("rrf_fuse: at least one input list is required");
  if (k_const == 0) throw UsageError("rrf_fuse: k_const must be >= 1");

  std::unordered_map<std::string, double> fused;
  std::vector<std::string> order;
  for (const auto& list : lists) {
    std::unordered_set<std::string_view> seen;
    for (std::size_t i = 0; i < list.items.size(); ++i) {
      if (!seen.insert(list.items[i].doc_id).second) {
        throw UsageError("rrf_fuse: doc id '" + list.items[i].doc_id + "' repeated within list '" +
                         list.source + "'");
      }
      const double contribution = 1.0 / static_cast<double>(k_const + i + 1);
      auto [it, inserted] = fused.try_emplace(list.items[i].doc_id, 0.0);
      if (inserted) order.push_back(list.items[i].doc_id);
      it->second += contribution;
    }
  }

  std::vector<Hit> hits;
  hits.reserve(order.size());
  for (auto& id : order) hits.push_back({id, fused[id]});
  std::sort(hits.begin(), hits.end(), ranks_before);

  RankedList out;
  out.source = "rrf";
  out.items = std::move(hits);
  return out;
}

inline RankedList rrf_fuse(std::initializer_list<RankedList> lists, std::size_t k_const = kRrfConstant) {
  return rrf_fuse(std::span<const RankedList>(lists.begin(), lists.size()), k_const);
}

}  // namespace memroute
