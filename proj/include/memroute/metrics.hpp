#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <string>

#include "memroute/error.hpp"
#include "memroute/ranked_list.hpp"

namespace memroute {

using GoldSet = std::set<std::string>;

/// All-or-nothing recall: 1 when every gold id is among the top k, else 0.
/// An empty gold set (abstention) scores 0.
inline double recall_all_at_k(const RankedList& retrieved, const GoldSet& gold, std::size_t k) {
  if (k == 0) throw UsageError("recall_all_at_k: k must be >= 1");
  if (gold.empty()) return 0.0;
  const std::size_t depth = std::min(k, retrieved.items.size());
  std::size_t found = 0;
  for (std::size_t i = 0; i < depth; ++i) {
    if (gold.contains(retrieved.items[i].doc_id)) ++found;
  }
  return found == gold.size() ? 1.0 : 0.0;
}

/// NDCG@k with binary relevance and a 1/log2(rank + 1) discount; the ideal
/// DCG places min(|gold|, k) relevant items at the top. Empty gold scores 0.
inline double ndcg_at_k(const RankedList& retrieved, const GoldSet& gold, std::size_t k) {
  if (k == 0) throw UsageError("ndcg_at_k: k must be >= 1");
  if (gold.empty()) return 0.0;
  const std::size_t depth = std::min(k, retrieved.items.size());
  double dcg = 0.0;
  for (std::size_t i = 0; i < depth; ++i) {
    if (gold.contains(retrieved.items[i].doc_id)) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  double idcg = 0.0;
  const std::size_t ideal = std::min(gold.size(), k);
  for (std::size_t i = 0; i < ideal; ++i) idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return dcg / idcg;
}

}  // namespace memroute
