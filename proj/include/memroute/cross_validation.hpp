#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "memroute/benchmark.hpp"
#include "memroute/error.hpp"
#include "memroute/query_type.hpp"
#include "memroute/rng.hpp"
#include "memroute/router.hpp"
#include "memroute/statistics.hpp"

namespace memroute {

struct Fold {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

struct StratumItem {
  std::string id;
  QueryType qtype = QueryType::kKnowledgeUpdate;
};

/// Stratified k-fold split over retrieval instances (abstention is skipped).
///
/// Within each type, ids are sorted, shuffled with the seeded generator and
/// dealt round-robin. The deal continues across types (in kRetrievalTypes
/// order) instead of restarting at fold 0, so total fold sizes also differ by
/// at most one.
inline std::vector<Fold> stratified_kfold(std::span<const StratumItem> items, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw UsageError("stratified_kfold: need at least 2 folds");
  std::array<std::vector<std::string>, kRetrievalTypes.size()> by_type;
  std::vector<std::string> input_order;
  for (const auto& it : items) {
    if (!is_retrieval_type(it.qtype)) continue;
    by_type[retrieval_index(it.qtype)].push_back(it.id);
    input_order.push_back(it.id);
  }
  for (auto t : kRetrievalTypes) {
    const auto n = by_type[retrieval_index(t)].size();
    if (n > 0 && n < folds) {
      throw DataError("stratified_kfold: type '" + std::string(to_string(t)) + "' has " + std::to_string(n) +
                      " instance(s), fewer than " + std::to_string(folds) + " folds");
    }
  }

  Rng rng(seed);
  std::map<std::string, std::size_t> assignment;
  std::vector<Fold> out(folds);
  std::size_t deal = 0;
  for (auto t : kRetrievalTypes) {
    auto& ids = by_type[retrieval_index(t)];
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
      throw DataError("stratified_kfold: duplicate instance id");
    }
    rng.shuffle(std::span<std::string>(ids));
    for (const auto& id : ids) {
      const auto f = deal++ % folds;
      assignment[id] = f;
      out[f].test_ids.push_back(id);
    }
  }
  for (const auto& id : input_order) {
    const auto f = assignment.at(id);
    for (std::size_t g = 0; g < folds; ++g) {
      if (g != f) out[g].train_ids.push_back(id);
    }
  }
  return out;
}

inline std::vector<Fold> stratified_kfold(std::span<const BenchmarkInstance> instances, std::size_t folds,
                                          std::uint64_t seed) {
  std::vector<StratumItem> items;
  items.reserve(instances.size());
  for (const auto& inst : instances) items.push_back({inst.id, inst.qtype});
  return stratified_kfold(items, folds, seed);
}

struct RouteStability {
  Pipeline modal = Pipeline::kBaselineFts;
  std::size_t agreeing = 0;  // folds whose derived route equals `modal`
  std::size_t folds = 0;
};

struct CvReport {
  std::vector<RouteTable> fold_tables;
  std::vector<double> fold_scores;  // mean held-out score per fold
  double mean = 0.0;
  double stddev = 0.0;  // sample (n - 1)
  RouteTable full_table;
  double full_data_score = 0.0;  // full_table applied to every instance it was derived from
  std::map<QueryType, RouteStability> stability;

  double gap() const { return full_data_score - mean; }
};

/// Mean over `items` of the score each instance earns under `table`.
inline double routed_mean(std::span<const ScoredInstance* const> items, const RouteTable& table) {
  if (items.empty()) return 0.0;
  double sum = 0.0;
  for (const auto* inst : items) {
    const auto p = table[inst->qtype];
    const auto s = inst->score(p);
    if (!s) throw DataError("instance '" + inst->id + "' has no score for " + std::string(to_string(p)));
    sum += *s;
  }
  return sum / static_cast<double>(items.size());
}

/// Derives a route table on each training split and scores the held-out
/// split with it. Abstention instances are ignored.
inline CvReport cross_validate(std::span<const ScoredInstance> scored, std::span<const Pipeline> candidates,
                               std::size_t folds, std::uint64_t seed) {
  std::vector<StratumItem> items;
  std::map<std::string, const ScoredInstance*> by_id;
  std::vector<ScoredInstance> retrieval;
  for (const auto& s : scored) {
    if (!is_retrieval_type(s.qtype)) continue;
    items.push_back({s.id, s.qtype});
    if (!by_id.emplace(s.id, &s).second) throw DataError("cross_validate: duplicate instance '" + s.id + "'");
    retrieval.push_back(s);
  }
  const auto splits = stratified_kfold(items, folds, seed);

  CvReport report;
  for (std::size_t f = 0; f < splits.size(); ++f) {
    std::vector<ScoredInstance> train;
    train.reserve(splits[f].train_ids.size());
    for (const auto& id : splits[f].train_ids) train.push_back(*by_id.at(id));
    auto table = derive_route_table(train, candidates, "derived-fold-" + std::to_string(f + 1));
    std::vector<const ScoredInstance*> test;
    for (const auto& id : splits[f].test_ids) test.push_back(by_id.at(id));
    report.fold_scores.push_back(routed_mean(test, table));
    report.fold_tables.push_back(std::move(table));
  }
  report.mean = memroute::mean(report.fold_scores);
  report.stddev = sample_stddev(report.fold_scores);

  report.full_table = derive_route_table(retrieval, candidates, "derived-full");
  std::vector<const ScoredInstance*> all;
  for (const auto& s : retrieval) all.push_back(&s);
  report.full_data_score = routed_mean(all, report.full_table);

  for (auto t : kRetrievalTypes) {
    std::array<std::size_t, kAllPipelines.size()> counts{};
    for (const auto& table : report.fold_tables) ++counts[static_cast<std::size_t>(table[t])];
    RouteStability st;
    st.folds = report.fold_tables.size();
    for (auto p : kAllPipelines) {  // cost order: ties keep the cheaper route
      if (counts[static_cast<std::size_t>(p)] > st.agreeing) {
        st.agreeing = counts[static_cast<std::size_t>(p)];
        st.modal = p;
      }
    }
    report.stability[t] = st;
  }
  return report;
}

}  // namespace memroute
