#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "memroute/benchmark.hpp"
#include "memroute/error.hpp"
#include "memroute/metrics.hpp"
#include "memroute/query_type.hpp"
#include "memroute/ranked_list.hpp"

namespace memroute {

struct InstanceScore {
  std::string id;
  QueryType qtype = QueryType::kKnowledgeUpdate;
  double recall = 0.0;
  double ndcg = 0.0;
};

struct TypeSummary {
  std::size_t n = 0;
  double recall = 0.0;
  double ndcg = 0.0;
};

struct EvalReport {
  std::size_t k = 5;
  double macro_recall = 0.0;  // over every instance, abstention included
  double macro_ndcg = 0.0;
  std::map<QueryType, TypeSummary> per_type;  // retrieval types only
  std::vector<InstanceScore> per_instance;

  std::size_t retrieval_count() const {
    std::size_t n = 0;
    for (const auto& [_, s] : per_type) n += s.n;
    return n;
  }

  std::vector<double> recall_scores() const {
    std::vector<double> out;
    for (const auto& s : per_instance) out.push_back(s.recall);
    return out;
  }
  std::vector<double> ndcg_scores() const {
    std::vector<double> out;
    for (const auto& s : per_instance) out.push_back(s.ndcg);
    return out;
  }
};

using RunResults = std::map<std::string, RankedList>;

/// Scores every instance in input order. A missing result is an error that
/// lists every missing id.
inline EvalReport evaluate_run(std::span<const BenchmarkInstance> instances, const RunResults& results,
                               std::size_t k = 5) {
  if (k == 0) throw UsageError("evaluate_run: k must be >= 1");
  std::vector<std::string> missing;
  for (const auto& inst : instances) {
    if (!results.contains(inst.id)) missing.push_back(inst.id);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
    throw DataError("evaluate_run: no result for " + std::to_string(missing.size()) + " instance(s): " + list);
  }

  EvalReport report;
  report.k = k;
  std::map<QueryType, std::pair<double, double>> sums;
  double recall_sum = 0.0, ndcg_sum = 0.0;
  for (const auto& inst : instances) {
    const auto& ranked = results.at(inst.id);
    InstanceScore s{inst.id, inst.qtype, recall_all_at_k(ranked, inst.gold, k), ndcg_at_k(ranked, inst.gold, k)};
    recall_sum += s.recall;
    ndcg_sum += s.ndcg;
    if (is_retrieval_type(inst.qtype)) {
      auto& t = report.per_type[inst.qtype];
      ++t.n;
      sums[inst.qtype].first += s.recall;
      sums[inst.qtype].second += s.ndcg;
    }
    report.per_instance.push_back(std::move(s));
  }
  if (!instances.empty()) {
    report.macro_recall = recall_sum / static_cast<double>(instances.size());
    report.macro_ndcg = ndcg_sum / static_cast<double>(instances.size());
  }
  for (auto& [type, summary] : report.per_type) {
    summary.recall = sums[type].first / static_cast<double>(summary.n);
    summary.ndcg = sums[type].second / static_cast<double>(summary.n);
  }
  return report;
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j;
  j["k"] = r.k;
  j["instances"] = r.per_instance.size();
  j["macro"] = {{"recall_all", r.macro_recall}, {"ndcg", r.macro_ndcg}};
  auto types = nlohmann::json::object();
  for (const auto& [t, s] : r.per_type) {
    types[std::string(to_string(t))] = {{"n", s.n}, {"recall_all", s.recall}, {"ndcg", s.ndcg}};
  }
  j["per_type"] = types;
  auto rows = nlohmann::json::array();
  for (const auto& s : r.per_instance) {
    rows.push_back({{"id", s.id}, {"qtype", std::string(to_string(s.qtype))}, {"recall_all", s.recall},
                    {"ndcg", s.ndcg}});
  }
  j["per_instance"] = rows;
  return j;
}

/// Fixed-width table for terminals.
inline std::string format_report_table(const EvalReport& r) {
  std::string out;
  char buf[160];
  const auto ra = "Ra@" + std::to_string(r.k), nd = "NDCG@" + std::to_string(r.k);
  std::snprintf(buf, sizeof buf, "%-28s %5s %8s %8s\n", "query type", "n", ra.c_str(), nd.c_str());
  out += buf;
  for (auto t : kRetrievalTypes) {
    const auto it = r.per_type.find(t);
    if (it == r.per_type.end()) continue;
    std::snprintf(buf, sizeof buf, "%-28s %5zu %8.3f %8.3f\n", std::string(to_string(t)).c_str(), it->second.n,
                  it->second.recall, it->second.ndcg);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%-28s %5zu %8.3f %8.3f   (k=%zu, abstention counted as 0)\n", "macro (all)",
                r.per_instance.size(), r.macro_recall, r.macro_ndcg, r.k);
  out += buf;
  return out;
}

/// One JSON object per line: {"instance_id", "pipeline", "results": [{"id", "score"}]}.
struct RunRecord {
  std::string instance_id;
  std::string pipeline;
  RankedList ranked;
};

inline nlohmann::json to_json(const RunRecord& rec) {
  auto items = nlohmann::json::array();
  for (const auto& h : rec.ranked.items) items.push_back({{"id", h.doc_id}, {"score", h.score}});
  return {{"instance_id", rec.instance_id}, {"pipeline", rec.pipeline}, {"results", items}};
}

inline void write_run_file(const std::string& path, std::span<const RunRecord> records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write run file '" + path + "'");
  for (const auto& r : records) out << to_json(r).dump() << '\n';
  if (!out) throw IoError("write failed for run file '" + path + "'");
}

inline std::vector<RunRecord> read_run_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open run file '" + path + "'");
  std::vector<RunRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      RunRecord r;
      r.instance_id = j.at("instance_id").get<std::string>();
      r.pipeline = j.value("pipeline", "");
      r.ranked.source = r.pipeline;
      for (const auto& item : j.at("results")) {
        r.ranked.items.push_back({item.at("id").get<std::string>(), item.at("score").get<double>()});
      }
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, line_no, e.what());
    }
  }
  return out;
}

inline RunResults to_results(std::span<const RunRecord> records) {
  RunResults out;
  for (const auto& r : records) {
    if (!out.emplace(r.instance_id, r.ranked).second) {
      throw DataError("run contains instance '" + r.instance_id + "' twice");
    }
  }
  return out;
}

}  // namespace memroute
