#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "memroute/enrichment.hpp"
#include "memroute/error.hpp"
#include "memroute/query_type.hpp"

namespace memroute {

/// Total mapping from the six retrieval types to a pipeline.
struct RouteTable {
  std::array<Pipeline, kRetrievalTypes.size()> routes{};
  std::string provenance = "shipped";

  Pipeline& operator[](QueryType t) { return routes[retrieval_index(t)]; }
  Pipeline operator[](QueryType t) const { return routes[retrieval_index(t)]; }

  bool same_routes(const RouteTable& other) const { return routes == other.routes; }
};

/// The default table: lexical for verbatim recall, embeddings for paraphrase,
/// enrichment where vocabulary gaps dominate, fusion for aggregation and time.
inline RouteTable shipped_route_table() {
  RouteTable t;
  t[QueryType::kKnowledgeUpdate] = Pipeline::kEnrichedFts;
  t[QueryType::kMultiSession] = Pipeline::kEnrichedHybrid;
  t[QueryType::kSingleSessionAssistant] = Pipeline::kEmbeddings;
  t[QueryType::kSingleSessionPreference] = Pipeline::kEmbeddings;
  t[QueryType::kSingleSessionUser] = Pipeline::kBaselineFts;
  t[QueryType::kTemporalReasoning] = Pipeline::kHybrid;
  t.provenance = "shipped";
  return t;
}

inline Pipeline resolve_route(QueryType qtype, const RouteTable& table) {
  if (!is_retrieval_type(qtype)) {
    throw UsageError(
        "resolve_route: abstention has no route; classify the query's surface type first");
  }
  return table[qtype];
}

/// Text form: one "type = pipeline" line per type plus an optional
/// "provenance = label" line; "#" starts a comment.
inline RouteTable parse_route_table(std::istream& in, const std::string& source = "route table") {
  RouteTable table;
  std::array<bool, kRetrievalTypes.size()> seen{};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = detail::trim(std::string_view(raw).substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected 'key = value'");
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (key == "provenance") {
      if (value.empty()) throw ParseError(source, line_no, "empty provenance");
      table.provenance = value;
      continue;
    }
    const auto qtype = parse_query_type(key);
    if (!qtype || !is_retrieval_type(*qtype)) {
      throw ParseError(source, line_no, "unknown retrieval type '" + key + "'");
    }
    const auto pipeline = parse_pipeline(value);
    if (!pipeline) throw ParseError(source, line_no, "unknown pipeline '" + value + "'");
    auto& flag = seen[retrieval_index(*qtype)];
    if (flag) throw ParseError(source, line_no, "duplicate route for '" + key + "'");
    flag = true;
    table[*qtype] = *pipeline;
  }
  for (auto t : kRetrievalTypes) {
    if (!seen[retrieval_index(t)]) {
      throw ParseError(source, line_no, "route table has no entry for '" + std::string(to_string(t)) + "'");
    }
  }
  return table;
}

inline RouteTable load_route_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open route table '" + path + "'");
  return parse_route_table(in, path);
}

inline void write_route_table(std::ostream& out, const RouteTable& table) {
  out << "provenance = " << table.provenance << '\n';
  for (auto t : kRetrievalTypes) out << to_string(t) << " = " << to_string(table[t]) << '\n';
}

/// One training observation for route derivation: a query type and the score
/// each candidate pipeline achieved on that instance.
struct ScoredInstance {
  std::string id;
  QueryType qtype = QueryType::kKnowledgeUpdate;
  std::array<std::optional<double>, kAllPipelines.size()> scores{};

  std::optional<double> score(Pipeline p) const { return scores[static_cast<std::size_t>(p)]; }
  void set(Pipeline p, double v) { scores[static_cast<std::size_t>(p)] = v; }
};

/// Per type, the candidate pipeline with the highest mean score over the
/// training instances of that type. Ties go to the cheaper pipeline.
inline RouteTable derive_route_table(std::span<const ScoredInstance> train,
                                     std::span<const Pipeline> candidates,
                                     std::string provenance = "derived") {
  if (candidates.empty()) throw UsageError("derive_route_table: no candidate pipelines");
  std::vector<Pipeline> ordered(candidates.begin(), candidates.end());
  std::sort(ordered.begin(), ordered.end(), [](Pipeline a, Pipeline b) { return cost_rank(a) < cost_rank(b); });
  ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

  std::array<std::array<double, kAllPipelines.size()>, kRetrievalTypes.size()> sums{};
  std::array<std::size_t, kRetrievalTypes.size()> counts{};
  for (const auto& inst : train) {
    if (!is_retrieval_type(inst.qtype)) continue;
    const auto ti = retrieval_index(inst.qtype);
    for (auto p : ordered) {
      const auto s = inst.score(p);
      if (!s) {
        throw DataError("derive_route_table: instance '" + inst.id + "' has no score for pipeline " +
                        std::string(to_string(p)));
      }
      sums[ti][static_cast<std::size_t>(p)] += *s;
    }
    ++counts[ti];
  }

  RouteTable table;
  table.provenance = std::move(provenance);
  for (auto t : kRetrievalTypes) {
    const auto ti = retrieval_index(t);
    if (counts[ti] == 0) {
      throw DataError("derive_route_table: no training instances of type '" + std::string(to_string(t)) +
                      "' (stratification bug upstream)");
    }
    Pipeline best = ordered.front();
    double best_sum = sums[ti][static_cast<std::size_t>(best)];
    // Sums share a denominator within a type, so comparing sums compares means.
    for (auto p : ordered) {
      const double s = sums[ti][static_cast<std::size_t>(p)];
      if (s > best_sum) {
        best = p;
        best_sum = s;
      }
    }
    table[t] = best;
  }
  return table;
}

}  // namespace memroute
