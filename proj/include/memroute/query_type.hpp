#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "memroute/error.hpp"

namespace memroute {

enum class QueryType {
  kKnowledgeUpdate,
  kMultiSession,
  kSingleSessionAssistant,
  kSingleSessionPreference,
  kSingleSessionUser,
  kTemporalReasoning,
  kAbstention,
};

/// The six types that carry ground truth and get routed.
inline constexpr std::array<QueryType, 6> kRetrievalTypes = {
    QueryType::kKnowledgeUpdate,         QueryType::kMultiSession,
    QueryType::kSingleSessionAssistant,  QueryType::kSingleSessionPreference,
    QueryType::kSingleSessionUser,       QueryType::kTemporalReasoning,
};

inline constexpr bool is_retrieval_type(QueryType t) noexcept { return t != QueryType::kAbstention; }

/// Position of a retrieval type in kRetrievalTypes.
inline std::size_t retrieval_index(QueryType t) {
  if (!is_retrieval_type(t)) throw UsageError("abstention is not a retrieval type");
  return static_cast<std::size_t>(t);
}

inline std::string_view to_string(QueryType t) {
  switch (t) {
    case QueryType::kKnowledgeUpdate: return "knowledge-update";
    case QueryType::kMultiSession: return "multi-session";
    case QueryType::kSingleSessionAssistant: return "single-session-assistant";
    case QueryType::kSingleSessionPreference: return "single-session-preference";
    case QueryType::kSingleSessionUser: return "single-session-user";
    case QueryType::kTemporalReasoning: return "temporal-reasoning";
    case QueryType::kAbstention: return "abstention";
  }
  return "?";
}

inline std::optional<QueryType> parse_query_type(std::string_view s) {
  for (auto t : kRetrievalTypes) {
    if (to_string(t) == s) return t;
  }
  if (s == "abstention") return QueryType::kAbstention;
  return std::nullopt;
}

// Retrieval strategies, declared in cost order (cheapest first).
enum class Pipeline {
  kBaselineFts,
  kEnrichedFts,
  kEmbeddings,
  kHybrid,
  kEnrichedHybrid,
};

inline constexpr std::array<Pipeline, 5> kAllPipelines = {
    Pipeline::kBaselineFts, Pipeline::kEnrichedFts, Pipeline::kEmbeddings, Pipeline::kHybrid,
    Pipeline::kEnrichedHybrid,
};

inline constexpr std::size_t cost_rank(Pipeline p) noexcept { return static_cast<std::size_t>(p); }

inline std::string_view to_string(Pipeline p) {
  switch (p) {
    case Pipeline::kBaselineFts: return "baseline_fts";
    case Pipeline::kEnrichedFts: return "enriched_fts";
    case Pipeline::kEmbeddings: return "embeddings";
    case Pipeline::kHybrid: return "hybrid";
    case Pipeline::kEnrichedHybrid: return "enriched_hybrid";
  }
  return "?";
}

inline std::optional<Pipeline> parse_pipeline(std::string_view s) {
  for (auto p : kAllPipelines) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

inline constexpr bool uses_enrichment(Pipeline p) noexcept {
  return p == Pipeline::kEnrichedFts || p == Pipeline::kEnrichedHybrid;
}

inline constexpr bool uses_embeddings(Pipeline p) noexcept {
  return p == Pipeline::kEmbeddings || p == Pipeline::kHybrid || p == Pipeline::kEnrichedHybrid;
}

enum class RouteFamily { kFtsBased, kEmbeddingBased, kHybridBased };

inline constexpr RouteFamily family_of(Pipeline p) noexcept {
  switch (p) {
    case Pipeline::kBaselineFts:
    case Pipeline::kEnrichedFts: return RouteFamily::kFtsBased;
    case Pipeline::kEmbeddings: return RouteFamily::kEmbeddingBased;
    case Pipeline::kHybrid:
    case Pipeline::kEnrichedHybrid: return RouteFamily::kHybridBased;
  }
  return RouteFamily::kFtsBased;
}

inline std::string_view to_string(RouteFamily f) {
  switch (f) {
    case RouteFamily::kFtsBased: return "fts-based";
    case RouteFamily::kEmbeddingBased: return "embedding-based";
    case RouteFamily::kHybridBased: return "hybrid-based";
  }
  return "?";
}

}  // namespace memroute
