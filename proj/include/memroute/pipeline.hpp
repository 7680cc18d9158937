#pragma once

#include <array>
#include <string>
#include <string_view>

#include "memroute/error.hpp"
#include "memroute/fusion.hpp"
#include "memroute/lexical_index.hpp"
#include "memroute/query_type.hpp"
#include "memroute/ranked_list.hpp"
#include "memroute/store.hpp"
#include "memroute/vector_index.hpp"

namespace memroute {

struct RetrievalOptions {
  Bm25Params bm25;
  std::size_t rrf_constant = kRrfConstant;
  std::size_t min_fusion_depth = 50;
  std::size_t fusion_depth_multiplier = 10;

  std::size_t depth_for(std::size_t k) const {
    return std::max(min_fusion_depth, fusion_depth_multiplier * k);
  }
};

/// Throws ConfigError naming whatever `p` needs that `store`/`provider` lack.
inline void check_pipeline_ready(Pipeline p, const Store& store, const EmbeddingProvider* provider) {
  const std::string name(to_string(p));
  if (!uses_embeddings(p)) return;
  if (!store.has_vectors()) {
    throw ConfigError("pipeline " + name + " needs a vector index, but store '" + store.manifest.instance_id +
                      "' was built lexical-only");
  }
  if (provider == nullptr) {
    throw ConfigError("pipeline " + name + " needs an embedding provider; none is configured");
  }
  const auto& built = *store.manifest.provider;
  const auto& spec = provider->spec();
  if (spec.name != built.name || spec.dimension != built.dimension) {
    throw ConfigError("pipeline " + name + ": store was embedded with " + built.name + "/" +
                      std::to_string(built.dimension) + " but the query provider is " + spec.name + "/" +
                      std::to_string(spec.dimension));
  }
}

/// Runs one retrieval strategy and returns at most `k` results.
///
/// Fused pipelines pull depth_for(k) candidates from each side before RRF.
/// The vector side always searches embeddings of raw content.
inline RankedList execute_pipeline(Pipeline p, std::string_view query, const Store& store, std::size_t k,
                                   const EmbeddingProvider* provider, const RetrievalOptions& options = {}) {
  if (k == 0) throw UsageError("execute_pipeline: k must be >= 1");
  check_pipeline_ready(p, store, provider);

  auto dense = [&](std::size_t depth) {
    return store.vectors->search(provider->embed(query), depth);
  };

  RankedList out;
  switch (p) {
    case Pipeline::kBaselineFts:
      out = store.raw_index.search(query, k, options.bm25);
      break;
    case Pipeline::kEnrichedFts:
      out = store.enriched_index.search(query, k, options.bm25);
      break;
    case Pipeline::kEmbeddings:
      out = dense(k);
      break;
    case Pipeline::kHybrid:
    case Pipeline::kEnrichedHybrid: {
      const auto depth = options.depth_for(k);
      const auto& lexical = p == Pipeline::kHybrid ? store.raw_index : store.enriched_index;
      const std::array<RankedList, 2> lists{lexical.search(query, depth, options.bm25), dense(depth)};
      out = rrf_fuse(lists, options.rrf_constant);
      out.truncate(k);
      break;
    }
  }
  out.source = std::string(to_string(p));
  return out;
}

}  // namespace memroute
