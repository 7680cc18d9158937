#pragma once

// Convenience header pulling in the whole library.

#include "memroute/benchmark.hpp"
#include "memroute/classifier.hpp"
#include "memroute/cross_validation.hpp"
#include "memroute/digest.hpp"
#include "memroute/enrichment.hpp"
#include "memroute/error.hpp"
#include "memroute/evaluation.hpp"
#include "memroute/fusion.hpp"
#include "memroute/lexical_index.hpp"
#include "memroute/metrics.hpp"
#include "memroute/pipeline.hpp"
#include "memroute/query_type.hpp"
#include "memroute/ranked_list.hpp"
#include "memroute/rng.hpp"
#include "memroute/router.hpp"
#include "memroute/statistics.hpp"
#include "memroute/store.hpp"
#include "memroute/tokenizer.hpp"
#include "memroute/vector_index.hpp"
