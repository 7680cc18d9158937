// Builds an in-memory store from three sessions and runs one query through
// every pipeline, then through the shipped route for its classified type.

#include <iostream>
#include <string>
#include <vector>

#include "memroute/memroute.hpp"

int main() {
  using namespace memroute;
  const std::string res = MEMROUTE_RESOURCE_DIR;
  const auto vocab = load_vocabulary(res + "/vocabulary_v2.txt");
  const auto rules = load_rules(res + "/classifier_rules.txt");

  std::vector<HaystackSession> sessions = {
      {"s1", "2023/05/20", {{"user", "I took a cocktail making class last weekend."},
                            {"assistant", "That sounds fun! What cocktails did you learn to make?"},
                            {"user", "We made mojitos and old fashioneds."}}},
      {"s2", "2023/05/22", {{"user", "My dentist appointment got moved to Thursday."}}},
      {"s3", "2023/05/25", {{"user", "Thinking about adopting a labrador puppy."}}},
  };

  HashedBagOfWordsProvider provider;
  const auto store = build_store_in_memory("demo", sessions, vocab, &provider);
  std::cout << "s1 enrichment: " << store.records[0].enrichment << "\n\n";

  const std::string query = "What drinks have I learned to make?";
  for (auto p : kAllPipelines) {
    const auto hits = execute_pipeline(p, query, store, 3, &provider);
    std::cout << to_string(p) << ":";
    for (const auto& h : hits.items) std::cout << " " << h.doc_id << "(" << h.score << ")";
    std::cout << "\n";
  }

  const auto qtype = classify_query(query, rules);
  const auto route = resolve_route(qtype, shipped_route_table());
  std::cout << "\nclassified as " << to_string(qtype) << ", routed to " << to_string(route) << "\n";
}
