// Acceptance checks. Prints one PASS/FAIL/SKIP line per criterion and exits
// nonzero when any criterion fails.
//
// Criteria 11-13 need the real benchmark and a precomputed embeddings sidecar:
//   MEMROUTE_LME_BENCHMARK=/path/longmemeval_m.json
//   MEMROUTE_LME_EMBEDDINGS=/path/embeddings.bin
// Without both they print SKIP.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "memroute/memroute.hpp"

using namespace memroute;

namespace {

int g_failures = 0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

void report(int id, const std::string& name, const Outcome& o) {
  std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++g_failures;
}

void skip(int id, const std::string& name, const std::string& why) {
  std::printf("SKIP %2d %s: %s\n", id, name.c_str(), why.c_str());
  std::fflush(stdout);
}

void run(int id, const std::string& name, const std::function<Outcome()>& fn) {
  try {
    report(id, name, fn());
  } catch (const std::exception& e) {
    report(id, name, {false, std::string("exception: ") + e.what()});
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

RankedList ranked(const std::vector<std::string>& ids) {
  RankedList l;
  double s = static_cast<double>(ids.size());
  for (const auto& id : ids) l.items.push_back({id, s--});
  return l;
}

const EnrichmentVocabulary& shipped_vocab() {
  static const auto v = load_vocabulary(std::string(MEMROUTE_RESOURCE_DIR) + "/vocabulary_v2.txt");
  return v;
}

std::size_t rank_of(const RankedList& l, const std::string& id) {
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (l.items[i].doc_id == id) return i + 1;
  }
  return SIZE_MAX;
}

Outcome metric_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(1);
  std::size_t recall_mismatch = 0;
  double worst_ndcg = 0.0;
  for (int round = 0; round < 1000; ++round) {
    const std::size_t hay = 1 + gen() % 20;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < hay; ++i) ids.push_back("s" + std::to_string(i));
    std::shuffle(ids.begin(), ids.end(), gen);
    GoldSet gold;
    const std::size_t ng = gen() % (std::min<std::size_t>(6, hay) + 1);
    while (gold.size() < ng) gold.insert("s" + std::to_string(gen() % hay));
    ids.resize(gen() % (hay + 1));
    const auto r = ranked(ids);
    recall_mismatch += recall_all_at_k(r, gold, 5) != oracle::recall_all(ids, gold, 5);
    worst_ndcg = std::max(worst_ndcg, std::abs(ndcg_at_k(r, gold, 5) - oracle::ndcg(ids, gold, 5)));
  }
  const double secs = seconds_since(t0);
  return {recall_mismatch == 0 && worst_ndcg <= 1e-12 && secs < 5.0,
          fmt("1000 instances, Ra@5 mismatches %zu, max NDCG error %.3g (<= 1e-12), %.3fs (< 5s)", recall_mismatch,
              worst_ndcg, secs)};
}

Outcome ndcg_hand_values() {
  const double a = ndcg_at_k(ranked({"x", "y", "a"}), {"a"}, 5);
  const double b = ndcg_at_k(ranked({"a", "x", "b", "y", "z"}), {"a", "b"}, 5);
  const double c = ndcg_at_k(ranked({"a", "x", "y"}), {"a"}, 5);
  const double b_exact = (1.0 + 1.0 / std::log2(4.0)) / (1.0 + 1.0 / std::log2(3.0));
  const bool ok = std::abs(a - 0.5) <= 1e-9 && std::abs(b - b_exact) <= 1e-9 && std::abs(b - 0.91972) <= 5e-6 &&
                  std::abs(c - 1.0) <= 1e-9;
  return {ok, fmt("got %.9f, %.9f, %.9f; expected 0.5, %.9f, 1.0 (tol 1e-9)", a, b, c, b_exact)};
}

Outcome rrf_equivalence() {
  std::mt19937_64 gen(3);
  auto random_lists = [&] {
    const std::size_t ndocs = 1 + gen() % 20, nlists = 1 + gen() % 3;
    std::vector<std::vector<std::string>> lists;
    for (std::size_t l = 0; l < nlists; ++l) {
      std::vector<std::string> ids;
      for (std::size_t d = 0; d < ndocs; ++d) ids.push_back("d" + std::to_string(d));
      std::shuffle(ids.begin(), ids.end(), gen);
      ids.resize(gen() % (ndocs + 1));
      lists.push_back(ids);
    }
    return lists;
  };
  auto to_ranked = [](const std::vector<std::vector<std::string>>& lists) {
    std::vector<RankedList> out;
    for (const auto& l : lists) out.push_back(ranked(l));
    return out;
  };

  std::size_t equiv_fail = 0;
  for (int round = 0; round < 1000; ++round) {
    const auto lists = random_lists();
    const auto fused = rrf_fuse(to_ranked(lists));
    const auto expected = oracle::rrf(lists);
    bool ok = fused.size() == expected.size();
    for (std::size_t i = 0; ok && i < fused.size(); ++i) {
      ok = fused.items[i].doc_id == expected[i].first && std::abs(fused.items[i].score - expected[i].second) <= 1e-12;
    }
    equiv_fail += !ok;
  }

  std::size_t agnostic_fail = 0, monotone_fail = 0;
  for (int round = 0; round < 500; ++round) {
    const auto lists = random_lists();
    const auto base = rrf_fuse(to_ranked(lists));
    auto rescored = to_ranked(lists);
    for (auto& l : rescored) {
      double s = std::uniform_real_distribution<double>(1e3, 1e6)(gen);
      for (auto& h : l.items) h.score = (s -= std::uniform_real_distribution<double>(0.1, 50.0)(gen));
    }
    agnostic_fail += !(rrf_fuse(rescored) == base);

    auto promoted = lists;
    std::vector<std::size_t> candidates;
    for (std::size_t l = 0; l < promoted.size(); ++l) {
      if (promoted[l].size() >= 2) candidates.push_back(l);
    }
    if (candidates.empty()) continue;
    auto& l = promoted[candidates[gen() % candidates.size()]];
    const std::size_t pos = 1 + gen() % (l.size() - 1);
    const std::string doc = l[pos];
    std::swap(l[pos], l[pos - 1]);
    const auto after = rrf_fuse(to_ranked(promoted));
    double before_score = 0, after_score = 0;
    for (const auto& h : base.items) before_score = h.doc_id == doc ? h.score : before_score;
    for (const auto& h : after.items) after_score = h.doc_id == doc ? h.score : after_score;
    monotone_fail += !(after_score > before_score && rank_of(after, doc) <= rank_of(base, doc));
  }
  return {equiv_fail + agnostic_fail + monotone_fail == 0,
          fmt("oracle mismatches %zu/1000, score-agnostic failures %zu/500, monotonicity failures %zu/500",
              equiv_fail, agnostic_fail, monotone_fail)};
}

Outcome bm25_equivalence() {
  std::mt19937_64 gen(4);
  std::size_t order_fail = 0;
  for (int round = 0; round < 200; ++round) {
    const auto docs = oracle::random_corpus(gen, 50);
    LexicalIndex index;
    for (const auto& [id, text] : docs) index.add(id, text);
    std::string query;
    for (int w = 0, n = 1 + static_cast<int>(gen() % 4); w < n; ++w) query += "w" + std::to_string(gen() % 35) + " ";
    const auto got = bm25_search(index, query, docs.size());
    const auto expected = oracle::bm25(docs, query);
    bool ok = got.size() == expected.size();
    for (std::size_t i = 0; ok && i < got.size(); ++i) {
      ok = got.items[i].doc_id == expected[i].first && std::abs(got.items[i].score - expected[i].second) <= 1e-9;
    }
    order_fail += !ok;
  }
  LexicalIndex pinned;
  pinned.add("d1", "a b");
  pinned.add("d2", "a a a");
  const auto r = bm25_search(pinned, "a", 2);
  const bool pin_ok = r.size() == 2 && r.items[0].doc_id == "d2" &&
                      std::abs(r.items[0].score - 0.2747311129771919) <= 1e-9 &&
                      std::abs(r.items[1].score - 0.19856803215183175) <= 1e-9;
  return {order_fail == 0 && pin_ok,
          fmt("full-scan mismatches %zu/200; pinned d2=%.16f d1=%.16f (tol 1e-9)", order_fail,
              r.size() > 0 ? r.items[0].score : -1.0, r.size() > 1 ? r.items[1].score : -1.0)};
}

// Each fixture plants a target doc whose trigger token expands to bridge
// tokens absent from the corpus. Lexical probe: the query is a bridge token,
// so the target can only improve under enrichment. Cosine probe: the query
// shares tokens with the doc but no hash bucket with any bridge token, so
// appending bridges only grows the doc norm.
Outcome enrichment_asymmetry() {
  std::mt19937_64 gen(5);
  HashedBagOfWordsProvider provider;
  std::size_t ok_count = 0;
  for (int round = 0; round < 100; ++round) {
    const std::string trigger = "trig" + std::to_string(round);
    std::vector<std::string> doc_words;
    for (int w = 0; w < 10; ++w) doc_words.push_back("w" + std::to_string(gen() % 40));
    const std::string query_words = doc_words[0] + " " + doc_words[1];
    std::set<std::size_t> query_buckets;
    for (const auto& t : tokenize(query_words)) query_buckets.insert(provider.bucket(t));

    std::vector<std::string> bridges;
    for (int c = 0; bridges.size() < 3 && c < 1000; ++c) {
      const auto b = "bridge" + std::to_string(round) + "x" + std::to_string(c);
      if (!query_buckets.count(provider.bucket(b))) bridges.push_back(b);
    }
    std::string vocab_text = "[hypernyms]\n" + trigger + " -> ";
    std::string bridge_text;
    for (std::size_t i = 0; i < bridges.size(); ++i) {
      vocab_text += (i ? ", " : "") + bridges[i];
      bridge_text += " " + bridges[i];
    }
    std::istringstream vin(vocab_text + "\n");
    const auto vocab = parse_vocabulary(vin);

    std::string doc_text = trigger;
    for (const auto& w : doc_words) doc_text += " " + w;
    std::vector<HaystackSession> sessions{{"target", "", {{"user", doc_text}}}};
    for (int d = 0; d < 15; ++d) {
      std::string text;
      for (int w = 0; w < 10; ++w) text += "w" + std::to_string(gen() % 40) + " ";
      sessions.push_back({"other" + std::to_string(d), "", {{"user", text}}});
    }
    const auto store = build_store_in_memory("fx", sessions, vocab, nullptr);
    const auto probe = bridges[gen() % bridges.size()];
    const auto raw_rank = rank_of(execute_pipeline(Pipeline::kBaselineFts, probe, store, 16, nullptr), "target");
    const auto enriched_rank = rank_of(execute_pipeline(Pipeline::kEnrichedFts, probe, store, 16, nullptr), "target");

    const auto q = provider.embed(query_words);
    const double cos_raw = cosine_similarity(q, provider.embed(doc_text));
    const double cos_enriched = cosine_similarity(q, provider.embed(doc_text + bridge_text));
    ok_count += enriched_rank <= raw_rank && cos_enriched < cos_raw;
  }
  return {ok_count == 100, fmt("%zu/100 fixtures: enriched lexical rank holds or improves and cosine drops", ok_count)};
}

Outcome routing() {
  const auto t = shipped_route_table();
  const bool rows = resolve_route(QueryType::kKnowledgeUpdate, t) == Pipeline::kEnrichedFts &&
                    resolve_route(QueryType::kMultiSession, t) == Pipeline::kEnrichedHybrid &&
                    resolve_route(QueryType::kSingleSessionAssistant, t) == Pipeline::kEmbeddings &&
                    resolve_route(QueryType::kSingleSessionPreference, t) == Pipeline::kEmbeddings &&
                    resolve_route(QueryType::kSingleSessionUser, t) == Pipeline::kBaselineFts &&
                    resolve_route(QueryType::kTemporalReasoning, t) == Pipeline::kHybrid;

  std::mt19937_64 gen(6);
  std::size_t correct = 0, ties = 0;
  for (int round = 0; round < 50; ++round) {
    std::map<QueryType, Pipeline> expected;
    std::vector<ScoredInstance> train;
    for (auto type : kRetrievalTypes) {
      const auto winner = kAllPipelines[gen() % kAllPipelines.size()];
      auto partner = kAllPipelines[gen() % kAllPipelines.size()];
      const bool tie = gen() % 2 == 0 && partner != winner;
      ties += tie;
      expected[type] = tie ? std::min(winner, partner, [](Pipeline a, Pipeline b) { return cost_rank(a) < cost_rank(b); })
                           : winner;
      for (int i = 0, n = 2 + static_cast<int>(gen() % 5); i < n; ++i) {
        ScoredInstance s{std::to_string(train.size()), type, {}};
        for (auto p : kAllPipelines) s.set(p, std::uniform_real_distribution<double>(0.0, 0.4)(gen));
        const double top = std::uniform_real_distribution<double>(0.5, 1.0)(gen);
        s.set(winner, top);
        if (tie) s.set(partner, top);
        train.push_back(s);
      }
    }
    const auto derived = derive_route_table(train, kAllPipelines);
    bool all = true;
    for (auto type : kRetrievalTypes) all = all && derived[type] == expected[type];
    correct += all;
  }
  return {rows && correct == 50,
          fmt("shipped rows %s; derived tables correct %zu/50 (%zu planted ties)", rows ? "6/6" : "MISMATCH", correct,
              ties)};
}

// Same-family partner and a cross-family type for each retrieval type under
// the shipped table.
QueryType same_family_partner(QueryType t) {
  switch (t) {
    case QueryType::kKnowledgeUpdate: return QueryType::kSingleSessionUser;
    case QueryType::kSingleSessionUser: return QueryType::kKnowledgeUpdate;
    case QueryType::kMultiSession: return QueryType::kTemporalReasoning;
    case QueryType::kTemporalReasoning: return QueryType::kMultiSession;
    case QueryType::kSingleSessionAssistant: return QueryType::kSingleSessionPreference;
    default: return QueryType::kSingleSessionAssistant;
  }
}

QueryType cross_family(QueryType t) {
  switch (t) {
    case QueryType::kKnowledgeUpdate:
    case QueryType::kSingleSessionUser: return QueryType::kTemporalReasoning;
    case QueryType::kMultiSession:
    case QueryType::kTemporalReasoning: return QueryType::kSingleSessionAssistant;
    default: return QueryType::kSingleSessionUser;
  }
}

std::vector<QueryType> paper_type_mix() {
  const std::map<QueryType, int> counts{{QueryType::kKnowledgeUpdate, 72},      {QueryType::kMultiSession, 121},
                                        {QueryType::kSingleSessionAssistant, 56}, {QueryType::kSingleSessionPreference, 30},
                                        {QueryType::kSingleSessionUser, 64},   {QueryType::kTemporalReasoning, 127}};
  std::vector<QueryType> out;
  for (const auto& [t, n] : counts) out.insert(out.end(), n, t);
  return out;
}

Outcome effective_accuracy_arithmetic() {
  std::mt19937_64 gen(7);
  auto gold = paper_type_mix();
  std::shuffle(gold.begin(), gold.end(), gen);
  std::vector<QueryType> pred;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    pred.push_back(i < 338 ? gold[i] : i < 390 ? same_family_partner(gold[i]) : cross_family(gold[i]));
  }
  const auto r = effective_accuracy(gold, pred, shipped_route_table());
  const double expected = 390.0 / 470.0;
  return {r.n == 470 && r.exact_correct == 338 && std::abs(r.effective_accuracy() - expected) <= 1e-12,
          fmt("n=%zu exact=%zu effective=%zu -> %.12f (expected %.12f, tol 1e-12)", r.n, r.exact_correct,
              r.effective_correct, r.effective_accuracy(), expected)};
}

Outcome bootstrap_sanity() {
  std::vector<double> scores(500, 0.0);
  std::fill(scores.begin(), scores.begin() + 397, 1.0);
  std::shuffle(scores.begin(), scores.end(), std::mt19937_64(8));
  const auto t0 = std::chrono::steady_clock::now();
  const auto a = bootstrap_ci(scores, 10000, 0.05, kDefaultSeed, 1);
  const double secs = seconds_since(t0);
  const auto b = bootstrap_ci(scores, 10000, 0.05, kDefaultSeed, 4);
  const bool within = std::abs(a.lower - 0.757) <= 0.01 && std::abs(a.upper - 0.830) <= 0.01;
  const bool determ = a.lower == b.lower && a.upper == b.upper;
  return {within && determ && secs < 10.0,
          fmt("mean %.3f CI [%.4f, %.4f] vs [0.757, 0.830] +-0.01; repeat %s; %.3fs (< 10s)", mean(scores), a.lower,
              a.upper, determ ? "identical" : "DIFFERS", secs)};
}

Outcome cv_mechanics() {
  const auto types = paper_type_mix();
  std::vector<StratumItem> items;
  for (std::size_t i = 0; i < types.size(); ++i) items.push_back({fmt("q%03zu", i), types[i]});
  const std::uint64_t seed = 9;
  const auto folds = stratified_kfold(items, 5, seed);
  bool sizes = folds.size() == 5;
  for (const auto& f : folds) sizes = sizes && f.test_ids.size() == 94 && f.train_ids.size() == 376;
  const auto again = stratified_kfold(items, 5, seed);
  bool determ = true;
  for (std::size_t f = 0; f < 5; ++f) determ = determ && folds[f].test_ids == again[f].test_ids;

  // Multi-session: embeddings score 1 except on fold-0 instances (0); hybrid
  // scores 0.9 everywhere. Only fold 0's training split (which excludes the
  // zeros) prefers embeddings. Every other type: baseline_fts 1, others 0.
  std::set<std::string> fold0(folds[0].test_ids.begin(), folds[0].test_ids.end());
  std::vector<ScoredInstance> scored;
  for (const auto& it : items) {
    ScoredInstance s{it.id, it.qtype, {}};
    for (auto p : kAllPipelines) s.set(p, 0.0);
    if (it.qtype == QueryType::kMultiSession) {
      s.set(Pipeline::kEmbeddings, fold0.count(it.id) ? 0.0 : 1.0);
      s.set(Pipeline::kHybrid, 0.9);
    } else {
      s.set(Pipeline::kBaselineFts, 1.0);
    }
    scored.push_back(s);
  }
  const auto r = cross_validate(scored, kAllPipelines, 5, seed);

  std::vector<double> expected;
  for (std::size_t f = 0; f < 5; ++f) {
    std::size_t ms = 0;
    for (const auto& id : folds[f].test_ids) ms += types[std::stoul(id.substr(1))] == QueryType::kMultiSession;
    const double ms_score = f == 0 ? 0.0 : 0.9;
    expected.push_back((94.0 - static_cast<double>(ms) + ms_score * static_cast<double>(ms)) / 94.0);
  }
  const double expected_full = (349.0 + 0.9 * 121.0) / 470.0;
  bool means = r.fold_scores.size() == 5 && std::abs(r.full_data_score - expected_full) <= 1e-12;
  for (std::size_t f = 0; means && f < 5; ++f) means = std::abs(r.fold_scores[f] - expected[f]) <= 1e-12;
  const auto& ms = r.stability.at(QueryType::kMultiSession);
  bool stable = ms.modal == Pipeline::kHybrid && ms.agreeing == 4 && r.fold_tables[0][QueryType::kMultiSession] ==
                                                                           Pipeline::kEmbeddings;
  for (auto t : kRetrievalTypes) {
    if (t != QueryType::kMultiSession) stable = stable && r.stability.at(t).agreeing == 5;
  }
  return {sizes && determ && means && stable,
          fmt("fold sizes %s, deterministic %s, fold means %s, full %.6f, multi-session stability %zu/5", sizes ? "94x5" : "WRONG",
              determ ? "yes" : "NO", means ? "exact" : "MISMATCH", r.full_data_score, ms.agreeing)};
}

Outcome persistence_fidelity() {
  std::mt19937_64 gen(10);
  HashedBagOfWordsProvider provider;
  oracle::TempDir dir("acceptance");
  static const std::vector<std::string> words = {"cocktail", "class", "dog",    "vet",     "flight", "hotel",
                                                 "budget",   "gym",   "yoga",   "bought",  "tea",    "wine",
                                                 "paris",    "rent",  "apple",  "concert", "museum", "recipe",
                                                 "attended", "went",  "doctor", "salary",  "quiet",  "river"};
  auto text = [&](int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s += words[gen() % words.size()] + " ";
    return s;
  };
  std::size_t identical = 0;
  for (int round = 0; round < 100; ++round) {
    std::vector<HaystackSession> sessions;
    for (std::size_t i = 0, n = 3 + gen() % 25; i < n; ++i) {
      sessions.push_back({"s" + std::to_string(i), "2023/02/1" + std::to_string(i % 10),
                          {{"user", text(8)}, {"assistant", text(10)}}});
    }
    const auto mem = build_store_in_memory("r" + std::to_string(round), sessions, shipped_vocab(), &provider);
    const auto path = dir.path() / std::to_string(round);
    save_store(mem, path);
    const auto disk = open_store(path);
    const auto query = text(1 + static_cast<int>(gen() % 4));
    bool same = true;
    for (auto p : kAllPipelines) {
      same = same && execute_pipeline(p, query, mem, 10, &provider) == execute_pipeline(p, query, disk, 10, &provider);
    }
    identical += same;
  }
  return {identical == 100, fmt("%zu/100 pairs identical across raw, enriched and vector indices", identical)};
}

// Dataset-dependent criteria.

struct DatasetScores {
  std::vector<BenchmarkInstance> instances;
  std::vector<ScoredInstance> retrieval;  // Ra@5 per pipeline, retrieval instances only
  std::vector<QueryType> predicted;       // parallel to `retrieval`
  double seconds = 0.0;
};

DatasetScores score_dataset(const std::string& bench_path, const std::string& sidecar_path) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto bench = load_benchmark(bench_path);
  const auto provider = FileBackedProvider::load(sidecar_path);
  const auto rules = load_rules(std::string(MEMROUTE_RESOURCE_DIR) + "/classifier_rules.txt");

  const std::size_t n = bench.entries.size();
  std::vector<ScoredInstance> all(n);
  std::atomic<std::size_t> next{0};
  std::vector<std::string> errors;
  std::mutex mu;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        const auto& e = bench.entries[i];
        ScoredInstance s{e.instance.id, e.instance.qtype, {}};
        if (!e.instance.is_abstention()) {
          const auto store = build_store_in_memory(e.instance.id, e.sessions, shipped_vocab(), &provider);
          for (auto p : kAllPipelines) {
            s.set(p, recall_all_at_k(execute_pipeline(p, e.instance.question, store, 5, &provider), e.instance.gold, 5));
          }
        }
        all[i] = std::move(s);
      } catch (const std::exception& ex) {
        std::lock_guard lock(mu);
        errors.push_back(ex.what());
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < std::max(1u, std::thread::hardware_concurrency()); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (!errors.empty()) throw DataError("scoring failed: " + errors.front());

  DatasetScores out;
  for (std::size_t i = 0; i < n; ++i) {
    out.instances.push_back(bench.entries[i].instance);
    if (!bench.entries[i].instance.is_abstention()) {
      out.retrieval.push_back(all[i]);
      out.predicted.push_back(rules.classify(bench.entries[i].instance.question));
    }
  }
  out.seconds = seconds_since(t0);
  return out;
}

// Macro over every instance; abstention contributes 0 to the sum.
double macro(const DatasetScores& d, const std::function<Pipeline(std::size_t)>& route) {
  double sum = 0.0;
  for (std::size_t i = 0; i < d.retrieval.size(); ++i) sum += *d.retrieval[i].score(route(i));
  return sum / static_cast<double>(d.instances.size());
}

double type_mean(const DatasetScores& d, QueryType t, Pipeline p) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : d.retrieval) {
    if (s.qtype == t) {
      sum += *s.score(p);
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

void dataset_criteria() {
  const char* bench = std::getenv("MEMROUTE_LME_BENCHMARK");
  const char* sidecar = std::getenv("MEMROUTE_LME_EMBEDDINGS");
  if (bench == nullptr || sidecar == nullptr) {
    const std::string why = "set MEMROUTE_LME_BENCHMARK and MEMROUTE_LME_EMBEDDINGS to run";
    skip(11, "oracle-routed macro Ra@5", why);
    skip(12, "ordering claims", why);
    skip(13, "cross-validation gap and runtime", why);
    return;
  }
  DatasetScores d;
  try {
    d = score_dataset(bench, sidecar);
  } catch (const std::exception& e) {
    for (int id : {11, 12, 13}) report(id, "dataset criteria", {false, std::string("exception: ") + e.what()});
    return;
  }
  const auto table = shipped_route_table();
  const double oracle_routed = macro(d, [&](std::size_t i) { return table[d.retrieval[i].qtype]; });
  const double predicted = macro(d, [&](std::size_t i) { return table[d.predicted[i]]; });
  const double fts = macro(d, [](std::size_t) { return Pipeline::kBaselineFts; });
  const double hybrid = macro(d, [](std::size_t) { return Pipeline::kHybrid; });

  report(11, "oracle-routed macro Ra@5",
         {oracle_routed >= 0.74 && oracle_routed <= 0.82,
          fmt("%.4f over %zu instances, required [0.74, 0.82]", oracle_routed, d.instances.size())});

  QueryType largest = QueryType::kKnowledgeUpdate;
  double largest_gain = -1.0;
  for (auto t : kRetrievalTypes) {
    const double gain = type_mean(d, t, table[t]) - type_mean(d, t, Pipeline::kBaselineFts);
    if (gain > largest_gain) {
      largest_gain = gain;
      largest = t;
    }
  }
  const bool order = oracle_routed > fts && oracle_routed > hybrid && oracle_routed > predicted && predicted > fts &&
                     largest == QueryType::kSingleSessionAssistant;
  report(12, "ordering claims",
         {order, fmt("routed %.4f, predicted %.4f, uniform baseline_fts %.4f, uniform hybrid %.4f; largest per-type gain "
                     "%s (+%.3f)",
                     oracle_routed, predicted, fts, hybrid, std::string(to_string(largest)).c_str(), largest_gain)});

  run(13, "cross-validation gap and runtime", [&]() -> Outcome {
    const auto cv = cross_validate(d.retrieval, kAllPipelines, 5, kDefaultSeed);
    return {cv.gap() <= 0.05 && d.seconds < 3600.0,
            fmt("full %.4f, CV mean %.4f +- %.4f, gap %.4f (<= 0.05); scoring %.0fs (< 3600s)", cv.full_data_score,
                cv.mean, cv.stddev, cv.gap(), d.seconds)};
  });
}

}  // namespace

int main() {
  run(1, "metric oracle equivalence", metric_oracle);
  run(2, "NDCG hand values", ndcg_hand_values);
  run(3, "RRF equivalence and properties", rrf_equivalence);
  run(4, "BM25 equivalence", bm25_equivalence);
  run(5, "enrichment asymmetry", enrichment_asymmetry);
  run(6, "routing determinism and shipped table", routing);
  run(7, "effective routing accuracy arithmetic", effective_accuracy_arithmetic);
  run(8, "bootstrap CI sanity", bootstrap_sanity);
  run(9, "stratified CV mechanics", cv_mechanics);
  run(10, "persistence fidelity", persistence_fidelity);
  dataset_criteria();
  std::printf("%s (%d failing)\n", g_failures == 0 ? "ALL PASS" : "FAILURES", g_failures);
  return g_failures == 0 ? 0 : 1;
}
