// memroute: ingest, search, bench, cv, derive-routes, classify, compare,
// export-texts, import-embeddings.
//
// Exit status: 0 success, 1 evaluation/data failure, 2 usage, I/O,
// configuration or parse failure.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "memroute/memroute.hpp"

#ifndef MEMROUTE_RESOURCE_DIR
#define MEMROUTE_RESOURCE_DIR "resources"
#endif

namespace fs = std::filesystem;
using namespace memroute;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitEval = 1;
constexpr int kExitConfig = 2;

std::string resource(const char* name) { return (fs::path(MEMROUTE_RESOURCE_DIR) / name).string(); }

struct Common {
  std::string store_root;
  std::string routes = resource("routes_default.txt");
  std::string vocab = resource("vocabulary_v2.txt");
  std::string rules = resource("classifier_rules.txt");
  std::string provider = "none";
  std::size_t k = 5;
  std::uint64_t seed = kDefaultSeed;
  std::size_t threads = 1;
};

std::unique_ptr<EmbeddingProvider> make_provider(const std::string& spec) {
  if (spec.empty() || spec == "none") return nullptr;
  if (spec == "hash") return std::make_unique<HashedBagOfWordsProvider>();
  if (spec.rfind("hash:", 0) == 0) {
    const auto dim = std::stoul(spec.substr(5));
    return std::make_unique<HashedBagOfWordsProvider>(dim);
  }
  if (spec.rfind("file:", 0) == 0) {
    return std::make_unique<FileBackedProvider>(FileBackedProvider::load(spec.substr(5)));
  }
  throw UsageError("unknown provider '" + spec + "' (expected none, hash[:dim] or file:<sidecar>)");
}

std::string require_root(const Common& c) {
  if (!c.store_root.empty()) return c.store_root;
  if (const char* env = std::getenv("MEMROUTE_STORE_ROOT"); env && *env) return env;
  throw UsageError("no store root: pass --root or set MEMROUTE_STORE_ROOT");
}

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) throw IoError(std::string(what) + " '" + path + "' does not exist");
}

fs::path store_dir(const std::string& root, const std::string& instance_id) { return fs::path(root) / instance_id; }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

// Mode parsing for bench.
struct Mode {
  enum class Kind { kOracle, kPredicted, kUniform } kind = Kind::kOracle;
  Pipeline uniform = Pipeline::kBaselineFts;
  std::string label() const {
    switch (kind) {
      case Kind::kOracle: return "oracle";
      case Kind::kPredicted: return "predicted";
      case Kind::kUniform: return "uniform:" + std::string(to_string(uniform));
    }
    return "?";
  }
};

Mode parse_mode(const std::string& s) {
  Mode m;
  if (s == "oracle") return m;
  if (s == "predicted") {
    m.kind = Mode::Kind::kPredicted;
    return m;
  }
  if (s.rfind("uniform:", 0) == 0) {
    const auto p = parse_pipeline(s.substr(8));
    if (!p) throw UsageError("unknown pipeline in mode '" + s + "'");
    m.kind = Mode::Kind::kUniform;
    m.uniform = *p;
    return m;
  }
  throw UsageError("unknown mode '" + s + "' (expected oracle, predicted or uniform:<pipeline>)");
}

std::vector<Pipeline> parse_pipelines(const std::vector<std::string>& names) {
  std::vector<Pipeline> out;
  for (const auto& n : names) {
    const auto p = parse_pipeline(n);
    if (!p) throw UsageError("unknown pipeline '" + n + "'");
    if (std::find(out.begin(), out.end(), *p) == out.end()) out.push_back(*p);
  }
  return out;
}

void check_stores(const std::string& root, const std::vector<BenchmarkInstance>& instances) {
  std::vector<std::string> missing;
  for (const auto& inst : instances) {
    if (!fs::exists(store_dir(root, inst.id) / Store::kManifestFile)) missing.push_back(inst.id);
  }
  if (missing.empty()) return;
  std::string list;
  for (std::size_t i = 0; i < missing.size() && i < 20; ++i) list += "\n  " + missing[i];
  if (missing.size() > 20) list += "\n  ... (" + std::to_string(missing.size() - 20) + " more)";
  throw IoError(std::to_string(missing.size()) + " store(s) missing under '" + root + "':" + list);
}

// Runs fn(i) for i in [0, n) on `threads` workers; the first exception wins.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// ----- ingest ---------------------------------------------------------------

int cmd_ingest(const Common& c, const std::string& bench_path, bool force, bool no_dates,
               const std::string& build_time) {
  require_file(bench_path, "benchmark file");
  require_file(c.vocab, "vocabulary file");
  const auto root = require_root(c);
  if (fs::exists(root) && !fs::is_empty(root) && !force) {
    throw IoError("store root '" + root + "' is not empty; pass --force to rebuild");
  }
  const auto vocab = load_vocabulary(c.vocab);
  const auto vocab_digest = sha256_file_hex(c.vocab);
  const auto provider = make_provider(c.provider);

  BuildOptions options;
  options.index_dates = !no_dates;
  options.seed = c.seed;
  if (!build_time.empty()) {
    options.build_timestamp = build_time;
  } else if (const char* sde = std::getenv("SOURCE_DATE_EPOCH"); sde && *sde) {
    options.build_timestamp = std::string("epoch:") + sde;
  } else {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    options.build_timestamp = buf;
  }

  fs::create_directories(root);
  std::size_t retrieval = 0, abstention = 0, sessions = 0;
  for_each_benchmark_entry(bench_path, [&](BenchmarkEntry&& e) {
    const auto dir = store_dir(root, e.instance.id);
    if (fs::exists(dir)) fs::remove_all(dir);  // only reachable with --force
    build_store(e.instance.id, e.sessions, vocab, provider.get(), dir, options, vocab_digest);
    sessions += e.sessions.size();
    (e.instance.is_abstention() ? abstention : retrieval) += 1;
    const auto done = retrieval + abstention;
    if (done % 50 == 0) std::cerr << "ingested " << done << " instances\n";
  });
  std::cout << "stores: " << retrieval + abstention << " (" << retrieval << " retrieval / " << abstention
            << " abstention), sessions: " << sessions << ", provider: "
            << (provider ? provider->spec().name + "/" + std::to_string(provider->spec().dimension) : "none")
            << "\n";
  return kExitOk;
}

// ----- search ---------------------------------------------------------------

int cmd_search(const Common& c, const std::string& store_path, const std::string& query, const std::string& type,
               const std::string& pipeline_override) {
  const auto store = open_store(store_path);
  const auto provider = make_provider(c.provider);

  Pipeline pipeline;
  std::string reason;
  if (!pipeline_override.empty()) {
    const auto p = parse_pipeline(pipeline_override);
    if (!p) throw UsageError("unknown pipeline '" + pipeline_override + "'");
    pipeline = *p;
    reason = "override";
  } else {
    require_file(c.routes, "route table");
    const auto table = load_route_table(c.routes);
    QueryType qtype;
    if (type == "auto") {
      require_file(c.rules, "classifier rules");
      qtype = classify_query(query, load_rules(c.rules));
      reason = "predicted " + std::string(to_string(qtype));
    } else {
      const auto t = parse_query_type(type);
      if (!t || !is_retrieval_type(*t)) throw UsageError("unknown or non-routable query type '" + type + "'");
      qtype = *t;
      reason = "type " + std::string(to_string(qtype));
    }
    pipeline = resolve_route(qtype, table);
  }

  const auto ranked = execute_pipeline(pipeline, query, store, c.k, provider.get());
  std::cout << "pipeline: " << to_string(pipeline) << " (" << reason << ")\n";
  std::size_t rank = 1;
  for (const auto& h : ranked.items) {
    std::printf("%2zu  %-40s %.6f\n", rank++, h.doc_id.c_str(), h.score);
  }
  if (ranked.items.empty()) std::cout << "(no results)\n";
  return kExitOk;
}

// ----- bench ----------------------------------------------------------------

int cmd_bench(const Common& c, const std::string& bench_path, const std::string& mode_text,
              const std::string& out_prefix) {
  require_file(bench_path, "benchmark file");
  const auto root = require_root(c);
  const auto mode = parse_mode(mode_text);
  const auto instances = load_benchmark_instances(bench_path);
  check_stores(root, instances);

  std::optional<RouteTable> table;
  std::optional<RuleSet> rules;
  if (mode.kind != Mode::Kind::kUniform) {
    require_file(c.routes, "route table");
    table = load_route_table(c.routes);
  }
  if (mode.kind == Mode::Kind::kPredicted || mode.kind == Mode::Kind::kOracle) {
    if (fs::exists(c.rules)) rules = load_rules(c.rules);
  }
  const auto provider = make_provider(c.provider);

  std::vector<RunRecord> records(instances.size());
  parallel_for(instances.size(), c.threads, [&](std::size_t i) {
    const auto& inst = instances[i];
    Pipeline p = mode.uniform;
    if (mode.kind != Mode::Kind::kUniform) {
      QueryType qtype;
      if (mode.kind == Mode::Kind::kPredicted) {
        if (!rules) throw IoError("classifier rules '" + c.rules + "' do not exist");
        qtype = classify_query(inst.question, *rules);
      } else if (!inst.is_abstention()) {
        qtype = inst.qtype;
      } else if (inst.surface_type) {
        qtype = *inst.surface_type;
      } else {
        if (!rules) throw IoError("classifier rules '" + c.rules + "' do not exist");
        qtype = classify_query(inst.question, *rules);
      }
      p = resolve_route(qtype, *table);
    }
    const auto store = open_store(store_dir(root, inst.id));
    records[i] = RunRecord{inst.id, std::string(to_string(p)), execute_pipeline(p, inst.question, store, c.k,
                                                                                provider.get())};
  });
  std::sort(records.begin(), records.end(),
            [](const RunRecord& a, const RunRecord& b) { return a.instance_id < b.instance_id; });

  const auto report = evaluate_run(instances, to_results(records), c.k);
  const auto ci = bootstrap_ci(report.recall_scores(), kDefaultResamples, 0.05, c.seed, c.threads);
  auto j = to_json(report);
  j["mode"] = mode.label();
  j["bootstrap"] = {{"metric", "recall_all"}, {"resamples", kDefaultResamples}, {"seed", c.seed},
                    {"lower", ci.lower}, {"upper", ci.upper}};

  if (!out_prefix.empty()) {
    write_run_file(out_prefix + ".run.jsonl", records);
    write_text(out_prefix + ".report.json", j.dump(2) + "\n");
  }
  std::cout << "mode: " << mode.label() << "\n" << format_report_table(report);
  std::printf("95%% CI (Ra@%zu): [%.3f, %.3f]\n", c.k, ci.lower, ci.upper);
  return kExitOk;
}

// ----- per-pipeline scoring shared by cv and derive-routes -------------------

std::vector<ScoredInstance> score_all(const Common& c, const std::string& bench_path,
                                      const std::vector<Pipeline>& candidates, bool use_ndcg) {
  require_file(bench_path, "benchmark file");
  const auto root = require_root(c);
  auto instances = load_benchmark_instances(bench_path);
  std::erase_if(instances, [](const BenchmarkInstance& i) { return i.is_abstention(); });
  check_stores(root, instances);
  const auto provider = make_provider(c.provider);

  std::vector<ScoredInstance> out(instances.size());
  parallel_for(instances.size(), c.threads, [&](std::size_t i) {
    const auto& inst = instances[i];
    const auto store = open_store(store_dir(root, inst.id));
    ScoredInstance s;
    s.id = inst.id;
    s.qtype = inst.qtype;
    for (auto p : candidates) {
      const auto ranked = execute_pipeline(p, inst.question, store, c.k, provider.get());
      s.set(p, use_ndcg ? ndcg_at_k(ranked, inst.gold, c.k) : recall_all_at_k(ranked, inst.gold, c.k));
    }
    out[i] = std::move(s);
  });
  return out;
}

std::string format_table_row(const RouteTable& t) {
  std::string out;
  for (auto q : kRetrievalTypes) out += (out.empty() ? "" : "  ") + std::string(to_string(t[q]));
  return out;
}

int cmd_cv(const Common& c, const std::string& bench_path, std::size_t folds, std::vector<std::string> candidate_names,
           bool use_ndcg, const std::string& out_path) {
  const auto candidates = parse_pipelines(candidate_names);
  const auto scored = score_all(c, bench_path, candidates, use_ndcg);
  const auto report = cross_validate(scored, candidates, folds, c.seed);

  nlohmann::json j;
  j["folds"] = folds;
  j["seed"] = c.seed;
  j["metric"] = use_ndcg ? "ndcg" : "recall_all";
  j["k"] = c.k;
  j["instances"] = scored.size();
  auto fold_rows = nlohmann::json::array();
  for (std::size_t f = 0; f < report.fold_tables.size(); ++f) {
    nlohmann::json routes;
    for (auto q : kRetrievalTypes) routes[std::string(to_string(q))] = std::string(to_string(report.fold_tables[f][q]));
    fold_rows.push_back({{"fold", f + 1}, {"score", report.fold_scores[f]}, {"routes", routes}});
  }
  j["per_fold"] = fold_rows;
  j["cv_mean"] = report.mean;
  j["cv_std"] = report.stddev;
  j["full_data_score"] = report.full_data_score;
  j["gap"] = report.gap();
  nlohmann::json stability;
  for (const auto& [q, st] : report.stability) {
    stability[std::string(to_string(q))] = {{"modal", std::string(to_string(st.modal))},
                                            {"agreeing", st.agreeing}, {"folds", st.folds}};
  }
  j["stability"] = stability;
  if (!out_path.empty()) write_text(out_path, j.dump(2) + "\n");

  std::printf("%d-fold stratified CV over %zu retrieval instances (seed %llu)\n", static_cast<int>(folds),
              scored.size(), static_cast<unsigned long long>(c.seed));
  for (std::size_t f = 0; f < report.fold_tables.size(); ++f) {
    std::printf("fold %zu: %.4f  %s\n", f + 1, report.fold_scores[f], format_table_row(report.fold_tables[f]).c_str());
  }
  std::printf("CV mean %.4f +/- %.4f   full-data %.4f   gap %.4f\n", report.mean, report.stddev,
              report.full_data_score, report.gap());
  std::printf("%-28s %-16s %s\n", "query type", "modal route", "agreement");
  for (const auto& [q, st] : report.stability) {
    std::printf("%-28s %-16s %zu/%zu\n", std::string(to_string(q)).c_str(), std::string(to_string(st.modal)).c_str(),
                st.agreeing, st.folds);
  }
  return kExitOk;
}

int cmd_derive(const Common& c, const std::string& bench_path, std::vector<std::string> candidate_names, bool use_ndcg,
               const std::string& out_path) {
  const auto candidates = parse_pipelines(candidate_names);
  const auto scored = score_all(c, bench_path, candidates, use_ndcg);
  const auto table = derive_route_table(scored, candidates, "derived:" + fs::path(bench_path).filename().string());
  std::ostringstream os;
  write_route_table(os, table);
  if (out_path.empty()) {
    std::cout << os.str();
  } else {
    write_text(out_path, os.str());
    std::cout << "wrote " << out_path << "\n";
  }
  return kExitOk;
}

// ----- classify -------------------------------------------------------------

int cmd_classify(const Common& c, const std::string& query, const std::string& bench_path) {
  require_file(c.rules, "classifier rules");
  const auto rules = load_rules(c.rules);
  if (!query.empty()) {
    const auto t = classify_query(query, rules);
    std::cout << to_string(t) << "\n";
    return kExitOk;
  }
  if (bench_path.empty()) throw UsageError("classify: give a query or --bench <file>");
  require_file(bench_path, "benchmark file");
  require_file(c.routes, "route table");
  const auto table = load_route_table(c.routes);
  std::vector<QueryType> gold, predicted;
  for (const auto& inst : load_benchmark_instances(bench_path)) {
    if (inst.is_abstention()) continue;
    gold.push_back(inst.qtype);
    predicted.push_back(classify_query(inst.question, rules));
  }
  const auto report = effective_accuracy(gold, predicted, table);
  std::printf("%-28s %5s %8s\n", "query type", "n", "accuracy");
  for (const auto& [q, row] : report.per_type) {
    std::printf("%-28s %5zu %8.3f\n", std::string(to_string(q)).c_str(), row.n, row.accuracy());
  }
  std::printf("overall %zu/%zu = %.3f   effective %zu/%zu = %.3f\n", report.exact_correct, report.n,
              report.overall_accuracy(), report.effective_correct, report.n, report.effective_accuracy());
  return kExitOk;
}

// ----- compare --------------------------------------------------------------

int cmd_compare(const Common& c, const std::string& bench_path, const std::string& run_a, const std::string& run_b,
                bool use_ndcg) {
  require_file(bench_path, "benchmark file");
  require_file(run_a, "run file");
  require_file(run_b, "run file");
  const auto instances = load_benchmark_instances(bench_path);
  const auto a = evaluate_run(instances, to_results(read_run_file(run_a)), c.k);
  const auto b = evaluate_run(instances, to_results(read_run_file(run_b)), c.k);
  const auto sa = use_ndcg ? a.ndcg_scores() : a.recall_scores();
  const auto sb = use_ndcg ? b.ndcg_scores() : b.recall_scores();
  const auto test = paired_bootstrap_test(sa, sb, kDefaultResamples, c.seed, c.threads);
  const auto ci_a = bootstrap_ci(sa, kDefaultResamples, 0.05, c.seed, c.threads);
  const auto ci_b = bootstrap_ci(sb, kDefaultResamples, 0.05, c.seed, c.threads);
  const char* metric = use_ndcg ? "NDCG" : "Ra";
  std::printf("A %-40s %s@%zu %.4f  95%% CI [%.4f, %.4f]\n", run_a.c_str(), metric, c.k, mean(sa), ci_a.lower,
              ci_a.upper);
  std::printf("B %-40s %s@%zu %.4f  95%% CI [%.4f, %.4f]\n", run_b.c_str(), metric, c.k, mean(sb), ci_b.lower,
              ci_b.upper);
  std::printf("delta A-B %+.4f  one-sided p = %.4f  (%zu paired resamples, seed %llu)\n", test.mean_delta,
              test.p_value, kDefaultResamples, static_cast<unsigned long long>(c.seed));
  return kExitOk;
}

// ----- offline embedding workflow ------------------------------------------

int cmd_export_texts(const std::string& bench_path, const std::string& out_path) {
  require_file(bench_path, "benchmark file");
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + out_path + "'");
  std::set<std::string> seen;
  auto emit = [&](const std::string& text) {
    const auto truncated = truncate_for_embedding(text);
    auto key = sha256_hex(truncated);
    if (!seen.insert(key).second) return;
    out << nlohmann::json{{"key", key}, {"text", truncated}}.dump() << '\n';
  };
  for_each_benchmark_entry(bench_path, [&](BenchmarkEntry&& e) {
    emit(e.instance.question);
    for (const auto& s : e.sessions) emit(s.raw_content());
  });
  if (!out) throw IoError("write failed for '" + out_path + "'");
  std::cout << "exported " << seen.size() << " distinct texts to " << out_path << "\n";
  return kExitOk;
}

int cmd_import_embeddings(const std::string& in_path, const std::string& out_path) {
  require_file(in_path, "embeddings file");
  std::ifstream in(in_path);
  std::optional<FileBackedProvider> sidecar;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto key = j.at("key").get<std::string>();
      auto v = j.at("embedding").get<EmbeddingVector>();
      if (key.size() != 64) throw ParseError(in_path, line_no, "key is not a hex SHA-256");
      if (!sidecar) sidecar.emplace(v.size());
      sidecar->insert(key, std::move(v));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(in_path, line_no, e.what());
    }
  }
  if (!sidecar) throw DataError("'" + in_path + "' holds no embeddings");
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + out_path + "'");
  sidecar->write(out);
  if (!out) throw IoError("write failed for '" + out_path + "'");
  std::cout << "wrote " << sidecar->size() << " vectors of dimension " << sidecar->spec().dimension << " to "
            << out_path << "\n";
  return kExitOk;
}

int exit_code_for(const Error& e) {
  if (dynamic_cast<const DataError*>(&e)) return kExitEval;
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memroute: routed retrieval over conversational memory"};
  app.require_subcommand(1);
  Common c;

  auto add_common = [&](CLI::App* sub, bool store_root) {
    if (store_root) sub->add_option("--root", c.store_root, "Store root (default: $MEMROUTE_STORE_ROOT)");
    sub->add_option("--routes", c.routes, "Route table file")->capture_default_str();
    sub->add_option("--rules", c.rules, "Classifier rules file")->capture_default_str();
    sub->add_option("--provider", c.provider, "none | hash[:dim] | file:<sidecar>")->capture_default_str();
    sub->add_option("-k,--k", c.k, "Results per query")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--seed", c.seed, "Seed for every random draw")->capture_default_str();
    sub->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  };

  std::string bench, out, query, type = "auto", pipeline, mode = "oracle", build_time, run_a, run_b;
  bool force = false, no_dates = false, ndcg = false;
  std::size_t folds = 5;
  std::vector<std::string> candidates;
  for (auto p : kAllPipelines) candidates.emplace_back(to_string(p));

  auto* ingest = app.add_subcommand("ingest", "Build one store per benchmark instance");
  ingest->add_option("benchmark", bench, "Benchmark JSON")->required();
  add_common(ingest, true);
  ingest->add_option("--vocab", c.vocab, "Enrichment vocabulary")->capture_default_str();
  ingest->add_flag("--force", force, "Rebuild over an existing store root");
  ingest->add_flag("--no-dates", no_dates, "Do not index session timestamps");
  ingest->add_option("--build-time", build_time, "Timestamp recorded in manifests");

  auto* search = app.add_subcommand("search", "Query one store");
  search->add_option("store", out, "Store directory")->required();
  search->add_option("query", query, "Query text")->required();
  add_common(search, false);
  search->add_option("--type", type, "Query type or 'auto'")->capture_default_str();
  search->add_option("--pipeline", pipeline, "Run this pipeline, bypassing routing");

  auto* bench_cmd = app.add_subcommand("bench", "Run every instance and score the run");
  bench_cmd->add_option("benchmark", bench, "Benchmark JSON")->required();
  add_common(bench_cmd, true);
  bench_cmd->add_option("--mode", mode, "oracle | predicted | uniform:<pipeline>")->capture_default_str();
  bench_cmd->add_option("--out", out, "Output prefix for <prefix>.run.jsonl and <prefix>.report.json");

  auto* cv = app.add_subcommand("cv", "Stratified k-fold cross-validation of route derivation");
  cv->add_option("benchmark", bench, "Benchmark JSON")->required();
  add_common(cv, true);
  cv->add_option("--folds", folds, "Number of folds")->check(CLI::Range(2, 1000))->capture_default_str();
  cv->add_option("--candidates", candidates, "Candidate pipelines")->capture_default_str();
  cv->add_flag("--ndcg", ndcg, "Derive on NDCG instead of Ra");
  cv->add_option("--out", out, "JSON report path");

  auto* derive = app.add_subcommand("derive-routes", "Derive a route table from per-pipeline scores");
  derive->add_option("benchmark", bench, "Benchmark JSON")->required();
  add_common(derive, true);
  derive->add_option("--candidates", candidates, "Candidate pipelines")->capture_default_str();
  derive->add_flag("--ndcg", ndcg, "Derive on NDCG instead of Ra");
  derive->add_option("--out", out, "Route table output path");

  auto* classify = app.add_subcommand("classify", "Classify a query, or report accuracy over a benchmark");
  classify->add_option("query", query, "Query text");
  add_common(classify, false);
  classify->add_option("--bench", bench, "Benchmark JSON");

  auto* compare = app.add_subcommand("compare", "Paired bootstrap between two run files");
  compare->add_option("benchmark", bench, "Benchmark JSON")->required();
  compare->add_option("run_a", run_a, "Run file A")->required();
  compare->add_option("run_b", run_b, "Run file B")->required();
  add_common(compare, false);
  compare->add_flag("--ndcg", ndcg, "Compare NDCG instead of Ra");

  auto* export_texts = app.add_subcommand("export-texts", "Write texts needing embeddings as JSONL");
  export_texts->add_option("benchmark", bench, "Benchmark JSON")->required();
  export_texts->add_option("--out", out, "JSONL output")->required();

  std::string emb_in;
  auto* import_emb = app.add_subcommand("import-embeddings", "Pack {key, embedding} JSONL into a sidecar");
  import_emb->add_option("input", emb_in, "JSONL with key and embedding")->required();
  import_emb->add_option("--out", out, "Sidecar output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*ingest) return cmd_ingest(c, bench, force, no_dates, build_time);
    if (*search) return cmd_search(c, out, query, type, pipeline);
    if (*bench_cmd) return cmd_bench(c, bench, mode, out);
    if (*cv) return cmd_cv(c, bench, folds, candidates, ndcg, out);
    if (*derive) return cmd_derive(c, bench, candidates, ndcg, out);
    if (*classify) return cmd_classify(c, query, bench);
    if (*compare) return cmd_compare(c, bench, run_a, run_b, ndcg);
    if (*export_texts) return cmd_export_texts(bench, out);
    if (*import_emb) return cmd_import_embeddings(emb_in, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
