#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "memroute/error.hpp"
#include "memroute/metrics.hpp"
#include "memroute/query_type.hpp"

namespace memroute {

inline constexpr std::size_t kMaxGoldSessions = 6;

/// One evaluation query. Abstention instances keep the type they were asked
/// as in `surface_type` and have an empty gold set.
struct BenchmarkInstance {
  std::string id;
  std::string question;
  QueryType qtype = QueryType::kKnowledgeUpdate;
  std::optional<QueryType> surface_type;
  GoldSet gold;
  std::vector<std::string> haystack_session_ids;
  std::optional<std::string> question_date;

  bool is_abstention() const noexcept { return qtype == QueryType::kAbstention; }
};

struct Turn {
  std::string role;
  std::string content;
};

struct HaystackSession {
  std::string id;
  std::string date;  // empty when the benchmark carries no timestamp
  std::vector<Turn> turns;

  /// Turns serialized as "role: text" lines.
  std::string raw_content() const {
    std::string out;
    for (const auto& t : turns) {
      if (!out.empty()) out.push_back('\n');
      out += t.role;
      out += ": ";
      out += t.content;
    }
    return out;
  }
};

struct BenchmarkEntry {
  BenchmarkInstance instance;
  std::vector<HaystackSession> sessions;  // parallel to instance.haystack_session_ids
};

namespace detail {

/// Calls `fn` with the text of each element of a top-level JSON array,
/// reading the stream incrementally so whole files never sit in memory.
inline void for_each_array_element(std::istream& in, const std::string& source,
                                   const std::function<void(const std::string&, std::size_t)>& fn) {
  char c = 0;
  while (in.get(c) && std::isspace(static_cast<unsigned char>(c))) {
  }
  if (!in || c != '[') throw DataError(source + ": expected a JSON array of instances");
  std::string element;
  int depth = 0;
  bool in_string = false, escaped = false;
  std::size_t index = 0;
  while (in.get(c)) {
    if (in_string) {
      element.push_back(c);
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (depth == 0) {
      if (std::isspace(static_cast<unsigned char>(c)) || c == ',') continue;
      if (c == ']') return;
    }
    element.push_back(c);
    if (c == '"') in_string = true;
    else if (c == '{' || c == '[') ++depth;
    else if (c == '}' || c == ']') {
      if (--depth < 0) throw DataError(source + ": unbalanced JSON");
      if (depth == 0) {
        fn(element, index++);
        element.clear();
      }
    } else if (depth == 0) {
      throw DataError(source + ": instance " + std::to_string(index) + " is not a JSON object");
    }
  }
  throw DataError(source + ": unterminated JSON array");
}

class SchemaReader {
 public:
  SchemaReader(const nlohmann::json& root, std::string where) : root_(root), where_(std::move(where)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw DataError(where_ + ": field " + path + ": " + what);
  }

  const nlohmann::json& field(const nlohmann::json& obj, const std::string& key, const std::string& path) const {
    if (!obj.is_object()) fail(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing");
    return *it;
  }

  std::string string_at(const nlohmann::json& v, const std::string& path) const {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    fail(path, "expected a string");
  }

  const nlohmann::json& array_at(const nlohmann::json& v, const std::string& path) const {
    if (!v.is_array()) fail(path, "expected an array");
    return v;
  }

  const nlohmann::json& root() const { return root_; }
  void set_where(std::string where) { where_ = std::move(where); }

 private:
  const nlohmann::json& root_;
  std::string where_;
};

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

inline BenchmarkEntry parse_entry(const nlohmann::json& j, std::size_t index, const std::string& source,
                                  bool with_sessions) {
  SchemaReader r(j, source + ": instance #" + std::to_string(index));
  BenchmarkEntry entry;
  auto& inst = entry.instance;
  inst.id = r.string_at(r.field(j, "question_id", ""), "question_id");
  if (inst.id.empty()) r.fail("question_id", "empty");
  r.set_where(source + ": instance '" + inst.id + "'");
  inst.question = r.string_at(r.field(j, "question", ""), "question");

  const auto type_text = r.string_at(r.field(j, "question_type", ""), "question_type");
  const auto parsed_type = parse_query_type(type_text);
  if (!parsed_type) r.fail("question_type", "unknown query type '" + type_text + "'");
  const bool abstention = ends_with(inst.id, "_abs") || *parsed_type == QueryType::kAbstention;
  if (abstention) {
    inst.qtype = QueryType::kAbstention;
    if (is_retrieval_type(*parsed_type)) inst.surface_type = *parsed_type;
  } else {
    inst.qtype = *parsed_type;
    inst.surface_type = *parsed_type;
  }

  if (const auto it = j.find("question_date"); it != j.end() && !it->is_null()) {
    inst.question_date = r.string_at(*it, "question_date");
  }

  const auto& ids = r.array_at(r.field(j, "haystack_session_ids", ""), "haystack_session_ids");
  std::unordered_set<std::string> haystack;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto id = r.string_at(ids[i], "haystack_session_ids[" + std::to_string(i) + "]");
    if (id.empty()) r.fail("haystack_session_ids[" + std::to_string(i) + "]", "empty session id");
    if (!haystack.insert(id).second) {
      r.fail("haystack_session_ids[" + std::to_string(i) + "]", "duplicate session id '" + id + "'");
    }
    inst.haystack_session_ids.push_back(std::move(id));
  }

  const auto& answers = r.array_at(r.field(j, "answer_session_ids", ""), "answer_session_ids");
  if (!abstention) {
    for (std::size_t i = 0; i < answers.size(); ++i) {
      auto id = r.string_at(answers[i], "answer_session_ids[" + std::to_string(i) + "]");
      if (!haystack.contains(id)) {
        throw DataError(source + ": instance '" + inst.id + "': gold session '" + id +
                        "' is not in the haystack");
      }
      inst.gold.insert(std::move(id));
    }
    if (inst.gold.empty()) r.fail("answer_session_ids", "retrieval instance has no gold session");
    if (inst.gold.size() > kMaxGoldSessions) {
      r.fail("answer_session_ids", "more than " + std::to_string(kMaxGoldSessions) + " gold sessions");
    }
  }

  const auto& sessions = r.array_at(r.field(j, "haystack_sessions", ""), "haystack_sessions");
  if (sessions.size() != inst.haystack_session_ids.size()) {
    r.fail("haystack_sessions", "length " + std::to_string(sessions.size()) + " differs from haystack_session_ids");
  }
  const nlohmann::json* dates = nullptr;
  if (const auto it = j.find("haystack_dates"); it != j.end() && !it->is_null()) {
    dates = &r.array_at(*it, "haystack_dates");
    if (dates->size() != sessions.size()) r.fail("haystack_dates", "length differs from haystack_sessions");
  }
  if (with_sessions) {
    entry.sessions.reserve(sessions.size());
    for (std::size_t s = 0; s < sessions.size(); ++s) {
      const std::string spath = "haystack_sessions[" + std::to_string(s) + "]";
      HaystackSession session;
      session.id = inst.haystack_session_ids[s];
      if (dates) session.date = r.string_at((*dates)[s], "haystack_dates[" + std::to_string(s) + "]");
      const auto& turns = r.array_at(sessions[s], spath);
      for (std::size_t t = 0; t < turns.size(); ++t) {
        const std::string tpath = spath + "[" + std::to_string(t) + "]";
        Turn turn;
        turn.role = r.string_at(r.field(turns[t], "role", tpath), tpath + ".role");
        turn.content = r.string_at(r.field(turns[t], "content", tpath), tpath + ".content");
        session.turns.push_back(std::move(turn));
      }
      entry.sessions.push_back(std::move(session));
    }
  }
  return entry;
}

}  // namespace detail

/// Streams a LongMemEval-shaped benchmark file entry by entry. With
/// `with_sessions` false the haystack text is validated for shape only and
/// dropped.
inline void for_each_benchmark_entry(const std::string& path, const std::function<void(BenchmarkEntry&&)>& fn,
                                     bool with_sessions = true) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open benchmark file '" + path + "'");
  std::unordered_set<std::string> ids;
  detail::for_each_array_element(in, path, [&](const std::string& text, std::size_t index) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(path + ": instance #" + std::to_string(index) + ": " + e.what());
    }
    auto entry = detail::parse_entry(j, index, path, with_sessions);
    if (!ids.insert(entry.instance.id).second) {
      throw DataError(path + ": duplicate question_id '" + entry.instance.id + "'");
    }
    fn(std::move(entry));
  });
}

struct Benchmark {
  std::vector<BenchmarkEntry> entries;

  std::vector<BenchmarkInstance> instances() const {
    std::vector<BenchmarkInstance> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.instance);
    return out;
  }
};

inline Benchmark load_benchmark(const std::string& path) {
  Benchmark b;
  for_each_benchmark_entry(path, [&](BenchmarkEntry&& e) { b.entries.push_back(std::move(e)); });
  return b;
}

/// Instances only; haystack text is not retained.
inline std::vector<BenchmarkInstance> load_benchmark_instances(const std::string& path) {
  std::vector<BenchmarkInstance> out;
  for_each_benchmark_entry(path, [&](BenchmarkEntry&& e) { out.push_back(std::move(e.instance)); }, false);
  return out;
}

/// Serializes an entry back into the input schema.
inline nlohmann::json to_json(const BenchmarkEntry& e) {
  nlohmann::json j;
  const auto& inst = e.instance;
  j["question_id"] = inst.id;
  j["question_type"] = std::string(to_string(inst.surface_type.value_or(inst.qtype)));
  j["question"] = inst.question;
  if (inst.question_date) j["question_date"] = *inst.question_date;
  j["haystack_session_ids"] = inst.haystack_session_ids;
  j["answer_session_ids"] = std::vector<std::string>(inst.gold.begin(), inst.gold.end());
  auto dates = nlohmann::json::array();
  auto sessions = nlohmann::json::array();
  bool any_date = false;
  for (const auto& s : e.sessions) {
    dates.push_back(s.date);
    any_date = any_date || !s.date.empty();
    auto turns = nlohmann::json::array();
    for (const auto& t : s.turns) turns.push_back({{"role", t.role}, {"content", t.content}});
    sessions.push_back(std::move(turns));
  }
  if (any_date) j["haystack_dates"] = std::move(dates);
  j["haystack_sessions"] = std::move(sessions);
  return j;
}

inline void write_benchmark(std::ostream& out, const Benchmark& b) {
  auto arr = nlohmann::json::array();
  for (const auto& e : b.entries) arr.push_back(to_json(e));
  out << arr.dump(1) << '\n';
}

}  // namespace memroute
