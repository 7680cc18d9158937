#pragma once

#include <array>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "memroute/enrichment.hpp"
#include "memroute/error.hpp"
#include "memroute/query_type.hpp"
#include "memroute/router.hpp"

namespace memroute {

/// Priority-ordered regex stages. The first stage with any matching pattern
/// decides the type; knowledge-update is the fallback.
///
/// Patterns use the ECMAScript grammar of std::regex and match
/// case-insensitively anywhere in the raw query text.
class RuleSet {
 public:
  enum class Stage { kTemporal, kAssistant, kPreference, kAggregation, kUserAction };

  static constexpr std::array<Stage, 5> kStageOrder = {
      Stage::kTemporal, Stage::kAssistant, Stage::kPreference, Stage::kAggregation, Stage::kUserAction};

  static constexpr std::string_view stage_name(Stage s) {
    switch (s) {
      case Stage::kTemporal: return "temporal";
      case Stage::kAssistant: return "assistant";
      case Stage::kPreference: return "preference";
      case Stage::kAggregation: return "aggregation";
      case Stage::kUserAction: return "user-action";
    }
    return "?";
  }

  static constexpr QueryType stage_type(Stage s) {
    switch (s) {
      case Stage::kTemporal: return QueryType::kTemporalReasoning;
      case Stage::kAssistant: return QueryType::kSingleSessionAssistant;
      case Stage::kPreference: return QueryType::kSingleSessionPreference;
      case Stage::kAggregation: return QueryType::kMultiSession;
      case Stage::kUserAction: return QueryType::kSingleSessionUser;
    }
    return QueryType::kKnowledgeUpdate;
  }

  static constexpr QueryType kDefaultType = QueryType::kKnowledgeUpdate;

  void add_pattern(Stage stage, const std::string& pattern) {
    auto& slot = stages_[static_cast<std::size_t>(stage)];
    slot.sources.push_back(pattern);
    slot.compiled.emplace_back(pattern, std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
  }

  std::size_t pattern_count(Stage stage) const { return stages_[static_cast<std::size_t>(stage)].sources.size(); }

  /// The stage that fires for `text`, if any.
  std::optional<Stage> matching_stage(const std::string& text) const {
    for (auto stage : kStageOrder) {
      for (const auto& re : stages_[static_cast<std::size_t>(stage)].compiled) {
        if (std::regex_search(text, re)) return stage;
      }
    }
    return std::nullopt;
  }

  QueryType classify(const std::string& text) const {
    const auto stage = matching_stage(text);
    return stage ? stage_type(*stage) : kDefaultType;
  }

 private:
  struct StageRules {
    std::vector<std::string> sources;
    std::vector<std::regex> compiled;
  };
  std::array<StageRules, kStageOrder.size()> stages_;
};

/// Pattern file: "[stage]" headers (temporal, assistant, preference,
/// aggregation, user-action) followed by one pattern per line. Lines whose
/// first non-blank character is "#" are comments; pattern lines are taken
/// verbatim after trimming surrounding whitespace.
inline RuleSet parse_rules(std::istream& in, const std::string& source = "rules") {
  RuleSet rules;
  std::optional<RuleSet::Stage> current;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      const auto name = line.substr(1, line.size() - 2);
      current.reset();
      for (auto s : RuleSet::kStageOrder) {
        if (RuleSet::stage_name(s) == name) current = s;
      }
      if (!current) throw ParseError(source, line_no, "unknown stage '" + name + "'");
      continue;
    }
    if (!current) throw ParseError(source, line_no, "pattern outside of a stage");
    try {
      rules.add_pattern(*current, line);
    } catch (const std::regex_error& e) {
      throw ParseError(source, line_no, "invalid pattern '" + line + "': " + e.what());
    }
  }
  return rules;
}

inline RuleSet load_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open classifier rules '" + path + "'");
  return parse_rules(in, path);
}

inline QueryType classify_query(const std::string& text, const RuleSet& rules) { return rules.classify(text); }

struct ClassificationReport {
  struct TypeAccuracy {
    std::size_t n = 0;
    std::size_t correct = 0;
    double accuracy() const { return n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0; }
  };

  std::map<QueryType, TypeAccuracy> per_type;
  std::size_t n = 0;
  std::size_t exact_correct = 0;
  std::size_t effective_correct = 0;
  std::map<std::pair<QueryType, QueryType>, std::size_t> confusion;  // (gold, predicted)

  double overall_accuracy() const { return n ? static_cast<double>(exact_correct) / static_cast<double>(n) : 0.0; }
  double effective_accuracy() const {
    return n ? static_cast<double>(effective_correct) / static_cast<double>(n) : 0.0;
  }
};

/// A prediction is effectively correct when it names the gold type or routes
/// to a pipeline in the same family as the gold type's route.
inline ClassificationReport effective_accuracy(std::span<const QueryType> gold,
                                               std::span<const QueryType> predicted,
                                               const RouteTable& table) {
  if (gold.size() != predicted.size()) {
    throw UsageError("effective_accuracy: " + std::to_string(gold.size()) + " gold labels vs " +
                     std::to_string(predicted.size()) + " predictions");
  }
  ClassificationReport report;
  report.n = gold.size();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto g = gold[i];
    const auto p = predicted[i];
    auto& row = report.per_type[g];
    ++row.n;
    ++report.confusion[{g, p}];
    const bool exact = g == p;
    const bool same_family = family_of(resolve_route(g, table)) == family_of(resolve_route(p, table));
    if (exact) {
      ++row.correct;
      ++report.exact_correct;
    }
    if (exact || same_family) ++report.effective_correct;
  }
  return report;
}

}  // namespace memroute
