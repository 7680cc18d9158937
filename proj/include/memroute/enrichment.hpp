#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "memroute/error.hpp"
#include "memroute/tokenizer.hpp"

namespace memroute {

/// Ordered trigger -> terms rules. Used for both hypernym maps and action
/// bridges; the two differ only in the data they carry.
class TermMap {
 public:
  struct Entry {
    std::string trigger;
    std::vector<std::string> terms;
  };

  void insert(Entry e) {
    index_.emplace(e.trigger, entries_.size());
    entries_.push_back(std::move(e));
  }

  const std::vector<std::string>* find(const std::string& trigger) const {
    const auto it = index_.find(trigger);
    return it == index_.end() ? nullptr : &entries_[it->second].terms;
  }

  bool contains(const std::string& trigger) const { return index_.contains(trigger); }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

using HypernymMap = TermMap;
using ActionBridge = TermMap;

/// A named term set that activates when every trigger of any one of its
/// trigger sets occurs in the content.
struct TopicRoom {
  std::string name;
  std::vector<std::vector<std::string>> trigger_sets;
  std::vector<std::string> added_terms;
};

struct EnrichmentVocabulary {
  std::string version;  // V1, V2 or V3; empty when the file does not declare one
  HypernymMap hypernyms;
  ActionBridge bridges;
  std::vector<TopicRoom> rooms;

  bool empty() const noexcept { return hypernyms.empty() && bridges.empty() && rooms.empty(); }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split_terms(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(sep, start);
    const auto piece = s.substr(start, pos == std::string_view::npos ? s.npos : pos - start);
    out.push_back(trim(piece));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

/// Parses the line-oriented vocabulary format (docs/formats.md):
///
///     @version V2
///     [hypernyms]
///     cocktail -> drink, beverage, alcohol, mixed_drink
///     [bridges]
///     attended -> went, participated, was_at, visited
///     [rooms]
///     food_dining | cooking, recipe | meal, restaurant, cuisine
///
/// A room name may repeat on several lines to declare alternative trigger
/// sets; every repetition must list the same terms.
inline EnrichmentVocabulary parse_vocabulary(std::istream& in, const std::string& source = "vocabulary") {
  enum class Section { kNone, kHypernyms, kBridges, kRooms };
  EnrichmentVocabulary vocab;
  Section section = Section::kNone;
  std::unordered_map<std::string, std::size_t> room_index;
  std::string raw;
  std::size_t line_no = 0;

  auto check_term = [&](const std::string& term, const std::string& entry) {
    if (!is_single_token(term)) {
      throw ParseError(source, line_no,
                       "entry '" + entry + "': '" + term + "' is not a single normalized token");
    }
  };

  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = detail::trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;

    if (line.front() == '@') {
      std::istringstream ds(line.substr(1));
      std::string key, value, extra;
      ds >> key >> value;
      if (key != "version" || value.empty() || (ds >> extra)) {
        throw ParseError(source, line_no, "unknown directive '" + line + "'");
      }
      vocab.version = value;
      continue;
    }
    if (line.front() == '[') {
      if (line == "[hypernyms]") section = Section::kHypernyms;
      else if (line == "[bridges]") section = Section::kBridges;
      else if (line == "[rooms]") section = Section::kRooms;
      else throw ParseError(source, line_no, "unknown section " + line);
      continue;
    }

    switch (section) {
      case Section::kNone:
        throw ParseError(source, line_no, "rule outside of a section");
      case Section::kHypernyms:
      case Section::kBridges: {
        const auto arrow = line.find("->");
        if (arrow == std::string::npos) throw ParseError(source, line_no, "expected 'trigger -> term, ...'");
        const std::string trigger = detail::trim(std::string_view(line).substr(0, arrow));
        auto terms = detail::split_terms(std::string_view(line).substr(arrow + 2), ',');
        if (trigger.empty()) throw ParseError(source, line_no, "empty trigger");
        check_term(trigger, trigger);
        std::vector<std::string> unique;
        for (auto& t : terms) {
          if (t.empty()) throw ParseError(source, line_no, "entry '" + trigger + "': empty term");
          check_term(t, trigger);
          if (std::find(unique.begin(), unique.end(), t) == unique.end()) unique.push_back(std::move(t));
        }
        if (unique.size() == 1 && unique.front() == trigger) {
          throw ParseError(source, line_no, "entry '" + trigger + "' maps only to itself");
        }
        auto& map = section == Section::kHypernyms ? vocab.hypernyms : vocab.bridges;
        if (map.contains(trigger)) throw ParseError(source, line_no, "duplicate trigger '" + trigger + "'");
        map.insert({trigger, std::move(unique)});
        break;
      }
      case Section::kRooms: {
        const auto fields = detail::split_terms(line, '|');
        if (fields.size() != 3) throw ParseError(source, line_no, "expected 'room | triggers | terms'");
        const std::string& name = fields[0];
        if (name.empty()) throw ParseError(source, line_no, "empty room name");
        check_term(name, name);
        auto triggers = detail::split_terms(fields[1], ',');
        auto terms = detail::split_terms(fields[2], ',');
        for (const auto& t : triggers) {
          if (t.empty()) throw ParseError(source, line_no, "room '" + name + "': empty trigger");
          check_term(t, name);
        }
        for (const auto& t : terms) {
          if (t.empty()) throw ParseError(source, line_no, "room '" + name + "': empty term");
          check_term(t, name);
        }
        std::sort(triggers.begin(), triggers.end());
        triggers.erase(std::unique(triggers.begin(), triggers.end()), triggers.end());
        if (triggers.size() < 2) {
          throw ParseError(source, line_no, "room '" + name + "' needs at least two distinct triggers");
        }
        if (const auto it = room_index.find(name); it != room_index.end()) {
          auto& room = vocab.rooms[it->second];
          if (room.added_terms != terms) {
            throw ParseError(source, line_no, "room '" + name + "' repeated with different terms");
          }
          room.trigger_sets.push_back(std::move(triggers));
        } else {
          room_index.emplace(name, vocab.rooms.size());
          vocab.rooms.push_back({name, {std::move(triggers)}, std::move(terms)});
        }
        break;
      }
    }
  }
  return vocab;
}

inline EnrichmentVocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file '" + path + "'");
  return parse_vocabulary(in, path);
}

/// Enrichment terms for `content`: hypernym expansions and bridge terms for
/// each matching token in content order, then the name and terms of every
/// activated room. Deduplicated, first occurrence wins. The content itself
/// is not part of the result.
inline std::string enrich(std::string_view content, const EnrichmentVocabulary& vocab) {
  if (vocab.empty()) return {};
  const auto tokens = tokenize(content);
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  auto emit = [&](const std::string& term) {
    if (seen.insert(term).second) out.push_back(term);
  };
  for (const auto& token : tokens) {
    if (const auto* terms = vocab.hypernyms.find(token)) {
      for (const auto& t : *terms) emit(t);
    }
    if (const auto* terms = vocab.bridges.find(token)) {
      for (const auto& t : *terms) emit(t);
    }
  }
  if (!vocab.rooms.empty()) {
    const std::unordered_set<std::string> present(tokens.begin(), tokens.end());
    for (const auto& room : vocab.rooms) {
      const bool active = std::any_of(room.trigger_sets.begin(), room.trigger_sets.end(), [&](const auto& set) {
        return std::all_of(set.begin(), set.end(), [&](const auto& t) { return present.contains(t); });
      });
      if (!active) continue;
      emit(room.name);
      for (const auto& t : room.added_terms) emit(t);
    }
  }
  std::string joined;
  for (const auto& t : out) {
    if (!joined.empty()) joined.push_back(' ');
    joined += t;
  }
  return joined;
}

}  // namespace memroute
