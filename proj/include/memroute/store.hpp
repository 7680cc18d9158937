#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "memroute/benchmark.hpp"
#include "memroute/digest.hpp"
#include "memroute/enrichment.hpp"
#include "memroute/error.hpp"
#include "memroute/lexical_index.hpp"
#include "memroute/vector_index.hpp"

namespace memroute {

/// One stored session. Raw content is never rewritten; enrichment lives
/// beside it and only reaches the enriched lexical index.
struct MemoryRecord {
  std::string session_id;
  std::string timestamp;
  std::string raw_content;
  std::string enrichment;
  std::string digest;  // hex SHA-256 of raw_content
};

struct BuildOptions {
  /// Prefix lexical content with a "date: <timestamp>" line.
  bool index_dates = true;
  std::string build_timestamp;  // recorded verbatim in the manifest
  std::uint64_t seed = 0;
};

struct StoreManifest {
  static constexpr int kFormatVersion = 1;

  int format_version = kFormatVersion;
  std::string instance_id;
  std::string vocabulary_version;
  std::string vocabulary_digest;  // SHA-256 of the vocabulary file, or empty
  std::optional<EmbeddingProviderSpec> provider;  // nullopt: lexical-only
  std::size_t session_count = 0;
  std::size_t instance_count = 1;
  std::string build_timestamp;
  std::uint64_t seed = 0;
  bool index_dates = true;
  std::size_t truncation_chars = kEmbeddingCharLimit;
  std::vector<std::pair<std::string, std::string>> files;  // name -> hex SHA-256

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["format_version"] = format_version;
    j["instance_id"] = instance_id;
    j["vocabulary"] = {{"version", vocabulary_version}, {"sha256", vocabulary_digest}};
    if (provider) {
      j["provider"] = {{"name", provider->name}, {"dimension", provider->dimension},
                       {"deterministic", provider->deterministic}};
    } else {
      j["provider"] = nullptr;
    }
    j["counts"] = {{"sessions", session_count}, {"instances", instance_count}};
    j["build_timestamp"] = build_timestamp;
    j["seed"] = seed;
    j["options"] = {{"index_dates", index_dates}, {"truncation_chars", truncation_chars}};
    auto files_j = nlohmann::json::object();
    for (const auto& [name, digest] : files) files_j[name] = digest;
    j["files"] = files_j;
    return j;
  }

  static StoreManifest from_json(const nlohmann::json& j) {
    StoreManifest m;
    try {
      m.format_version = j.at("format_version").get<int>();
      if (m.format_version != kFormatVersion) {
        throw CorruptStoreError("store format version " + std::to_string(m.format_version) +
                                " is not supported (expected " + std::to_string(kFormatVersion) + ")");
      }
      m.instance_id = j.at("instance_id").get<std::string>();
      m.vocabulary_version = j.at("vocabulary").at("version").get<std::string>();
      m.vocabulary_digest = j.at("vocabulary").at("sha256").get<std::string>();
      if (const auto& p = j.at("provider"); !p.is_null()) {
        m.provider = EmbeddingProviderSpec{p.at("name").get<std::string>(), p.at("dimension").get<std::size_t>(),
                                           p.at("deterministic").get<bool>()};
      }
      m.session_count = j.at("counts").at("sessions").get<std::size_t>();
      m.instance_count = j.at("counts").at("instances").get<std::size_t>();
      m.build_timestamp = j.at("build_timestamp").get<std::string>();
      m.seed = j.at("seed").get<std::uint64_t>();
      m.index_dates = j.at("options").at("index_dates").get<bool>();
      m.truncation_chars = j.at("options").at("truncation_chars").get<std::size_t>();
      for (const auto& [name, digest] : j.at("files").items()) m.files.emplace_back(name, digest.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw CorruptStoreError(std::string("manifest: ") + e.what());
    }
    return m;
  }
};

/// Per-haystack retrieval state: raw and enriched lexical indices and, unless
/// built lexical-only, a vector index over truncated raw content.
class Store {
 public:
  static constexpr const char* kManifestFile = "manifest.json";
  static constexpr const char* kRecordsFile = "records.jsonl";
  static constexpr const char* kRawIndexFile = "raw.lex";
  static constexpr const char* kEnrichedIndexFile = "enriched.lex";
  static constexpr const char* kVectorIndexFile = "vectors.vec";

  StoreManifest manifest;
  std::vector<MemoryRecord> records;  // raw_content is empty after open_store
  LexicalIndex raw_index;
  LexicalIndex enriched_index;
  std::optional<VectorIndex> vectors;

  bool has_vectors() const noexcept { return vectors.has_value(); }
};

/// Text indexed lexically for a record: an optional date line, the raw
/// content, and (for the enriched index) the enrichment terms.
inline std::string lexical_text(const MemoryRecord& r, bool index_dates, bool enriched) {
  std::string text;
  if (index_dates && !r.timestamp.empty()) {
    text = "date: " + r.timestamp + "\n";
  }
  text += r.raw_content;
  if (enriched && !r.enrichment.empty()) {
    text.push_back('\n');
    text += r.enrichment;
  }
  return text;
}

inline MemoryRecord make_record(const HaystackSession& session, const EnrichmentVocabulary& vocab) {
  MemoryRecord r;
  r.session_id = session.id;
  r.timestamp = session.date;
  r.raw_content = session.raw_content();
  r.enrichment = enrich(r.raw_content, vocab);
  r.digest = sha256_hex(r.raw_content);
  return r;
}

/// Builds every index in memory. `provider` may be null for a lexical-only
/// store. Provider failures name the offending session.
inline Store build_store_in_memory(const std::string& instance_id, const std::vector<HaystackSession>& sessions,
                                   const EnrichmentVocabulary& vocab, const EmbeddingProvider* provider,
                                   const BuildOptions& options = {}, const std::string& vocabulary_digest = {}) {
  Store store;
  auto& m = store.manifest;
  m.instance_id = instance_id;
  m.vocabulary_version = vocab.version;
  m.vocabulary_digest = vocabulary_digest;
  if (provider) m.provider = provider->spec();
  m.session_count = sessions.size();
  m.build_timestamp = options.build_timestamp;
  m.seed = options.seed;
  m.index_dates = options.index_dates;

  if (provider) store.vectors.emplace(provider->spec().dimension);
  store.records.reserve(sessions.size());
  for (const auto& session : sessions) {
    auto record = make_record(session, vocab);
    store.raw_index.add(record.session_id, lexical_text(record, options.index_dates, false));
    store.enriched_index.add(record.session_id, lexical_text(record, options.index_dates, true));
    if (provider) {
      try {
        store.vectors->add(record.session_id, provider->embed(record.raw_content));
      } catch (const Error& e) {
        throw ConfigError("embedding failed for session '" + record.session_id + "': " + e.what());
      }
    }
    store.records.push_back(std::move(record));
  }
  return store;
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline std::string records_jsonl(const std::vector<MemoryRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::json j{{"session_id", r.session_id},
                     {"timestamp", r.timestamp},
                     {"digest", r.digest},
                     {"enrichment", r.enrichment}};
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace detail

/// Writes `store` under `out_dir`. Files are staged in a sibling directory
/// and renamed into place, so a failed write leaves no partial store.
inline void save_store(const Store& store, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  if (fs::exists(out_dir)) throw IoError("store path '" + out_dir.string() + "' already exists");
  const fs::path staging = out_dir.string() + ".partial";
  fs::remove_all(staging);
  fs::create_directories(staging);

  std::vector<std::pair<std::string, std::string>> files;
  auto emit = [&](const char* name, const std::string& bytes) {
    detail::write_file(staging / name, bytes);
    files.emplace_back(name, sha256_hex(bytes));
  };
  {
    std::ostringstream os;
    store.raw_index.save(os);
    emit(Store::kRawIndexFile, os.str());
  }
  {
    std::ostringstream os;
    store.enriched_index.save(os);
    emit(Store::kEnrichedIndexFile, os.str());
  }
  if (store.vectors) {
    std::ostringstream os(std::ios::binary);
    store.vectors->save(os);
    emit(Store::kVectorIndexFile, os.str());
  }
  emit(Store::kRecordsFile, detail::records_jsonl(store.records));

  StoreManifest m = store.manifest;
  m.files = std::move(files);
  detail::write_file(staging / Store::kManifestFile, m.to_json().dump(2) + "\n");
  fs::create_directories(out_dir.parent_path().empty() ? fs::path(".") : out_dir.parent_path());
  fs::rename(staging, out_dir);
}

/// Builds a store for one haystack and persists it to `out_dir`.
inline StoreManifest build_store(const std::string& instance_id, const std::vector<HaystackSession>& sessions,
                                 const EnrichmentVocabulary& vocab, const EmbeddingProvider* provider,
                                 const std::filesystem::path& out_dir, const BuildOptions& options = {},
                                 const std::string& vocabulary_digest = {}) {
  auto store = build_store_in_memory(instance_id, sessions, vocab, provider, options, vocabulary_digest);
  save_store(store, out_dir);
  return store.manifest;
}

/// Opens a persisted store read-only, validating the manifest version and
/// every file checksum before parsing.
inline Store open_store(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const auto manifest_path = dir / Store::kManifestFile;
  if (!fs::exists(manifest_path)) throw IoError("no store manifest at '" + manifest_path.string() + "'");
  Store store;
  try {
    store.manifest = StoreManifest::from_json(nlohmann::json::parse(read_file(manifest_path.string())));
  } catch (const nlohmann::json::exception& e) {
    throw CorruptStoreError("manifest '" + manifest_path.string() + "': " + e.what());
  }

  auto checked = [&](const char* name) -> std::optional<std::string> {
    const auto it = std::find_if(store.manifest.files.begin(), store.manifest.files.end(),
                                 [&](const auto& f) { return f.first == name; });
    if (it == store.manifest.files.end()) return std::nullopt;
    const auto path = dir / name;
    if (!fs::exists(path)) throw CorruptStoreError("store file '" + path.string() + "' is missing");
    auto bytes = read_file(path.string());
    if (sha256_hex(bytes) != it->second) {
      throw CorruptStoreError("checksum mismatch for '" + path.string() + "'");
    }
    return bytes;
  };

  const auto raw = checked(Store::kRawIndexFile);
  const auto enriched = checked(Store::kEnrichedIndexFile);
  const auto records = checked(Store::kRecordsFile);
  if (!raw || !enriched || !records) throw CorruptStoreError("manifest does not list every required file");
  {
    std::istringstream is(*raw);
    store.raw_index = LexicalIndex::load(is);
  }
  {
    std::istringstream is(*enriched);
    store.enriched_index = LexicalIndex::load(is);
  }
  if (const auto vec = checked(Store::kVectorIndexFile)) {
    if (!store.manifest.provider) throw CorruptStoreError("vector index present in a lexical-only store");
    std::istringstream is(*vec, std::ios::binary);
    store.vectors = VectorIndex::load(is);
    if (store.vectors->dimension() != store.manifest.provider->dimension) {
      throw CorruptStoreError("vector index dimension disagrees with manifest");
    }
  } else if (store.manifest.provider) {
    throw CorruptStoreError("manifest names a provider but lists no vector index");
  }
  std::istringstream rs(*records);
  std::string line;
  while (std::getline(rs, line)) {
    try {
      const auto j = nlohmann::json::parse(line);
      MemoryRecord r;
      r.session_id = j.at("session_id").get<std::string>();
      r.timestamp = j.at("timestamp").get<std::string>();
      r.digest = j.at("digest").get<std::string>();
      r.enrichment = j.at("enrichment").get<std::string>();
      store.records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw CorruptStoreError(std::string("records: ") + e.what());
    }
  }
  if (store.records.size() != store.manifest.session_count ||
      store.raw_index.doc_count() != store.manifest.session_count) {
    throw CorruptStoreError("session count disagrees with manifest");
  }
  return store;
}

}  // namespace memroute
