#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <unicode/utf8.h>

#include "memroute/binary_io.hpp"
#include "memroute/digest.hpp"
#include "memroute/error.hpp"
#include "memroute/ranked_list.hpp"
#include "memroute/tokenizer.hpp"

namespace memroute {

using EmbeddingVector = std::vector<float>;

inline constexpr std::size_t kEmbeddingCharLimit = 2000;

/// First 2,000 Unicode scalar values of `text`. Invalid UTF-8 bytes count as
/// one character each.
inline std::string truncate_for_embedding(std::string_view text,
                                          std::size_t limit = kEmbeddingCharLimit) {
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(text.data());
  const auto length = static_cast<std::int32_t>(text.size());
  std::int32_t i = 0;
  std::size_t chars = 0;
  while (i < length && chars < limit) {
    UChar32 c = 0;
    U8_NEXT(bytes, i, length, c);
    ++chars;
  }
  return std::string(text.substr(0, static_cast<std::size_t>(i)));
}

/// Lookup key for precomputed vectors: hex SHA-256 of the truncated text.
inline std::string embedding_key(std::string_view text) {
  return sha256_hex(truncate_for_embedding(text));
}

struct EmbeddingProviderSpec {
  std::string name;
  std::size_t dimension = 0;
  bool deterministic = true;

  friend bool operator==(const EmbeddingProviderSpec&, const EmbeddingProviderSpec&) = default;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual const EmbeddingProviderSpec& spec() const noexcept = 0;

  /// Embeds `text` after truncation to the character limit.
  EmbeddingVector embed(std::string_view text) const {
    auto v = embed_truncated(truncate_for_embedding(text));
    if (v.size() != spec().dimension) {
      throw DimensionMismatch("provider '" + spec().name + "' returned a vector of dimension " +
                              std::to_string(v.size()) + ", declared " +
                              std::to_string(spec().dimension));
    }
    return v;
  }

 protected:
  virtual EmbeddingVector embed_truncated(const std::string& truncated) const = 0;
};

/// Hashed bag-of-words: each token adds one to bucket fnv1a64(token) % d,
/// then the vector is L2-normalized. Deterministic and model-free.
class HashedBagOfWordsProvider final : public EmbeddingProvider {
 public:
  static constexpr std::size_t kDefaultDimension = 256;

  explicit HashedBagOfWordsProvider(std::size_t dimension = kDefaultDimension)
      : spec_{"hashed-bow", dimension, true} {
    if (dimension == 0) throw UsageError("hashed-bow: dimension must be >= 1");
  }

  const EmbeddingProviderSpec& spec() const noexcept override { return spec_; }

  std::size_t bucket(std::string_view token) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : token) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h % spec_.dimension);
  }

 protected:
  EmbeddingVector embed_truncated(const std::string& truncated) const override {
    std::vector<double> counts(spec_.dimension, 0.0);
    for (const auto& token : tokenize(truncated)) counts[bucket(token)] += 1.0;
    double norm2 = 0.0;
    for (double c : counts) norm2 += c * c;
    EmbeddingVector out(spec_.dimension, 0.0f);
    if (norm2 > 0.0) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (std::size_t i = 0; i < counts.size(); ++i) out[i] = static_cast<float>(counts[i] * inv);
    }
    return out;
  }

 private:
  EmbeddingProviderSpec spec_;
};

/// Vectors computed offline and loaded from a sidecar file keyed by
/// embedding_key(). Layout in docs/formats.md.
class FileBackedProvider final : public EmbeddingProvider {
 public:
  static constexpr std::string_view kMagic = "MREMBED1";
  static constexpr std::string_view kName = "file-backed";

  explicit FileBackedProvider(std::size_t dimension, std::string name = std::string(kName))
      : spec_{std::move(name), dimension, true} {
    if (dimension == 0) throw UsageError("file-backed provider: dimension must be >= 1");
  }

  static FileBackedProvider load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open embeddings sidecar '" + path + "'");
    return read(in);
  }

  static FileBackedProvider read(std::istream& in, std::string name = std::string(kName)) {
    std::string magic(kMagic.size(), '\0');
    binio::get_exact(in, magic.data(), magic.size(), "sidecar magic");
    if (magic != kMagic) throw CorruptStoreError("embeddings sidecar: bad magic");
    const auto dim = binio::get_u32(in, "sidecar dimension");
    const auto count = binio::get_u64(in, "sidecar count");
    FileBackedProvider p(dim, std::move(name));
    for (std::uint64_t r = 0; r < count; ++r) {
      Sha256 digest{};
      binio::get_exact(in, reinterpret_cast<char*>(digest.data()), digest.size(), "sidecar digest");
      EmbeddingVector v(dim);
      for (auto& x : v) x = binio::get_f32(in, "sidecar vector");
      p.insert(to_hex(digest), std::move(v));
    }
    binio::expect_eof(in, "embeddings sidecar");
    return p;
  }

  void insert(const std::string& key_hex, EmbeddingVector v) {
    if (v.size() != spec_.dimension) {
      throw DimensionMismatch("embeddings sidecar: vector for " + key_hex + " has dimension " +
                              std::to_string(v.size()));
    }
    for (float x : v) {
      if (!std::isfinite(x)) throw DataError("embeddings sidecar: non-finite entry for " + key_hex);
    }
    vectors_[key_hex] = std::move(v);
  }

  bool contains(const std::string& key_hex) const { return vectors_.contains(key_hex); }
  std::size_t size() const noexcept { return vectors_.size(); }

  /// Records are written in ascending digest order.
  void write(std::ostream& out) const {
    out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
    binio::put_u32(out, static_cast<std::uint32_t>(spec_.dimension));
    binio::put_u64(out, vectors_.size());
    for (const auto& [key, v] : vectors_) {
      const auto digest = from_hex(key);
      out.write(reinterpret_cast<const char*>(digest.data()), digest.size());
      for (float x : v) binio::put_f32(out, x);
    }
  }

  const EmbeddingProviderSpec& spec() const noexcept override { return spec_; }

 protected:
  EmbeddingVector embed_truncated(const std::string& truncated) const override {
    const auto key = sha256_hex(truncated);
    const auto it = vectors_.find(key);
    if (it == vectors_.end()) {
      throw MissingEmbeddingError("no precomputed embedding for digest " + key);
    }
    return it->second;
  }

 private:
  EmbeddingProviderSpec spec_;
  std::map<std::string, EmbeddingVector> vectors_;
};

/// Cosine similarity; 0 when either vector has zero norm.
inline double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("cosine: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

/// Exact cosine top-k over every stored vector.
class VectorIndex {
 public:
  static constexpr std::string_view kMagic = "MRVINDX1";

  explicit VectorIndex(std::size_t dimension) : dimension_(dimension) {
    if (dimension == 0) throw UsageError("vector index: dimension must be >= 1");
  }

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& doc_ids() const noexcept { return ids_; }
  const EmbeddingVector& vector(std::size_t i) const { return vectors_.at(i); }

  void add(const std::string& doc_id, EmbeddingVector v) {
    if (v.size() != dimension_) {
      throw DimensionMismatch("vector index: '" + doc_id + "' has dimension " +
                              std::to_string(v.size()) + ", index expects " +
                              std::to_string(dimension_));
    }
    for (float x : v) {
      if (!std::isfinite(x)) throw UsageError("vector index: non-finite entry in '" + doc_id + "'");
    }
    if (!lookup_.emplace(doc_id, ids_.size()).second) {
      throw UsageError("vector index: duplicate doc id '" + doc_id + "'");
    }
    double n2 = 0.0;
    for (float x : v) n2 += static_cast<double>(x) * x;
    ids_.push_back(doc_id);
    norms_.push_back(std::sqrt(n2));
    vectors_.push_back(std::move(v));
  }

  RankedList search(const EmbeddingVector& query, std::size_t k) const {
    if (k == 0) throw UsageError("cosine_search: k must be >= 1");
    if (query.size() != dimension_) {
      throw DimensionMismatch("cosine_search: query dimension " + std::to_string(query.size()) +
                              " but store holds dimension " + std::to_string(dimension_) +
                              "; provider and store disagree");
    }
    double qn2 = 0.0;
    for (float x : query) qn2 += static_cast<double>(x) * x;
    const double qn = std::sqrt(qn2);
    std::vector<Hit> hits;
    hits.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      double sim = 0.0;
      if (qn > 0.0 && norms_[i] > 0.0) {
        double dot = 0.0;
        const auto& v = vectors_[i];
        for (std::size_t j = 0; j < dimension_; ++j) dot += static_cast<double>(query[j]) * v[j];
        sim = dot / (qn * norms_[i]);
      }
      hits.push_back({ids_[i], sim});
    }
    RankedList out;
    out.source = "cosine";
    out.items = top_k(std::move(hits), k);
    return out;
  }

  void save(std::ostream& out) const {
    out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
    binio::put_u32(out, static_cast<std::uint32_t>(dimension_));
    binio::put_u64(out, ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      binio::put_u32(out, static_cast<std::uint32_t>(ids_[i].size()));
      out.write(ids_[i].data(), static_cast<std::streamsize>(ids_[i].size()));
      for (float x : vectors_[i]) binio::put_f32(out, x);
    }
  }

  static VectorIndex load(std::istream& in) {
    std::string magic(kMagic.size(), '\0');
    binio::get_exact(in, magic.data(), magic.size(), "vector index magic");
    if (magic != kMagic) throw CorruptStoreError("vector index: bad magic");
    const auto dim = binio::get_u32(in, "vector index dimension");
    if (dim == 0) throw CorruptStoreError("vector index: zero dimension");
    const auto count = binio::get_u64(in, "vector index count");
    VectorIndex idx(dim);
    for (std::uint64_t r = 0; r < count; ++r) {
      const auto len = binio::get_u32(in, "vector index id length");
      if (len == 0 || len > (1u << 16)) throw CorruptStoreError("vector index: bad id length");
      std::string id(len, '\0');
      binio::get_exact(in, id.data(), len, "vector index id");
      EmbeddingVector v(dim);
      for (auto& x : v) x = binio::get_f32(in, "vector index entry");
      try {
        idx.add(id, std::move(v));
      } catch (const Error& e) {
        throw CorruptStoreError(std::string("vector index: ") + e.what());
      }
    }
    binio::expect_eof(in, "vector index");
    return idx;
  }

 private:
  std::size_t dimension_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> lookup_;
  std::vector<EmbeddingVector> vectors_;
  std::vector<double> norms_;
};

inline RankedList cosine_search(const VectorIndex& index, const EmbeddingVector& query,
                                std::size_t k) {
  return index.search(query, k);
}

}  // namespace memroute
