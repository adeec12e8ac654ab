// Copyright 2026 The gsclip Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Text-embedding cache keyed by (model tag, normalization flag, exact
// sentence). On disk a cache at <path> is three files:
//
//   <path>             GSCE container, one row per key
//   <path>.meta.jsonl  GSCE sidecar (id = row index, object = model tag)
//   <path>.keys.jsonl  {"index": i, "model": s, "normalized": b, "text": s}
//
// Rows are stored in key order, so the files do not depend on the order in
// which entries were inserted.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "gsclip/core.hpp"
#include "gsclip/error.hpp"
#include "gsclip/io/container.hpp"
#include "gsclip/io/files.hpp"
#include "json.hpp"

namespace gsclip::io {

namespace detail {

[[noreturn]] inline void corrupt(const std::string& why) { throw Error(ErrorCode::CacheCorruption, why); }

}  // namespace detail

struct CacheKey {
  std::string model_tag;
  bool normalized = true;
  std::string text;

  friend auto operator<=>(const CacheKey&, const CacheKey&) = default;
};

struct CacheLookup {
  std::map<std::string, EmbeddingVector> hits;
  std::vector<std::string> misses;  // unique, first-occurrence order
};

class TextEmbeddingCache {
 public:
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const std::map<CacheKey, std::vector<float>>& entries() const noexcept { return entries_; }

  std::set<std::string> model_tags() const {
    std::set<std::string> out;
    for (const auto& [k, v] : entries_) out.insert(k.model_tag);
    return out;
  }

  /// Stores `v` narrowed to f32; later hits return exactly the stored values.
  void insert(const CacheKey& key, const EmbeddingVector& v) {
    if (dim_ != 0 && v.dim() != dim_) {
      throw Error(ErrorCode::DimensionMismatch, "cache dim is " + std::to_string(dim_) + ", vector has " +
                                                    std::to_string(v.dim()));
    }
    dim_ = v.dim();
    std::vector<float> stored;
    stored.reserve(v.dim());
    for (double x : v.values()) stored.push_back(static_cast<float>(x));
    entries_[key] = std::move(stored);
  }

  std::optional<EmbeddingVector> find(const CacheKey& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return EmbeddingVector::make(std::vector<double>(it->second.begin(), it->second.end()));
  }

  /// Partitions `sentences` into cached vectors and misses. Never computes
  /// embeddings.
  CacheLookup lookup(const std::vector<std::string>& sentences, const std::string& model_tag,
                     bool normalized) const {
    CacheLookup out;
    std::set<std::string> missed;
    for (const auto& s : sentences) {
      if (out.hits.count(s) != 0 || missed.count(s) != 0) continue;
      if (auto v = find({model_tag, normalized, s})) {
        out.hits.emplace(s, std::move(*v));
      } else {
        missed.insert(s);
        out.misses.push_back(s);
      }
    }
    return out;
  }

  struct Encoded {
    std::string container;
    std::string sidecar;
    std::string keys;
  };

  Encoded encode() const {
    Container c;
    c.dim = static_cast<std::uint32_t>(dim_);
    c.count = entries_.size();
    std::vector<SidecarRow> rows;
    std::string keys;
    std::size_t index = 0;
    for (const auto& [k, v] : entries_) {
      c.values.insert(c.values.end(), v.begin(), v.end());
      rows.push_back({std::to_string(index), k.model_tag, {}});
      nlohmann::ordered_json j{{"index", index}, {"model", k.model_tag}, {"normalized", k.normalized},
                               {"text", k.text}};
      keys += j.dump() + "\n";
      ++index;
    }
    return {encode_container(c), encode_sidecar(rows), keys};
  }

  static TextEmbeddingCache decode(std::string_view container, std::string_view sidecar, std::string_view keys) {
    Container c;
    std::vector<SidecarRow> rows;
    try {
      c = decode_container(container);
      rows = decode_sidecar(sidecar);
    } catch (const Error& e) {
      detail::corrupt(e.what());
    }
    if (rows.size() != c.count) detail::corrupt("sidecar rows do not match container count");

    TextEmbeddingCache cache;
    cache.dim_ = c.dim;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    std::size_t index = 0;
    while (pos < keys.size()) {
      auto nl = keys.find('\n', pos);
      if (nl == std::string_view::npos) nl = keys.size();
      const auto line = keys.substr(pos, nl - pos);
      pos = nl + 1;
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
      const std::string where = "key manifest line " + std::to_string(line_no) + ": ";
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        detail::corrupt(where + e.what());
      }
      if (!j.is_object()) detail::corrupt(where + "not an object");
      const auto idx = j.find("index");
      const auto model = j.find("model");
      const auto norm = j.find("normalized");
      const auto text = j.find("text");
      if (idx == j.end() || !idx->is_number_unsigned() || idx->get<std::uint64_t>() != index) {
        detail::corrupt(where + "index must be " + std::to_string(index));
      }
      if (model == j.end() || !model->is_string() || norm == j.end() || !norm->is_boolean() ||
          text == j.end() || !text->is_string()) {
        detail::corrupt(where + "needs string 'model', boolean 'normalized', string 'text'");
      }
      if (index >= c.count) detail::corrupt("key manifest has more entries than the container");
      if (rows[index].object != model->get<std::string>()) detail::corrupt(where + "model tag disagrees with sidecar");
      CacheKey key{model->get<std::string>(), norm->get<bool>(), text->get<std::string>()};
      const float* begin = c.values.data() + index * c.dim;
      if (!cache.entries_.emplace(std::move(key), std::vector<float>(begin, begin + c.dim)).second) {
        detail::corrupt(where + "duplicate key");
      }
      ++index;
    }
    if (index != c.count) {
      detail::corrupt("key manifest has " + std::to_string(index) + " entries, container has " + std::to_string(c.count));
    }
    if (cache.entries_.empty()) cache.dim_ = 0;
    return cache;
  }

  static fs::path keys_path(const fs::path& path) { return fs::path(path.string() + ".keys.jsonl"); }

  /// Loads a cache; a missing container means an empty cache.
  static TextEmbeddingCache load(const fs::path& path) {
    if (!fs::exists(path)) return {};
    return decode(read_file(path), read_file(sidecar_path(path)), read_file(keys_path(path)));
  }

  /// Writes all three files under an exclusive lock on <path>.lock.
  void save(const fs::path& path) const {
    FileLock lock(fs::path(path.string() + ".lock"));
    const auto e = encode();
    write_file_atomic(path, e.container);
    write_file_atomic(sidecar_path(path), e.sidecar);
    write_file_atomic(keys_path(path), e.keys);
  }

 private:
  std::map<CacheKey, std::vector<float>> entries_;
  std::size_t dim_ = 0;
};

/// Free-function form of TextEmbeddingCache::lookup.
inline CacheLookup cache_lookup_or_record(const TextEmbeddingCache& cache,
                                          const std::vector<std::string>& sentences,
                                          const std::string& model_tag, bool normalized) {
  return cache.lookup(sentences, model_tag, normalized);
}

}  // namespace gsclip::io
