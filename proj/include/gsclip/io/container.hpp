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

// GSCE embedding container.
//
//   offset  size  field
//   0       4     magic "GSCE"
//   4       2     version, u16 LE (= 1)
//   6       2     dtype, u16 LE (1 = f32)
//   8       4     dim, u32 LE
//   12      8     count, u64 LE
//   20      ...   count × dim f32 LE, row-major
//
// Row metadata lives in a sidecar next to the container (<path>.meta.jsonl),
// one JSON object per line: {"index":i,"id":...,"object":...,"labels":[...]}.

#include <bit>
#include <cstdint>
#include <cstring>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "gsclip/core.hpp"
#include "gsclip/error.hpp"
#include "gsclip/io/files.hpp"
#include "json.hpp"

namespace gsclip::io {

static_assert(std::endian::native == std::endian::little, "GSCE codec assumes a little-endian host");

inline constexpr std::string_view kMagic = "GSCE";
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::uint16_t kDtypeF32 = 1;
inline constexpr std::size_t kHeaderSize = 20;
inline constexpr std::string_view kSidecarSuffix = ".meta.jsonl";

struct Container {
  std::uint32_t dim = 0;
  std::uint64_t count = 0;
  std::vector<float> values;  // count × dim, row-major
};

namespace detail {

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(std::string_view bytes, std::size_t offset) {
  T v;
  std::memcpy(&v, bytes.data() + offset, sizeof(T));
  return v;
}

}  // namespace detail

inline std::string encode_container(const Container& c) {
  if (c.values.size() != static_cast<std::size_t>(c.count) * c.dim) {
    throw Error(ErrorCode::DimensionMismatch, "container payload does not match count × dim");
  }
  std::string out;
  out.reserve(kHeaderSize + c.values.size() * sizeof(float));
  out.append(kMagic);
  detail::put<std::uint16_t>(out, kVersion);
  detail::put<std::uint16_t>(out, kDtypeF32);
  detail::put<std::uint32_t>(out, c.dim);
  detail::put<std::uint64_t>(out, c.count);
  out.append(reinterpret_cast<const char*>(c.values.data()), c.values.size() * sizeof(float));
  return out;
}

/// Decodes container bytes. Any input yields a Container or a typed Error.
inline Container decode_container(std::string_view bytes) {
  if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic) {
    throw Error(ErrorCode::BadMagic, "missing GSCE magic");
  }
  if (bytes.size() < kHeaderSize) {
    throw Error(ErrorCode::MalformedHeader, "header truncated at " + std::to_string(bytes.size()) + " bytes");
  }
  const auto version = detail::get<std::uint16_t>(bytes, 4);
  if (version != kVersion) {
    throw Error(ErrorCode::UnsupportedVersion, "GSCE version " + std::to_string(version));
  }
  const auto dtype = detail::get<std::uint16_t>(bytes, 6);
  if (dtype != kDtypeF32) throw Error(ErrorCode::UnsupportedDtype, "dtype code " + std::to_string(dtype));
  Container c;
  c.dim = detail::get<std::uint32_t>(bytes, 8);
  c.count = detail::get<std::uint64_t>(bytes, 12);
  if (c.dim == 0 && c.count != 0) throw Error(ErrorCode::MalformedHeader, "dim 0 with nonzero count");

  const std::uint64_t available = bytes.size() - kHeaderSize;
  const std::uint64_t row_bytes = std::uint64_t{c.dim} * sizeof(float);
  if (row_bytes != 0 && c.count > std::numeric_limits<std::uint64_t>::max() / row_bytes) {
    throw Error(ErrorCode::TruncatedPayload, "count × dim overflows");
  }
  const std::uint64_t expected = c.count * row_bytes;
  if (available < expected) {
    throw Error(ErrorCode::TruncatedPayload, "payload has " + std::to_string(available) +
                                                 " bytes, header requires " + std::to_string(expected));
  }
  if (available > expected) {
    throw Error(ErrorCode::TrailingData, std::to_string(available - expected) + " bytes after payload");
  }
  c.values.resize(static_cast<std::size_t>(c.count) * c.dim);
  std::memcpy(c.values.data(), bytes.data() + kHeaderSize, static_cast<std::size_t>(expected));
  return c;
}

struct SidecarRow {
  std::string id;
  std::string object;
  std::vector<std::string> labels;
};

inline std::string encode_sidecar(const std::vector<SidecarRow>& rows) {
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    nlohmann::ordered_json j;
    j["index"] = i;
    j["id"] = rows[i].id;
    j["object"] = rows[i].object;
    j["labels"] = rows[i].labels;
    out += j.dump();
    out += '\n';
  }
  return out;
}

/// Parses sidecar text; row `index` fields must run 0, 1, 2, ...
inline std::vector<SidecarRow> decode_sidecar(std::string_view text) {
  std::vector<SidecarRow> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    auto bad = [&](const std::string& why) {
      throw Error(ErrorCode::SidecarMismatch, "sidecar line " + std::to_string(line_no) + ": " + why);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      bad(e.what());
    }
    if (!j.is_object()) bad("not an object");
    const auto idx = j.find("index");
    const auto id = j.find("id");
    const auto object = j.find("object");
    const auto labels = j.find("labels");
    if (idx == j.end() || !idx->is_number_unsigned() || idx->get<std::uint64_t>() != rows.size()) {
      bad("index must be " + std::to_string(rows.size()));
    }
    if (id == j.end() || !id->is_string()) bad("missing string id");
    if (object == j.end() || !object->is_string()) bad("missing string object");
    SidecarRow row{id->get<std::string>(), object->get<std::string>(), {}};
    if (labels != j.end()) {
      if (!labels->is_array()) bad("labels must be an array");
      for (const auto& l : *labels) {
        if (!l.is_string()) bad("labels must be strings");
        row.labels.push_back(l.get<std::string>());
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline fs::path sidecar_path(const fs::path& container) {
  return fs::path(container.string() + std::string(kSidecarSuffix));
}

/// Packs a set into container + sidecar bytes (values narrowed to f32).
inline std::pair<std::string, std::string> encode_embeddings(const EmbeddingSet& set) {
  Container c;
  c.dim = static_cast<std::uint32_t>(set.dim());
  c.count = set.size();
  c.values.reserve(set.data().size());
  for (double v : set.data()) c.values.push_back(static_cast<float>(v));
  std::vector<SidecarRow> rows;
  for (std::size_t i = 0; i < set.size(); ++i) rows.push_back({set.ids()[i], set.object(), set.labels()[i]});
  return {encode_container(c), encode_sidecar(rows)};
}

/// Decodes and validates a set from container and sidecar bytes.
inline EmbeddingSet decode_embeddings(std::string_view container_bytes, std::string_view sidecar_text) {
  const Container c = decode_container(container_bytes);
  const auto rows = decode_sidecar(sidecar_text);
  if (rows.size() != c.count) {
    throw Error(ErrorCode::SidecarMismatch, "sidecar has " + std::to_string(rows.size()) +
                                                " rows, container has " + std::to_string(c.count));
  }
  RawEmbeddingSet raw;
  if (!rows.empty()) raw.object = rows.front().object;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].object != raw.object) {
      throw Error(ErrorCode::SidecarMismatch, "row " + std::to_string(i) + " has object '" +
                                                  rows[i].object + "', expected '" + raw.object + "'");
    }
    const float* begin = c.values.data() + i * c.dim;
    raw.rows.emplace_back(begin, begin + c.dim);  // exact f32 -> f64 widening
    raw.ids.push_back(rows[i].id);
    raw.labels.push_back(rows[i].labels);
  }
  return validate_embedding_set(std::move(raw));
}

inline void write_embeddings(const EmbeddingSet& set, const fs::path& path) {
  const auto [container, sidecar] = encode_embeddings(set);
  write_file_atomic(path, container);
  write_file_atomic(sidecar_path(path), sidecar);
}

inline EmbeddingSet read_embeddings(const fs::path& path) {
  const auto container = read_file(path);
  const auto sidecar = read_file(sidecar_path(path));
  return decode_embeddings(container, sidecar);
}

}  // namespace gsclip::io
