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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "gsclip/error.hpp"

namespace gsclip {

/// A finite, nonempty real vector. Storage is always 64-bit.
class EmbeddingVector {
 public:
  static EmbeddingVector make(std::vector<double> values) {
    if (values.empty()) {
      throw Error(ErrorCode::DimensionMismatch, "embedding vector has dim 0");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i])) {
        throw Error(ErrorCode::NonFiniteValue,
                    "coordinate " + std::to_string(i) + " is not finite");
      }
    }
    return EmbeddingVector(std::move(values));
  }

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  explicit EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {}
  std::vector<double> values_;
};

inline double l2_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

/// Scales `v` to unit Euclidean length. Throws ZeroVector when ‖v‖ < 1e-12.
inline EmbeddingVector l2_normalize(const EmbeddingVector& v) {
  const double norm = l2_norm(v.values());
  if (!(norm >= 1e-12)) {
    throw Error(ErrorCode::ZeroVector, "cannot normalize a vector with norm " +
                                           std::to_string(norm));
  }
  std::vector<double> out(v.values().begin(), v.values().end());
  for (double& x : out) x /= norm;
  return EmbeddingVector::make(std::move(out));
}

/// Unvalidated rows as decoded from a container or built in memory.
struct RawEmbeddingSet {
  std::string object;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> ids;
  std::vector<std::vector<std::string>> labels;
};

/// A validated collection of same-dimension embeddings with per-row ids and
/// annotation labels. Rows are stored contiguously, row-major.
class EmbeddingSet {
 public:
  EmbeddingSet() = default;

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return ids_.empty(); }
  const std::string& object() const noexcept { return object_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::vector<std::vector<std::string>>& labels() const noexcept { return labels_; }
  std::span<const double> data() const noexcept { return data_; }

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * dim_, dim_);
  }

  EmbeddingVector vector(std::size_t i) const {
    auto r = row(i);
    return EmbeddingVector::make(std::vector<double>(r.begin(), r.end()));
  }

  /// Copy with every row scaled to unit length.
  EmbeddingSet normalized() const {
    EmbeddingSet out = *this;
    for (std::size_t i = 0; i < size(); ++i) {
      const double norm = l2_norm(row(i));
      if (!(norm >= 1e-12)) {
        throw Error(ErrorCode::ZeroVector, "row " + std::to_string(i) + " (" + ids_[i] +
                                               ") has zero norm");
      }
      for (std::size_t j = 0; j < dim_; ++j) out.data_[i * dim_ + j] /= norm;
    }
    return out;
  }

  /// Copy with every coordinate multiplied by `factor`.
  EmbeddingSet scaled(double factor) const {
    EmbeddingSet out = *this;
    for (double& x : out.data_) x *= factor;
    return out;
  }

  friend bool operator==(const EmbeddingSet&, const EmbeddingSet&) = default;

 private:
  friend EmbeddingSet validate_embedding_set(RawEmbeddingSet raw);

  std::string object_;
  std::size_t dim_ = 0;
  std::vector<double> data_;
  std::vector<std::string> ids_;
  std::vector<std::vector<std::string>> labels_;
};

/// Checks every EmbeddingSet invariant and returns the packed set. Zero rows
/// is rejected with EmptySet; callers building sets incrementally keep them
/// as RawEmbeddingSet until complete.
inline EmbeddingSet validate_embedding_set(RawEmbeddingSet raw) {
  if (raw.rows.empty()) throw Error(ErrorCode::EmptySet, "embedding set has no rows");
  if (raw.ids.size() != raw.rows.size() || raw.labels.size() != raw.rows.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "rows/ids/labels lengths differ: " + std::to_string(raw.rows.size()) + "/" +
                    std::to_string(raw.ids.size()) + "/" + std::to_string(raw.labels.size()));
  }
  const std::size_t dim = raw.rows.front().size();
  if (dim == 0) throw Error(ErrorCode::DimensionMismatch, "row 0 has dim 0");

  EmbeddingSet set;
  set.data_.reserve(raw.rows.size() * dim);
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < raw.rows.size(); ++i) {
    const auto& r = raw.rows[i];
    if (r.size() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "row " + std::to_string(i) + " has dim " +
                                                    std::to_string(r.size()) + ", expected " +
                                                    std::to_string(dim));
    }
    for (std::size_t j = 0; j < dim; ++j) {
      if (!std::isfinite(r[j])) {
        throw Error(ErrorCode::NonFiniteValue,
                    "row " + std::to_string(i) + " coordinate " + std::to_string(j));
      }
    }
    if (!seen.insert(raw.ids[i]).second) {
      throw Error(ErrorCode::DuplicateId, "id '" + raw.ids[i] + "' repeats at row " +
                                              std::to_string(i));
    }
    set.data_.insert(set.data_.end(), r.begin(), r.end());
  }
  set.object_ = std::move(raw.object);
  set.dim_ = dim;
  set.ids_ = std::move(raw.ids);
  set.labels_ = std::move(raw.labels);
  return set;
}

enum class ContrastMode { negation, general };
enum class CandidateSource { rule, lm, frequency };

constexpr std::string_view to_string(ContrastMode m) noexcept {
  return m == ContrastMode::negation ? "negation" : "general";
}

constexpr std::string_view to_string(CandidateSource s) noexcept {
  switch (s) {
    case CandidateSource::rule: return "rule";
    case CandidateSource::lm: return "lm";
    case CandidateSource::frequency: return "frequency";
  }
  return "rule";
}

inline ContrastMode parse_contrast_mode(std::string_view s) {
  if (s == "negation") return ContrastMode::negation;
  if (s == "general") return ContrastMode::general;
  throw Error(ErrorCode::InvalidConfig, "unknown pairing '" + std::string(s) + "'");
}

inline CandidateSource parse_candidate_source(std::string_view s) {
  if (s == "rule") return CandidateSource::rule;
  if (s == "lm") return CandidateSource::lm;
  if (s == "frequency") return CandidateSource::frequency;
  throw Error(ErrorCode::MalformedRecord, "unknown candidate source '" + std::string(s) + "'");
}

/// A hypothesis sentence paired with the sentence it is contrasted against.
struct CandidateExplanation {
  std::string id;
  std::string object;
  std::string text;
  std::string contrast_text;
  ContrastMode contrast_mode = ContrastMode::negation;
  CandidateSource source = CandidateSource::rule;
  std::optional<double> generation_score;
  // Set when negation was requested but no rule applied, so the general
  // statement was used instead.
  bool contrast_fallback = false;

  friend bool operator==(const CandidateExplanation&, const CandidateExplanation&) = default;
};

struct ScoredCandidate {
  CandidateExplanation candidate;
  double diff_norm = 0.0;
  double t_stat = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double std_a = 0.0;
  double std_b = 0.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  bool degenerate_variance = false;
};

struct ExcludedCandidate {
  std::string id;
  std::string text;
  ErrorCode reason;
  std::string detail;
};

struct ExplanationReport {
  std::string set_a_id;
  std::string set_b_id;
  std::string object;
  double alpha = 0.05;
  ContrastMode pairing = ContrastMode::negation;
  std::size_t top_x = 5;
  std::vector<ScoredCandidate> ranked;
  std::vector<ExcludedCandidate> excluded;
  std::size_t significant_count = 0;
  // Run configuration echo; kept as ordered key/value text for stable output.
  std::vector<std::pair<std::string, std::string>> parameters;

  std::span<const ScoredCandidate> top() const {
    return std::span<const ScoredCandidate>(ranked).first(std::min(top_x, ranked.size()));
  }
};

}  // namespace gsclip
