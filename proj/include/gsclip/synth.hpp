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

// Planted-shift fixtures. Set A rows are normalize(δ·d + σ·g) and set B rows
// normalize(σ·g), where d is a unit shift direction and g is an isotropic
// Gaussian with E‖g‖² = 1 (coordinates ~ N(0, 1/dim)). One candidate's
// text/contrast embeddings differ by exactly d; distractor candidates differ
// by independent random unit directions.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gsclip/core.hpp"
#include "gsclip/error.hpp"
#include "gsclip/generators.hpp"
#include "gsclip/random.hpp"
#include "gsclip/selector.hpp"

namespace gsclip::synth {

struct PlantedShiftSpec {
  std::size_t dim = 512;
  std::size_t n = 200;
  std::size_t m = 200;
  std::optional<std::vector<double>> shift_direction;
  double shift_magnitude = 0.5;
  double noise_scale = 1.0;
  std::size_t distractor_count = 99;
  std::uint64_t seed = 0;
  std::string object = "cat";
  std::string planted_label = "planted";

  void validate() const {
    auto bad = [](const std::string& why) { throw Error(ErrorCode::InvalidSpec, why); };
    if (dim == 0) bad("dim must be positive");
    if (n < 2 || m < 2) bad("set sizes must be >= 2");
    if (!(shift_magnitude >= 0.0) || !std::isfinite(shift_magnitude)) bad("shift magnitude must be finite and >= 0");
    if (!(noise_scale > 0.0) || !std::isfinite(noise_scale)) bad("noise scale must be finite and > 0");
    if (object.empty() || planted_label.empty()) bad("object and planted label must be nonempty");
    if (shift_direction) {
      if (shift_direction->size() != dim) bad("shift direction has wrong dim");
      for (double v : *shift_direction) {
        if (!std::isfinite(v)) bad("shift direction is not finite");
      }
      if (std::fabs(l2_norm(*shift_direction) - 1.0) > 1e-9) bad("shift direction must be unit length");
    }
  }
};

struct PlantedFixture {
  EmbeddingSet set_a;
  EmbeddingSet set_b;
  std::vector<CandidateExplanation> corpus;
  std::map<std::string, TextEmbeddingPair> text_embs;
  std::vector<double> direction;
  std::string planted_id;
};

/// Sequential seeded generator. fixture() draws, in order: the shift
/// direction (unless supplied), set A, set B, then the candidate embeddings.
/// Further next_sets() calls draw fresh image sets against the same corpus.
class PlantedShiftGenerator {
 public:
  explicit PlantedShiftGenerator(PlantedShiftSpec spec) : spec_(std::move(spec)), rng_(spec_.seed) {
    spec_.validate();
  }

  PlantedFixture fixture() {
    PlantedFixture f;
    f.direction = spec_.shift_direction ? *spec_.shift_direction : random_unit();
    direction_ = f.direction;
    auto [a, b] = next_sets("");
    f.set_a = std::move(a);
    f.set_b = std::move(b);
    build_corpus(f);
    return f;
  }

  /// A fresh (A, B) draw; row ids carry `tag` so replicates stay distinct.
  std::pair<EmbeddingSet, EmbeddingSet> next_sets(const std::string& tag) {
    if (direction_.empty()) direction_ = spec_.shift_direction ? *spec_.shift_direction : random_unit();
    return {draw_set(spec_.n, spec_.shift_magnitude, tag + "a", {spec_.planted_label}),
            draw_set(spec_.m, 0.0, tag + "b", {})};
  }

  const PlantedShiftSpec& spec() const noexcept { return spec_; }

 private:
  std::vector<double> random_unit() {
    std::vector<double> v(spec_.dim);
    double norm = 0.0;
    while (!(norm > 1e-12)) {
      for (double& x : v) x = rng_.normal();
      norm = l2_norm(v);
    }
    for (double& x : v) x /= norm;
    return v;
  }

  EmbeddingSet draw_set(std::size_t rows, double shift, const std::string& prefix,
                        std::vector<std::string> labels) {
    RawEmbeddingSet raw;
    raw.object = spec_.object;
    const double noise = spec_.noise_scale / std::sqrt(static_cast<double>(spec_.dim));
    for (std::size_t i = 0; i < rows; ++i) {
      std::vector<double> r(spec_.dim);
      for (std::size_t j = 0; j < spec_.dim; ++j) r[j] = shift * direction_[j] + noise * rng_.normal();
      const double norm = l2_norm(r);
      for (double& x : r) x /= norm;
      raw.rows.push_back(std::move(r));
      char id[32];
      std::snprintf(id, sizeof(id), "%s%06zu", prefix.c_str(), i);
      raw.ids.emplace_back(id);
      raw.labels.push_back(labels);
    }
    return validate_embedding_set(std::move(raw));
  }

  // Unit text/contrast embeddings whose difference is exactly `diff` (unit):
  // u ⟂ diff with ‖u‖ = √3/2, text = u + diff/2, contrast = u − diff/2.
  std::pair<EmbeddingVector, EmbeddingVector> text_pair_for(const std::vector<double>& diff) {
    std::vector<double> u = random_unit();
    const double along = std::inner_product(u.begin(), u.end(), diff.begin(), 0.0);
    for (std::size_t j = 0; j < u.size(); ++j) u[j] -= along * diff[j];
    const double scale = std::sqrt(3.0) / 2.0 / l2_norm(u);
    std::vector<double> t(spec_.dim), c(spec_.dim);
    for (std::size_t j = 0; j < u.size(); ++j) {
      t[j] = u[j] * scale + 0.5 * diff[j];
      c[j] = u[j] * scale - 0.5 * diff[j];
    }
    return {EmbeddingVector::make(std::move(t)), EmbeddingVector::make(std::move(c))};
  }

  void build_corpus(PlantedFixture& f) {
    const std::size_t total = spec_.distractor_count + 1;
    const std::size_t planted_slot = static_cast<std::size_t>(rng_.below(total));
    std::size_t distractor = 0;
    for (std::size_t slot = 0; slot < total; ++slot) {
      CandidateExplanation c;
      c.id = gen::make_candidate_id(CandidateSource::rule, slot);
      c.object = spec_.object;
      c.source = CandidateSource::rule;
      std::vector<double> diff;
      std::string marker;
      if (slot == planted_slot) {
        diff = direction_;
        marker = spec_.planted_label;
        f.planted_id = c.id;
      } else {
        diff = random_unit();
        char buf[32];
        std::snprintf(buf, sizeof(buf), "distractor%03zu", distractor++);
        marker = buf;
      }
      c.text = "a photo of " + article_object() + " with " + marker;
      gen::attach_contrast(c, gen::ContrastPolicy{});
      auto [t, k] = text_pair_for(diff);
      f.text_embs.emplace(c.id, TextEmbeddingPair{c.id, std::move(t), std::move(k)});
      f.corpus.push_back(std::move(c));
    }
  }

  std::string article_object() const {
    // general_statement() already knows the article rules.
    return gen::general_statement(spec_.object).substr(std::string("a photo of ").size());
  }

  PlantedShiftSpec spec_;
  Xoshiro256 rng_;
  std::vector<double> direction_;
};

inline PlantedFixture generate_planted(const PlantedShiftSpec& spec) {
  return PlantedShiftGenerator(spec).fixture();
}

}  // namespace gsclip::synth
