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

// The explanation selector. For candidate k with text embedding T_k and
// contrast embedding T~_k, every image embedding E of either set is reduced to
// the scalar |E · (T_k − T~_k)|; the two resulting samples are compared with a
// two-sample t-test and candidates are ranked by ascending p-value.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <exception>
#include <map>
#include <span>
#include <string>
#include <thread>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "gsclip/core.hpp"
#include "gsclip/error.hpp"
#include "gsclip/stats.hpp"
#include "gsclip/text.hpp"

namespace gsclip {

struct TextEmbeddingPair {
  std::string candidate_id;
  EmbeddingVector emb_text;
  EmbeddingVector emb_contrast;
};

enum class ProjectionMode { absolute, signed_dot };
enum class Correction { none, bonferroni };

struct SelectorConfig {
  double alpha = 0.05;
  std::size_t top_x = 5;
  bool normalize = true;
  ContrastMode pairing = ContrastMode::negation;
  double min_diff_norm = 1e-8;
  // Ablations; defaults follow the literal selector.
  ProjectionMode projection = ProjectionMode::absolute;
  stats::TTestKind test = stats::TTestKind::welch;
  Correction correction = Correction::none;

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw Error(ErrorCode::InvalidConfig, "alpha must lie in (0,1), got " + std::to_string(alpha));
    }
    if (top_x == 0) throw Error(ErrorCode::InvalidConfig, "top_x must be positive");
    if (!(min_diff_norm >= 0.0)) throw Error(ErrorCode::InvalidConfig, "min_diff_norm must be >= 0");
  }
};

/// Execution knobs that never change results.
struct ExecOptions {
  std::size_t workers = 1;
};

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// T_k − T~_k, not renormalized.
inline EmbeddingVector diff_vector(const TextEmbeddingPair& pair) {
  if (pair.emb_text.dim() != pair.emb_contrast.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "text/contrast dims differ for '" + pair.candidate_id + "': " +
                    std::to_string(pair.emb_text.dim()) + " vs " + std::to_string(pair.emb_contrast.dim()));
  }
  std::vector<double> d(pair.emb_text.dim());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = pair.emb_text[i] - pair.emb_contrast[i];
  return EmbeddingVector::make(std::move(d));
}

/// Dot product accumulated in index order.
inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "dims differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

/// |E · diff|
inline double project(std::span<const double> image_emb, std::span<const double> diff) {
  return std::fabs(dot(image_emb, diff));
}

inline double project(const EmbeddingVector& image_emb, const EmbeddingVector& diff) {
  return project(image_emb.values(), diff.values());
}

namespace detail {

inline std::vector<double> projections(const EmbeddingSet& set, std::span<const double> diff,
                                       ProjectionMode mode) {
  std::vector<double> out(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double d = dot(set.row(i), diff);
    out[i] = mode == ProjectionMode::absolute ? std::fabs(d) : d;
  }
  return out;
}

inline std::string lower(std::string_view s) { return text::to_lower(text::trim(s)); }

}  // namespace detail

/// Scores one candidate against two image sets. Inputs are used as given;
/// explain() applies normalization beforehand when configured.
inline ScoredCandidate score_candidate(const EmbeddingSet& set_a, const EmbeddingSet& set_b,
                                       const CandidateExplanation& candidate,
                                       const TextEmbeddingPair& pair, const SelectorConfig& config) {
  if (set_a.size() < 2 || set_b.size() < 2) {
    throw Error(ErrorCode::InsufficientSamples,
                "both image sets need at least 2 rows, got " + std::to_string(set_a.size()) +
                    " and " + std::to_string(set_b.size()));
  }
  const EmbeddingVector diff = diff_vector(pair);
  if (diff.dim() != set_a.dim() || diff.dim() != set_b.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "text dim " + std::to_string(diff.dim()) +
                                                  " vs image dims " + std::to_string(set_a.dim()) +
                                                  "/" + std::to_string(set_b.dim()));
  }
  const double norm = l2_norm(diff.values());
  if (norm < config.min_diff_norm) {
    throw Error(ErrorCode::DegenerateDiff, "candidate '" + candidate.id + "' has ‖diff‖ = " +
                                               format_real(norm) + " < " +
                                               format_real(config.min_diff_norm));
  }
  const auto la = detail::projections(set_a, diff.values(), config.projection);
  const auto lb = detail::projections(set_b, diff.values(), config.projection);
  const auto sa = stats::summarize(la);
  const auto sb = stats::summarize(lb);
  const auto tt = stats::t_test(sa, sb, config.test);

  ScoredCandidate s;
  s.candidate = candidate;
  s.diff_norm = norm;
  s.t_stat = tt.t_stat;
  s.df = tt.df;
  s.p_value = tt.p_two_sided;
  s.degenerate_variance = tt.degenerate_variance;
  s.mean_a = sa.mean;
  s.mean_b = sb.mean;
  s.std_a = std::sqrt(sa.variance);
  s.std_b = std::sqrt(sb.variance);
  s.n_a = sa.n;
  s.n_b = sb.n;
  return s;
}

inline std::vector<std::pair<std::string, std::string>> describe(const SelectorConfig& config) {
  return {
      {"alpha", format_real(config.alpha)},
      {"top_x", std::to_string(config.top_x)},
      {"normalize", config.normalize ? "true" : "false"},
      {"pairing", std::string(to_string(config.pairing))},
      {"min_diff_norm", format_real(config.min_diff_norm)},
      {"projection", config.projection == ProjectionMode::absolute ? "absolute" : "signed"},
      {"test", config.test == stats::TTestKind::welch ? "welch" : "student"},
      {"correction", config.correction == Correction::none ? "none" : "bonferroni"},
  };
}

/// Sorts by ascending p-value (ties by candidate id) and counts candidates
/// below the significance threshold (alpha, or alpha/k under Bonferroni).
inline ExplanationReport rank_candidates(std::vector<ScoredCandidate> scored,
                                         const SelectorConfig& config,
                                         std::vector<ExcludedCandidate> excluded = {}) {
  config.validate();
  if (scored.empty()) throw Error(ErrorCode::EmptyScoredSet, "no candidate could be scored");
  std::sort(scored.begin(), scored.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
    if (a.p_value != b.p_value) return a.p_value < b.p_value;
    return a.candidate.id < b.candidate.id;
  });
  std::sort(excluded.begin(), excluded.end(),
            [](const ExcludedCandidate& a, const ExcludedCandidate& b) { return a.id < b.id; });

  const double threshold = config.correction == Correction::bonferroni
                               ? config.alpha / static_cast<double>(scored.size())
                               : config.alpha;
  ExplanationReport report;
  report.alpha = config.alpha;
  report.pairing = config.pairing;
  report.top_x = config.top_x;
  report.object = scored.front().candidate.object;
  report.significant_count = static_cast<std::size_t>(
      std::count_if(scored.begin(), scored.end(),
                    [threshold](const ScoredCandidate& s) { return s.p_value < threshold; }));
  report.ranked = std::move(scored);
  report.excluded = std::move(excluded);
  report.parameters = describe(config);
  return report;
}

/// Scores every corpus candidate against the two sets and ranks them.
/// Candidates with a degenerate difference vector are listed under
/// `excluded`. Output is identical for any worker count.
inline ExplanationReport explain(const EmbeddingSet& set_a, const EmbeddingSet& set_b,
                                 const std::vector<CandidateExplanation>& corpus,
                                 const std::map<std::string, TextEmbeddingPair>& text_embs,
                                 const SelectorConfig& config, ExecOptions exec = {}) {
  config.validate();
  const std::string object = detail::lower(set_a.object());
  if (object != detail::lower(set_b.object())) {
    throw Error(ErrorCode::ObjectMismatch,
                "image sets have objects '" + set_a.object() + "' and '" + set_b.object() + "'");
  }
  if (corpus.empty()) throw Error(ErrorCode::EmptyScoredSet, "corpus is empty");

  std::vector<std::string> missing;
  std::unordered_set<std::string> ids;
  for (const auto& c : corpus) {
    if (detail::lower(c.object) != object) {
      throw Error(ErrorCode::ObjectMismatch,
                  "candidate '" + c.id + "' has object '" + c.object + "', sets have '" + object + "'");
    }
    if (!ids.insert(c.id).second) throw Error(ErrorCode::DuplicateId, "candidate id '" + c.id + "' repeats");
    if (text_embs.find(c.id) == text_embs.end()) missing.push_back(c.id);
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    std::string list;
    for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
    throw Error(ErrorCode::MissingTextEmbedding, "no text embedding for: " + list);
  }

  const EmbeddingSet a = config.normalize ? set_a.normalized() : set_a;
  const EmbeddingSet b = config.normalize ? set_b.normalized() : set_b;

  using Outcome = std::variant<ScoredCandidate, ExcludedCandidate>;
  std::vector<Outcome> outcomes(corpus.size());
  auto work = [&](std::size_t i) {
    const auto& c = corpus[i];
    const auto& raw = text_embs.at(c.id);
    try {
      if (config.normalize) {
        const TextEmbeddingPair pair{raw.candidate_id, l2_normalize(raw.emb_text),
                                     l2_normalize(raw.emb_contrast)};
        outcomes[i] = score_candidate(a, b, c, pair, config);
      } else {
        outcomes[i] = score_candidate(a, b, c, raw, config);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateDiff && e.code() != ErrorCode::ZeroVector) throw;
      outcomes[i] = ExcludedCandidate{c.id, c.text, ErrorCode::DegenerateDiff, e.detail()};
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(exec.workers, 1, corpus.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < corpus.size(); ++i) work(i);
  } else {
    // Static striding: each outcome slot is written by exactly one thread.
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < corpus.size(); i += workers) work(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<ScoredCandidate> scored;
  std::vector<ExcludedCandidate> excluded;
  for (auto& o : outcomes) {
    if (auto* s = std::get_if<ScoredCandidate>(&o)) {
      scored.push_back(std::move(*s));
    } else {
      excluded.push_back(std::get<ExcludedCandidate>(std::move(o)));
    }
  }
  if (scored.empty()) {
    throw Error(ErrorCode::EmptyScoredSet,
                "all " + std::to_string(excluded.size()) + " candidates have degenerate difference vectors");
  }
  auto report = rank_candidates(std::move(scored), config, std::move(excluded));
  report.object = object;
  report.set_a_id = "A";
  report.set_b_id = "B";
  return report;
}

}  // namespace gsclip
