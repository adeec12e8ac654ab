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

// Evaluation protocol: sample set pairs that share a main object, then score
// ranked explanations with top-x accuracy under the Label and KeyWords
// metrics.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gsclip/core.hpp"
#include "gsclip/error.hpp"
#include "gsclip/random.hpp"
#include "gsclip/text.hpp"

namespace gsclip::eval {

/// Catalog entry for one embedding set: its main object and the set-level
/// annotation labels (attributes/contexts) that characterize it.
struct SetDescriptor {
  std::string id;
  std::string object;
  std::vector<std::string> labels;
  std::string path;
};

struct EvaluationPair {
  std::string set_a_ref;
  std::string set_b_ref;
  std::string object;
  // Labels of each set that the other set lacks.
  std::vector<std::string> ground_truth_a;
  std::vector<std::string> ground_truth_b;

  std::vector<std::string> ground_truth() const {
    std::vector<std::string> out = ground_truth_a;
    out.insert(out.end(), ground_truth_b.begin(), ground_truth_b.end());
    return out;
  }

  friend bool operator==(const EvaluationPair&, const EvaluationPair&) = default;
};

namespace detail {

inline std::vector<std::string> distinguishing(const std::vector<std::string>& mine,
                                               const std::vector<std::string>& theirs) {
  std::set<std::string> other;
  for (const auto& l : theirs) other.insert(text::to_lower(text::trim(l)));
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& l : mine) {
    auto lo = text::to_lower(text::trim(l));
    if (lo.empty() || other.count(lo) != 0 || !seen.insert(lo).second) continue;
    out.push_back(std::move(lo));
  }
  return out;
}

}  // namespace detail

/// Every unordered pair (i < j, catalog order) that shares an object and has
/// at least one distinguishing label.
inline std::vector<EvaluationPair> valid_pairs(std::span<const SetDescriptor> catalog) {
  std::vector<EvaluationPair> out;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    for (std::size_t j = i + 1; j < catalog.size(); ++j) {
      const auto obj = text::to_lower(text::trim(catalog[i].object));
      if (obj != text::to_lower(text::trim(catalog[j].object))) continue;
      EvaluationPair p{catalog[i].id, catalog[j].id, obj,
                       detail::distinguishing(catalog[i].labels, catalog[j].labels),
                       detail::distinguishing(catalog[j].labels, catalog[i].labels)};
      if (p.ground_truth_a.empty() && p.ground_truth_b.empty()) continue;
      out.push_back(std::move(p));
    }
  }
  return out;
}

/// Seeded uniform sample of `count` distinct valid pairs (partial
/// Fisher-Yates over valid_pairs order with xoshiro256**).
inline std::vector<EvaluationPair> sample_pairs(std::span<const SetDescriptor> catalog,
                                                std::size_t count, std::uint64_t seed) {
  if (count == 0) throw Error(ErrorCode::InvalidConfig, "pair count must be positive");
  auto pairs = valid_pairs(catalog);
  if (pairs.size() < count) {
    throw Error(ErrorCode::InsufficientCatalog, "catalog offers " + std::to_string(pairs.size()) +
                                                    " valid pairs, " + std::to_string(count) +
                                                    " requested");
  }
  Xoshiro256 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pairs.size() - i));
    std::swap(pairs[i], pairs[j]);
  }
  pairs.resize(count);
  return pairs;
}

/// label -> accepted synonyms. Lookups are reflexive: a label always matches
/// itself whether or not it has an entry.
class SynonymTable {
 public:
  void add(std::string_view label, std::string_view synonym) {
    const auto l = text::to_lower(text::trim(label));
    const auto s = text::to_lower(text::trim(synonym));
    if (l.empty()) return;
    auto& set = entries_[l];
    set.insert(l);
    if (!s.empty()) set.insert(s);
  }

  std::set<std::string> synonyms_of(std::string_view label) const {
    const auto l = text::to_lower(text::trim(label));
    auto it = entries_.find(l);
    if (it == entries_.end()) return {l};
    return it->second;
  }

  std::size_t size() const noexcept { return entries_.size(); }
  const std::map<std::string, std::set<std::string>>& entries() const noexcept { return entries_; }

 private:
  std::map<std::string, std::set<std::string>> entries_;
};

/// True iff some label occurs in the sentence as a contiguous, case-folded
/// token run (tokens split on whitespace and punctuation).
inline bool label_hit(std::string_view explanation, std::span<const std::string> labels) {
  const auto tokens = text::tokenize(explanation);
  for (const auto& label : labels) {
    const auto words = text::token_words(label);
    if (!words.empty() && text::find_token_run(tokens, words).has_value()) return true;
  }
  return false;
}

inline bool keyword_hit(std::string_view explanation, std::span<const std::string> labels,
                        const SynonymTable& synonyms) {
  std::vector<std::string> expanded;
  for (const auto& label : labels) {
    for (const auto& s : synonyms.synonyms_of(label)) expanded.push_back(s);
  }
  return label_hit(explanation, expanded);
}

enum class Metric { Label, KeyWords };

constexpr std::string_view to_string(Metric m) noexcept {
  return m == Metric::Label ? "Label" : "KeyWords";
}

inline Metric parse_metric(std::string_view s) {
  const auto lo = text::to_lower(s);
  if (lo == "label") return Metric::Label;
  if (lo == "keywords" || lo == "key-words" || lo == "keyword") return Metric::KeyWords;
  throw Error(ErrorCode::InvalidConfig, "unknown metric '" + std::string(s) + "'");
}

struct EvaluatedPair {
  ExplanationReport report;
  EvaluationPair pair;
};

inline bool is_hit(std::string_view explanation, const EvaluationPair& pair, Metric metric,
                   const SynonymTable& synonyms) {
  const auto gt = pair.ground_truth();
  return metric == Metric::Label ? label_hit(explanation, gt) : keyword_hit(explanation, gt, synonyms);
}

/// 1-based rank of the first correct explanation, if any.
inline std::optional<std::size_t> first_hit_rank(const EvaluatedPair& e, Metric metric,
                                                 const SynonymTable& synonyms) {
  for (std::size_t i = 0; i < e.report.ranked.size(); ++i) {
    if (is_hit(e.report.ranked[i].candidate.text, e.pair, metric, synonyms)) return i + 1;
  }
  return std::nullopt;
}

/// Fraction of pairs with a correct explanation among their top x.
inline double top_x_accuracy(std::span<const EvaluatedPair> reports, std::size_t x, Metric metric,
                             const SynonymTable& synonyms) {
  if (reports.empty()) throw Error(ErrorCode::EmptyReports, "no reports to evaluate");
  if (x == 0) throw Error(ErrorCode::InvalidConfig, "cutoff x must be positive");
  std::size_t hits = 0;
  for (const auto& e : reports) {
    const auto rank = first_hit_rank(e, metric, synonyms);
    if (rank && *rank <= x) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(reports.size());
}

struct AccuracyTable {
  std::vector<Metric> metrics;
  std::vector<std::size_t> cutoffs;
  std::map<std::pair<Metric, std::size_t>, double> rows;
  std::size_t pair_count = 0;

  double at(Metric m, std::size_t x) const { return rows.at({m, x}); }
};

inline AccuracyTable accuracy_table(std::span<const EvaluatedPair> reports,
                                    std::vector<std::size_t> cutoffs, std::vector<Metric> metrics,
                                    const SynonymTable& synonyms) {
  if (reports.empty()) throw Error(ErrorCode::EmptyReports, "no reports to evaluate");
  std::sort(cutoffs.begin(), cutoffs.end());
  cutoffs.erase(std::unique(cutoffs.begin(), cutoffs.end()), cutoffs.end());
  AccuracyTable t;
  t.metrics = std::move(metrics);
  t.cutoffs = std::move(cutoffs);
  t.pair_count = reports.size();
  for (Metric m : t.metrics) {
    for (std::size_t x : t.cutoffs) t.rows[{m, x}] = top_x_accuracy(reports, x, m, synonyms);
  }
  return t;
}

/// Aligned text rendering, one row per metric and one Acc@x column per cutoff.
inline std::string format_accuracy_table(const AccuracyTable& t) {
  std::ostringstream os;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%-10s", "Metric");
  os << buf;
  for (std::size_t x : t.cutoffs) {
    std::snprintf(buf, sizeof(buf), " | %8s", ("Acc@" + std::to_string(x)).c_str());
    os << buf;
  }
  os << "\n" << std::string(10, '-');
  for (std::size_t i = 0; i < t.cutoffs.size(); ++i) os << "-+-" << std::string(8, '-');
  os << "\n";
  for (Metric m : t.metrics) {
    std::snprintf(buf, sizeof(buf), "%-10s", std::string(to_string(m)).c_str());
    os << buf;
    for (std::size_t x : t.cutoffs) {
      std::snprintf(buf, sizeof(buf), " | %7.1f%%", 100.0 * t.at(m, x));
      os << buf;
    }
    os << "\n";
  }
  os << "pairs: " << t.pair_count << "\n";
  return os.str();
}

}  // namespace gsclip::eval
