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

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "gsclip/core.hpp"
#include "gsclip/eval.hpp"
#include "json.hpp"

namespace gsclip::io {

namespace detail {

// JSON has no infinities; the degenerate-variance t statistic is ±inf.
inline nlohmann::ordered_json real(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace detail

inline nlohmann::ordered_json report_to_json(const ExplanationReport& r) {
  using oj = nlohmann::ordered_json;
  oj j;
  j["set_a"] = r.set_a_id;
  j["set_b"] = r.set_b_id;
  j["object"] = r.object;
  j["alpha"] = r.alpha;
  j["pairing"] = to_string(r.pairing);
  j["top_x"] = r.top_x;
  j["candidate_count"] = r.ranked.size();
  j["significant_count"] = r.significant_count;
  j["parameters"] = oj::object();
  for (const auto& [k, v] : r.parameters) j["parameters"][k] = v;
  j["ranked"] = oj::array();
  for (std::size_t i = 0; i < r.ranked.size(); ++i) {
    const auto& s = r.ranked[i];
    oj e{{"rank", i + 1},
         {"id", s.candidate.id},
         {"text", s.candidate.text},
         {"contrast_text", s.candidate.contrast_text},
         {"contrast_mode", to_string(s.candidate.contrast_mode)},
         {"contrast_fallback", s.candidate.contrast_fallback},
         {"source", to_string(s.candidate.source)},
         {"p_value", s.p_value},
         {"t_stat", detail::real(s.t_stat)},
         {"df", s.df},
         {"diff_norm", s.diff_norm},
         {"mean_a", s.mean_a},
         {"std_a", s.std_a},
         {"n_a", s.n_a},
         {"mean_b", s.mean_b},
         {"std_b", s.std_b},
         {"n_b", s.n_b},
         {"degenerate_variance", s.degenerate_variance},
         {"in_top_x", i < r.top_x}};
    j["ranked"].push_back(std::move(e));
  }
  j["excluded"] = oj::array();
  for (const auto& e : r.excluded) {
    j["excluded"].push_back({{"id", e.id}, {"text", e.text}, {"reason", to_string(e.reason)}, {"detail", e.detail}});
  }
  return j;
}

/// Aligned table of the top-x rows.
inline std::string format_report_table(const ExplanationReport& r) {
  std::ostringstream os;
  char buf[512];
  os << "sets: " << r.set_a_id << " vs " << r.set_b_id << "  object: " << r.object << "  pairing: "
     << to_string(r.pairing) << "\n";
  std::snprintf(buf, sizeof(buf), "significant at alpha=%g: %zu of %zu\n\n", r.alpha, r.significant_count,
                r.ranked.size());
  os << buf;
  std::snprintf(buf, sizeof(buf), "%4s  %-12s  %9s  %9s  %-9s  %s\n", "rank", "p-value", "t", "df", "source",
                "explanation");
  os << buf;
  const auto top = r.top();
  for (std::size_t i = 0; i < top.size(); ++i) {
    const auto& s = top[i];
    std::snprintf(buf, sizeof(buf), "%4zu  %-12.4e  %9.3f  %9.2f  %-9s  %s%s\n", i + 1, s.p_value, s.t_stat, s.df,
                  std::string(to_string(s.candidate.source)).c_str(), s.candidate.text.c_str(),
                  s.p_value < r.alpha ? "" : "  (n.s.)");
    os << buf;
  }
  if (!r.excluded.empty()) os << "\nexcluded: " << r.excluded.size() << " candidate(s) with degenerate difference vectors\n";
  return os.str();
}

inline nlohmann::ordered_json accuracy_to_json(const eval::AccuracyTable& t) {
  using oj = nlohmann::ordered_json;
  oj j;
  j["pair_count"] = t.pair_count;
  j["cutoffs"] = t.cutoffs;
  j["accuracy"] = oj::object();
  for (auto m : t.metrics) {
    oj row = oj::object();
    for (std::size_t x : t.cutoffs) row["Acc@" + std::to_string(x)] = t.at(m, x);
    j["accuracy"][std::string(eval::to_string(m))] = std::move(row);
  }
  return j;
}

}  // namespace gsclip::io
