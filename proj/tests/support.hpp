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

// Shared fixtures and independent reference implementations for the unit
// tests and the acceptance binary. Nothing here calls into gsclip::stats.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "gsclip/core.hpp"
#include "gsclip/eval.hpp"
#include "gsclip/random.hpp"
#include "gsclip/selector.hpp"

namespace gsclip::testing {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("gsclip-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const noexcept { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::vector<double> gaussian_vector(Xoshiro256& rng, std::size_t dim, double scale = 1.0) {
  std::vector<double> v(dim);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

inline EmbeddingSet random_set(Xoshiro256& rng, std::size_t rows, std::size_t dim, const std::string& object,
                               const std::string& prefix, std::vector<double> mean = {}) {
  RawEmbeddingSet raw;
  raw.object = object;
  for (std::size_t i = 0; i < rows; ++i) {
    auto r = gaussian_vector(rng, dim);
    for (std::size_t j = 0; j < mean.size(); ++j) r[j] += mean[j];
    raw.rows.push_back(std::move(r));
    raw.ids.push_back(prefix + std::to_string(i));
    raw.labels.push_back({});
  }
  return validate_embedding_set(std::move(raw));
}

struct RandomCorpus {
  std::vector<CandidateExplanation> corpus;
  std::map<std::string, TextEmbeddingPair> text_embs;
};

inline RandomCorpus random_corpus(Xoshiro256& rng, std::size_t count, std::size_t dim, const std::string& object) {
  RandomCorpus out;
  for (std::size_t k = 0; k < count; ++k) {
    CandidateExplanation c;
    c.id = "rule:" + std::to_string(100000 + k);
    c.object = object;
    c.text = "a photo of a " + object + " with thing" + std::to_string(k);
    c.contrast_text = "a photo of a " + object + " without thing" + std::to_string(k);
    out.text_embs.emplace(c.id, TextEmbeddingPair{c.id, EmbeddingVector::make(gaussian_vector(rng, dim)),
                                                  EmbeddingVector::make(gaussian_vector(rng, dim))});
    out.corpus.push_back(std::move(c));
  }
  return out;
}

struct Instance {
  EmbeddingSet a;
  EmbeddingSet b;
  RandomCorpus corpus;
};

/// Small random selector input; set A carries a random mean shift.
inline Instance random_instance(Xoshiro256& rng, std::size_t max_dim, std::size_t max_rows,
                                std::size_t max_candidates) {
  const std::size_t dim = 2 + rng.below(max_dim - 1);
  std::vector<double> shift = gaussian_vector(rng, dim, 0.7);
  Instance in{random_set(rng, 2 + rng.below(max_rows - 1), dim, "cat", "a", shift),
              random_set(rng, 2 + rng.below(max_rows - 1), dim, "cat", "b"),
              random_corpus(rng, 1 + rng.below(max_candidates), dim, "cat")};
  return in;
}

inline std::vector<std::string> ranking(const ExplanationReport& r) {
  std::vector<std::string> ids;
  for (const auto& s : r.ranked) ids.push_back(s.candidate.id);
  return ids;
}

// -- naive reference selector ------------------------------------------------------

struct ReferenceScore {
  std::string id;
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

inline std::vector<double> reference_unit(std::vector<double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  s = std::sqrt(s);
  for (double& x : v) x /= s;
  return v;
}

/// Straight loops: normalize, difference, |dot|, Welch t and df, and the
/// two-sided p-value from Boost's Student t distribution.
inline std::vector<ReferenceScore> reference_explain(const EmbeddingSet& a, const EmbeddingSet& b,
                                                     const RandomCorpus& corpus, bool normalize) {
  auto rows_of = [&](const EmbeddingSet& s) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < s.size(); ++i) {
      std::vector<double> r(s.row(i).begin(), s.row(i).end());
      rows.push_back(normalize ? reference_unit(r) : r);
    }
    return rows;
  };
  const auto ra = rows_of(a);
  const auto rb = rows_of(b);
  std::vector<ReferenceScore> out;
  for (const auto& c : corpus.corpus) {
    const auto& pair = corpus.text_embs.at(c.id);
    std::vector<double> t(pair.emb_text.values().begin(), pair.emb_text.values().end());
    std::vector<double> k(pair.emb_contrast.values().begin(), pair.emb_contrast.values().end());
    if (normalize) {
      t = reference_unit(t);
      k = reference_unit(k);
    }
    std::vector<double> diff(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) diff[j] = t[j] - k[j];
    auto project = [&](const std::vector<std::vector<double>>& rows) {
      std::vector<double> p;
      for (const auto& r : rows) {
        double d = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) d += r[j] * diff[j];
        p.push_back(std::fabs(d));
      }
      return p;
    };
    const auto pa = project(ra);
    const auto pb = project(rb);
    auto mean = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    auto var = [&](const std::vector<double>& v) {
      const double m = mean(v);
      double s = 0.0;
      for (double x : v) s += (x - m) * (x - m);
      return s / static_cast<double>(v.size() - 1);
    };
    const double na = static_cast<double>(pa.size());
    const double nb = static_cast<double>(pb.size());
    const double va = var(pa) / na;
    const double vb = var(pb) / nb;
    ReferenceScore s;
    s.id = c.id;
    s.t = (mean(pa) - mean(pb)) / std::sqrt(va + vb);
    s.df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    boost::math::students_t dist(s.df);
    s.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(s.t)));
    out.push_back(s);
  }
  std::sort(out.begin(), out.end(), [](const ReferenceScore& x, const ReferenceScore& y) {
    return x.p != y.p ? x.p < y.p : x.id < y.id;
  });
  return out;
}

// -- integration oracle for the t tail ----------------------------------------------

/// 2 ∫_{|t|}^∞ f_ν(s) ds with f_ν the Student t density, by exp-sinh
/// quadrature on the half-line.
inline double integrated_two_sided_p(double t, double df) {
  const double log_norm = boost::math::lgamma((df + 1.0) / 2.0) - boost::math::lgamma(df / 2.0) -
                          0.5 * std::log(df * M_PI);
  auto density = [&](double s) { return std::exp(log_norm - (df + 1.0) / 2.0 * std::log1p(s * s / df)); };
  boost::math::quadrature::exp_sinh<double> integrator;
  const double a = std::fabs(t);
  const double tail = integrator.integrate([&](double u) { return density(a + u); }, 1e-13);
  return 2.0 * tail;
}

// -- Kolmogorov-Smirnov against Uniform(0,1) -----------------------------------------

inline double ks_statistic_uniform(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    d = std::max(d, static_cast<double>(i + 1) / n - xs[i]);
    d = std::max(d, xs[i] - static_cast<double>(i) / n);
  }
  return d;
}

/// Asymptotic Kolmogorov tail Q(λ) = 2 Σ (−1)^{k−1} exp(−2k²λ²) with the
/// Stephens small-sample correction on λ.
inline double ks_p_value(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

// -- orthogonal transforms -------------------------------------------------------------

/// Random orthogonal matrix from Gram-Schmidt on a Gaussian matrix (rows).
inline std::vector<std::vector<double>> random_orthogonal(Xoshiro256& rng, std::size_t dim) {
  std::vector<std::vector<double>> q;
  while (q.size() < dim) {
    auto v = gaussian_vector(rng, dim);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& u : q) {
        double d = 0.0;
        for (std::size_t j = 0; j < dim; ++j) d += u[j] * v[j];
        for (std::size_t j = 0; j < dim; ++j) v[j] -= d * u[j];
      }
    }
    double n = 0.0;
    for (double x : v) n += x * x;
    if (n < 1e-6) continue;
    q.push_back(reference_unit(v));
  }
  return q;
}

inline std::vector<double> apply(const std::vector<std::vector<double>>& q, std::span<const double> v) {
  std::vector<double> out(q.size(), 0.0);
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (std::size_t j = 0; j < v.size(); ++j) out[i] += q[i][j] * v[j];
  }
  return out;
}

inline EmbeddingSet transform_set(const EmbeddingSet& s, const std::vector<std::vector<double>>& q) {
  RawEmbeddingSet raw{s.object(), {}, s.ids(), s.labels()};
  for (std::size_t i = 0; i < s.size(); ++i) raw.rows.push_back(apply(q, s.row(i)));
  return validate_embedding_set(std::move(raw));
}

inline RandomCorpus transform_corpus(const RandomCorpus& c, const std::vector<std::vector<double>>& q) {
  RandomCorpus out;
  out.corpus = c.corpus;
  for (const auto& [id, p] : c.text_embs) {
    out.text_embs.emplace(id, TextEmbeddingPair{id, EmbeddingVector::make(apply(q, p.emb_text.values())),
                                                EmbeddingVector::make(apply(q, p.emb_contrast.values()))});
  }
  return out;
}

// -- randomized evaluation fixtures ---------------------------------------------------

struct EvaluationFixture {
  std::vector<eval::EvaluatedPair> pairs;
  eval::SynonymTable synonyms;
};

/// Reports whose ranked texts and ground-truth labels are drawn from a small
/// shared vocabulary, so hits and synonym-only hits both occur often.
inline EvaluationFixture random_evaluation(Xoshiro256& rng, std::size_t pair_count) {
  static const std::vector<std::string> kWords{"grass", "lawn", "snow", "sofa", "couch", "black", "dark",
                                               "water", "sea", "tree", "box", "carton", "bed", "sunny"};
  EvaluationFixture f;
  for (std::size_t i = 0; i < 12; ++i) {
    f.synonyms.add(kWords[rng.below(kWords.size())], kWords[rng.below(kWords.size())]);
  }
  for (std::size_t p = 0; p < pair_count; ++p) {
    eval::EvaluatedPair e;
    e.pair.set_a_ref = "s" + std::to_string(2 * p);
    e.pair.set_b_ref = "s" + std::to_string(2 * p + 1);
    e.pair.object = "cat";
    const std::size_t labels = 1 + rng.below(2);
    for (std::size_t l = 0; l < labels; ++l) e.pair.ground_truth_a.push_back(kWords[rng.below(kWords.size())]);
    e.report.top_x = 5;
    const std::size_t ranked = 1 + rng.below(10);
    for (std::size_t r = 0; r < ranked; ++r) {
      ScoredCandidate s;
      s.candidate.id = "rule:" + std::to_string(r);
      s.candidate.object = "cat";
      s.candidate.text = "a photo of a cat with " + kWords[rng.below(kWords.size())];
      s.p_value = static_cast<double>(r + 1) / 100.0;
      e.report.ranked.push_back(std::move(s));
    }
    f.pairs.push_back(std::move(e));
  }
  return f;
}

// -- byte fuzzing ----------------------------------------------------------------

/// Set whose values are exactly representable in f32, so a container round
/// trip must reproduce it bit for bit.
inline EmbeddingSet random_f32_set(Xoshiro256& rng, std::size_t rows, std::size_t dim) {
  RawEmbeddingSet raw;
  raw.object = "obj" + std::to_string(rng.below(5));
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<double> r(dim);
    for (double& x : r) x = static_cast<double>(static_cast<float>(rng.normal() * std::exp(4.0 * rng.normal())));
    raw.rows.push_back(std::move(r));
    raw.ids.push_back("id-" + std::to_string(i) + (rng.below(4) == 0 ? " \"\u00e9\\" : ""));
    std::vector<std::string> labels;
    for (std::size_t l = rng.below(3); l > 0; --l) labels.push_back("label" + std::to_string(rng.below(9)));
    raw.labels.push_back(std::move(labels));
  }
  return validate_embedding_set(std::move(raw));
}

/// One random edit: flip, overwrite, insert, delete, truncate, or splice in
/// bytes from a small dictionary of structurally interesting tokens.
inline std::string mutate(Xoshiro256& rng, std::string bytes) {
  static const std::vector<std::string> kTokens{"{", "}", "[", "]", "\"", ",", ":", "\n", "null", "1e999",
                                                "-1", "18446744073709551616", "\\u0000", "\xff", "GSCE"};
  const std::size_t size = bytes.size();
  switch (rng.below(6)) {
    case 0:
      if (size) bytes[rng.below(size)] ^= static_cast<char>(1u << rng.below(8));
      break;
    case 1:
      if (size) bytes[rng.below(size)] = static_cast<char>(rng.below(256));
      break;
    case 2:
      bytes.insert(rng.below(size + 1), 1, static_cast<char>(rng.below(256)));
      break;
    case 3:
      if (size) bytes.erase(rng.below(size), 1 + rng.below(4));
      break;
    case 4:
      bytes.resize(rng.below(size + 1));
      break;
    default:
      bytes.insert(rng.below(size + 1), kTokens[rng.below(kTokens.size())]);
      break;
  }
  return bytes;
}

inline std::string random_bytes(Xoshiro256& rng, std::size_t max_len) {
  std::string s(rng.below(max_len + 1), '\0');
  for (char& c : s) c = static_cast<char>(rng.below(256));
  return s;
}

/// Runs `fn(input)`; returns false if it threw anything other than gsclip::Error.
template <typename Fn>
bool total_on(Fn&& fn, const std::string& input) {
  try {
    fn(input);
  } catch (const Error&) {
  } catch (...) {
    return false;
  }
  return true;
}

}  // namespace gsclip::testing
