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

// End-to-end glue over files: corpus + text cache -> text embedding pairs,
// and catalog -> sampled pairs -> reports -> accuracy table.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gsclip/core.hpp"
#include "gsclip/error.hpp"
#include "gsclip/eval.hpp"
#include "gsclip/generators.hpp"
#include "gsclip/io/cache.hpp"
#include "gsclip/io/container.hpp"
#include "gsclip/io/records.hpp"
#include "gsclip/selector.hpp"

namespace gsclip::pipeline {

/// Re-derives contrast sentences for candidates whose pairing differs from
/// the requested one. Negation fallbacks are left alone under negation.
inline std::vector<CandidateExplanation> apply_pairing(std::vector<CandidateExplanation> corpus,
                                                       const gen::ContrastPolicy& policy) {
  for (auto& c : corpus) {
    if (c.contrast_mode == policy.mode) continue;
    if (policy.mode == ContrastMode::negation && c.contrast_fallback) continue;
    gen::attach_contrast(c, policy);
  }
  return corpus;
}

/// Every sentence the selector needs embeddings for, in corpus order.
inline std::vector<std::string> required_sentences(const std::vector<CandidateExplanation>& corpus) {
  std::vector<std::string> out;
  for (const auto& c : corpus) {
    out.push_back(c.text);
    out.push_back(c.contrast_text);
  }
  return out;
}

/// Resolves both embeddings of every candidate from the cache. Any miss is a
/// MissingTextEmbedding error that lists every uncached sentence.
inline std::map<std::string, TextEmbeddingPair> text_pairs_from_cache(
    const std::vector<CandidateExplanation>& corpus, const io::TextEmbeddingCache& cache,
    const std::string& model_tag, bool cache_normalized) {
  const auto found = cache.lookup(required_sentences(corpus), model_tag, cache_normalized);
  if (!found.misses.empty()) {
    std::string list;
    for (const auto& s : found.misses) list += (list.empty() ? "\"" : ", \"") + s + "\"";
    throw Error(ErrorCode::MissingTextEmbedding,
                std::to_string(found.misses.size()) + " sentence(s) not cached for model '" + model_tag +
                    "' (run the embedding extractor on them): " + list);
  }
  std::map<std::string, TextEmbeddingPair> out;
  for (const auto& c : corpus) {
    out.emplace(c.id, TextEmbeddingPair{c.id, found.hits.at(c.text), found.hits.at(c.contrast_text)});
  }
  return out;
}

struct EvaluationRun {
  std::vector<eval::EvaluatedPair> pairs;
  eval::AccuracyTable table;
};

struct EvaluationOptions {
  std::size_t count = 100;
  std::uint64_t seed = 0;
  std::vector<std::size_t> cutoffs{1, 3, 5};
  std::vector<eval::Metric> metrics{eval::Metric::Label, eval::Metric::KeyWords};
  SelectorConfig selector;
  gen::ContrastPolicy contrast;
  bool cache_normalized = true;
};

inline EvaluationRun evaluate_catalog(const io::Catalog& catalog, const eval::SynonymTable& synonyms,
                                      const EvaluationOptions& options, ExecOptions exec = {}) {
  const auto pairs = eval::sample_pairs(catalog.sets, options.count, options.seed);
  const auto cache = io::TextEmbeddingCache::load(catalog.text_cache);

  std::map<std::string, const eval::SetDescriptor*> by_id;
  for (const auto& s : catalog.sets) by_id[s.id] = &s;
  std::map<std::string, EmbeddingSet> sets;
  auto set_for = [&](const std::string& id) -> const EmbeddingSet& {
    auto it = sets.find(id);
    if (it == sets.end()) it = sets.emplace(id, io::read_embeddings(by_id.at(id)->path)).first;
    return it->second;
  };
  struct Prepared {
    std::vector<CandidateExplanation> corpus;
    std::map<std::string, TextEmbeddingPair> text_embs;
  };
  std::map<std::string, Prepared> prepared;

  EvaluationRun run;
  for (const auto& p : pairs) {
    auto it = prepared.find(p.object);
    if (it == prepared.end()) {
      const auto path = catalog.corpora.find(p.object);
      if (path == catalog.corpora.end()) {
        throw Error(ErrorCode::InvalidConfig, "catalog has no corpus for object '" + p.object + "'");
      }
      Prepared prep;
      prep.corpus = apply_pairing(io::decode_corpus(io::read_file(path->second)), options.contrast);
      prep.text_embs = text_pairs_from_cache(prep.corpus, cache, catalog.model_tag, options.cache_normalized);
      it = prepared.emplace(p.object, std::move(prep)).first;
    }
    auto report = explain(set_for(p.set_a_ref), set_for(p.set_b_ref), it->second.corpus, it->second.text_embs,
                          options.selector, exec);
    report.set_a_id = p.set_a_ref;
    report.set_b_id = p.set_b_ref;
    run.pairs.push_back({std::move(report), p});
  }
  run.table = eval::accuracy_table(run.pairs, options.cutoffs, options.metrics, synonyms);
  return run;
}

}  // namespace gsclip::pipeline
