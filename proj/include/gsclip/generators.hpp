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

// Candidate corpus construction: template filling over annotation
// vocabularies, language-model completion dumps, and a word-frequency
// baseline. Every candidate leaves here with its contrast sentence attached.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "gsclip/core.hpp"
#include "gsclip/error.hpp"
#include "gsclip/text.hpp"

namespace gsclip::gen {

inline constexpr std::size_t kDefaultCandidateCap = 3700;
inline constexpr std::string_view kSlotMarker = "[slot]";

enum class SlotKind { object, attribute, context };

inline SlotKind parse_slot_kind(std::string_view s) {
  if (s == "object") return SlotKind::object;
  if (s == "attribute") return SlotKind::attribute;
  if (s == "context") return SlotKind::context;
  throw Error(ErrorCode::InvalidTemplate, "unknown slot kind '" + std::string(s) + "'");
}

constexpr std::string_view to_string(SlotKind k) noexcept {
  switch (k) {
    case SlotKind::object: return "object";
    case SlotKind::attribute: return "attribute";
    case SlotKind::context: return "context";
  }
  return "object";
}

/// A sentence pattern with ordered "[slot]" markers and the kind of value
/// each marker takes. Exactly one marker is the object.
class TemplateSpec {
 public:
  static TemplateSpec make(std::string pattern, std::vector<SlotKind> kinds) {
    std::size_t markers = 0;
    for (std::size_t pos = pattern.find(kSlotMarker); pos != std::string::npos;
         pos = pattern.find(kSlotMarker, pos + kSlotMarker.size())) {
      ++markers;
    }
    if (markers != kinds.size()) {
      throw Error(ErrorCode::InvalidTemplate, "'" + pattern + "' has " + std::to_string(markers) +
                                                  " slots but " + std::to_string(kinds.size()) +
                                                  " slot kinds");
    }
    if (std::count(kinds.begin(), kinds.end(), SlotKind::object) != 1) {
      throw Error(ErrorCode::InvalidTemplate, "'" + pattern + "' needs exactly one object slot");
    }
    return TemplateSpec(std::move(pattern), std::move(kinds));
  }

  /// Accepts the named form, e.g. "a photo of a [object] with [context]".
  static TemplateSpec parse_named(std::string_view named) {
    std::string pattern;
    std::vector<SlotKind> kinds;
    std::size_t i = 0;
    while (i < named.size()) {
      if (named[i] == '[') {
        const auto close = named.find(']', i);
        if (close == std::string_view::npos) {
          throw Error(ErrorCode::InvalidTemplate, "unterminated slot in '" + std::string(named) + "'");
        }
        kinds.push_back(parse_slot_kind(named.substr(i + 1, close - i - 1)));
        pattern += kSlotMarker;
        i = close + 1;
      } else {
        pattern += named[i++];
      }
    }
    return make(std::move(pattern), std::move(kinds));
  }

  const std::string& pattern() const noexcept { return pattern_; }
  const std::vector<SlotKind>& slot_kinds() const noexcept { return kinds_; }

  std::size_t free_slot_count() const noexcept { return kinds_.size() - 1; }

  /// Substitutes `values` (one per slot, in order) into the pattern.
  std::string fill(const std::vector<std::string>& values) const {
    std::string out;
    std::size_t slot = 0;
    std::size_t i = 0;
    while (i < pattern_.size()) {
      if (pattern_.compare(i, kSlotMarker.size(), kSlotMarker) == 0) {
        out += values.at(slot++);
        i += kSlotMarker.size();
      } else {
        out += pattern_[i++];
      }
    }
    return out;
  }

 private:
  TemplateSpec(std::string pattern, std::vector<SlotKind> kinds)
      : pattern_(std::move(pattern)), kinds_(std::move(kinds)) {}

  std::string pattern_;
  std::vector<SlotKind> kinds_;
};

inline std::vector<TemplateSpec> default_templates() {
  return {TemplateSpec::parse_named("a photo of a [object] with [context]"),
          TemplateSpec::parse_named("a photo of a [object] that is [attribute]")};
}

/// Dataset annotation strings, lowercase-folded.
class AnnotationVocabulary {
 public:
  using AttributeGroups = std::vector<std::pair<std::string, std::vector<std::string>>>;

  static AnnotationVocabulary make(std::vector<std::string> objects, AttributeGroups attributes,
                                   std::vector<std::string> contexts) {
    auto fold = [](std::string& s, std::string_view what) {
      s = text::to_lower(text::trim(s));
      if (s.empty()) throw Error(ErrorCode::EmptyVocabulary, "empty " + std::string(what) + " string");
    };
    AnnotationVocabulary v;
    for (auto& o : objects) fold(o, "object");
    for (auto& [group, values] : attributes) {
      fold(group, "attribute group");
      for (auto& s : values) fold(s, "attribute");
    }
    for (auto& c : contexts) fold(c, "context");
    v.objects_ = std::move(objects);
    v.attributes_ = std::move(attributes);
    v.contexts_ = std::move(contexts);
    return v;
  }

  const std::vector<std::string>& objects() const noexcept { return objects_; }
  const AttributeGroups& attributes() const noexcept { return attributes_; }
  const std::vector<std::string>& contexts() const noexcept { return contexts_; }

  bool has_object(std::string_view o) const {
    const auto lo = text::to_lower(o);
    return std::find(objects_.begin(), objects_.end(), lo) != objects_.end();
  }

  /// Attribute values of every group, in group order.
  std::vector<std::string> all_attributes() const {
    std::vector<std::string> out;
    for (const auto& [group, values] : attributes_) out.insert(out.end(), values.begin(), values.end());
    return out;
  }

 private:
  std::vector<std::string> objects_;
  AttributeGroups attributes_;
  std::vector<std::string> contexts_;
};

struct LMCandidateRecord {
  std::string object;
  std::string text;
  double log_prob = 0.0;

  friend bool operator==(const LMCandidateRecord&, const LMCandidateRecord&) = default;
};

struct WordFrequencyEntry {
  std::string word;
  std::string pos_tag;
  long long rank = 0;

  friend bool operator==(const WordFrequencyEntry&, const WordFrequencyEntry&) = default;
};

struct AntonymRule {
  std::string pattern;
  std::string replacement;

  friend bool operator==(const AntonymRule&, const AntonymRule&) = default;
};

/// Ordered connective rewrites used for negation pairing.
using AntonymTable = std::vector<AntonymRule>;

inline AntonymTable default_antonym_table() {
  return {{"with", "without"}, {"that is", "that is not"}, {"in", "not in"}, {"on", "not on"}};
}

struct ContrastPolicy {
  ContrastMode mode = ContrastMode::negation;
  AntonymTable antonyms = default_antonym_table();
};

namespace detail {

inline bool contains_ci(std::string_view hay, std::string_view needle) {
  return text::to_lower(hay).find(text::to_lower(needle)) != std::string::npos;
}

// Plural objects ("people", "cats") take no article. Without a lexicon this
// is a suffix heuristic: trailing "s" not preceded by s/u/i.
inline bool looks_plural(std::string_view object) {
  const auto words = text::token_words(object);
  if (words.empty()) return false;
  const std::string& last = words.back();
  static const std::set<std::string, std::less<>> kIrregular = {
      "people", "children", "men", "women", "mice", "geese", "teeth", "feet", "sheep"};
  if (kIrregular.count(last) != 0) return true;
  if (last.size() < 3 || last.back() != 's') return false;
  const char prev = last[last.size() - 2];
  return prev != 's' && prev != 'u' && prev != 'i';
}

}  // namespace detail

/// "a photo of a <object>", with "an" before vowel-initial objects and no
/// article for plural objects.
inline std::string general_statement(std::string_view object) {
  const std::string obj = text::trim(object);
  if (detail::looks_plural(obj)) return "a photo of " + obj;
  const char first = obj.empty() ? 'x' : static_cast<char>(std::tolower(static_cast<unsigned char>(obj[0])));
  const bool vowel = first == 'a' || first == 'e' || first == 'i' || first == 'o' || first == 'u';
  return std::string("a photo of ") + (vowel ? "an " : "a ") + obj;
}

/// Builds the sentence a candidate is contrasted against.
///
/// Negation rewrites the first connective after the object mention using the
/// antonym table (earliest position wins, then the longest pattern), leaving
/// the object clause untouched. Throws NoNegationRule when nothing matches.
inline std::string make_contrast(std::string_view candidate_text, std::string_view object,
                                 ContrastMode mode, const AntonymTable& antonyms) {
  const auto lower_text = text::to_lower(candidate_text);
  const auto lower_obj = text::to_lower(text::trim(object));
  const auto obj_pos = lower_text.find(lower_obj);
  if (lower_obj.empty() || obj_pos == std::string::npos) {
    throw Error(ErrorCode::UnknownObject, "'" + std::string(candidate_text) +
                                              "' does not mention object '" + std::string(object) + "'");
  }
  if (mode == ContrastMode::general) return general_statement(object);

  const auto tokens = text::tokenize(candidate_text);
  std::size_t start = 0;
  while (start < tokens.size() && tokens[start].begin < obj_pos + lower_obj.size()) ++start;

  for (std::size_t i = start; i < tokens.size(); ++i) {
    const AntonymRule* best = nullptr;
    std::size_t best_len = 0;
    for (const auto& rule : antonyms) {
      const auto words = text::token_words(rule.pattern);
      if (words.empty() || words.size() <= best_len) continue;
      if (text::find_token_run(tokens, words, i) == i) {
        best = &rule;
        best_len = words.size();
      }
    }
    if (best != nullptr) {
      std::string out(candidate_text.substr(0, tokens[i].begin));
      out += best->replacement;
      out += candidate_text.substr(tokens[i + best_len - 1].end);
      return out;
    }
  }
  throw Error(ErrorCode::NoNegationRule,
              "no antonym rule matches the descriptive part of '" + std::string(candidate_text) + "'");
}

/// Fills in contrast_text under `policy`. A negation miss falls back to the
/// general statement and sets contrast_fallback.
inline void attach_contrast(CandidateExplanation& c, const ContrastPolicy& policy) {
  c.contrast_mode = policy.mode;
  c.contrast_fallback = false;
  try {
    c.contrast_text = make_contrast(c.text, c.object, policy.mode, policy.antonyms);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoNegationRule) throw;
    c.contrast_text = general_statement(c.object);
    c.contrast_mode = ContrastMode::general;
    c.contrast_fallback = true;
  }
}

inline std::string make_candidate_id(CandidateSource source, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu", index);
  return std::string(to_string(source)) + ":" + buf;
}

namespace detail {

// Candidates whose text equals its contrast carry no descriptive content and
// cannot form a direction; they are not emitted.
inline bool push_candidate(std::vector<CandidateExplanation>& out, CandidateExplanation c,
                           const ContrastPolicy& policy) {
  attach_contrast(c, policy);
  if (text::to_lower(c.text) == text::to_lower(c.contrast_text)) return false;
  c.id = make_candidate_id(c.source, out.size());
  out.push_back(std::move(c));
  return true;
}

}  // namespace detail

/// Cartesian fill of every template's non-object slots, object fixed.
/// Output is deduplicated on text, in template-then-value order.
inline std::vector<CandidateExplanation> rule_generate(const AnnotationVocabulary& vocab,
                                                       const std::vector<TemplateSpec>& templates,
                                                       std::string_view object,
                                                       const ContrastPolicy& policy = {}) {
  const std::string obj = text::to_lower(text::trim(object));
  if (!vocab.has_object(obj)) {
    throw Error(ErrorCode::UnknownObject, "object '" + std::string(object) + "' is not in the vocabulary");
  }
  const auto attributes = vocab.all_attributes();

  std::vector<CandidateExplanation> out;
  std::unordered_set<std::string> seen;
  for (const auto& tpl : templates) {
    if (tpl.free_slot_count() == 0) {
      throw Error(ErrorCode::InvalidTemplate, "'" + tpl.pattern() + "' has no descriptive slot");
    }
    std::vector<const std::vector<std::string>*> pools;
    const std::vector<std::string> object_pool{obj};
    bool empty_pool = false;
    for (SlotKind k : tpl.slot_kinds()) {
      const auto* pool = k == SlotKind::object      ? &object_pool
                         : k == SlotKind::attribute ? &attributes
                                                    : &vocab.contexts();
      empty_pool = empty_pool || pool->empty();
      pools.push_back(pool);
    }
    if (empty_pool) continue;

    // Odometer over the slot pools, last slot fastest.
    std::vector<std::size_t> idx(pools.size(), 0);
    bool done = false;
    while (!done) {
      std::vector<std::string> values;
      for (std::size_t s = 0; s < pools.size(); ++s) values.push_back((*pools[s])[idx[s]]);
      CandidateExplanation c;
      c.object = obj;
      c.text = tpl.fill(values);
      c.source = CandidateSource::rule;
      if (seen.insert(c.text).second) detail::push_candidate(out, std::move(c), policy);

      std::size_t s = pools.size();
      while (true) {
        if (s == 0) {
          done = true;
          break;
        }
        --s;
        if (++idx[s] < pools[s]->size()) break;
        idx[s] = 0;
      }
    }
  }
  if (out.empty()) {
    throw Error(ErrorCode::EmptyVocabulary,
                "no template slot could be filled for object '" + obj + "'");
  }
  return out;
}

/// Keeps the object's completions at or above min_log_prob, highest
/// log-probability first, at most max_candidates. Ties keep input order.
inline std::vector<CandidateExplanation> load_lm_candidates(
    const std::vector<LMCandidateRecord>& records, std::string_view object,
    std::size_t max_candidates = kDefaultCandidateCap,
    double min_log_prob = -std::numeric_limits<double>::infinity(),
    const ContrastPolicy& policy = {}) {
  const std::string obj = text::to_lower(text::trim(object));
  std::vector<const LMCandidateRecord*> kept;
  for (const auto& r : records) {
    if (text::to_lower(text::trim(r.object)) != obj) continue;
    if (!(r.log_prob >= min_log_prob)) continue;
    if (!detail::contains_ci(r.text, obj)) continue;
    kept.push_back(&r);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto* a, const auto* b) { return a->log_prob > b->log_prob; });

  std::vector<CandidateExplanation> out;
  for (const auto* r : kept) {
    if (out.size() >= max_candidates) break;
    CandidateExplanation c;
    c.object = obj;
    c.text = text::trim(r->text);
    c.source = CandidateSource::lm;
    c.generation_score = r->log_prob;
    detail::push_candidate(out, std::move(c), policy);
  }
  return out;
}

/// Word-frequency baseline: fills the template's single free slot with the
/// most frequent words whose POS tag is allowed, up to `cap`. The generation
/// score is the word's frequency rank.
inline std::vector<CandidateExplanation> frequency_generate(
    std::vector<WordFrequencyEntry> words, std::string_view object, const TemplateSpec& tpl,
    const std::set<std::string, std::less<>>& allowed_pos, std::size_t cap = kDefaultCandidateCap,
    const ContrastPolicy& policy = {}) {
  if (words.empty()) throw Error(ErrorCode::EmptyWordList, "word-frequency list is empty");
  if (tpl.free_slot_count() != 1) {
    throw Error(ErrorCode::InvalidTemplate,
                "frequency template '" + tpl.pattern() + "' must have exactly one free slot");
  }
  const std::string obj = text::to_lower(text::trim(object));
  std::set<std::string, std::less<>> pos_folded;
  for (const auto& p : allowed_pos) pos_folded.insert(text::to_lower(p));

  std::stable_sort(words.begin(), words.end(),
                   [](const auto& a, const auto& b) { return a.rank < b.rank; });

  std::vector<CandidateExplanation> out;
  std::unordered_set<std::string> seen;
  for (const auto& w : words) {
    if (out.size() >= cap) break;
    const std::string word = text::to_lower(text::trim(w.word));
    if (word.empty() || word == obj) continue;
    if (pos_folded.count(text::to_lower(w.pos_tag)) == 0) continue;
    if (!seen.insert(word).second) continue;
    std::vector<std::string> values;
    for (SlotKind k : tpl.slot_kinds()) values.push_back(k == SlotKind::object ? obj : word);
    CandidateExplanation c;
    c.object = obj;
    c.text = tpl.fill(values);
    c.source = CandidateSource::frequency;
    c.generation_score = static_cast<double>(w.rank);
    detail::push_candidate(out, std::move(c), policy);
  }
  return out;
}

/// S_all: rule, then lm, then frequency candidates, case-insensitively
/// deduplicated on text (first occurrence wins) with ids reassigned as
/// "<source>:<6-digit index>" per source.
inline std::vector<CandidateExplanation> assemble_corpus(
    const std::vector<CandidateExplanation>& rule, const std::vector<CandidateExplanation>& lm,
    const std::vector<CandidateExplanation>& freq) {
  std::optional<std::string> object;
  for (const auto* part : {&rule, &lm, &freq}) {
    for (const auto& c : *part) {
      const auto o = text::to_lower(c.object);
      if (!object) object = o;
      if (*object != o) {
        throw Error(ErrorCode::MixedObjects,
                    "corpus mixes objects '" + *object + "' and '" + o + "'");
      }
    }
  }
  std::vector<CandidateExplanation> out;
  std::unordered_set<std::string> seen;
  std::size_t counts[3] = {0, 0, 0};
  for (const auto* part : {&rule, &lm, &freq}) {
    for (const auto& c : *part) {
      if (!seen.insert(text::to_lower(c.text)).second) continue;
      CandidateExplanation copy = c;
      copy.id = make_candidate_id(c.source, counts[static_cast<int>(c.source)]++);
      out.push_back(std::move(copy));
    }
  }
  return out;
}

}  // namespace gsclip::gen
