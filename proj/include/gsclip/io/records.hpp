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

// Line-delimited text formats. Every record is one JSON object on its own
// newline-terminated line; blank lines are ignored. Decoders accept arbitrary
// input and either return the records or throw MalformedRecord.
//
//   candidate dump   {"object": s, "text": s, "log_prob": r}
//                    an optional first line {"header": {...}} records the
//                    completion strategy and is passed through as metadata
//   word frequency   {"word": s, "pos": s, "rank": int}
//   antonym table    {"pattern": s, "replacement": s}
//   synonym table    {"label": s, "synonym": s}
//   templates        {"pattern": "a photo of a [slot] with [slot]",
//                     "slots": ["object", "context"]}
//   corpus           {"id", "object", "text", "contrast_text", "contrast_mode",
//                     "source", "generation_score"?, "contrast_fallback"}
//
// The annotation vocabulary and the evaluation catalog are single JSON
// documents, described at their decoders.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gsclip/core.hpp"
#include "gsclip/error.hpp"
#include "gsclip/eval.hpp"
#include "gsclip/generators.hpp"
#include "gsclip/io/files.hpp"
#include "json.hpp"

namespace gsclip::io {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace detail {

[[noreturn]] inline void malformed(std::string_view what, std::size_t line, const std::string& why) {
  throw Error(ErrorCode::MalformedRecord,
              std::string(what) + (line ? " line " + std::to_string(line) : std::string()) + ": " + why);
}

/// Calls `fn(object, line_no)` for every nonblank line.
inline void for_each_record(std::string_view text, std::string_view what,
                            const std::function<void(const json&, std::size_t)>& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      malformed(what, line_no, e.what());
    }
    if (!j.is_object()) malformed(what, line_no, "record is not a JSON object");
    try {
      fn(j, line_no);
    } catch (const json::exception& e) {
      malformed(what, line_no, e.what());
    }
  }
}

inline std::string str_field(const json& j, const char* key, std::string_view what, std::size_t line) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) malformed(what, line, std::string("missing string field '") + key + "'");
  return it->get<std::string>();
}

inline double num_field(const json& j, const char* key, std::string_view what, std::size_t line) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) malformed(what, line, std::string("missing numeric field '") + key + "'");
  const double v = it->get<double>();
  if (!std::isfinite(v)) malformed(what, line, std::string("field '") + key + "' is not finite");
  return v;
}

inline std::string lines(const std::vector<ordered_json>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

}  // namespace detail

// -- LM candidate dump ------------------------------------------------------

struct CandidateDump {
  std::optional<json> header;
  std::vector<gen::LMCandidateRecord> records;
};

inline CandidateDump decode_candidate_dump(std::string_view text) {
  constexpr std::string_view what = "candidate dump";
  CandidateDump dump;
  bool first = true;
  detail::for_each_record(text, what, [&](const json& j, std::size_t line) {
    if (first && j.contains("header")) {
      dump.header = j.at("header");
      first = false;
      return;
    }
    first = false;
    dump.records.push_back({detail::str_field(j, "object", what, line), detail::str_field(j, "text", what, line),
                            detail::num_field(j, "log_prob", what, line)});
  });
  return dump;
}

inline std::string encode_candidate_dump(const CandidateDump& dump) {
  std::vector<ordered_json> out;
  if (dump.header) out.push_back(ordered_json{{"header", *dump.header}});
  for (const auto& r : dump.records) out.push_back({{"object", r.object}, {"text", r.text}, {"log_prob", r.log_prob}});
  return detail::lines(out);
}

// -- word frequency list -----------------------------------------------------

inline std::vector<gen::WordFrequencyEntry> decode_word_list(std::string_view text) {
  constexpr std::string_view what = "word list";
  std::vector<gen::WordFrequencyEntry> out;
  detail::for_each_record(text, what, [&](const json& j, std::size_t line) {
    const auto it = j.find("rank");
    if (it == j.end() || !it->is_number_integer()) detail::malformed(what, line, "missing integer field 'rank'");
    out.push_back({detail::str_field(j, "word", what, line), detail::str_field(j, "pos", what, line),
                   it->get<long long>()});
  });
  return out;
}

inline std::string encode_word_list(const std::vector<gen::WordFrequencyEntry>& words) {
  std::vector<ordered_json> out;
  for (const auto& w : words) out.push_back({{"word", w.word}, {"pos", w.pos_tag}, {"rank", w.rank}});
  return detail::lines(out);
}

// -- antonym table -------------------------------------------------------------

inline gen::AntonymTable decode_antonym_table(std::string_view text) {
  constexpr std::string_view what = "antonym table";
  gen::AntonymTable out;
  detail::for_each_record(text, what, [&](const json& j, std::size_t line) {
    auto pattern = detail::str_field(j, "pattern", what, line);
    if (text::token_words(pattern).empty()) detail::malformed(what, line, "pattern has no words");
    out.push_back({std::move(pattern), detail::str_field(j, "replacement", what, line)});
  });
  return out;
}

inline std::string encode_antonym_table(const gen::AntonymTable& table) {
  std::vector<ordered_json> out;
  for (const auto& r : table) out.push_back({{"pattern", r.pattern}, {"replacement", r.replacement}});
  return detail::lines(out);
}

// -- synonym table ---------------------------------------------------------------

inline eval::SynonymTable decode_synonym_table(std::string_view text) {
  constexpr std::string_view what = "synonym table";
  eval::SynonymTable table;
  detail::for_each_record(text, what, [&](const json& j, std::size_t line) {
    table.add(detail::str_field(j, "label", what, line), detail::str_field(j, "synonym", what, line));
  });
  return table;
}

// -- templates -------------------------------------------------------------------

inline std::vector<gen::TemplateSpec> decode_templates(std::string_view text) {
  constexpr std::string_view what = "templates";
  std::vector<gen::TemplateSpec> out;
  detail::for_each_record(text, what, [&](const json& j, std::size_t line) {
    auto pattern = detail::str_field(j, "pattern", what, line);
    const auto slots = j.find("slots");
    if (slots == j.end()) {
      // Named form: "a photo of a [object] with [context]".
      out.push_back(gen::TemplateSpec::parse_named(pattern));
      return;
    }
    if (!slots->is_array()) detail::malformed(what, line, "'slots' must be an array");
    std::vector<gen::SlotKind> kinds;
    for (const auto& s : *slots) {
      if (!s.is_string()) detail::malformed(what, line, "slot kinds must be strings");
      kinds.push_back(gen::parse_slot_kind(s.get<std::string>()));
    }
    out.push_back(gen::TemplateSpec::make(std::move(pattern), std::move(kinds)));
  });
  return out;
}

// -- annotation vocabulary -----------------------------------------------------
//
// {"objects": [s...], "attributes": {group: [s...], ...}, "contexts": [s...]}

inline gen::AnnotationVocabulary decode_vocabulary(std::string_view text) {
  constexpr std::string_view what = "vocabulary";
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const json::exception& e) {
    detail::malformed(what, 0, e.what());
  }
  if (!j.is_object()) detail::malformed(what, 0, "not a JSON object");
  auto strings = [&](const ordered_json& arr, const std::string& field) {
    if (!arr.is_array()) detail::malformed(what, 0, "'" + field + "' must be an array of strings");
    std::vector<std::string> out;
    for (const auto& s : arr) {
      if (!s.is_string()) detail::malformed(what, 0, "'" + field + "' must be an array of strings");
      out.push_back(s.get<std::string>());
    }
    return out;
  };
  std::vector<std::string> objects, contexts;
  gen::AnnotationVocabulary::AttributeGroups attributes;
  if (auto it = j.find("objects"); it != j.end()) objects = strings(*it, "objects");
  if (auto it = j.find("contexts"); it != j.end()) contexts = strings(*it, "contexts");
  if (auto it = j.find("attributes"); it != j.end()) {
    if (!it->is_object()) detail::malformed(what, 0, "'attributes' must map group names to arrays");
    for (const auto& [group, values] : it->items()) attributes.emplace_back(group, strings(values, group));
  }
  return gen::AnnotationVocabulary::make(std::move(objects), std::move(attributes), std::move(contexts));
}

// -- corpus ----------------------------------------------------------------------

inline std::string encode_corpus(const std::vector<CandidateExplanation>& corpus) {
  std::vector<ordered_json> out;
  for (const auto& c : corpus) {
    ordered_json j{{"id", c.id},
                   {"object", c.object},
                   {"text", c.text},
                   {"contrast_text", c.contrast_text},
                   {"contrast_mode", to_string(c.contrast_mode)},
                   {"source", to_string(c.source)}};
    if (c.generation_score) j["generation_score"] = *c.generation_score;
    j["contrast_fallback"] = c.contrast_fallback;
    out.push_back(std::move(j));
  }
  return detail::lines(out);
}

inline std::vector<CandidateExplanation> decode_corpus(std::string_view text) {
  constexpr std::string_view what = "corpus";
  std::vector<CandidateExplanation> out;
  detail::for_each_record(text, what, [&](const json& j, std::size_t line) {
    CandidateExplanation c;
    c.id = detail::str_field(j, "id", what, line);
    c.object = detail::str_field(j, "object", what, line);
    c.text = detail::str_field(j, "text", what, line);
    c.contrast_text = detail::str_field(j, "contrast_text", what, line);
    try {
      c.contrast_mode = parse_contrast_mode(detail::str_field(j, "contrast_mode", what, line));
      c.source = parse_candidate_source(detail::str_field(j, "source", what, line));
    } catch (const Error& e) {
      detail::malformed(what, line, e.detail());
    }
    if (j.contains("generation_score")) c.generation_score = detail::num_field(j, "generation_score", what, line);
    if (auto it = j.find("contrast_fallback"); it != j.end()) {
      if (!it->is_boolean()) detail::malformed(what, line, "'contrast_fallback' must be boolean");
      c.contrast_fallback = it->get<bool>();
    }
    if (c.text == c.contrast_text) detail::malformed(what, line, "text equals contrast_text");
    if (text::to_lower(c.text).find(text::to_lower(c.object)) == std::string::npos) {
      detail::malformed(what, line, "text does not mention object '" + c.object + "'");
    }
    out.push_back(std::move(c));
  });
  return out;
}

// -- evaluation catalog ------------------------------------------------------------
//
// {
//   "model_tag": s,                      text-cache model tag
//   "text_cache": path,                  GSCE text cache (see cache.hpp)
//   "corpora": {object: path, ...},      one corpus file per main object
//   "sets": [{"id": s, "path": path, "object": s, "labels": [s...]}, ...]
// }
// Relative paths resolve against the catalog file's directory.

struct Catalog {
  std::string model_tag;
  fs::path text_cache;
  std::map<std::string, fs::path> corpora;
  std::vector<eval::SetDescriptor> sets;
};

inline Catalog decode_catalog(std::string_view text, const fs::path& base_dir = {}) {
  constexpr std::string_view what = "catalog";
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    detail::malformed(what, 0, e.what());
  }
  if (!j.is_object()) detail::malformed(what, 0, "not a JSON object");
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  Catalog c;
  try {
    c.model_tag = detail::str_field(j, "model_tag", what, 0);
    c.text_cache = resolve(detail::str_field(j, "text_cache", what, 0));
    const auto corpora = j.find("corpora");
    if (corpora == j.end() || !corpora->is_object()) detail::malformed(what, 0, "'corpora' must be an object");
    for (const auto& [object, path] : corpora->items()) {
      if (!path.is_string()) detail::malformed(what, 0, "corpus paths must be strings");
      c.corpora[text::to_lower(object)] = resolve(path.get<std::string>());
    }
    const auto sets = j.find("sets");
    if (sets == j.end() || !sets->is_array()) detail::malformed(what, 0, "'sets' must be an array");
    std::size_t index = 0;
    for (const auto& s : *sets) {
      ++index;
      if (!s.is_object()) detail::malformed(what, 0, "set entry " + std::to_string(index) + " is not an object");
      eval::SetDescriptor d;
      d.id = detail::str_field(s, "id", what, 0);
      d.path = resolve(detail::str_field(s, "path", what, 0)).string();
      d.object = detail::str_field(s, "object", what, 0);
      if (auto it = s.find("labels"); it != s.end()) {
        if (!it->is_array()) detail::malformed(what, 0, "labels must be an array");
        for (const auto& l : *it) {
          if (!l.is_string()) detail::malformed(what, 0, "labels must be strings");
          d.labels.push_back(l.get<std::string>());
        }
      }
      c.sets.push_back(std::move(d));
    }
  } catch (const json::exception& e) {
    detail::malformed(what, 0, e.what());
  }
  return c;
}

inline std::string encode_catalog(const Catalog& c) {
  ordered_json j;
  j["model_tag"] = c.model_tag;
  j["text_cache"] = c.text_cache.string();
  j["corpora"] = ordered_json::object();
  for (const auto& [object, path] : c.corpora) j["corpora"][object] = path.string();
  j["sets"] = ordered_json::array();
  for (const auto& s : c.sets) {
    j["sets"].push_back({{"id", s.id}, {"path", s.path}, {"object", s.object}, {"labels", s.labels}});
  }
  return j.dump(2) + "\n";
}

}  // namespace gsclip::io
