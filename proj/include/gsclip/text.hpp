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

#include <cctype>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gsclip::text {

/// ASCII lowercase; bytes >= 0x80 pass through untouched.
inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

/// A token together with its byte range in the source string.
struct Token {
  std::string lower;
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Splits on whitespace and ASCII punctuation; tokens are lowercased.
/// Non-ASCII bytes are word characters.
inline std::vector<Token> tokenize(std::string_view s) {
  auto is_word = [](unsigned char c) {
    return c >= 0x80 || std::isalnum(c) != 0;
  };
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && !is_word(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t b = i;
    while (i < s.size() && is_word(static_cast<unsigned char>(s[i]))) ++i;
    if (i > b) out.push_back(Token{to_lower(s.substr(b, i - b)), b, i});
  }
  return out;
}

inline std::vector<std::string> token_words(std::string_view s) {
  std::vector<std::string> out;
  for (auto& t : tokenize(s)) out.push_back(std::move(t.lower));
  return out;
}

/// First index at or after `from` where `needle` occurs as a contiguous
/// token run inside `hay`.
inline std::optional<std::size_t> find_token_run(std::span<const Token> hay,
                                                 std::span<const std::string> needle,
                                                 std::size_t from = 0) {
  if (needle.empty() || needle.size() > hay.size()) return std::nullopt;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < needle.size(); ++k) {
      if (hay[i + k].lower != needle[k]) {
        match = false;
        break;
      }
    }
    if (match) return i;
  }
  return std::nullopt;
}

/// Case-insensitive whole-token containment of `phrase` in `sentence`.
inline bool contains_phrase(std::string_view sentence, std::string_view phrase) {
  const auto hay = tokenize(sentence);
  const auto needle = token_words(phrase);
  return find_token_run(hay, needle).has_value();
}

}  // namespace gsclip::text
