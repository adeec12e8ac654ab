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

#include <stdexcept>
#include <string>
#include <string_view>

namespace gsclip {

/// Every failure the engine can report. The CLI prints the code name in its
/// machine-parsable error record, so names are part of the interface.
enum class ErrorCode {
  // core-model
  DimensionMismatch,
  NonFiniteValue,
  DuplicateId,
  EmptySet,
  ZeroVector,
  // stats
  DomainError,
  ConvergenceFailure,
  InsufficientSamples,
  // generators
  InvalidTemplate,
  UnknownObject,
  EmptyVocabulary,
  NoNegationRule,
  EmptyWordList,
  MixedObjects,
  // selector
  DegenerateDiff,
  EmptyScoredSet,
  ObjectMismatch,
  MissingTextEmbedding,
  InvalidConfig,
  // eval-harness
  InsufficientCatalog,
  EmptyReports,
  // synth-bench
  InvalidSpec,
  // io-store
  IoFailure,
  BadMagic,
  UnsupportedVersion,
  UnsupportedDtype,
  MalformedHeader,
  TruncatedPayload,
  TrailingData,
  SidecarMismatch,
  MalformedRecord,
  CacheCorruption,
  ServiceUnreachable,
  MalformedResponse,
  PrefixViolation,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::InvalidTemplate: return "InvalidTemplate";
    case ErrorCode::UnknownObject: return "UnknownObject";
    case ErrorCode::EmptyVocabulary: return "EmptyVocabulary";
    case ErrorCode::NoNegationRule: return "NoNegationRule";
    case ErrorCode::EmptyWordList: return "EmptyWordList";
    case ErrorCode::MixedObjects: return "MixedObjects";
    case ErrorCode::DegenerateDiff: return "DegenerateDiff";
    case ErrorCode::EmptyScoredSet: return "EmptyScoredSet";
    case ErrorCode::ObjectMismatch: return "ObjectMismatch";
    case ErrorCode::MissingTextEmbedding: return "MissingTextEmbedding";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InsufficientCatalog: return "InsufficientCatalog";
    case ErrorCode::EmptyReports: return "EmptyReports";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::UnsupportedDtype: return "UnsupportedDtype";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::TrailingData: return "TrailingData";
    case ErrorCode::SidecarMismatch: return "SidecarMismatch";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::CacheCorruption: return "CacheCorruption";
    case ErrorCode::ServiceUnreachable: return "ServiceUnreachable";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::PrefixViolation: return "PrefixViolation";
  }
  return "Unknown";
}

/// The single exception type thrown by the library. Callers dispatch on
/// code(); what() carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace gsclip
