// Copyright 2026  unit-codec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace unitcodec {

enum class ErrorCode {
  IoError = 1,
  CorruptHeader,
  UnsupportedFormat,
  InputTooShort,
  DegenerateBand,
  BadMagic,
  VersionMismatch,
  TruncatedFile,
  NonFiniteEntry,
  InsufficientVoicedFrames,
  TooFewPoints,
  NonFiniteInput,
  DimensionMismatch,
  LengthMismatch,
  IncompatibleRates,
  EmptyCorpus,
  ModelMismatch,
  ModelFingerprintMismatch,
  TruncatedPayload,
  FeatureKindMismatch,
  VocabMismatch,
  ConfigMismatch,
  EmptySequence,
  DegenerateLabels,
  InsufficientData,
  InvalidArgument,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::CorruptHeader: return "CorruptHeader";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::InputTooShort: return "InputTooShort";
    case ErrorCode::DegenerateBand: return "DegenerateBand";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorCode::InsufficientVoicedFrames: return "InsufficientVoicedFrames";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::IncompatibleRates: return "IncompatibleRates";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::ModelMismatch: return "ModelMismatch";
    case ErrorCode::ModelFingerprintMismatch: return "ModelFingerprintMismatch";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::FeatureKindMismatch: return "FeatureKindMismatch";
    case ErrorCode::VocabMismatch: return "VocabMismatch";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

}  // namespace unitcodec
