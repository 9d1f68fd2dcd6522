// Copyright 2026 The Enwar Authors
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

namespace enwar {

enum class ErrorCode {
  kInvalidFix,
  kCoincidentPoints,
  kInsufficientTrack,
  kInvalidGrid,
  kMissingCaption,
  kCaptionerUnavailable,
  kModalityDataMissing,
  kEmptyText,
  kInvalidChunkConfig,
  kEmbedderUnavailable,
  kDimensionMismatch,
  kNoUsableDocuments,
  kEmptyKnowledgeBase,
  kCorruptIndex,
  kFingerprintMismatch,
  kBackendUnavailable,
  kBackendRejected,
  kEmptyEvalSet,
  kInvalidInput,
  kIo,
};

constexpr std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidFix: return "InvalidFix";
    case ErrorCode::kCoincidentPoints: return "CoincidentPoints";
    case ErrorCode::kInsufficientTrack: return "InsufficientTrack";
    case ErrorCode::kInvalidGrid: return "InvalidGrid";
    case ErrorCode::kMissingCaption: return "MissingCaption";
    case ErrorCode::kCaptionerUnavailable: return "CaptionerUnavailable";
    case ErrorCode::kModalityDataMissing: return "ModalityDataMissing";
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kInvalidChunkConfig: return "InvalidChunkConfig";
    case ErrorCode::kEmbedderUnavailable: return "EmbedderUnavailable";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNoUsableDocuments: return "NoUsableDocuments";
    case ErrorCode::kEmptyKnowledgeBase: return "EmptyKnowledgeBase";
    case ErrorCode::kCorruptIndex: return "CorruptIndex";
    case ErrorCode::kFingerprintMismatch: return "FingerprintMismatch";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kBackendRejected: return "BackendRejected";
    case ErrorCode::kEmptyEvalSet: return "EmptyEvalSet";
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library. The message is prefixed with the
/// originating module and error name, e.g. "[knowledge_base] CorruptIndex: ...".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string_view module, const std::string& detail)
      : std::runtime_error("[" + std::string(module) + "] " +
                           std::string(error_name(code)) + ": " + detail),
        code_(code),
        module_(module),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string module_;
  std::string detail_;
};

}  // namespace enwar
