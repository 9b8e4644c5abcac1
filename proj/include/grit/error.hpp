// Copyright 2026 The Grit Forge Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GRIT_ERROR_HPP_
#define GRIT_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace grit {

enum class ErrorCode {
  kInvalidArgument,
  kSchema,
  kMissingFile,
  kDecode,
  kDimensionMismatch,
  kUnknownCategoryId,
  kOutOfBounds,
  kUnknownModality,
  kReservedTokenInText,
  kMarkupParse,
  kNoObjectsForRegionTask,
  kSplitCoverageGap,
  kBackendUnavailable,
  kAuthError,
  kRateLimited,
  kTransportError,
  kOfflineMiss,
  kEmptyGold,
  kJoinError,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

// Process exit status for a failure of this kind: 1 data violation,
// 2 configuration error, 3 backend or transport error.
int exit_status_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace grit

#endif  // GRIT_ERROR_HPP_
