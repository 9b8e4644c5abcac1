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

#include "grit/error.hpp"

namespace grit {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kSchema: return "SchemaViolation";
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kDecode: return "DecodeError";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kUnknownCategoryId: return "UnknownCategoryId";
    case ErrorCode::kOutOfBounds: return "OutOfBounds";
    case ErrorCode::kUnknownModality: return "UnknownModality";
    case ErrorCode::kReservedTokenInText: return "ReservedTokenInText";
    case ErrorCode::kMarkupParse: return "MarkupParse";
    case ErrorCode::kNoObjectsForRegionTask: return "NoObjectsForRegionTask";
    case ErrorCode::kSplitCoverageGap: return "SplitCoverageGap";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kAuthError: return "AuthError";
    case ErrorCode::kRateLimited: return "RateLimited";
    case ErrorCode::kTransportError: return "TransportError";
    case ErrorCode::kOfflineMiss: return "OfflineMiss";
    case ErrorCode::kEmptyGold: return "EmptyGold";
    case ErrorCode::kJoinError: return "JoinError";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

int exit_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kMissingFile:
    case ErrorCode::kIo:
      return 2;
    case ErrorCode::kBackendUnavailable:
    case ErrorCode::kAuthError:
    case ErrorCode::kRateLimited:
    case ErrorCode::kTransportError:
    case ErrorCode::kOfflineMiss:
      return 3;
    default:
      return 1;
  }
}

}  // namespace grit
