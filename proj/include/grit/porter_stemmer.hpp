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

#ifndef GRIT_PORTER_STEMMER_HPP_
#define GRIT_PORTER_STEMMER_HPP_

#include <string>
#include <string_view>

namespace grit {

// Suffix stripping after M.F. Porter (1980), original rule set. Input is
// expected lower-case; words of two letters or fewer are returned unchanged.
std::string porter_stem(std::string_view word);

}  // namespace grit

#endif  // GRIT_PORTER_STEMMER_HPP_
