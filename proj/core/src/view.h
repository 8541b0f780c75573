// Copyright 2026 The aestk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Private bridge between std::string_view and absl::string_view. Some abseil
// builds keep their own string_view type, so std views must be converted
// before they reach absl::StrCat and friends.

#ifndef AESTK_CORE_SRC_VIEW_H_
#define AESTK_CORE_SRC_VIEW_H_

#include <string_view>

#include "absl/strings/string_view.h"

namespace aestk::internal {

inline absl::string_view Av(std::string_view s) { return {s.data(), s.size()}; }
inline std::string_view Sv(absl::string_view s) { return {s.data(), s.size()}; }

}  // namespace aestk::internal

#endif  // AESTK_CORE_SRC_VIEW_H_
