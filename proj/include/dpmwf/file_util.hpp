// Copyright 2026 The dpmwf Authors
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

#pragma once

#include <functional>
#include <iosfwd>
#include <string>

namespace dpmwf {

// Writes through `body` into a temporary file next to `path`, then renames
// it over `path`. Throws kIo on failure; the temporary is removed.
void write_file_atomic(const std::string& path,
                       const std::function<void(std::ostream&)>& body);

// Opens `path` for binary reading; throws kIo if it cannot be opened.
void read_file(const std::string& path,
               const std::function<void(std::istream&)>& body);

}  // namespace dpmwf
