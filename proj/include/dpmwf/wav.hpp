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

#include <iosfwd>
#include <string>

#include "dpmwf/signal.hpp"

namespace dpmwf {

// Reads 16/24/32-bit PCM or 32/64-bit float RIFF WAVE, including the
// WAVE_FORMAT_EXTENSIBLE wrapper. PCM is scaled to [-1, 1). Throws kFormat
// for anything else.
MultichannelSignal read_wav(std::istream& in);
MultichannelSignal read_wav_file(const std::string& path);

// Writes 32-bit IEEE float WAVE.
void write_wav(const MultichannelSignal& signal, std::ostream& out);
void write_wav_file(const MultichannelSignal& signal, const std::string& path);

}  // namespace dpmwf
