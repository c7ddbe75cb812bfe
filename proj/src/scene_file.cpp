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

// Scene files are plain text, one "key = value" per line, '#' comments.
// Vectors are three space-separated numbers; noise_source may repeat.

#include <cstdlib>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "dpmwf/error.hpp"
#include "dpmwf/scene.hpp"

namespace dpmwf {

namespace {

constexpr const char* kFormatTag = "dpmwf-scene-1";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void put_vec(std::ostream& out, const char* key, const Eigen::Vector3d& v) {
  out << key << " = " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
}

[[noreturn]] void bad_line(std::size_t line, const std::string& what) {
  fail(ErrorKind::kFormat,
       "scene file line " + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& text, std::size_t line) {
  std::istringstream in(text);
  double v = 0.0;
  if (!(in >> v)) bad_line(line, "expected a number, got '" + text + "'");
  std::string rest;
  if (in >> rest) bad_line(line, "trailing text '" + rest + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& text, std::size_t line) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    bad_line(line, "expected an unsigned integer, got '" + text + "'");
  }
  return std::strtoull(text.c_str(), nullptr, 10);
}

Eigen::Vector3d parse_vec(const std::string& text, std::size_t line) {
  std::istringstream in(text);
  Eigen::Vector3d v;
  if (!(in >> v.x() >> v.y() >> v.z())) {
    bad_line(line, "expected three numbers, got '" + text + "'");
  }
  std::string rest;
  if (in >> rest) bad_line(line, "trailing text '" + rest + "'");
  return v;
}

}  // namespace

void write_scene(const SceneSpec& spec, std::ostream& out) {
  const auto old_precision = out.precision(17);
  out << "# dpmwf scene description\n";
  out << "format = " << kFormatTag << '\n';
  out << "seed = " << spec.seed << '\n';
  put_vec(out, "room", spec.room_dims);
  out << "rt60 = " << spec.rt60 << '\n';
  put_vec(out, "array_center", spec.array_center);
  out << "num_mics = " << spec.num_mics << '\n';
  out << "array_diameter = " << spec.array_diameter << '\n';
  put_vec(out, "speech_source", spec.speech_source);
  for (const auto& n : spec.noise_sources) put_vec(out, "noise_source", n);
  out << "snr_db = " << spec.snr_db << '\n';
  out << "duration_s = " << spec.duration_s << '\n';
  out << "sample_rate = " << spec.sample_rate << '\n';
  out << "max_order = " << spec.max_order << '\n';
  out << "sound_speed = " << spec.sound_speed << '\n';
  out.precision(old_precision);
}

SceneSpec read_scene(std::istream& in) {
  SceneSpec spec;
  spec.noise_sources.clear();
  std::set<std::string> seen;
  const std::set<std::string> required = {"room", "rt60", "array_center",
                                          "speech_source", "noise_source",
                                          "snr_db"};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw
                                                            : raw.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) bad_line(line, "missing '='");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key != "noise_source" && seen.count(key)) {
      bad_line(line, "duplicate key '" + key + "'");
    }
    seen.insert(key);

    if (key == "format") {
      if (value != kFormatTag) bad_line(line, "unknown format '" + value + "'");
    } else if (key == "seed") {
      spec.seed = parse_uint(value, line);
    } else if (key == "room") {
      spec.room_dims = parse_vec(value, line);
    } else if (key == "rt60") {
      spec.rt60 = parse_double(value, line);
    } else if (key == "array_center") {
      spec.array_center = parse_vec(value, line);
    } else if (key == "num_mics") {
      spec.num_mics = parse_uint(value, line);
    } else if (key == "array_diameter") {
      spec.array_diameter = parse_double(value, line);
    } else if (key == "speech_source") {
      spec.speech_source = parse_vec(value, line);
    } else if (key == "noise_source") {
      spec.noise_sources.push_back(parse_vec(value, line));
    } else if (key == "snr_db") {
      spec.snr_db = parse_double(value, line);
    } else if (key == "duration_s") {
      spec.duration_s = parse_double(value, line);
    } else if (key == "sample_rate") {
      spec.sample_rate = static_cast<std::uint32_t>(parse_uint(value, line));
    } else if (key == "max_order") {
      spec.max_order = parse_uint(value, line);
    } else if (key == "sound_speed") {
      spec.sound_speed = parse_double(value, line);
    } else {
      bad_line(line, "unknown key '" + key + "'");
    }
  }
  for (const auto& key : required) {
    if (!seen.count(key)) {
      fail(ErrorKind::kFormat, "scene file: missing key '" + key + "'");
    }
  }
  try {
    spec.validate();
  } catch (const Error& e) {
    fail(ErrorKind::kFormat, std::string("scene file: ") + e.what());
  }
  return spec;
}

}  // namespace dpmwf
