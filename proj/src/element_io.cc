// Copyright 2026 The MPSI Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mpsi/element_io.h"

#include <fstream>
#include <stdexcept>

namespace mpsi {

Element DecodeElementLine(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (line.starts_with("hex:")) {
    auto bytes = FromHex(line.substr(4));
    return Element(bytes.begin(), bytes.end());
  }
  return Element(line);
}

std::string EncodeElementLine(const Element& element) {
  bool plain = !element.empty() && !element.starts_with("hex:") &&
               !element.ends_with('\r');
  for (char c : element) {
    auto u = static_cast<unsigned char>(c);
    if (u < 0x20 && u != '\t') {
      plain = false;
      break;
    }
  }
  if (plain) return element;
  return "hex:" + ToHex(AsBytes(element));
}

std::vector<Element> ReadElementFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input file " + path);
  std::vector<Element> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    out.push_back(DecodeElementLine(line));
  }
  return out;
}

void WriteElementFile(const std::string& path, const std::vector<Element>& elements) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  for (const auto& e : elements) out << EncodeElementLine(e) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace mpsi
