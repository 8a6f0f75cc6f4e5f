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

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mpsi/crypto.h"

namespace mpsi {

// One element per line. A line starting with `hex:` carries raw bytes as hex;
// anything else is taken verbatim (UTF-8, no trimming beyond a trailing \r).
// Blank lines are skipped; the empty element is written `hex:`.
Element DecodeElementLine(std::string_view line);
// Inverse of DecodeElementLine: plain text when that round-trips, hex otherwise.
std::string EncodeElementLine(const Element& element);

std::vector<Element> ReadElementFile(const std::string& path);
void WriteElementFile(const std::string& path, const std::vector<Element>& elements);

}  // namespace mpsi
