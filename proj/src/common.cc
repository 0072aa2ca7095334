// src/common.cc

// Copyright 2026  ADSM contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "adsm/common.h"

#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>

namespace adsm {

namespace {
std::atomic<bool> g_warnings_enabled{true};
}  // namespace

Unit Unit::FromMarked(std::string_view token) {
  Unit unit;
  if (!token.empty() && token.back() == kWordEndMarker) {
    unit.word_end = true;
    token.remove_suffix(1);
  }
  if (token.empty())
    throw InputError("empty unit spelling");
  unit.spelling = std::string(token);
  return unit;
}

std::vector<std::string> SplitChars(std::string_view text) {
  std::vector<std::string> chars;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    if (lead < 0x80)
      len = 1;
    else if ((lead >> 5) == 0x6)
      len = 2;
    else if ((lead >> 4) == 0xE)
      len = 3;
    else if ((lead >> 3) == 0x1E)
      len = 4;
    else
      throw InputError("invalid UTF-8 lead byte in \"" + std::string(text) + "\"");
    if (i + len > text.size())
      throw InputError("truncated UTF-8 sequence in \"" + std::string(text) + "\"");
    for (std::size_t j = 1; j < len; ++j) {
      if ((static_cast<unsigned char>(text[i + j]) >> 6) != 0x2)
        throw InputError("invalid UTF-8 continuation in \"" + std::string(text) + "\"");
    }
    chars.emplace_back(text.substr(i, len));
    i += len;
  }
  return chars;
}

std::vector<std::string> SplitWhitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  };
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string> SplitOn(std::string_view text, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(delim, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(text.substr(start));
      return out;
    }
    out.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

double LogAdd(double a, double b) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

void Warn(const std::string &message) {
  if (g_warnings_enabled.load(std::memory_order_relaxed))
    std::cerr << "WARNING (adsm): " << message << '\n';
}

void SetWarningsEnabled(bool enabled) {
  g_warnings_enabled.store(enabled, std::memory_order_relaxed);
}

}  // namespace adsm
