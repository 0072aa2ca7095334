// src/lexinit.cc

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

#include "adsm/lexinit.h"

#include <istream>
#include <limits>
#include <set>

namespace adsm {

namespace {

constexpr char kChunkSeparator = '}';
constexpr std::string_view kNullPhoneme = "_";

// Thrown when a line is well formed but its chunks misspell the word.
class SpellingMismatch : public InputError {
 public:
  using InputError::InputError;
};

std::uint64_t SaturatingAdd(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  return a > max - b ? max : a + b;
}

}  // namespace

G2PEntry ParseG2PLine(const std::string &line) {
  const auto fields = SplitOn(line, '\t');
  if (fields.size() != 2 || fields[0].empty())
    throw InputError("expected word<TAB>chunk}phoneme ...");
  G2PEntry entry;
  entry.word = fields[0];
  std::string spelled;
  for (const std::string &token : SplitWhitespace(fields[1])) {
    const auto sep = token.find(kChunkSeparator);
    if (sep == std::string::npos || sep == 0 || sep + 1 == token.size())
      throw InputError("malformed pair \"" + token + "\"");
    G2PPair pair;
    pair.chunk = token.substr(0, sep);
    const std::string phoneme = token.substr(sep + 1);
    if (phoneme != kNullPhoneme) pair.phoneme = phoneme;
    spelled += pair.chunk;
    entry.pairs.push_back(std::move(pair));
  }
  if (entry.pairs.empty()) throw InputError("no grapheme/phoneme pairs");
  if (spelled != entry.word)
    throw SpellingMismatch("chunks spell \"" + spelled + "\", not \"" + entry.word + "\"");
  SplitChars(entry.word);  // rejects invalid UTF-8
  if (entry.word.find(kWordEndMarker) != std::string::npos)
    throw InputError("word \"" + entry.word + "\" contains the word-end marker");
  return entry;
}

G2PParseResult ParseG2P(std::istream &is) {
  G2PParseResult result;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      result.entries.push_back(ParseG2PLine(line));
    } catch (const SpellingMismatch &e) {
      Warn("g2p line " + std::to_string(line_no) + " rejected: " + e.what());
      result.rejected.emplace_back(line_no, e.what());
    } catch (const InputError &e) {
      throw InputError("g2p line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return result;
}

G2PEntry MergeNullChunks(const G2PEntry &entry) {
  G2PEntry out;
  out.word = entry.word;
  std::string leading;  // null chunks before the first phoneme
  for (const G2PPair &pair : entry.pairs) {
    if (pair.phoneme) {
      out.pairs.push_back({leading + pair.chunk, pair.phoneme});
      leading.clear();
    } else if (!out.pairs.empty()) {
      out.pairs.back().chunk += pair.chunk;
    } else {
      leading += pair.chunk;
    }
  }
  if (out.pairs.empty())
    throw InputError("word \"" + entry.word + "\" has no phoneme-bearing chunk");
  return out;
}

Vocabulary BuildInitialVocab(const std::vector<G2PEntry> &entries) {
  if (entries.empty()) throw InputError("no G2P entries");
  std::vector<Unit> units;
  std::set<std::string> alphabet;
  for (const G2PEntry &raw : entries) {
    const G2PEntry entry = MergeNullChunks(raw);
    for (std::size_t i = 0; i < entry.pairs.size(); ++i) {
      units.push_back({entry.pairs[i].chunk, false});
      if (i + 1 == entry.pairs.size()) units.push_back({entry.pairs[i].chunk, true});
    }
    for (std::string &c : SplitChars(entry.word)) alphabet.insert(std::move(c));
  }
  for (Unit &u : SingleCharUnits(alphabet)) units.push_back(std::move(u));
  return Vocabulary::FromUnits(std::move(units));
}

SegTable MakeInitialSegTable(const std::vector<std::string> &words,
                             const Vocabulary &vocab) {
  const std::set<std::string> alphabet = vocab.Alphabet();
  for (const std::string &word : words) {
    for (const std::string &c : SplitChars(word)) {
      if (!alphabet.count(c))
        throw InputError("word \"" + word + "\" uses character '" + c +
                         "' outside the vocabulary alphabet");
    }
  }
  return SegTable::ImplicitAll(vocab);
}

std::uint64_t CountSegmentations(const std::string &word, const Vocabulary &vocab) {
  const auto chars = SplitChars(word);
  const int n = static_cast<int>(chars.size());
  // ways[i]: segmentations of the suffix starting at character i.
  std::vector<std::uint64_t> ways(n + 1, 0);
  ways[n] = 1;
  for (int i = n - 1; i >= 0; --i) {
    std::string piece;
    for (int j = i + 1; j <= n && j - i <= vocab.MaxUnitChars(); ++j) {
      piece += chars[j - 1];
      if (vocab.Contains({piece, j == n})) ways[i] = SaturatingAdd(ways[i], ways[j]);
    }
  }
  return ways[0];
}

}  // namespace adsm
