// adsm/lexinit.h

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

#ifndef ADSM_LEXINIT_H_
#define ADSM_LEXINIT_H_

// Vocabulary initialization from grapheme-to-phoneme alignments.  The input is
// the aligner's per-word output, one word per line:
//
//   able<TAB>a}AH b}B le}AH+L
//
// where `_` stands for a grapheme chunk aligned to no phoneme.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "adsm/segtable.h"
#include "adsm/vocabulary.h"

namespace adsm {

struct G2PPair {
  std::string chunk;
  std::optional<std::string> phoneme;  // nullopt for the null phoneme

  bool operator==(const G2PPair &) const = default;
};

struct G2PEntry {
  std::string word;
  std::vector<G2PPair> pairs;

  bool operator==(const G2PEntry &) const = default;
};

/// Parses one line.  Throws InputError when the line is malformed or the
/// chunks do not spell the word.
G2PEntry ParseG2PLine(const std::string &line);

struct G2PParseResult {
  std::vector<G2PEntry> entries;
  /// (1-based line number, reason) for every rejected line.
  std::vector<std::pair<int, std::string>> rejected;
};

/// Parses a whole alignment file.  Lines whose chunks do not spell the word
/// are rejected and logged; any other malformed line throws InputError
/// naming the line number.
G2PParseResult ParseG2P(std::istream &is);

/// Attaches every null-phoneme chunk to its left phoneme-bearing neighbour,
/// or to the right one at the start of the word.  Throws InputError when no
/// chunk carries a phoneme.
G2PEntry MergeNullChunks(const G2PEntry &entry);

/// Initial vocabulary: every chunk as a non-word-end unit, a word-end copy of
/// every word-final chunk, and every character in both forms.
Vocabulary BuildInitialVocab(const std::vector<G2PEntry> &entries);

/// Implicit table over `vocab`.  Throws InputError if a word uses a character
/// absent from the vocabulary alphabet.
SegTable MakeInitialSegTable(const std::vector<std::string> &words,
                             const Vocabulary &vocab);

/// Number of segmentations of `word` over `vocab`, counted by a split-point
/// recursion (saturates at UINT64_MAX).
std::uint64_t CountSegmentations(const std::string &word, const Vocabulary &vocab);

}  // namespace adsm

#endif  // ADSM_LEXINIT_H_
