// adsm/textseg.h

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

#ifndef ADSM_TEXTSEG_H_
#define ADSM_TEXTSEG_H_

// Segmentation of text without audio.  Seen words use their learned variants;
// unseen words get the best segmentation under a within-word subword n-gram
// LM trained on the learned variants.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "adsm/segtable.h"

namespace adsm {

/// Within-word subword n-gram model with add-k smoothing.  Events are the
/// units of the vocabulary plus an end-of-word symbol; histories are padded
/// with a begin-of-word symbol.
class SubwordNgramLM {
 public:
  SubwordNgramLM() = default;

  int order() const { return order_; }
  double add_k() const { return add_k_; }
  const Vocabulary &vocab() const { return vocab_; }

  /// Event id of the end-of-word symbol (== vocab().Size()).
  int EndId() const { return vocab_.Size(); }
  /// Padding symbol used in histories (== vocab().Size() + 1).
  int BeginId() const { return vocab_.Size() + 1; }
  int NumEvents() const { return vocab_.Size() + 1; }

  /// log p(event | last order-1 symbols of history).  `history` may be
  /// longer or shorter than order-1; it is truncated or padded with BeginId.
  double LogProb(const std::vector<int> &history, int event) const;

  /// Sum of LogProb over the units and the final end-of-word event.
  double ScoreSequence(const std::vector<int> &units) const;

  /// Exact per-history counts, keyed by the padded (order-1)-gram history.
  const std::map<std::vector<int>, std::map<int, double>> &counts() const {
    return counts_;
  }

 private:
  friend SubwordNgramLM TrainLM(const SegTable &table, int order, double add_k);
  friend SubwordNgramLM ReadLM(std::istream &is);

  std::vector<int> Context(const std::vector<int> &history) const;

  int order_ = 2;
  double add_k_ = 0.1;
  Vocabulary vocab_;
  std::map<std::vector<int>, std::map<int, double>> counts_;
  std::map<std::vector<int>, double> totals_;
};

/// Counts every variant with its weight.  Throws InputError on an implicit
/// or empty table, order < 1 or add_k <= 0.
SubwordNgramLM TrainLM(const SegTable &table, int order = 2, double add_k = 0.1);

/// Text serialization: `#adsm-lm v1`, `order`, `add_k`, `\units` (one marked
/// unit per line), `\counts` (`h1 h2 ...<TAB>event<TAB>count`), `\end`.
void WriteLM(std::ostream &os, const SubwordNgramLM &lm);
SubwordNgramLM ReadLM(std::istream &is);

/// Highest-scoring segmentation of `word` over the LM vocabulary by dynamic
/// programming over split points.  Ties go to fewer units, then to the
/// lexicographically smallest marked sequence.  Throws InputError when a
/// character is outside the vocabulary alphabet.
std::vector<int> BestLMSegmentation(const std::string &word, const SubwordNgramLM &lm);

enum class SegmentMode { kBest, kSample };

/// Segments text with a trained S_final table and its LM.
class TextSegmenter {
 public:
  TextSegmenter(SegTable table, SubwordNgramLM lm, SegmentMode mode,
                std::uint64_t seed = 0);

  /// Unit ids in the table's vocabulary.
  std::vector<int> SegmentWord(const std::string &word);
  /// Segments every whitespace-separated word and joins marked units with
  /// spaces.
  std::string SegmentLine(const std::string &line);

  const SegTable &table() const { return table_; }

 private:
  SegTable table_;
  SubwordNgramLM lm_;
  SegmentMode mode_;
  std::mt19937_64 rng_;
};

/// Segments every line.
std::vector<std::string> SegmentCorpus(const std::vector<std::string> &lines,
                                       TextSegmenter &segmenter);

/// Inverse of SegmentLine: strips markers, words end at marked units.
std::string Detokenize(const std::string &segmented);

}  // namespace adsm

#endif  // ADSM_TEXTSEG_H_
