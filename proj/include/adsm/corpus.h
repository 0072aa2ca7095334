// adsm/corpus.h

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

#ifndef ADSM_CORPUS_H_
#define ADSM_CORPUS_H_

// Training corpora, their text formats, and the synthetic corpus generator.
//
// Feature file: per utterance a header `utt_id T D` followed by T lines of D
// space-separated decimals.  Transcript file: `utt_id<TAB>word word ...`.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "adsm/encoder.h"
#include "adsm/lexinit.h"

namespace adsm {

struct Utterance {
  std::string id;
  FeatureMatrix features;
  std::vector<std::string> words;
};

struct Corpus {
  std::vector<Utterance> utterances;

  /// Characters used by the transcriptions.
  std::set<std::string> Alphabet() const;
  std::map<std::string, int> WordCounts() const;
  /// Word types in first-seen order.
  std::vector<std::string> WordTypes() const;
};

std::vector<FeatureMatrix> ReadFeatures(std::istream &is);
void WriteFeatures(std::ostream &os, const std::vector<FeatureMatrix> &features);

/// (utt_id, words) rows.  Throws InputError on duplicate ids, empty
/// transcriptions or lines without a tab.
std::vector<std::pair<std::string, std::vector<std::string>>> ReadTranscripts(
    std::istream &is);
void WriteTranscripts(std::ostream &os, const Corpus &corpus);

/// Joins features and transcripts on utt_id, in feature-file order.  Ids
/// present on one side only are reported with a warning and excluded;
/// duplicate ids throw InputError.
Corpus LoadCorpus(std::istream &features, std::istream &transcripts);

struct SyntheticSpec {
  /// word -> generating segmentation in marked form, e.g. {"a", "ble_"}.
  std::map<std::string, std::vector<std::string>> lexicon;
  /// Optional explicit prototypes keyed by marked unit; missing units get a
  /// seeded standard-normal prototype of length `feature_dim`.
  std::map<std::string, std::vector<double>> prototypes;
  int feature_dim = 16;
  int frames_per_unit = 8;
  double noise = 0.1;
  int num_utterances = 500;
  int min_words = 1;
  int max_words = 3;
  /// Word sampling weight of rank r is 1 / (r + 1)^zipf; 0 is uniform.
  double zipf = 0.5;
  std::uint64_t seed = 1;
};

struct SyntheticCorpus {
  Corpus corpus;
  /// utt_id -> generating unit sequence in marked form.
  std::map<std::string, std::vector<std::string>> ground_truth;
  /// One G2P line per word built from the generating chunks.
  std::vector<G2PEntry> g2p;
  std::map<std::string, std::vector<double>> prototypes;
};

/// Features are the generating units' prototypes, each repeated
/// frames_per_unit times, plus N(0, noise^2) noise.  Throws InputError when
/// two units share a prototype or a segmentation does not spell its word.
SyntheticCorpus GenerateSynthetic(const SyntheticSpec &spec);

/// A random lexicon whose words are built from a shared inventory of
/// generating units over a small alphabet; every unit is used by at least two
/// words whenever the lexicon is large enough to allow it.
std::map<std::string, std::vector<std::string>> MakeToyLexicon(int num_words,
                                                               std::uint64_t seed);

/// `utt_id<TAB>unit unit_ ...` lines.
void WriteGroundTruth(std::ostream &os,
                      const std::map<std::string, std::vector<std::string>> &truth);
std::map<std::string, std::vector<std::string>> ReadGroundTruth(std::istream &is);

void WriteG2P(std::ostream &os, const std::vector<G2PEntry> &entries);

}  // namespace adsm

#endif  // ADSM_CORPUS_H_
