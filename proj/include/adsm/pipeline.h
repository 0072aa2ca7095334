// adsm/pipeline.h

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

#ifndef ADSM_PIPELINE_H_
#define ADSM_PIPELINE_H_

// The iterative vocabulary learner:
//
//   init -> train -> align -> refine
//        -> { merge -> double subsampling -> train -> align -> refine }*
//        -> finalize
//
// The last align of the loop is followed by finalize instead of refine.  With
// zero merge rounds the sequence is init -> train -> align -> finalize.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "adsm/corpus.h"
#include "adsm/ctc.h"
#include "adsm/encoder.h"
#include "adsm/segtable.h"

namespace adsm {

/// A variant in marked form, e.g. {"a", "ble_"}.
using UnitSeq = std::vector<Unit>;

std::string JoinMarked(const UnitSeq &units);
std::string SpellUnits(const UnitSeq &units);

/// Per-word variant counts gathered from alignments.
struct VariantStats {
  std::map<std::string, std::map<UnitSeq, int>> counts;
  std::map<std::string, int> word_total;

  void Add(const std::string &word, const UnitSeq &variant, int count = 1);
  bool empty() const { return word_total.empty(); }
  /// Variants of `word` with their count / word_total weights, sorted by
  /// descending weight then ascending variant.
  std::vector<std::pair<UnitSeq, double>> Weighted(const std::string &word) const;
};

/// Splits a collapsed label sequence at word-end units.  Throws InputError
/// when the pieces do not spell `words`.
std::vector<UnitSeq> SplitIntoWords(const UnitSeq &collapsed,
                                    const std::vector<std::string> &words);

struct UttAlignment {
  std::string utt_id;
  UnitSeq units;
  std::vector<std::pair<int, int>> spans;
};

struct CorpusAlignment {
  int subsample_factor = 1;
  std::vector<UttAlignment> utterances;  // feasible ones, corpus order
  std::vector<std::string> skipped;      // infeasible utt ids
};

/// Alignment file: header `#adsm-alignment v1 subsample=<f>`, then
/// `utt_id<TAB>unit[first:last] unit[first:last] ...` per utterance.
void WriteAlignments(std::ostream &os, const CorpusAlignment &alignment);
CorpusAlignment ReadAlignments(std::istream &is);

/// Gathers VariantStats; utterances missing from `corpus` are ignored.
VariantStats CollectStats(const CorpusAlignment &alignment, const Corpus &corpus);

/// Prior-scaled forced alignment of every utterance.  The prior is estimated
/// from the same model over the same corpus.  `num_workers` > 1 aligns in
/// parallel; results do not depend on it.
struct AlignOutput {
  CorpusAlignment alignment;
  VariantStats stats;
  PriorVector prior;
};
AlignOutput AlignCorpus(const EncoderParams &params, const Corpus &corpus,
                        const SegTable &table, double prior_scale,
                        int num_workers = 1);

/// Keeps, per word, the variants with weight >= mu (the best one if none
/// qualifies) and renormalizes.  The vocabulary is the union of kept units
/// plus every character of `alphabet` in both forms.  Throws InputError on
/// empty stats.
SegTable Refine(const VariantStats &stats, double mu,
                const std::set<std::string> &alphabet);

/// Adds every single-adjacent-merge of every variant; weights become uniform
/// over each word's enlarged set.  Requires an explicit table.
SegTable MergeSubwords(const SegTable &table);

struct FinalizeOutput {
  SegTable table;  // S_final with V_final
  /// utt_id -> target unit sequence.
  std::map<std::string, UnitSeq> targets;
};

/// Refine with `mu`, then words seen fewer than `k` times keep only their
/// best variant.  Target sequences come from `alignment`, with every filtered
/// word variant replaced by the word's best surviving one.
FinalizeOutput Finalize(const VariantStats &stats, const CorpusAlignment &alignment,
                        const Corpus &corpus, double mu, int k,
                        const std::set<std::string> &alphabet);

void WriteTargets(std::ostream &os, const std::map<std::string, UnitSeq> &targets);
std::map<std::string, UnitSeq> ReadTargets(std::istream &is);

struct MetricsRow {
  std::string step;
  int vocab_size = 0;
  double avg_variants = 0.0;
  double avg_length = 0.0;
};

/// |V|, average |S(w)| and average variant length over the given word types
/// (or over word tokens when `token_level`, weighting by `counts`).  The
/// length of a word is the mean length of its variants.
MetricsRow ComputeMetrics(const std::string &step, const SegTable &table,
                          const std::vector<std::string> &words,
                          const std::map<std::string, int> &counts = {},
                          bool token_level = false);

/// Tab-separated report: header `step\t|V|\tavg|S(w)|\tavg_len`, one row per
/// step.
void WriteMetrics(std::ostream &os, const std::vector<MetricsRow> &rows);

struct PipelineConfig {
  double prior_scale = 0.3;  // lambda
  double mu = 0.05;
  int k = 20;
  int merge_rounds = 1;
  int initial_subsample = 2;
  EncoderConfig encoder;     // input_dim and num_classes are set per stage
  TrainConfig train;
  bool warm_start = false;
  int num_workers = 1;
  bool token_level_metrics = false;

  void Validate() const;
};

struct PipelineResult {
  SegTable initial;
  SegTable final_table;
  std::map<std::string, UnitSeq> targets;
  std::vector<MetricsRow> metrics;
  CorpusAlignment last_alignment;
  EncoderParams last_params;
  std::vector<std::vector<double>> loss_curves;  // per training stage
};

/// Initial implicit table over the G2P chunks plus every corpus character.
SegTable InitialTable(const Corpus &corpus, const std::vector<G2PEntry> &g2p);

PipelineResult RunPipeline(const Corpus &corpus, const std::vector<G2PEntry> &g2p,
                           const PipelineConfig &config);

/// Training examples for `corpus` under `table`.
std::vector<TrainExample> MakeTrainExamples(const Corpus &corpus,
                                            const SegTable &table);

}  // namespace adsm

#endif  // ADSM_PIPELINE_H_
