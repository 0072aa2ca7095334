// adsm/lattice.h

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

#ifndef ADSM_LATTICE_H_
#define ADSM_LATTICE_H_

// Segmentation lattices and their blank-augmented CTC expansion.
//
// A word DAG has one path per allowed segmentation of the word.  Utterance
// lattices chain word DAGs end to start, so no arc spans a word boundary.
// ExpandCtc() turns a lattice into a state graph whose accepted frame
// strings are exactly the CTC alignments of the lattice's label sequences:
// one label state per lattice arc, one blank state per lattice node.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "adsm/segtable.h"
#include "adsm/vocabulary.h"

namespace adsm {

struct LatticeArc {
  int from = 0;
  int to = 0;
  int label = 0;

  bool operator==(const LatticeArc &) const = default;
};

/// Node ids are topologically ordered; the source is node 0 and the sink is
/// node num_nodes - 1.  Arcs are sorted by (from, creation order).
struct WordSegDag {
  std::string word;
  int num_nodes = 0;
  std::vector<LatticeArc> arcs;

  int source() const { return 0; }
  int sink() const { return num_nodes - 1; }
};

/// All segmentations of `word` over `vocab`; nodes are character positions.
/// Arcs on no source-to-sink path are dropped.  Throws InputError when the
/// sink is unreachable.
WordSegDag BuildWordDagImplicit(const std::string &word, const Vocabulary &vocab);

/// Prefix-shared trie over the given variants with a single shared sink.  The
/// path set equals the deduplicated variant set.  Throws InputError when a
/// variant does not spell `word` or misplaces the word-end flag.
WordSegDag BuildWordDagExplicit(const std::string &word,
                                const std::vector<std::vector<int>> &variants,
                                const Vocabulary &vocab);

/// Word DAG for `word` according to the table's mode.  Words missing from an
/// explicit table fall back to the single-character segmentation.
WordSegDag BuildWordDag(const std::string &word, const SegTable &table);

struct UttLattice {
  int num_nodes = 0;
  std::vector<LatticeArc> arcs;
  /// Start node of every word, followed by the final sink.
  std::vector<int> word_boundaries;

  int source() const { return 0; }
  int sink() const { return num_nodes - 1; }
};

/// Chains the DAGs; the sink of word i is merged with the source of word
/// i + 1.  Throws InputError on an empty list.
UttLattice ConcatUtterance(const std::vector<WordSegDag> &dags);

/// Convenience: lattice for a word sequence under `table`.
UttLattice BuildUttLattice(const std::vector<std::string> &words,
                           const SegTable &table);

/// Blank-augmented CTC state graph.  State ids are topologically ordered
/// (ignoring self-loops, which every state has).
class CtcGraph {
 public:
  int NumStates() const { return static_cast<int>(labels_.size()); }
  int NumClasses() const { return num_classes_; }
  int BlankId() const { return blank_; }

  int label(int state) const { return labels_[state]; }
  bool IsBlank(int state) const { return labels_[state] == blank_; }
  bool IsInitial(int state) const { return initial_[state] != 0; }
  bool IsFinal(int state) const { return final_[state] != 0; }
  /// Predecessors excluding the self-loop, ascending.
  const std::vector<int> &preds(int state) const { return preds_[state]; }
  /// Successors excluding the self-loop, ascending.
  const std::vector<int> &succs(int state) const { return succs_[state]; }

  /// Frames needed by the shortest accepted path.
  int MinFrames() const { return min_frames_; }

  /// True when the frame string is accepted (NFA simulation).
  bool Accepts(const std::vector<int> &frame_labels) const;

 private:
  friend CtcGraph ExpandCtc(const UttLattice &lattice, int num_classes);

  int num_classes_ = 0;
  int blank_ = 0;
  std::vector<int> labels_;
  std::vector<std::vector<int>> preds_;
  std::vector<std::vector<int>> succs_;
  std::vector<char> initial_;
  std::vector<char> final_;
  int min_frames_ = 0;
};

/// CTC expansion: optional blanks everywhere, mandatory blank between two
/// identical consecutive labels (including across lattice nodes).
/// `num_classes` is |V| + 1; the blank is num_classes - 1.
CtcGraph ExpandCtc(const UttLattice &lattice, int num_classes);

struct PathStats {
  std::uint64_t path_count = 0;  // saturating
  int min_label_len = 0;
  int max_label_len = 0;

  bool operator==(const PathStats &) const = default;
};

PathStats ComputePathStats(const WordSegDag &dag);
PathStats ComputePathStats(const UttLattice &lattice);
/// Statistics of the label sequences of a CTC graph (blank states skipped).
PathStats ComputePathStats(const CtcGraph &graph);

/// Enumerates every source-to-sink label sequence.  Intended for small
/// graphs; throws CostGuardError beyond `max_paths`.
std::vector<std::vector<int>> EnumerateLabelSequences(const WordSegDag &dag,
                                                      std::size_t max_paths = 100000);
std::vector<std::vector<int>> EnumerateLabelSequences(const UttLattice &lattice,
                                                      std::size_t max_paths = 100000);

/// Debug dump: `state <id> <label>`, `initial <id>`, `final <id>`,
/// `arc <from> <to>` lines.
void WriteCtcGraph(std::ostream &os, const CtcGraph &graph, const Vocabulary &vocab);

}  // namespace adsm

#endif  // ADSM_LATTICE_H_
