// adsm/ctc.h

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

#ifndef ADSM_CTC_H_
#define ADSM_CTC_H_

// Exact dynamic programming over a CtcGraph.  Everything runs in log space.
//
// The loss marginalizes over all CTC alignments of all label sequences in
// the graph:
//
//   loss = -log sum_{paths y} prod_t p(y_t | t)
//
// and its gradient with respect to the pre-softmax scores is p - gamma, where
// gamma is the per-frame class occupancy from forward-backward.

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "adsm/common.h"
#include "adsm/lattice.h"

namespace adsm {

/// T' x (|V|+1) table of per-frame log-probabilities, every row normalized.
class PosteriorMatrix {
 public:
  PosteriorMatrix() = default;
  /// Throws NumericalError if a value is not finite or a row does not
  /// normalize within 1e-6.
  explicit PosteriorMatrix(Matrix log_probs);
  /// Row-wise log-softmax of arbitrary finite scores.
  static PosteriorMatrix FromScores(const Matrix &scores);
  /// Skips validation; the caller guarantees the invariants.
  static PosteriorMatrix Unchecked(Matrix log_probs);

  int NumFrames() const { return static_cast<int>(log_probs_.rows()); }
  int NumClasses() const { return static_cast<int>(log_probs_.cols()); }
  double operator()(int t, int c) const { return log_probs_(t, c); }
  const Matrix &log_probs() const { return log_probs_; }

 private:
  Matrix log_probs_;
};

/// Label prior q over V and the blank.
using PriorVector = Vector;

struct Alignment {
  std::vector<int> frame_labels;
  std::vector<int> collapsed;
  /// (first_frame, last_frame) of every collapsed label, inclusive.
  std::vector<std::pair<int, int>> spans;
  /// Path score under the objective that selected it.
  double score = 0.0;
};

/// Removes label loops, then blanks.
std::vector<int> Collapse(std::span<const int> frame_labels, int blank);

/// Collapse() plus the frame span of every surviving label.
Alignment MakeAlignment(std::vector<int> frame_labels, int blank, double score = 0.0);

struct LossResult {
  double loss = 0.0;
  double forward_log_total = 0.0;
  double backward_log_total = 0.0;
  /// gamma[t][c]: posterior probability that frame t carries class c.
  Matrix occupancy;
};

/// Throws InfeasibleError when T' < graph.MinFrames(), InputError on a class
/// count mismatch and NumericalError on non-finite posteriors.
LossResult LogLoss(const CtcGraph &graph, const PosteriorMatrix &posteriors);

/// Gradient of the loss with respect to the pre-softmax scores.
Matrix ScoreGradient(const PosteriorMatrix &posteriors, const Matrix &occupancy);

inline constexpr double kPriorFloor = 1e-10;

/// Best accepted path under sum_t log p(y_t|t) - prior_scale * log q(y_t),
/// with q floored at kPriorFloor.  Among equal scores the smallest state id
/// wins at every step.
Alignment Viterbi(const CtcGraph &graph, const PosteriorMatrix &posteriors,
                  const PriorVector &prior, double prior_scale);

/// Viterbi without a prior.
Alignment Viterbi(const CtcGraph &graph, const PosteriorMatrix &posteriors);

/// Mean posterior over all frames of all matrices, renormalized.  The sum
/// over utterances is a pairwise tree reduction in input order.
PriorVector EstimatePrior(std::span<const PosteriorMatrix> posteriors);

/// Draws one accepted path with probability proportional to
/// (prod_t p(y_t|t))^(1/temperature): forward filtering, backward sampling.
Alignment SamplePath(const CtcGraph &graph, const PosteriorMatrix &posteriors,
                     double temperature, std::uint64_t seed);

/// Same as above, drawing from a caller-owned engine.
Alignment SamplePath(const CtcGraph &graph, const PosteriorMatrix &posteriors,
                     double temperature, std::mt19937_64 &rng);

struct EnumeratedPath {
  std::vector<int> frame_labels;
  double log_prob = 0.0;    // log prod_t p(y_t|t)
  double posterior = 0.0;   // probability given acceptance
};

struct OracleResult {
  double loss = 0.0;
  std::vector<int> best_path;  // lexicographically smallest among ties
  std::vector<EnumeratedPath> paths;
};

/// Exhaustive enumeration over all (|V|+1)^T' frame strings, keeping those the
/// graph accepts.  Cost guard: T' <= 8 and |V| <= 5, else CostGuardError.
OracleResult EnumerateOracle(const CtcGraph &graph, const PosteriorMatrix &posteriors);

/// Same, keeping the strings whose collapse is in `allowed`.
OracleResult EnumerateOracle(const std::vector<std::vector<int>> &allowed,
                             const PosteriorMatrix &posteriors);

}  // namespace adsm

#endif  // ADSM_CTC_H_
