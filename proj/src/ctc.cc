// src/ctc.cc

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

#include "adsm/ctc.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace adsm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void CheckCompatible(const CtcGraph &graph, const PosteriorMatrix &posteriors) {
  if (posteriors.NumClasses() != graph.NumClasses())
    throw InputError("posterior matrix has " + std::to_string(posteriors.NumClasses()) +
                     " classes, graph expects " + std::to_string(graph.NumClasses()));
  if (posteriors.NumFrames() < graph.MinFrames())
    throw InfeasibleError(std::to_string(posteriors.NumFrames()) +
                          " frames, shortest alignment needs " +
                          std::to_string(graph.MinFrames()));
}

void CheckFinite(const Matrix &m) {
  if (!m.allFinite()) throw NumericalError("non-finite value in posterior matrix");
}

// Log-sum-exp of a state's self-loop value and its predecessors' values.
double LogSumIncoming(const double *prev, int state, const std::vector<int> &preds) {
  double max = prev[state];
  for (int p : preds) max = std::max(max, prev[p]);
  if (max == kNegInf) return kNegInf;
  double sum = std::exp(prev[state] - max);
  for (int p : preds) sum += std::exp(prev[p] - max);
  return max + std::log(sum);
}

// Forward pass over per-frame, per-class log-scores.
Matrix Forward(const CtcGraph &graph, const Matrix &scores) {
  const int T = static_cast<int>(scores.rows());
  const int S = graph.NumStates();
  Matrix alpha = Matrix::Constant(T, S, kNegInf);
  for (int s = 0; s < S; ++s)
    if (graph.IsInitial(s)) alpha(0, s) = scores(0, graph.label(s));
  for (int t = 1; t < T; ++t) {
    const double *prev = alpha.row(t - 1).data();
    for (int s = 0; s < S; ++s) {
      const double in = LogSumIncoming(prev, s, graph.preds(s));
      if (in != kNegInf) alpha(t, s) = in + scores(t, graph.label(s));
    }
  }
  return alpha;
}

// beta(t, s): log-score of frames t+1.. given state s at frame t.
Matrix Backward(const CtcGraph &graph, const Matrix &scores) {
  const int T = static_cast<int>(scores.rows());
  const int S = graph.NumStates();
  Matrix beta = Matrix::Constant(T, S, kNegInf);
  for (int s = 0; s < S; ++s)
    if (graph.IsFinal(s)) beta(T - 1, s) = 0.0;
  std::vector<double> next(S);
  for (int t = T - 2; t >= 0; --t) {
    for (int s = 0; s < S; ++s) next[s] = beta(t + 1, s) + scores(t + 1, graph.label(s));
    for (int s = 0; s < S; ++s)
      beta(t, s) = LogSumIncoming(next.data(), s, graph.succs(s));
  }
  return beta;
}

double LogSumFinal(const CtcGraph &graph, const Matrix &alpha) {
  const int last = static_cast<int>(alpha.rows()) - 1;
  double total = kNegInf;
  for (int s = 0; s < graph.NumStates(); ++s)
    if (graph.IsFinal(s)) total = LogAdd(total, alpha(last, s));
  return total;
}

// Index drawn with probability proportional to exp(log_weights[i]).
int SampleCategorical(const std::vector<double> &log_weights, std::mt19937_64 &rng) {
  double max = kNegInf;
  for (double w : log_weights) max = std::max(max, w);
  std::vector<double> cumulative(log_weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    total += log_weights[i] == kNegInf ? 0.0 : std::exp(log_weights[i] - max);
    cumulative[i] = total;
  }
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * total;
  for (std::size_t i = 0; i < cumulative.size(); ++i)
    if (u < cumulative[i]) return static_cast<int>(i);
  // u == total only through rounding; return the last index with mass.
  for (std::size_t i = log_weights.size(); i-- > 0;)
    if (log_weights[i] != kNegInf) return static_cast<int>(i);
  throw NumericalError("sampling from an all-zero distribution");
}

template <class Accept>
OracleResult Enumerate(const PosteriorMatrix &posteriors, Accept &&accept) {
  const int T = posteriors.NumFrames();
  const int C = posteriors.NumClasses();
  if (T > 8 || C - 1 > 5)
    throw CostGuardError("enumeration oracle limited to T' <= 8 and |V| <= 5");
  if (T < 1) throw InputError("enumeration oracle needs at least one frame");
  CheckFinite(posteriors.log_probs());

  OracleResult result;
  std::vector<int> y(T, 0);
  double best = kNegInf;
  double total = kNegInf;
  while (true) {
    if (accept(y)) {
      double lp = 0.0;
      for (int t = 0; t < T; ++t) lp += posteriors(t, y[t]);
      result.paths.push_back({y, lp, 0.0});
      total = LogAdd(total, lp);
      if (lp > best) {
        best = lp;
        result.best_path = y;
      }
    }
    // Odometer increment, last frame fastest: lexicographic order.
    int t = T - 1;
    while (t >= 0 && ++y[t] == C) y[t--] = 0;
    if (t < 0) break;
  }
  if (result.paths.empty()) throw InfeasibleError("no accepted frame string");
  result.loss = -total;
  for (EnumeratedPath &p : result.paths) p.posterior = std::exp(p.log_prob - total);
  return result;
}

}  // namespace

PosteriorMatrix::PosteriorMatrix(Matrix log_probs) : log_probs_(std::move(log_probs)) {
  CheckFinite(log_probs_);
  for (Eigen::Index t = 0; t < log_probs_.rows(); ++t) {
    const double sum = log_probs_.row(t).array().exp().sum();
    if (std::abs(sum - 1.0) > 1e-6)
      throw NumericalError("posterior row " + std::to_string(t) + " sums to " +
                           std::to_string(sum));
  }
}

PosteriorMatrix PosteriorMatrix::FromScores(const Matrix &scores) {
  CheckFinite(scores);
  Matrix out(scores.rows(), scores.cols());
  for (Eigen::Index t = 0; t < scores.rows(); ++t) {
    const double max = scores.row(t).maxCoeff();
    const double lse = max + std::log((scores.row(t).array() - max).exp().sum());
    out.row(t) = scores.row(t).array() - lse;
  }
  return Unchecked(std::move(out));
}

PosteriorMatrix PosteriorMatrix::Unchecked(Matrix log_probs) {
  PosteriorMatrix p;
  p.log_probs_ = std::move(log_probs);
  return p;
}

std::vector<int> Collapse(std::span<const int> frame_labels, int blank) {
  std::vector<int> out;
  int prev = blank;
  for (int y : frame_labels) {
    if (y != blank && y != prev) out.push_back(y);
    prev = y;
  }
  return out;
}

Alignment MakeAlignment(std::vector<int> frame_labels, int blank, double score) {
  Alignment a;
  a.score = score;
  int prev = blank;
  for (int t = 0; t < static_cast<int>(frame_labels.size()); ++t) {
    const int y = frame_labels[t];
    if (y != blank) {
      if (y != prev) {
        a.collapsed.push_back(y);
        a.spans.emplace_back(t, t);
      } else {
        a.spans.back().second = t;
      }
    }
    prev = y;
  }
  a.frame_labels = std::move(frame_labels);
  return a;
}

LossResult LogLoss(const CtcGraph &graph, const PosteriorMatrix &posteriors) {
  CheckCompatible(graph, posteriors);
  const Matrix &scores = posteriors.log_probs();
  CheckFinite(scores);
  const int T = posteriors.NumFrames();
  const int S = graph.NumStates();

  const Matrix alpha = Forward(graph, scores);
  const Matrix beta = Backward(graph, scores);

  LossResult result;
  result.forward_log_total = LogSumFinal(graph, alpha);
  double backward = kNegInf;
  for (int s = 0; s < S; ++s)
    if (graph.IsInitial(s)) backward = LogAdd(backward, scores(0, graph.label(s)) + beta(0, s));
  result.backward_log_total = backward;
  if (!std::isfinite(result.forward_log_total))
    throw NumericalError("total path probability underflowed");
  result.loss = -result.forward_log_total;

  const double log_total = result.forward_log_total;
  result.occupancy = Matrix::Zero(T, graph.NumClasses());
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      const double lp = alpha(t, s) + beta(t, s);
      if (lp == kNegInf) continue;
      result.occupancy(t, graph.label(s)) += std::exp(lp - log_total);
    }
  }
  return result;
}

Matrix ScoreGradient(const PosteriorMatrix &posteriors, const Matrix &occupancy) {
  return posteriors.log_probs().array().exp().matrix() - occupancy;
}

Alignment Viterbi(const CtcGraph &graph, const PosteriorMatrix &posteriors,
                  const PriorVector &prior, double prior_scale) {
  CheckCompatible(graph, posteriors);
  CheckFinite(posteriors.log_probs());
  if (!(prior_scale >= 0.0 && prior_scale <= 1.0))
    throw InputError("prior scale must lie in [0, 1]");
  const int C = graph.NumClasses();
  if (prior.size() != C) throw InputError("prior has the wrong number of classes");

  Matrix scores = posteriors.log_probs();
  if (prior_scale > 0.0) {
    for (int c = 0; c < C; ++c) {
      const double penalty = prior_scale * std::log(std::max(prior[c], kPriorFloor));
      scores.col(c).array() -= penalty;
    }
  }

  const int T = posteriors.NumFrames();
  const int S = graph.NumStates();
  Matrix delta = Matrix::Constant(T, S, kNegInf);
  std::vector<int> back(static_cast<std::size_t>(T) * S, -1);
  for (int s = 0; s < S; ++s)
    if (graph.IsInitial(s)) delta(0, s) = scores(0, graph.label(s));
  for (int t = 1; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      // Predecessors are all smaller than s, so scanning them first and the
      // self-loop last visits candidates in ascending id order.
      double best = kNegInf;
      int arg = -1;
      for (int p : graph.preds(s)) {
        if (delta(t - 1, p) > best) {
          best = delta(t - 1, p);
          arg = p;
        }
      }
      if (delta(t - 1, s) > best) {
        best = delta(t - 1, s);
        arg = s;
      }
      if (arg >= 0) {
        delta(t, s) = best + scores(t, graph.label(s));
        back[static_cast<std::size_t>(t) * S + s] = arg;
      }
    }
  }
  double best = kNegInf;
  int state = -1;
  for (int s = 0; s < S; ++s) {
    if (graph.IsFinal(s) && delta(T - 1, s) > best) {
      best = delta(T - 1, s);
      state = s;
    }
  }
  if (state < 0) throw NumericalError("no finite-score path");
  std::vector<int> labels(T);
  for (int t = T - 1; t >= 0; --t) {
    labels[t] = graph.label(state);
    if (t > 0) state = back[static_cast<std::size_t>(t) * S + state];
  }
  return MakeAlignment(std::move(labels), graph.BlankId(), best);
}

Alignment Viterbi(const CtcGraph &graph, const PosteriorMatrix &posteriors) {
  return Viterbi(graph, posteriors, PriorVector::Ones(graph.NumClasses()), 0.0);
}

PriorVector EstimatePrior(std::span<const PosteriorMatrix> posteriors) {
  if (posteriors.empty()) throw InputError("prior estimation needs at least one matrix");
  const int C = posteriors.front().NumClasses();
  std::vector<Vector> sums;
  sums.reserve(posteriors.size());
  long long frames = 0;
  for (const PosteriorMatrix &p : posteriors) {
    if (p.NumClasses() != C) throw InputError("posterior matrices differ in class count");
    Vector sum = Vector::Zero(C);
    for (int t = 0; t < p.NumFrames(); ++t)
      sum += p.log_probs().row(t).transpose().array().exp().matrix();
    sums.push_back(std::move(sum));
    frames += p.NumFrames();
  }
  if (frames == 0) throw InputError("prior estimation needs at least one frame");
  // Pairwise tree reduction in input order.
  while (sums.size() > 1) {
    std::vector<Vector> next;
    next.reserve((sums.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < sums.size(); i += 2) next.push_back(sums[i] + sums[i + 1]);
    if (sums.size() % 2 == 1) next.push_back(sums.back());
    sums.swap(next);
  }
  Vector q = sums.front() / static_cast<double>(frames);
  return q / q.sum();
}

Alignment SamplePath(const CtcGraph &graph, const PosteriorMatrix &posteriors,
                     double temperature, std::mt19937_64 &rng) {
  CheckCompatible(graph, posteriors);
  CheckFinite(posteriors.log_probs());
  if (!(temperature > 0.0)) throw InputError("temperature must be positive");
  const Matrix scores = posteriors.log_probs() / temperature;
  const Matrix alpha = Forward(graph, scores);
  const int T = posteriors.NumFrames();
  const int S = graph.NumStates();

  std::vector<int> candidates;
  std::vector<double> weights;
  for (int s = 0; s < S; ++s) {
    if (!graph.IsFinal(s)) continue;
    candidates.push_back(s);
    weights.push_back(alpha(T - 1, s));
  }
  int state = candidates[SampleCategorical(weights, rng)];
  std::vector<int> labels(T);
  labels[T - 1] = graph.label(state);
  for (int t = T - 1; t > 0; --t) {
    candidates.assign(graph.preds(state).begin(), graph.preds(state).end());
    candidates.push_back(state);
    weights.clear();
    for (int c : candidates) weights.push_back(alpha(t - 1, c));
    state = candidates[SampleCategorical(weights, rng)];
    labels[t - 1] = graph.label(state);
  }
  double log_prob = 0.0;
  for (int t = 0; t < T; ++t) log_prob += posteriors(t, labels[t]);
  return MakeAlignment(std::move(labels), graph.BlankId(), log_prob);
}

Alignment SamplePath(const CtcGraph &graph, const PosteriorMatrix &posteriors,
                     double temperature, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return SamplePath(graph, posteriors, temperature, rng);
}

OracleResult EnumerateOracle(const CtcGraph &graph, const PosteriorMatrix &posteriors) {
  if (posteriors.NumClasses() != graph.NumClasses())
    throw InputError("posterior matrix class count does not match the graph");
  return Enumerate(posteriors, [&](const std::vector<int> &y) { return graph.Accepts(y); });
}

OracleResult EnumerateOracle(const std::vector<std::vector<int>> &allowed,
                             const PosteriorMatrix &posteriors) {
  const std::set<std::vector<int>> allowed_set(allowed.begin(), allowed.end());
  const int blank = posteriors.NumClasses() - 1;
  return Enumerate(posteriors, [&](const std::vector<int> &y) {
    return allowed_set.count(Collapse(y, blank)) > 0;
  });
}

}  // namespace adsm
