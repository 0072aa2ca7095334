// tests/ctc_test.cc

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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "random_instances.h"
#include "test_util.h"

namespace adsm {
namespace {

using testing::BruteForceLoss;
using testing::ForEachString;
using testing::RandomInstance;
using testing::RandomLogProbs;
using testing::RefCollapse;
using testing::RelNear;

Matrix Rows(std::initializer_list<std::vector<double>> probs) {
  Matrix m(static_cast<int>(probs.size()), static_cast<int>(probs.begin()->size()));
  int t = 0;
  for (const auto &row : probs) {
    for (std::size_t c = 0; c < row.size(); ++c) m(t, static_cast<int>(c)) = std::log(row[c]);
    ++t;
  }
  return m;
}

// One-word graph over raw label ids; `blank` is the class count minus one.
CtcGraph GraphOf(int num_nodes, std::vector<LatticeArc> arcs, int num_classes) {
  WordSegDag dag;
  dag.word = "w";
  dag.num_nodes = num_nodes;
  dag.arcs = std::move(arcs);
  return ExpandCtc(ConcatUtterance({dag}), num_classes);
}

CtcGraph SingleLabel(int label, int num_classes) {
  return GraphOf(2, {{0, 1, label}}, num_classes);
}

TEST(CollapseTest, Examples) {
  const int e = 9;
  EXPECT_EQ(Collapse(std::vector<int>{e, 0, 0, e, 1, e}, e), (std::vector<int>{0, 1}));
  EXPECT_EQ(Collapse(std::vector<int>{0, e, 0}, e), (std::vector<int>{0, 0}));
  EXPECT_TRUE(Collapse(std::vector<int>{e, e, e}, e).empty());
  EXPECT_TRUE(Collapse(std::vector<int>{}, e).empty());
}

TEST(AlignmentTest, SpansCoverLabels) {
  const int e = 3;
  const Alignment a = MakeAlignment({e, 0, 0, e, 1, e, 1, 1}, e);
  EXPECT_EQ(a.collapsed, (std::vector<int>{0, 1, 1}));
  EXPECT_EQ(a.spans, (std::vector<std::pair<int, int>>{{1, 2}, {4, 4}, {6, 7}}));
}

TEST(PosteriorMatrixTest, Validation) {
  EXPECT_NO_THROW(PosteriorMatrix(Rows({{0.5, 0.5}})));
  EXPECT_THROW(PosteriorMatrix(Rows({{0.5, 0.6}})), NumericalError);
  Matrix bad = Rows({{0.5, 0.5}});
  bad(0, 0) = std::nan("");
  EXPECT_THROW(PosteriorMatrix{bad}, NumericalError);
  Matrix scores(2, 3);
  scores << 1, 2, 3, -1000, 0, 1000;
  const PosteriorMatrix p = PosteriorMatrix::FromScores(scores);
  for (int t = 0; t < 2; ++t) EXPECT_NEAR(p.log_probs().row(t).array().exp().sum(), 1.0, 1e-12);
}

TEST(LogLossTest, SingleFrame) {
  const LossResult r = LogLoss(SingleLabel(0, 2), PosteriorMatrix(Rows({{0.6, 0.4}})));
  EXPECT_NEAR(r.loss, -std::log(0.6), 1e-12);
  EXPECT_NEAR(r.loss, 0.5108, 1e-4);
}

TEST(LogLossTest, UniformTwoFrames) {
  // Classes {a, b, blank}; accepted: aa, a-, -a.
  const double u = 1.0 / 3.0;
  const LossResult r =
      LogLoss(SingleLabel(0, 3), PosteriorMatrix(Rows({{u, u, u}, {u, u, u}})));
  EXPECT_NEAR(r.loss, std::log(3.0), 1e-12);
}

TEST(LogLossTest, TwoVariantsUniform) {
  // S = {(a, b), (c)} over classes {a, b, c, blank}: ab, cc, c-, -c.
  const CtcGraph g = GraphOf(3, {{0, 1, 0}, {0, 2, 2}, {1, 2, 1}}, 4);
  const LossResult r =
      LogLoss(g, PosteriorMatrix(Rows({{.25, .25, .25, .25}, {.25, .25, .25, .25}})));
  EXPECT_NEAR(r.loss, std::log(4.0), 1e-12);
}

TEST(LogLossTest, RandomInstancesMatchBruteForce) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 80; ++trial) {
    const auto inst = RandomInstance(rng);
    const int T = std::uniform_int_distribution<int>(inst.graph.MinFrames(), 6)(rng);
    if (inst.graph.MinFrames() > 6) continue;
    const Matrix lp = RandomLogProbs(rng, T, inst.vocab.NumClasses(), 2.0);
    const LossResult r = LogLoss(inst.graph, PosteriorMatrix(lp));
    EXPECT_TRUE(RelNear(r.loss, BruteForceLoss(inst.allowed, lp), 1e-9));
    EXPECT_TRUE(RelNear(r.forward_log_total, r.backward_log_total, 1e-9));
    EXPECT_GE(r.loss, 0.0);
    for (int t = 0; t < T; ++t) EXPECT_NEAR(r.occupancy.row(t).sum(), 1.0, 1e-6);
  }
}

TEST(LogLossTest, OccupancyIsPathPosterior) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = RandomInstance(rng);
    if (inst.graph.MinFrames() > 5) continue;
    const int T = 5;
    const int C = inst.vocab.NumClasses();
    const Matrix lp = RandomLogProbs(rng, T, C);
    // Independent occupancy: posterior-weighted class counts over strings.
    Matrix occ = Matrix::Zero(T, C);
    double total = 0.0;
    ForEachString(C, T, [&](const std::vector<int> &y) {
      if (!inst.allowed.count(RefCollapse(y, C - 1))) return;
      double p = 0.0;
      for (int t = 0; t < T; ++t) p += lp(t, y[t]);
      p = std::exp(p);
      total += p;
      for (int t = 0; t < T; ++t) occ(t, y[t]) += p;
    });
    occ /= total;
    const LossResult r = LogLoss(inst.graph, PosteriorMatrix(lp));
    EXPECT_LT((r.occupancy - occ).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(LogLossTest, ScoreGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = RandomInstance(rng);
    const int T = inst.graph.MinFrames() + 2;
    const int C = inst.vocab.NumClasses();
    Matrix scores = RandomLogProbs(rng, T, C);
    auto loss_at = [&](const Matrix &s) {
      return LogLoss(inst.graph, PosteriorMatrix::FromScores(s)).loss;
    };
    const PosteriorMatrix p = PosteriorMatrix::FromScores(scores);
    const Matrix grad = ScoreGradient(p, LogLoss(inst.graph, p).occupancy);
    const double h = 1e-5;
    for (int t = 0; t < T; ++t)
      for (int c = 0; c < C; ++c) {
        Matrix plus = scores, minus = scores;
        plus(t, c) += h;
        minus(t, c) -= h;
        const double fd = (loss_at(plus) - loss_at(minus)) / (2 * h);
        EXPECT_NEAR(grad(t, c), fd, 1e-7);
      }
  }
}

TEST(LogLossTest, Errors) {
  const CtcGraph g = GraphOf(3, {{0, 1, 0}, {1, 2, 0}}, 2);  // (a, a) needs 3 frames
  EXPECT_EQ(g.MinFrames(), 3);
  EXPECT_THROW(LogLoss(g, PosteriorMatrix(Rows({{.5, .5}, {.5, .5}}))), InfeasibleError);
  EXPECT_NO_THROW(LogLoss(g, PosteriorMatrix(Rows({{.5, .5}, {.5, .5}, {.5, .5}}))));
  EXPECT_THROW(LogLoss(g, PosteriorMatrix(Rows({{.2, .3, .5}, {.2, .3, .5}, {.2, .3, .5}}))),
               InputError);
  Matrix nan = Rows({{.5, .5}, {.5, .5}, {.5, .5}});
  nan(1, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(LogLoss(g, PosteriorMatrix::Unchecked(nan)), NumericalError);
}

TEST(LogLossTest, LongSequencesStayFinite) {
  std::mt19937_64 rng(53);
  const int T = 10000;
  const Matrix lp = RandomLogProbs(rng, T, 4, 3.0);
  const CtcGraph g = GraphOf(4, {{0, 1, 0}, {1, 2, 1}, {2, 3, 2}, {0, 3, 1}}, 4);
  const LossResult r = LogLoss(g, PosteriorMatrix(lp));
  EXPECT_TRUE(std::isfinite(r.loss));
  EXPECT_GT(r.loss, 100.0);
  EXPECT_TRUE(RelNear(r.forward_log_total, r.backward_log_total, 1e-9));
  for (int t = 0; t < T; t += 997) EXPECT_NEAR(r.occupancy.row(t).sum(), 1.0, 1e-6);
}

TEST(ViterbiTest, MatchesExhaustiveArgmaxWithAndWithoutPrior) {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 80; ++trial) {
    const auto inst = RandomInstance(rng);
    if (inst.graph.MinFrames() > 6) continue;
    const int T = std::uniform_int_distribution<int>(inst.graph.MinFrames(), 6)(rng);
    const int C = inst.vocab.NumClasses();
    const Matrix lp = RandomLogProbs(rng, T, C, 2.0);
    Vector q = Vector::Zero(C);
    for (int c = 0; c < C; ++c) q[c] = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    q /= q.sum();
    for (double lambda : {0.0, 0.3, 1.0}) {
      double best = -std::numeric_limits<double>::infinity();
      ForEachString(C, T, [&](const std::vector<int> &y) {
        if (!inst.allowed.count(RefCollapse(y, C - 1))) return;
        double s = 0.0;
        for (int t = 0; t < T; ++t) s += lp(t, y[t]) - lambda * std::log(q[y[t]]);
        best = std::max(best, s);
      });
      const Alignment a = Viterbi(inst.graph, PosteriorMatrix(lp), q, lambda);
      double got = 0.0;
      for (int t = 0; t < T; ++t) got += lp(t, a.frame_labels[t]) - lambda * std::log(q[a.frame_labels[t]]);
      EXPECT_NEAR(a.score, best, 1e-9);
      EXPECT_NEAR(got, best, 1e-9);
      EXPECT_TRUE(inst.allowed.count(a.collapsed));
      EXPECT_EQ(a.collapsed, RefCollapse(a.frame_labels, C - 1));
    }
  }
}

TEST(ViterbiTest, LambdaZeroEqualsRawViterbi) {
  std::mt19937_64 rng(61);
  const auto inst = RandomInstance(rng);
  const Matrix lp = RandomLogProbs(rng, inst.graph.MinFrames() + 3, inst.vocab.NumClasses());
  Vector q = Vector::Constant(inst.vocab.NumClasses(), 1e-3);
  q[0] = 0.9;
  EXPECT_EQ(Viterbi(inst.graph, PosteriorMatrix(lp), q, 0.0).frame_labels,
            Viterbi(inst.graph, PosteriorMatrix(lp)).frame_labels);
}

TEST(ViterbiTest, PriorPushesTowardFewerBlanks) {
  // One label a, classes {a, blank}, two frames with p(a) = 0.45.
  const CtcGraph g = SingleLabel(0, 2);
  const PosteriorMatrix p(Rows({{.45, .55}, {.45, .55}}));
  Vector q(2);
  q << 0.1, 0.9;
  const Alignment raw = Viterbi(g, p, q, 0.0);
  const Alignment scaled = Viterbi(g, p, q, 0.3);
  auto blanks = [](const Alignment &a) {
    return std::count(a.frame_labels.begin(), a.frame_labels.end(), 1);
  };
  EXPECT_EQ(blanks(raw), 1);
  EXPECT_EQ(blanks(scaled), 0);
  EXPECT_EQ(scaled.frame_labels, (std::vector<int>{0, 0}));
}

TEST(ViterbiTest, PriorScaleInvariance) {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 30; ++trial) {
    const auto inst = RandomInstance(rng);
    const int C = inst.vocab.NumClasses();
    const Matrix lp = RandomLogProbs(rng, inst.graph.MinFrames() + 2, C);
    Vector q = Vector::Zero(C);
    for (int c = 0; c < C; ++c) q[c] = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    q /= q.sum();
    const Alignment a = Viterbi(inst.graph, PosteriorMatrix(lp), q, 0.5);
    const Alignment b = Viterbi(inst.graph, PosteriorMatrix(lp), Vector(q * 7.0), 0.5);
    EXPECT_EQ(a.frame_labels, b.frame_labels);
  }
}

TEST(ViterbiTest, TiesAreDeterministicAndFloorApplies) {
  // Uniform posteriors: every accepted path ties.
  const CtcGraph g = GraphOf(3, {{0, 1, 0}, {1, 2, 1}}, 3);
  const double u = 1.0 / 3.0;
  const PosteriorMatrix p(Rows({{u, u, u}, {u, u, u}, {u, u, u}, {u, u, u}}));
  const Alignment first = Viterbi(g, p);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(Viterbi(g, p).frame_labels, first.frame_labels);
  EXPECT_TRUE(g.Accepts(first.frame_labels));
  Vector q(3);
  q << 0.0, 0.5, 0.5;  // zero prior is floored, not infinite
  const Alignment floored = Viterbi(g, p, q, 1.0);
  EXPECT_TRUE(std::isfinite(floored.score));
  EXPECT_THROW(Viterbi(g, p, q, 1.5), InputError);
  EXPECT_THROW(Viterbi(g, p, Vector::Ones(2), 0.5), InputError);
}

TEST(EstimatePriorTest, Examples) {
  const std::vector<PosteriorMatrix> one{PosteriorMatrix(Rows({{.5, .25, .25}}))};
  const Vector q = EstimatePrior(one);
  EXPECT_NEAR(q[0], 0.5, 1e-15);
  EXPECT_NEAR(q[1], 0.25, 1e-15);
  EXPECT_NEAR(q[2], 0.25, 1e-15);
  const std::vector<PosteriorMatrix> two{PosteriorMatrix(Rows({{.7, .3}, {.1, .9}}))};
  EXPECT_NEAR(EstimatePrior(two).sum(), 1.0, 1e-15);
  EXPECT_NEAR(EstimatePrior(two)[0], 0.4, 1e-15);
  EXPECT_THROW(EstimatePrior(std::vector<PosteriorMatrix>{}), InputError);
}

TEST(EstimatePriorTest, MatchesIndependentMean) {
  std::mt19937_64 rng(71);
  std::vector<PosteriorMatrix> ps;
  long double sum[5] = {0, 0, 0, 0, 0};
  long long frames = 0;
  for (int i = 0; i < 100; ++i) {
    const int T = std::uniform_int_distribution<int>(1, 30)(rng);
    const Matrix lp = RandomLogProbs(rng, T, 5, 2.0);
    for (int t = 0; t < T; ++t)
      for (int c = 0; c < 5; ++c) sum[c] += std::exp(static_cast<long double>(lp(t, c)));
    frames += T;
    ps.emplace_back(lp);
  }
  const Vector q = EstimatePrior(ps);
  for (int c = 0; c < 5; ++c)
    EXPECT_NEAR(q[c], static_cast<double>(sum[c] / frames), 1e-12);
  EXPECT_NEAR(q.sum(), 1.0, 1e-12);
}

TEST(SamplePathTest, LowTemperatureGivesViterbi) {
  std::mt19937_64 rng(73);
  const auto inst = RandomInstance(rng);
  const Matrix lp = RandomLogProbs(rng, inst.graph.MinFrames() + 3, inst.vocab.NumClasses(), 2.0);
  const PosteriorMatrix p(lp);
  const auto best = Viterbi(inst.graph, p).frame_labels;
  std::mt19937_64 sampler(5);
  for (int i = 0; i < 100; ++i)
    EXPECT_EQ(SamplePath(inst.graph, p, 1e-3, sampler).frame_labels, best);
}

TEST(SamplePathTest, SinglePathAndSeeds) {
  const CtcGraph g = SingleLabel(0, 2);
  const PosteriorMatrix one(Rows({{.3, .7}}));
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    EXPECT_EQ(SamplePath(g, one, 1.0, seed).frame_labels, (std::vector<int>{0}));
  std::mt19937_64 rng(79);
  const auto inst = RandomInstance(rng);
  const PosteriorMatrix p(RandomLogProbs(rng, inst.graph.MinFrames() + 3, inst.vocab.NumClasses()));
  EXPECT_EQ(SamplePath(inst.graph, p, 1.0, 42).frame_labels,
            SamplePath(inst.graph, p, 1.0, 42).frame_labels);
  EXPECT_THROW(SamplePath(g, one, 0.0, 1), InputError);
}

TEST(SamplePathTest, FrequenciesMatchPosteriors) {
  std::mt19937_64 rng(83);
  const auto inst = RandomInstance(rng);
  const int T = std::min(inst.graph.MinFrames() + 1, 6);
  const PosteriorMatrix p(RandomLogProbs(rng, T, inst.vocab.NumClasses()));
  const OracleResult oracle = EnumerateOracle(inst.graph, p);
  std::map<std::vector<int>, int> counts;
  const int n = 20000;
  std::mt19937_64 sampler(7);
  for (int i = 0; i < n; ++i) {
    const auto y = SamplePath(inst.graph, p, 1.0, sampler).frame_labels;
    ASSERT_TRUE(inst.graph.Accepts(y));
    ++counts[y];
  }
  for (const EnumeratedPath &path : oracle.paths) {
    const double expected = n * path.posterior;
    const double sigma = std::sqrt(n * path.posterior * (1 - path.posterior));
    EXPECT_LE(std::abs(counts[path.frame_labels] - expected), 3 * sigma + 1);
  }
}

TEST(SamplePathTest, TemperatureSharpens) {
  // Tempered target: p(path) proportional to prod p^(1/temperature).
  const CtcGraph g = SingleLabel(0, 2);
  const PosteriorMatrix p(Rows({{.8, .2}, {.8, .2}}));
  // Paths aa (0.64), a- (0.16), -a (0.16); at temperature 0.5: .4096, .0256 x2.
  const double z = 0.4096 + 2 * 0.0256;
  std::mt19937_64 sampler(11);
  int aa = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i)
    aa += SamplePath(g, p, 0.5, sampler).frame_labels == std::vector<int>{0, 0};
  const double expect = 0.4096 / z;
  EXPECT_NEAR(aa / double(n), expect, 4 * std::sqrt(expect * (1 - expect) / n));
}

TEST(EnumerateOracleTest, CostGuardAndAllowedSetVersion) {
  const CtcGraph g = SingleLabel(0, 2);
  std::mt19937_64 rng(89);
  EXPECT_THROW(EnumerateOracle(g, PosteriorMatrix(RandomLogProbs(rng, 9, 2))), CostGuardError);
  EXPECT_THROW(EnumerateOracle(SingleLabel(0, 7), PosteriorMatrix(RandomLogProbs(rng, 2, 7))),
               CostGuardError);
  const PosteriorMatrix p(RandomLogProbs(rng, 4, 2));
  const OracleResult a = EnumerateOracle(g, p);
  const OracleResult b = EnumerateOracle({{0}}, p);
  EXPECT_NEAR(a.loss, b.loss, 1e-12);
  EXPECT_EQ(a.best_path, b.best_path);
  // One contiguous run of a somewhere in four frames.
  EXPECT_EQ(a.paths.size(), 10u);
}

}  // namespace
}  // namespace adsm
