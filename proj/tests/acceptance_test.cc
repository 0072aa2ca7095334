// tests/acceptance_test.cc

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

// End-to-end acceptance checks.  Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "adsm/ctc.h"
#include "adsm/encoder.h"
#include "adsm/pipeline.h"
#include "adsm/textseg.h"
#include "random_instances.h"
#include "test_util.h"

namespace adsm {
namespace {

using testing::Instance;
using testing::RelNear;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

// Random instance with a random frame count in [MinFrames, max_frames].
struct Case {
  Instance inst;
  PosteriorMatrix posteriors;
};

Case RandomCase(std::mt19937_64 &rng, int max_frames) {
  while (true) {
    Instance inst = testing::RandomInstance(rng);
    const int min_frames = testing::RefMinFrames(inst.allowed);
    if (min_frames > max_frames) continue;
    const int T = std::uniform_int_distribution<int>(min_frames, max_frames)(rng);
    Matrix logp = testing::RandomLogProbs(rng, T, inst.vocab.NumClasses(), 1.5);
    return {std::move(inst), PosteriorMatrix(std::move(logp))};
  }
}

Outcome LossOracle() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  int failures = 0;
  const int n = 250;
  for (int i = 0; i < n; ++i) {
    const Case c = RandomCase(rng, 6);
    const double loss = LogLoss(c.inst.graph, c.posteriors).loss;
    const std::vector<std::vector<int>> allowed(c.inst.allowed.begin(), c.inst.allowed.end());
    const double oracle = EnumerateOracle(allowed, c.posteriors).loss;
    const double brute = testing::BruteForceLoss(c.inst.allowed, c.posteriors.log_probs());
    worst = std::max({worst, std::abs(loss - oracle) / std::max(1.0, std::abs(oracle)),
                      std::abs(loss - brute) / std::max(1.0, std::abs(brute))});
    failures += !RelNear(loss, oracle, 1e-9) || !RelNear(loss, brute, 1e-9);
  }
  const double secs = Seconds(start);
  std::ostringstream d;
  d << n << " instances, " << failures << " mismatches, max rel err " << worst << ", " << secs
    << " s";
  return {failures == 0 && secs < 10.0, d.str()};
}

Outcome ViterbiAndSampling() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(202);
  int viterbi_failures = 0;
  const int n = 250;
  for (int i = 0; i < n; ++i) {
    const Case c = RandomCase(rng, 6);
    const OracleResult oracle = EnumerateOracle(c.inst.graph, c.posteriors);
    const PriorVector prior = PriorVector::Constant(c.inst.vocab.NumClasses(),
                                                    1.0 / c.inst.vocab.NumClasses());
    for (const Alignment &a : {Viterbi(c.inst.graph, c.posteriors),
                               Viterbi(c.inst.graph, c.posteriors, prior, 0.0)}) {
      double best = -std::numeric_limits<double>::infinity();
      for (const EnumeratedPath &p : oracle.paths) best = std::max(best, p.log_prob);
      viterbi_failures += a.frame_labels != oracle.best_path || std::abs(a.score - best) > 1e-9;
    }
  }

  int sample_failures = 0, paths_tested = 0;
  const int draws = 100000;
  std::mt19937_64 graph_rng(303);
  for (int g = 0; g < 5; ++g) {
    const Case c = RandomCase(graph_rng, 5);
    const OracleResult oracle = EnumerateOracle(c.inst.graph, c.posteriors);
    std::map<std::vector<int>, int> hits;
    std::mt19937_64 sample_rng(1000 + g);
    for (int i = 0; i < draws; ++i)
      ++hits[SamplePath(c.inst.graph, c.posteriors, 1.0, sample_rng).frame_labels];
    int seen = 0;
    for (const EnumeratedPath &p : oracle.paths) {
      const double expected = draws * p.posterior;
      const double sigma = std::sqrt(draws * p.posterior * (1.0 - p.posterior));
      const int observed = hits.count(p.frame_labels) ? hits.at(p.frame_labels) : 0;
      seen += observed;
      sample_failures += std::abs(observed - expected) > 3.0 * sigma + 1e-12;
      ++paths_tested;
    }
    // Every draw must be an accepted path.
    sample_failures += seen != draws;
  }
  const double secs = Seconds(start);
  std::ostringstream d;
  d << n << " instances, " << viterbi_failures << " argmax mismatches; " << paths_tested
    << " path frequencies over 5 graphs x " << draws << " draws, " << sample_failures
    << " outside 3 sigma; " << secs << " s";
  return {viterbi_failures == 0 && sample_failures == 0 && secs < 60.0, d.str()};
}

Outcome GradientCheck() {
  std::mt19937_64 rng(404);
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  double worst = 0.0;
  int models = 0;
  while (models < 20) {
    EncoderConfig cfg;
    cfg.input_dim = uniform(1, 3);
    cfg.context = uniform(0, 1);
    cfg.num_classes = uniform(2, 4);
    cfg.hidden.clear();
    const int layers = uniform(0, 2);
    for (int l = 0; l < layers; ++l) cfg.hidden.push_back(uniform(2, 4));
    cfg.subsample_factor = 1 << uniform(0, 2);
    EncoderParams params = EncoderParams::Init(cfg, rng());
    if (params.NumParams() > 100) continue;
    ++models;
    // Random feasible label sequence over the non-blank classes.
    std::vector<int> labels(uniform(1, 3));
    for (int &l : labels) l = uniform(0, cfg.num_classes - 2);
    int need = static_cast<int>(labels.size());
    for (std::size_t i = 1; i < labels.size(); ++i) need += labels[i] == labels[i - 1];
    const int frames = (need + uniform(0, 3)) * cfg.subsample_factor;
    FeatureMatrix f{"g", Matrix(frames, cfg.input_dim)};
    std::normal_distribution<double> normal;
    for (int t = 0; t < frames; ++t)
      for (int d = 0; d < cfg.input_dim; ++d) f.values(t, d) = normal(rng);
    WordSegDag dag;
    dag.word = "w";
    dag.num_nodes = static_cast<int>(labels.size()) + 1;
    for (std::size_t i = 0; i < labels.size(); ++i)
      dag.arcs.push_back({static_cast<int>(i), static_cast<int>(i) + 1, labels[i]});
    const CtcGraph graph = ExpandCtc(ConcatUtterance({dag}), cfg.num_classes);

    const UttGradient analytic = LossAndGradient(f, graph, params);
    const Vector theta = params.Flatten();
    Vector fd(theta.size());
    const double h = 1e-4;
    for (int i = 0; i < theta.size(); ++i) {
      Vector p = theta, m = theta;
      p[i] += h;
      m[i] -= h;
      params.Unflatten(p);
      const double lp = LogLoss(graph, Encode(f, params)).loss;
      params.Unflatten(m);
      const double lm = LogLoss(graph, Encode(f, params)).loss;
      fd[i] = (lp - lm) / (2 * h);
    }
    params.Unflatten(theta);
    const double scale = std::max({fd.norm(), analytic.gradient.norm(), 1e-12});
    worst = std::max(worst, (fd - analytic.gradient).norm() / scale);
  }
  std::ostringstream d;
  d << models << " models, max relative error " << worst;
  return {worst <= 1e-4, d.str()};
}

Outcome ReductionCheck() {
  std::mt19937_64 rng(505);
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  double worst = 0.0;
  const int n = 50;
  for (int i = 0; i < n; ++i) {
    std::vector<std::string> words;
    std::map<std::string, std::vector<std::string>> split_of;
    std::set<Unit> units;
    for (int w = uniform(1, 3); w > 0; --w) {
      std::string word;
      for (int c = uniform(1, 4); c > 0; --c) word += static_cast<char>('a' + uniform(0, 2));
      words.push_back(word);
      if (split_of.count(word)) continue;
      auto splits = testing::AllSplits(SplitChars(word), [](const std::string &, bool) {
        return true;
      });
      split_of[word] = splits[uniform(0, static_cast<int>(splits.size()) - 1)];
      for (std::size_t k = 0; k < split_of[word].size(); ++k)
        units.insert({split_of[word][k], k + 1 == split_of[word].size()});
    }
    const Vocabulary vocab = Vocabulary::FromUnits({units.begin(), units.end()});
    std::map<std::string, std::vector<Variant>> entries;
    for (const auto &[word, pieces] : split_of) {
      Variant v;
      for (std::size_t k = 0; k < pieces.size(); ++k)
        v.units.push_back(vocab.IdOf({pieces[k], k + 1 == pieces.size()}));
      entries[word].push_back(v);
    }
    std::vector<int> labels;
    for (const std::string &w : words)
      labels.insert(labels.end(), entries[w][0].units.begin(), entries[w][0].units.end());
    const SegTable table = SegTable::Explicit(vocab, entries);
    const CtcGraph graph = ExpandCtc(BuildUttLattice(words, table), vocab.NumClasses());
    const int T = graph.MinFrames() + uniform(0, 20);
    const Matrix logp = testing::RandomLogProbs(rng, T, vocab.NumClasses(), 2.0);
    const double loss = LogLoss(graph, PosteriorMatrix(logp)).loss;
    const double ref = testing::ReferenceCtcLoss(labels, logp);
    worst = std::max(worst, std::abs(loss - ref) / std::max(1.0, std::abs(ref)));
  }
  std::ostringstream d;
  d << n << " cases, max relative error " << worst;
  return {worst <= 1e-9, d.str()};
}

Outcome Monotonicity() {
  std::mt19937_64 rng(606);
  int violations = 0, pairs = 0;
  double worst = -std::numeric_limits<double>::infinity();
  while (pairs < 100) {
    testing::InstanceLimits lim;
    lim.max_vocab = 8;
    lim.max_word_len = 4;
    lim.letters = "abc";
    const Instance inst = testing::RandomInstance(rng, lim);
    // Add one unseen segmentation of a random word.
    const std::string word = inst.words[rng() % inst.words.size()];
    auto splits = testing::AllSplits(SplitChars(word), [](const std::string &, bool) {
      return true;
    });
    std::shuffle(splits.begin(), splits.end(), rng);
    std::vector<Unit> units = inst.vocab.units();
    std::vector<Unit> extra;
    for (const auto &s : splits) {
      std::vector<Unit> cand;
      for (std::size_t k = 0; k < s.size(); ++k) cand.push_back({s[k], k + 1 == s.size()});
      bool present = false;
      for (const Variant &v : inst.table.VariantsOf(word)) {
        std::vector<Unit> have;
        for (int id : v.units) have.push_back(inst.vocab.unit(id));
        present = present || have == cand;
      }
      if (!present) {
        extra = cand;
        break;
      }
    }
    if (extra.empty()) continue;
    units.insert(units.end(), extra.begin(), extra.end());
    const Vocabulary big = Vocabulary::FromUnits(units);
    std::map<std::string, std::vector<Variant>> sub, super;
    for (const auto &[w, variants] : inst.table.entries())
      for (const Variant &v : variants) {
        Variant mapped{{}, 1.0};
        for (int id : v.units) mapped.units.push_back(big.IdOf(inst.vocab.unit(id)));
        sub[w].push_back(mapped);
        super[w].push_back(mapped);
      }
    Variant added{{}, 1.0};
    for (const Unit &u : extra) added.units.push_back(big.IdOf(u));
    super[word].push_back(added);
    for (auto *m : {&sub, &super})
      for (auto &[w, vs] : *m)
        for (Variant &v : vs) v.weight = 1.0 / static_cast<double>(vs.size());
    const SegTable small_table = SegTable::Explicit(big, sub);
    const SegTable big_table = SegTable::Explicit(big, super);
    const CtcGraph g_small = ExpandCtc(BuildUttLattice(inst.words, small_table), big.NumClasses());
    const CtcGraph g_big = ExpandCtc(BuildUttLattice(inst.words, big_table), big.NumClasses());
    const int T = g_small.MinFrames() + static_cast<int>(rng() % 10);
    const PosteriorMatrix p(testing::RandomLogProbs(rng, T, big.NumClasses(), 1.5));
    const double a = LogLoss(g_small, p).loss, b = LogLoss(g_big, p).loss;
    worst = std::max(worst, b - a);
    violations += b > a + 1e-12;
    ++pairs;
  }
  std::ostringstream d;
  d << pairs << " superset pairs, " << violations << " violations, largest change " << worst;
  return {violations == 0, d.str()};
}

// Serialized artifacts of one pipeline run.
struct RunFiles {
  std::string vocab, segtable, targets, metrics;
  bool operator==(const RunFiles &) const = default;
};

RunFiles Serialize(const PipelineResult &r) {
  std::ostringstream v, s, t, m;
  WriteVocabulary(v, r.final_table.vocab());
  WriteSegTable(s, r.final_table);
  WriteTargets(t, r.targets);
  WriteMetrics(m, r.metrics);
  return {v.str(), s.str(), t.str(), m.str()};
}

struct ToyRun {
  SyntheticCorpus synthetic;
  PipelineResult result;
  double seconds = 0.0;
};

ToyRun RunToy() {
  ToyRun run;
  SyntheticSpec spec;
  spec.lexicon = MakeToyLexicon(50, 7);
  spec.num_utterances = 500;
  spec.noise = 0.2;
  run.synthetic = GenerateSynthetic(spec);
  PipelineConfig cfg;
  cfg.prior_scale = 0.3;
  cfg.mu = 0.05;
  cfg.k = 20;
  cfg.num_workers = 1;
  const auto start = std::chrono::steady_clock::now();
  run.result = RunPipeline(run.synthetic.corpus, run.synthetic.g2p, cfg);
  run.seconds = Seconds(start);
  return run;
}

Outcome ToyTrends(const ToyRun &run) {
  const auto &m = run.result.metrics;
  const MetricsRow *init = nullptr, *refine = nullptr, *merge = nullptr, *final = nullptr;
  for (const MetricsRow &r : m) {
    if (r.step == "init") init = &r;
    if (r.step == "refine") refine = &r;
    if (r.step == "merge") merge = &r;
    if (r.step == "final") final = &r;
  }
  if (!init || !refine || !merge || !final) return {false, "missing metrics rows"};
  int match = 0;
  for (const auto &[id, truth] : run.synthetic.ground_truth) {
    const auto it = run.result.targets.find(id);
    if (it == run.result.targets.end()) continue;
    std::vector<std::string> got;
    for (const Unit &u : it->second) got.push_back(u.Marked());
    match += got == truth;
  }
  const double frac = static_cast<double>(match) / run.synthetic.ground_truth.size();
  std::ostringstream d;
  d << "avg|S(w)| init " << init->avg_variants << " -> refine " << refine->avg_variants
    << "; |V| refine " << refine->vocab_size << " -> merge " << merge->vocab_size
    << "; final avg|S(w)| " << final->avg_variants << "; ground truth match " << match << "/"
    << run.synthetic.ground_truth.size() << "; " << run.seconds << " s";
  const bool pass = refine->avg_variants < init->avg_variants &&
                    merge->vocab_size > refine->vocab_size && final->avg_variants < 1.5 &&
                    frac >= 0.9 && run.seconds < 1800.0;
  return {pass, d.str()};
}

std::string JoinWords(const std::vector<std::string> &words) {
  std::string s;
  for (const std::string &w : words) s += (s.empty() ? "" : " ") + w;
  return s;
}

Outcome Reconstruction(const ToyRun &run) {
  int target_ok = 0, target_total = 0;
  for (const Utterance &u : run.synthetic.corpus.utterances) {
    const auto it = run.result.targets.find(u.id);
    if (it == run.result.targets.end()) continue;
    ++target_total;
    target_ok += Detokenize(JoinMarked(it->second)) == JoinWords(u.words);
  }
  std::vector<std::string> lines;
  for (const Utterance &u : run.synthetic.corpus.utterances) lines.push_back(JoinWords(u.words));
  const SubwordNgramLM lm = TrainLM(run.result.final_table);
  int seg_ok = 0, seg_total = 0;
  for (SegmentMode mode : {SegmentMode::kBest, SegmentMode::kSample}) {
    TextSegmenter seg(run.result.final_table, lm, mode, 7);
    const auto out = SegmentCorpus(lines, seg);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      ++seg_total;
      seg_ok += Detokenize(out[i]) == lines[i];
    }
  }
  std::ostringstream d;
  d << "targets " << target_ok << "/" << target_total << ", segment_corpus " << seg_ok << "/"
    << seg_total;
  return {target_total == static_cast<int>(run.synthetic.corpus.utterances.size()) &&
              target_ok == target_total && seg_ok == seg_total,
          d.str()};
}

Outcome OpenVocabulary(const ToyRun &run) {
  const SegTable &table = run.result.final_table;
  const SubwordNgramLM lm = TrainLM(table);
  TextSegmenter seg(table, lm, SegmentMode::kBest, 1);
  const auto alphabet = run.synthetic.corpus.Alphabet();
  const std::vector<std::string> letters(alphabet.begin(), alphabet.end());
  std::mt19937_64 rng(808);
  int ok = 0, unseen = 0, dp_checked = 0, dp_ok = 0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    std::string word;
    const int len = std::uniform_int_distribution<int>(1, 10)(rng);
    for (int c = 0; c < len; ++c) word += letters[rng() % letters.size()];
    unseen += !table.Has(word);
    try {
      const std::vector<int> units = seg.SegmentWord(word);
      ok += Spell(table.vocab(), units) == word && table.vocab().unit(units.back()).word_end;
    } catch (const Error &) {
      continue;
    }
    if (len > 6) continue;
    ++dp_checked;
    const Vocabulary &vocab = table.vocab();
    double best = -std::numeric_limits<double>::infinity();
    for (const auto &split :
         testing::AllSplits(SplitChars(word), [&](const std::string &p, bool last) {
           return vocab.Contains(Unit{p, last});
         })) {
      std::vector<int> ids;
      for (std::size_t k = 0; k < split.size(); ++k)
        ids.push_back(vocab.IdOf(Unit{split[k], k + 1 == split.size()}));
      best = std::max(best, lm.ScoreSequence(ids));
    }
    dp_ok += std::abs(lm.ScoreSequence(BestLMSegmentation(word, lm)) - best) <= 1e-9;
  }
  std::ostringstream d;
  d << ok << "/" << n << " words segmented (" << unseen << " unseen); DP = exhaustive for "
    << dp_ok << "/" << dp_checked << " words of length <= 6";
  return {ok == n && dp_ok == dp_checked, d.str()};
}

Outcome Determinism(const ToyRun &first, const ToyRun &second) {
  const RunFiles a = Serialize(first.result), b = Serialize(second.result);
  std::ostringstream d;
  d << "vocab " << (a.vocab == b.vocab ? "same" : "differs") << ", segtable "
    << (a.segtable == b.segtable ? "same" : "differs") << ", targets "
    << (a.targets == b.targets ? "same" : "differs") << ", metrics "
    << (a.metrics == b.metrics ? "same" : "differs");
  return {a == b, d.str()};
}

}  // namespace
}  // namespace adsm

int main() {
  using namespace adsm;
  SetWarningsEnabled(false);
  int failed = 0;
  auto report = [&](int id, const std::string &name, const std::function<Outcome()> &check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name
              << "): " << o.detail << std::endl;
    failed += !o.pass;
  };
  report(1, "loss vs enumeration", LossOracle);
  report(2, "viterbi and sampling vs enumeration", ViterbiAndSampling);
  report(3, "end-to-end gradient check", GradientCheck);
  report(4, "single-variant reduction to plain CTC", ReductionCheck);
  report(5, "loss monotone in the variant set", Monotonicity);

  ToyRun first, second;
  bool toy_ok = true;
  std::string toy_error;
  try {
    first = RunToy();
    second = RunToy();
  } catch (const std::exception &e) {
    toy_ok = false;
    toy_error = e.what();
  }
  auto toy = [&](Outcome (*fn)(const ToyRun &)) {
    return [&, fn] { return toy_ok ? fn(first) : Outcome{false, "pipeline failed: " + toy_error}; };
  };
  report(6, "toy pipeline trends", toy(ToyTrends));
  report(7, "reconstruction", toy(Reconstruction));
  report(8, "open vocabulary", toy(OpenVocabulary));
  report(9, "determinism", [&] {
    return toy_ok ? Determinism(first, second) : Outcome{false, "pipeline failed: " + toy_error};
  });
  return failed == 0 ? 0 : 1;
}
