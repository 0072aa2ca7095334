// src/pipeline.cc

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

#include "adsm/pipeline.h"

#include <algorithm>
#include <exception>
#include <iomanip>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "adsm/lexinit.h"

namespace adsm {

namespace {

// Runs fn(i) for i in [0, n) on up to `workers` threads.  Each index is
// handled by exactly one thread; the first exception is rethrown.
template <class Fn>
void ParallelFor(int n, int workers, Fn &&fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (std::thread &t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

UnitSeq ToUnits(const Vocabulary &vocab, const std::vector<int> &ids) {
  UnitSeq out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(vocab.unit(id));
  return out;
}

std::vector<int> ToIds(const Vocabulary &vocab, const UnitSeq &units) {
  std::vector<int> out;
  out.reserve(units.size());
  for (const Unit &u : units) out.push_back(vocab.IdOf(u));
  return out;
}

UnitSeq ParseMarkedSeq(const std::string &text) {
  UnitSeq out;
  for (const std::string &tok : SplitWhitespace(text)) out.push_back(Unit::FromMarked(tok));
  return out;
}

// Builds an explicit table from marked variants; the vocabulary is every
// unit used plus the single characters of `alphabet`.
SegTable BuildTable(const std::map<std::string, std::vector<std::pair<UnitSeq, double>>> &words,
                    const std::set<std::string> &alphabet,
                    const std::vector<Unit> &extra_units = {}) {
  std::vector<Unit> units = SingleCharUnits(alphabet);
  units.insert(units.end(), extra_units.begin(), extra_units.end());
  for (const auto &[word, variants] : words)
    for (const auto &[seq, weight] : variants) units.insert(units.end(), seq.begin(), seq.end());
  Vocabulary vocab = Vocabulary::FromUnits(std::move(units));
  std::map<std::string, std::vector<Variant>> entries;
  for (const auto &[word, variants] : words) {
    std::vector<Variant> &out = entries[word];
    for (const auto &[seq, weight] : variants) out.push_back({ToIds(vocab, seq), weight});
  }
  return SegTable::Explicit(std::move(vocab), std::move(entries));
}

// Mean and count of the segmentations of a word under `table`.
std::pair<double, double> VariantCountAndMeanLength(const SegTable &table,
                                                    const std::string &word) {
  if (table.mode() == SegMode::kImplicitAll) {
    const WordSegDag dag = BuildWordDagImplicit(word, table.vocab());
    std::vector<double> count(dag.num_nodes, 0.0), length_sum(dag.num_nodes, 0.0);
    count[0] = 1.0;
    for (const LatticeArc &arc : dag.arcs) {
      count[arc.to] += count[arc.from];
      length_sum[arc.to] += length_sum[arc.from] + count[arc.from];
    }
    return {count[dag.sink()], length_sum[dag.sink()] / count[dag.sink()]};
  }
  if (!table.Has(word))
    return {1.0, static_cast<double>(SplitChars(word).size())};
  const auto &variants = table.VariantsOf(word);
  double total = 0.0;
  for (const Variant &v : variants) total += static_cast<double>(v.units.size());
  return {static_cast<double>(variants.size()), total / static_cast<double>(variants.size())};
}

}  // namespace

std::string JoinMarked(const UnitSeq &units) {
  std::string out;
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (i) out += ' ';
    out += units[i].Marked();
  }
  return out;
}

std::string SpellUnits(const UnitSeq &units) {
  std::string out;
  for (const Unit &u : units) out += u.spelling;
  return out;
}

void VariantStats::Add(const std::string &word, const UnitSeq &variant, int count) {
  counts[word][variant] += count;
  word_total[word] += count;
}

std::vector<std::pair<UnitSeq, double>> VariantStats::Weighted(const std::string &word) const {
  std::vector<std::pair<UnitSeq, double>> out;
  const auto it = counts.find(word);
  if (it == counts.end()) return out;
  const double total = static_cast<double>(word_total.at(word));
  for (const auto &[variant, count] : it->second)
    out.emplace_back(variant, static_cast<double>(count) / total);
  std::stable_sort(out.begin(), out.end(),
                   [](const auto &a, const auto &b) { return a.second > b.second; });
  return out;
}

std::vector<UnitSeq> SplitIntoWords(const UnitSeq &collapsed,
                                    const std::vector<std::string> &words) {
  std::vector<UnitSeq> out;
  UnitSeq current;
  for (const Unit &u : collapsed) {
    current.push_back(u);
    if (u.word_end) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty() || out.size() != words.size())
    throw InputError("alignment \"" + JoinMarked(collapsed) + "\" does not split into " +
                     std::to_string(words.size()) + " words");
  for (std::size_t i = 0; i < words.size(); ++i)
    if (SpellUnits(out[i]) != words[i])
      throw InputError("aligned units \"" + JoinMarked(out[i]) + "\" do not spell \"" +
                       words[i] + "\"");
  return out;
}

void WriteAlignments(std::ostream &os, const CorpusAlignment &alignment) {
  os << "#adsm-alignment v1 subsample=" << alignment.subsample_factor << '\n';
  for (const UttAlignment &utt : alignment.utterances) {
    os << utt.utt_id << '\t';
    for (std::size_t i = 0; i < utt.units.size(); ++i) {
      os << (i ? " " : "") << utt.units[i].Marked() << '[' << utt.spans[i].first << ':'
         << utt.spans[i].second << ']';
    }
    os << '\n';
  }
  for (const std::string &id : alignment.skipped) os << "#skipped\t" << id << '\n';
}

CorpusAlignment ReadAlignments(std::istream &is) {
  std::string line;
  const std::string prefix = "#adsm-alignment v1 subsample=";
  if (!std::getline(is, line) || line.rfind(prefix, 0) != 0)
    throw InputError("alignment file: missing '" + prefix + "' header");
  CorpusAlignment out;
  try {
    out.subsample_factor = std::stoi(line.substr(prefix.size()));
  } catch (const std::exception &) {
    throw InputError("alignment file: bad subsample factor");
  }
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = SplitOn(line, '\t');
    if (fields.size() != 2)
      throw InputError("alignment file line " + std::to_string(line_no) + ": expected 2 fields");
    if (fields[0] == "#skipped") {
      out.skipped.push_back(fields[1]);
      continue;
    }
    UttAlignment utt;
    utt.utt_id = fields[0];
    for (const std::string &tok : SplitWhitespace(fields[1])) {
      const auto open = tok.rfind('[');
      const auto colon = tok.rfind(':');
      if (open == std::string::npos || colon == std::string::npos || colon < open ||
          tok.back() != ']')
        throw InputError("alignment file line " + std::to_string(line_no) + ": bad token '" +
                         tok + "'");
      utt.units.push_back(Unit::FromMarked(tok.substr(0, open)));
      try {
        utt.spans.emplace_back(std::stoi(tok.substr(open + 1, colon - open - 1)),
                               std::stoi(tok.substr(colon + 1, tok.size() - colon - 2)));
      } catch (const std::exception &) {
        throw InputError("alignment file line " + std::to_string(line_no) + ": bad span");
      }
    }
    out.utterances.push_back(std::move(utt));
  }
  return out;
}

VariantStats CollectStats(const CorpusAlignment &alignment, const Corpus &corpus) {
  std::map<std::string, const std::vector<std::string> *> words_of;
  for (const Utterance &u : corpus.utterances) words_of.emplace(u.id, &u.words);
  VariantStats stats;
  for (const UttAlignment &utt : alignment.utterances) {
    const auto it = words_of.find(utt.utt_id);
    if (it == words_of.end()) continue;
    const auto pieces = SplitIntoWords(utt.units, *it->second);
    for (std::size_t i = 0; i < pieces.size(); ++i) stats.Add((*it->second)[i], pieces[i]);
  }
  return stats;
}

std::vector<TrainExample> MakeTrainExamples(const Corpus &corpus, const SegTable &table) {
  std::vector<TrainExample> out(corpus.utterances.size());
  for (std::size_t i = 0; i < corpus.utterances.size(); ++i) {
    const Utterance &u = corpus.utterances[i];
    out[i].features = &u.features;
    out[i].graph = ExpandCtc(BuildUttLattice(u.words, table), table.vocab().NumClasses());
  }
  return out;
}

AlignOutput AlignCorpus(const EncoderParams &params, const Corpus &corpus,
                        const SegTable &table, double prior_scale, int num_workers) {
  const int n = static_cast<int>(corpus.utterances.size());
  const std::vector<TrainExample> examples = MakeTrainExamples(corpus, table);
  std::vector<PosteriorMatrix> posteriors(n);
  ParallelFor(n, num_workers,
              [&](int i) { posteriors[i] = Encode(corpus.utterances[i].features, params); });

  AlignOutput out;
  out.prior = EstimatePrior(posteriors);
  out.alignment.subsample_factor = params.config().subsample_factor;

  std::vector<std::optional<Alignment>> results(n);
  ParallelFor(n, num_workers, [&](int i) {
    if (posteriors[i].NumFrames() < examples[i].graph.MinFrames()) return;
    results[i] = Viterbi(examples[i].graph, posteriors[i], out.prior, prior_scale);
  });

  const Vocabulary &vocab = table.vocab();
  for (int i = 0; i < n; ++i) {
    const Utterance &u = corpus.utterances[i];
    if (!results[i]) {
      out.alignment.skipped.push_back(u.id);
      continue;
    }
    UttAlignment utt;
    utt.utt_id = u.id;
    utt.units = ToUnits(vocab, results[i]->collapsed);
    utt.spans = results[i]->spans;
    const auto pieces = SplitIntoWords(utt.units, u.words);
    for (std::size_t w = 0; w < pieces.size(); ++w) out.stats.Add(u.words[w], pieces[w]);
    out.alignment.utterances.push_back(std::move(utt));
  }
  if (!out.alignment.skipped.empty())
    Warn(std::to_string(out.alignment.skipped.size()) +
         " utterances too short to align were skipped");
  return out;
}

SegTable Refine(const VariantStats &stats, double mu, const std::set<std::string> &alphabet) {
  if (stats.empty()) throw InputError("refinement needs non-empty variant statistics");
  if (!(mu >= 0.0 && mu < 1.0)) throw InputError("mu must lie in [0, 1)");
  std::map<std::string, std::vector<std::pair<UnitSeq, double>>> kept;
  for (const auto &[word, total] : stats.word_total) {
    const auto weighted = stats.Weighted(word);
    std::vector<std::pair<UnitSeq, double>> survivors;
    double mass = 0.0;
    for (const auto &[seq, weight] : weighted) {
      if (weight >= mu) {
        survivors.emplace_back(seq, weight);
        mass += weight;
      }
    }
    if (survivors.empty()) {
      survivors.emplace_back(weighted.front().first, 1.0);
      mass = 1.0;
    }
    for (auto &s : survivors) s.second /= mass;
    kept.emplace(word, std::move(survivors));
  }
  return BuildTable(kept, alphabet);
}

SegTable MergeSubwords(const SegTable &table) {
  if (table.mode() != SegMode::kExplicit)
    throw InputError("subword merging needs an explicit segmentation table");
  const Vocabulary &vocab = table.vocab();
  std::map<std::string, std::vector<std::pair<UnitSeq, double>>> merged;
  for (const auto &[word, variants] : table.entries()) {
    std::vector<UnitSeq> seqs;
    std::set<UnitSeq> seen;
    for (const Variant &v : variants) {
      UnitSeq seq = ToUnits(vocab, v.units);
      if (seen.insert(seq).second) seqs.push_back(std::move(seq));
    }
    const std::size_t num_original = seqs.size();
    for (std::size_t k = 0; k < num_original; ++k) {
      const UnitSeq original = seqs[k];
      for (std::size_t i = 0; i + 1 < original.size(); ++i) {
        UnitSeq next(original.begin(), original.begin() + static_cast<std::ptrdiff_t>(i));
        next.push_back({original[i].spelling + original[i + 1].spelling, original[i + 1].word_end});
        next.insert(next.end(), original.begin() + static_cast<std::ptrdiff_t>(i) + 2,
                    original.end());
        if (seen.insert(next).second) seqs.push_back(std::move(next));
      }
    }
    const double weight = 1.0 / static_cast<double>(seqs.size());
    auto &out = merged[word];
    for (UnitSeq &seq : seqs) out.emplace_back(std::move(seq), weight);
  }
  return BuildTable(merged, {}, vocab.units());
}

FinalizeOutput Finalize(const VariantStats &stats, const CorpusAlignment &alignment,
                        const Corpus &corpus, double mu, int k,
                        const std::set<std::string> &alphabet) {
  if (k < 1) throw InputError("k must be >= 1");
  const SegTable refined = Refine(stats, mu, alphabet);
  std::map<std::string, std::vector<std::pair<UnitSeq, double>>> final_words;
  for (const auto &[word, variants] : refined.entries()) {
    auto &out = final_words[word];
    if (stats.word_total.at(word) < k) {
      out.emplace_back(ToUnits(refined.vocab(), BestVariant(refined, word).units), 1.0);
    } else {
      for (const Variant &v : variants) out.emplace_back(ToUnits(refined.vocab(), v.units), v.weight);
    }
  }
  FinalizeOutput result;
  result.table = BuildTable(final_words, alphabet);

  std::map<std::string, const std::vector<std::string> *> words_of;
  for (const Utterance &u : corpus.utterances) words_of.emplace(u.id, &u.words);
  for (const UttAlignment &utt : alignment.utterances) {
    const auto it = words_of.find(utt.utt_id);
    if (it == words_of.end()) continue;
    const auto pieces = SplitIntoWords(utt.units, *it->second);
    UnitSeq target;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      const std::string &word = (*it->second)[i];
      const auto &survivors = final_words.at(word);
      const bool kept = std::any_of(survivors.begin(), survivors.end(),
                                    [&](const auto &s) { return s.first == pieces[i]; });
      if (kept) {
        target.insert(target.end(), pieces[i].begin(), pieces[i].end());
      } else {
        const UnitSeq best =
            ToUnits(result.table.vocab(), BestVariant(result.table, word).units);
        target.insert(target.end(), best.begin(), best.end());
      }
    }
    result.targets.emplace(utt.utt_id, std::move(target));
  }
  return result;
}

void WriteTargets(std::ostream &os, const std::map<std::string, UnitSeq> &targets) {
  for (const auto &[id, units] : targets) os << id << '\t' << JoinMarked(units) << '\n';
}

std::map<std::string, UnitSeq> ReadTargets(std::istream &is) {
  std::map<std::string, UnitSeq> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = SplitOn(line, '\t');
    if (fields.size() != 2)
      throw InputError("target file line " + std::to_string(line_no) + ": expected 2 fields");
    if (!out.emplace(fields[0], ParseMarkedSeq(fields[1])).second)
      throw InputError("target file line " + std::to_string(line_no) + ": duplicate utt_id");
  }
  return out;
}

MetricsRow ComputeMetrics(const std::string &step, const SegTable &table,
                          const std::vector<std::string> &words,
                          const std::map<std::string, int> &counts, bool token_level) {
  std::vector<std::string> types = words;
  if (types.empty())
    for (const auto &kv : table.entries()) types.push_back(kv.first);
  if (types.empty()) throw InputError("metrics need at least one word");
  MetricsRow row;
  row.step = step;
  row.vocab_size = table.vocab().Size();
  double mass = 0.0;
  for (const std::string &w : types) {
    double weight = 1.0;
    if (token_level) {
      const auto it = counts.find(w);
      weight = it == counts.end() ? 0.0 : static_cast<double>(it->second);
    }
    const auto [count, mean_len] = VariantCountAndMeanLength(table, w);
    row.avg_variants += weight * count;
    row.avg_length += weight * mean_len;
    mass += weight;
  }
  if (mass <= 0.0) throw InputError("metrics: no word carries weight");
  row.avg_variants /= mass;
  row.avg_length /= mass;
  return row;
}

void WriteMetrics(std::ostream &os, const std::vector<MetricsRow> &rows) {
  os << "step\t|V|\tavg|S(w)|\tavg_len\n";
  std::ostringstream line;
  line << std::fixed << std::setprecision(4);
  for (const MetricsRow &r : rows) {
    line.str("");
    line << r.step << '\t' << r.vocab_size << '\t' << r.avg_variants << '\t' << r.avg_length
         << '\n';
    os << line.str();
  }
}

void PipelineConfig::Validate() const {
  if (!(prior_scale >= 0.0 && prior_scale <= 1.0)) throw InputError("lambda must lie in [0, 1]");
  if (!(mu >= 0.0 && mu < 1.0)) throw InputError("mu must lie in [0, 1)");
  if (k < 1) throw InputError("k must be >= 1");
  if (merge_rounds < 0) throw InputError("merge rounds must be >= 0");
  if (initial_subsample < 1 || (initial_subsample & (initial_subsample - 1)) != 0)
    throw InputError("subsample factor must be a power of two");
  if (num_workers < 1) throw InputError("num_workers must be >= 1");
  train.Validate();
}

SegTable InitialTable(const Corpus &corpus, const std::vector<G2PEntry> &g2p) {
  // G2P chunks plus every corpus character in both forms.
  std::vector<Unit> units = BuildInitialVocab(g2p).units();
  for (Unit &u : SingleCharUnits(corpus.Alphabet())) units.push_back(std::move(u));
  return MakeInitialSegTable(corpus.WordTypes(), Vocabulary::FromUnits(std::move(units)));
}

PipelineResult RunPipeline(const Corpus &corpus, const std::vector<G2PEntry> &g2p,
                           const PipelineConfig &config) {
  config.Validate();
  if (corpus.utterances.empty()) throw InputError("empty corpus");
  PipelineResult result;
  const std::vector<std::string> word_types = corpus.WordTypes();
  const std::map<std::string, int> word_counts = corpus.WordCounts();

  result.initial = InitialTable(corpus, g2p);
  const std::set<std::string> alphabet = result.initial.vocab().Alphabet();

  auto metrics = [&](const std::string &step, const SegTable &table) {
    result.metrics.push_back(ComputeMetrics(step, table, word_types, word_counts,
                                            config.token_level_metrics));
  };
  metrics("init", result.initial);

  std::optional<EncoderParams> previous;
  int stage = 0;
  auto train_and_align = [&](const SegTable &table, int factor) {
    EncoderConfig enc = config.encoder;
    enc.input_dim = corpus.utterances.front().features.Dim();
    enc.num_classes = table.vocab().NumClasses();
    enc.subsample_factor = factor;
    const std::uint64_t seed = config.train.seed + static_cast<std::uint64_t>(stage);
    EncoderParams init = EncoderParams::Init(enc, seed);
    if (config.warm_start && previous &&
        previous->layers().size() == init.layers().size()) {
      // Reuse every lower layer whose shape still matches; the output layer
      // is always fresh.
      for (std::size_t i = 0; i + 1 < init.layers().size(); ++i) {
        const DenseLayer &old_layer = previous->layers()[i];
        if (old_layer.weight.rows() == init.layers()[i].weight.rows() &&
            old_layer.weight.cols() == init.layers()[i].weight.cols())
          init.layers()[i] = old_layer;
      }
    }
    TrainConfig tc = config.train;
    tc.seed = seed;
    const std::vector<TrainExample> examples = MakeTrainExamples(corpus, table);
    TrainResult trained = Train(examples, init, tc);
    result.loss_curves.push_back(trained.train_loss);
    previous = trained.params;
    ++stage;
    return AlignCorpus(trained.params, corpus, table, config.prior_scale, config.num_workers);
  };

  int factor = config.initial_subsample;
  AlignOutput aligned = train_and_align(result.initial, factor);
  SegTable current;
  for (int round = 1; round <= config.merge_rounds; ++round) {
    const std::string suffix = config.merge_rounds > 1 ? "." + std::to_string(round) : "";
    current = Refine(aligned.stats, config.mu, alphabet);
    metrics("refine" + suffix, current);
    current = MergeSubwords(current);
    metrics("merge" + suffix, current);
    factor *= 2;
    aligned = train_and_align(current, factor);
  }

  FinalizeOutput fin = Finalize(aligned.stats, aligned.alignment, corpus, config.mu, config.k,
                                alphabet);
  metrics("final", fin.table);
  result.final_table = std::move(fin.table);
  result.targets = std::move(fin.targets);
  result.last_alignment = std::move(aligned.alignment);
  result.last_params = *previous;
  return result;
}

}  // namespace adsm
