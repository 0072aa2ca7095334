// tools/adsm_main.cc

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

// adsm: acoustic data-driven subword modeling.
//
// Every stage reads and writes the text formats documented in README.md, so
// the pipeline can be run step by step or in one go with `adsm run`.
//
// Exit codes: 0 success, 1 unexpected failure, 2 bad input or usage,
// 3 numerical failure, 4 infeasible alignment, 5 cost guard exceeded.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "adsm/corpus.h"
#include "adsm/encoder.h"
#include "adsm/lexinit.h"
#include "adsm/pipeline.h"
#include "adsm/segtable.h"
#include "adsm/textseg.h"
#include "adsm/vocabulary.h"

namespace {

using namespace adsm;

enum ExitCode {
  kOk = 0,
  kFailure = 1,
  kBadInput = 2,
  kNumerical = 3,
  kInfeasible = 4,
  kCostGuard = 5,
};

std::ifstream OpenIn(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open " + path + " for reading");
  return is;
}

std::ofstream OpenOut(const std::string &path) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot open " + path + " for writing");
  return os;
}

Vocabulary LoadVocab(const std::string &path) {
  auto is = OpenIn(path);
  return ReadVocabulary(is);
}

SegTable LoadTable(const std::string &vocab_path, const std::string &table_path) {
  const Vocabulary vocab = LoadVocab(vocab_path);
  auto is = OpenIn(table_path);
  return ReadSegTable(is, vocab);
}

void SaveTable(const SegTable &table, const std::string &vocab_path,
               const std::string &table_path) {
  auto vs = OpenOut(vocab_path);
  WriteVocabulary(vs, table.vocab());
  auto ts = OpenOut(table_path);
  WriteSegTable(ts, table);
}

Corpus LoadFullCorpus(const std::string &feats, const std::string &text) {
  auto fs = OpenIn(feats);
  auto ts = OpenIn(text);
  return LoadCorpus(fs, ts);
}

// Transcripts only; feature matrices stay empty.
Corpus LoadTextCorpus(const std::string &text) {
  auto ts = OpenIn(text);
  Corpus corpus;
  for (auto &[id, words] : ReadTranscripts(ts)) {
    Utterance u;
    u.id = id;
    u.features.utt_id = id;
    u.words = std::move(words);
    corpus.utterances.push_back(std::move(u));
  }
  return corpus;
}

std::vector<G2PEntry> LoadG2P(const std::string &path) {
  auto is = OpenIn(path);
  G2PParseResult parsed = ParseG2P(is);
  if (parsed.entries.empty()) throw InputError(path + ": no usable G2P entries");
  return std::move(parsed.entries);
}

std::string Fixed(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Acoustic data-driven subword modeling"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file with default option values");
  app.fallthrough();

  // Shared hyper-parameters; these may appear after the subcommand name.
  PipelineConfig cfg;
  cfg.encoder.hidden = {64};
  std::vector<int> hidden = cfg.encoder.hidden;
  bool quiet = false;
  app.add_option("--lambda", cfg.prior_scale, "prior scale used for alignment")
      ->capture_default_str();
  app.add_option("--mu", cfg.mu, "variant weight threshold")->capture_default_str();
  app.add_option("--k", cfg.k, "word count below which only the best variant survives")
      ->capture_default_str();
  app.add_option("--merge-rounds", cfg.merge_rounds, "number of merge iterations")
      ->capture_default_str();
  app.add_option("--subsample", cfg.initial_subsample, "encoder subsampling factor")
      ->capture_default_str();
  app.add_option("--seed", cfg.train.seed, "random seed")->capture_default_str();
  app.add_option("--epochs", cfg.train.max_epochs, "maximum training epochs")
      ->capture_default_str();
  app.add_option("--lr", cfg.train.learning_rate, "initial learning rate")
      ->capture_default_str();
  app.add_option("--momentum", cfg.train.momentum, "momentum")->capture_default_str();
  app.add_option("--batch", cfg.train.batch_size, "utterances per update")
      ->capture_default_str();
  app.add_option("--hidden", hidden, "hidden layer sizes")->capture_default_str();
  app.add_option("--context", cfg.encoder.context, "frames of context on each side")
      ->capture_default_str();
  app.add_option("--workers", cfg.num_workers, "alignment threads")->capture_default_str();
  app.add_flag("--warm-start", cfg.warm_start, "reuse lower layers between stages");
  app.add_flag("--token-level", cfg.token_level_metrics,
               "average metrics over word tokens instead of types");
  app.add_flag("-q,--quiet", quiet, "suppress warnings");

  std::string g2p_path, feats_path, text_path, vocab_path, table_path, model_path;
  std::string align_path, out_vocab, out_table, out_model, out_align, out_targets;
  std::string out_dir, lm_path, save_lm, input_path = "-", output_path = "-", step = "report";
  std::string mode = "best";
  int order = 2;
  double add_k = 0.1;
  int num_words = 50, num_utts = 500;
  double noise = 0.1;

  auto *init = app.add_subcommand("init", "build the initial vocabulary and segmentation");
  init->add_option("--g2p", g2p_path, "G2P alignment file")->required();
  init->add_option("--text", text_path, "transcripts")->required();
  init->add_option("--out-vocab", out_vocab)->required();
  init->add_option("--out-segtable", out_table)->required();

  auto *train = app.add_subcommand("train", "train an encoder against a segmentation");
  train->add_option("--feats", feats_path, "feature file")->required();
  train->add_option("--text", text_path, "transcripts")->required();
  train->add_option("--vocab", vocab_path)->required();
  train->add_option("--segtable", table_path)->required();
  train->add_option("--out-model", out_model)->required();

  auto *align = app.add_subcommand("align", "prior-scaled forced alignment");
  align->add_option("--feats", feats_path, "feature file")->required();
  align->add_option("--text", text_path, "transcripts")->required();
  align->add_option("--vocab", vocab_path)->required();
  align->add_option("--segtable", table_path)->required();
  align->add_option("--model", model_path)->required();
  align->add_option("--out-alignment", out_align)->required();

  auto *refine = app.add_subcommand("refine", "keep variants with weight >= mu");
  refine->add_option("--alignment", align_path)->required();
  refine->add_option("--text", text_path, "transcripts")->required();
  refine->add_option("--out-vocab", out_vocab)->required();
  refine->add_option("--out-segtable", out_table)->required();

  auto *merge = app.add_subcommand("merge", "add single-adjacent merges of every variant");
  merge->add_option("--vocab", vocab_path)->required();
  merge->add_option("--segtable", table_path)->required();
  merge->add_option("--out-vocab", out_vocab)->required();
  merge->add_option("--out-segtable", out_table)->required();

  auto *finalize = app.add_subcommand("finalize", "final refinement and target sequences");
  finalize->add_option("--alignment", align_path)->required();
  finalize->add_option("--text", text_path, "transcripts")->required();
  finalize->add_option("--out-vocab", out_vocab)->required();
  finalize->add_option("--out-segtable", out_table)->required();
  finalize->add_option("--out-targets", out_targets)->required();

  auto *run = app.add_subcommand("run", "full pipeline");
  run->add_option("--feats", feats_path, "feature file")->required();
  run->add_option("--text", text_path, "transcripts")->required();
  run->add_option("--g2p", g2p_path, "G2P alignment file")->required();
  run->add_option("--out-dir", out_dir)->required();

  auto *segment = app.add_subcommand("segment-text", "segment plain text into subwords");
  segment->add_option("--vocab", vocab_path)->required();
  segment->add_option("--segtable", table_path)->required();
  segment->add_option("--lm", lm_path, "subword LM; trained from the table when absent");
  segment->add_option("--save-lm", save_lm, "write the LM used");
  segment->add_option("--mode", mode, "best or sample")
      ->check(CLI::IsMember({"best", "sample"}))
      ->capture_default_str();
  segment->add_option("--order", order, "LM order")->capture_default_str();
  segment->add_option("--add-k", add_k, "LM add-k constant")->capture_default_str();
  segment->add_option("--input", input_path, "text file, - for stdin")->capture_default_str();
  segment->add_option("--output", output_path, "output file, - for stdout")
      ->capture_default_str();

  auto *gen = app.add_subcommand("gen-synthetic", "write a synthetic toy corpus");
  gen->add_option("--words", num_words, "lexicon size")->capture_default_str();
  gen->add_option("--utterances", num_utts, "number of utterances")->capture_default_str();
  gen->add_option("--noise", noise, "emission noise standard deviation")
      ->capture_default_str();
  gen->add_option("--out-dir", out_dir)->required();

  auto *report = app.add_subcommand("report", "metrics row for a segmentation");
  report->add_option("--vocab", vocab_path)->required();
  report->add_option("--segtable", table_path)->required();
  report->add_option("--text", text_path, "transcripts")->required();
  report->add_option("--step", step, "step label")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    SetWarningsEnabled(!quiet);
    cfg.encoder.hidden = hidden;
    cfg.Validate();

    if (*init) {
      const SegTable table = InitialTable(LoadTextCorpus(text_path), LoadG2P(g2p_path));
      SaveTable(table, out_vocab, out_table);
    } else if (*train) {
      const Corpus corpus = LoadFullCorpus(feats_path, text_path);
      if (corpus.utterances.empty()) throw InputError("no utterances");
      const SegTable table = LoadTable(vocab_path, table_path);
      EncoderConfig enc = cfg.encoder;
      enc.input_dim = corpus.utterances.front().features.Dim();
      enc.num_classes = table.vocab().NumClasses();
      enc.subsample_factor = cfg.initial_subsample;
      const TrainResult trained = Train(MakeTrainExamples(corpus, table),
                                        EncoderParams::Init(enc, cfg.train.seed), cfg.train);
      for (std::size_t e = 0; e < trained.train_loss.size(); ++e)
        std::cerr << "epoch " << e + 1 << " train " << trained.train_loss[e] << " heldout "
                  << trained.heldout_loss[e] << '\n';
      auto os = OpenOut(out_model);
      WriteParams(os, trained.params);
    } else if (*align) {
      const Corpus corpus = LoadFullCorpus(feats_path, text_path);
      const SegTable table = LoadTable(vocab_path, table_path);
      auto ms = OpenIn(model_path);
      const EncoderParams params = ReadParams(ms);
      const AlignOutput out = AlignCorpus(params, corpus, table, cfg.prior_scale,
                                          cfg.num_workers);
      auto os = OpenOut(out_align);
      WriteAlignments(os, out.alignment);
    } else if (*refine || *finalize) {
      const Corpus corpus = LoadTextCorpus(text_path);
      auto as = OpenIn(align_path);
      const CorpusAlignment alignment = ReadAlignments(as);
      const VariantStats stats = CollectStats(alignment, corpus);
      const auto alphabet = corpus.Alphabet();
      if (*refine) {
        SaveTable(Refine(stats, cfg.mu, alphabet), out_vocab, out_table);
      } else {
        const FinalizeOutput out = Finalize(stats, alignment, corpus, cfg.mu, cfg.k, alphabet);
        SaveTable(out.table, out_vocab, out_table);
        auto os = OpenOut(out_targets);
        WriteTargets(os, out.targets);
      }
    } else if (*merge) {
      const SegTable merged = MergeSubwords(LoadTable(vocab_path, table_path));
      SaveTable(merged, out_vocab, out_table);
    } else if (*run) {
      const Corpus corpus = LoadFullCorpus(feats_path, text_path);
      const PipelineResult result = RunPipeline(corpus, LoadG2P(g2p_path), cfg);
      const std::filesystem::path dir(out_dir);
      std::filesystem::create_directories(dir);
      SaveTable(result.initial, dir / "init.vocab", dir / "init.segtable");
      SaveTable(result.final_table, dir / "final.vocab", dir / "final.segtable");
      auto ts = OpenOut(dir / "targets.txt");
      WriteTargets(ts, result.targets);
      auto as = OpenOut(dir / "alignment.txt");
      WriteAlignments(as, result.last_alignment);
      auto ps = OpenOut(dir / "model.txt");
      WriteParams(ps, result.last_params);
      auto ms = OpenOut(dir / "metrics.tsv");
      WriteMetrics(ms, result.metrics);
      WriteMetrics(std::cout, result.metrics);
    } else if (*segment) {
      const SegTable table = LoadTable(vocab_path, table_path);
      SubwordNgramLM lm;
      if (!lm_path.empty()) {
        auto ls = OpenIn(lm_path);
        lm = ReadLM(ls);
      } else {
        lm = TrainLM(table, order, add_k);
      }
      if (!save_lm.empty()) {
        auto os = OpenOut(save_lm);
        WriteLM(os, lm);
      }
      TextSegmenter segmenter(table, lm,
                              mode == "best" ? SegmentMode::kBest : SegmentMode::kSample,
                              cfg.train.seed);
      std::ifstream file_in;
      std::ofstream file_out;
      if (input_path != "-") file_in = OpenIn(input_path);
      if (output_path != "-") file_out = OpenOut(output_path);
      std::istream &in = input_path == "-" ? std::cin : file_in;
      std::ostream &out = output_path == "-" ? std::cout : file_out;
      std::string line;
      while (std::getline(in, line)) out << segmenter.SegmentLine(line) << '\n';
    } else if (*gen) {
      SyntheticSpec spec;
      spec.lexicon = MakeToyLexicon(num_words, cfg.train.seed);
      spec.num_utterances = num_utts;
      spec.noise = noise;
      spec.seed = cfg.train.seed;
      const SyntheticCorpus syn = GenerateSynthetic(spec);
      const std::filesystem::path dir(out_dir);
      std::filesystem::create_directories(dir);
      std::vector<FeatureMatrix> feats;
      for (const Utterance &u : syn.corpus.utterances) feats.push_back(u.features);
      auto fs = OpenOut(dir / "feats.txt");
      WriteFeatures(fs, feats);
      auto ts = OpenOut(dir / "text.txt");
      WriteTranscripts(ts, syn.corpus);
      auto gs = OpenOut(dir / "g2p.txt");
      WriteG2P(gs, syn.g2p);
      auto rs = OpenOut(dir / "truth.txt");
      WriteGroundTruth(rs, syn.ground_truth);
    } else if (*report) {
      const Corpus corpus = LoadTextCorpus(text_path);
      const SegTable table = LoadTable(vocab_path, table_path);
      const MetricsRow row = ComputeMetrics(step, table, corpus.WordTypes(),
                                            corpus.WordCounts(), cfg.token_level_metrics);
      std::cout << "step\t|V|\tavg|S(w)|\tavg_len\n"
                << row.step << '\t' << row.vocab_size << '\t' << Fixed(row.avg_variants)
                << '\t' << Fixed(row.avg_length) << '\n';
    }
    return kOk;
  } catch (const InputError &e) {
    std::cerr << "adsm: input error: " << e.what() << '\n';
    return kBadInput;
  } catch (const NumericalError &e) {
    std::cerr << "adsm: numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const InfeasibleError &e) {
    std::cerr << "adsm: infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const CostGuardError &e) {
    std::cerr << "adsm: cost guard: " << e.what() << '\n';
    return kCostGuard;
  } catch (const std::exception &e) {
    std::cerr << "adsm: " << e.what() << '\n';
    return kFailure;
  }
}
