// python/bindings.cc

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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "adsm/corpus.h"
#include "adsm/ctc.h"
#include "adsm/lattice.h"
#include "adsm/lexinit.h"
#include "adsm/pipeline.h"
#include "adsm/segtable.h"
#include "adsm/textseg.h"
#include "adsm/vocabulary.h"

namespace py = pybind11;
using namespace adsm;

namespace {

using MarkedVariants = std::vector<std::pair<std::vector<std::string>, double>>;

std::vector<std::string> Marked(const Vocabulary &vocab, const std::vector<int> &ids) {
  std::vector<std::string> out;
  for (int id : ids) out.push_back(vocab.Label(id));
  return out;
}

std::vector<std::string> Marked(const UnitSeq &units) {
  std::vector<std::string> out;
  for (const Unit &u : units) out.push_back(u.Marked());
  return out;
}

py::dict AlignmentDict(const Alignment &a) {
  py::dict d;
  d["frame_labels"] = a.frame_labels;
  d["collapsed"] = a.collapsed;
  d["spans"] = a.spans;
  d["score"] = a.score;
  return d;
}

Corpus ToCorpus(const std::vector<std::tuple<std::string, Matrix, std::vector<std::string>>> &utts) {
  Corpus corpus;
  for (const auto &[id, feats, words] : utts) {
    Utterance u;
    u.id = id;
    u.features = FeatureMatrix{id, feats};
    u.words = words;
    corpus.utterances.push_back(std::move(u));
  }
  return corpus;
}

std::string TableText(const SegTable &table) {
  std::ostringstream os;
  WriteSegTable(os, table);
  return os.str();
}

}  // namespace

PYBIND11_MODULE(_adsm, m) {
  m.doc() = "Acoustic data-driven subword modeling";
  m.attr("__version__") = "0.1.0";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());
  py::register_exception<CostGuardError>(m, "CostGuardError", base.ptr());

  py::class_<Vocabulary>(m, "Vocabulary")
      .def(py::init([](const std::vector<std::string> &marked) {
             std::vector<Unit> units;
             for (const std::string &s : marked) units.push_back(Unit::FromMarked(s));
             return Vocabulary::FromUnits(std::move(units));
           }),
           py::arg("units"), "Canonical vocabulary from marked units such as 'ab' or 'le_'.")
      .def("__len__", &Vocabulary::Size)
      .def_property_readonly("blank_id", &Vocabulary::BlankId)
      .def_property_readonly("num_classes", &Vocabulary::NumClasses)
      .def_property_readonly("units", [](const Vocabulary &v) {
        std::vector<std::string> out;
        for (const Unit &u : v.units()) out.push_back(u.Marked());
        return out;
      })
      .def("label", &Vocabulary::Label)
      .def("id_of", [](const Vocabulary &v, const std::string &marked) {
        return v.IdOf(Unit::FromMarked(marked));
      })
      .def("alphabet", &Vocabulary::Alphabet)
      .def("__eq__", &Vocabulary::operator==);

  py::class_<SegTable>(m, "SegTable")
      .def_static("implicit_all", &SegTable::ImplicitAll, py::arg("vocab"))
      .def_static(
          "explicit",
          [](const Vocabulary &vocab, const std::map<std::string, MarkedVariants> &entries) {
            std::map<std::string, std::vector<Variant>> converted;
            for (const auto &[word, variants] : entries)
              for (const auto &[units, weight] : variants) {
                Variant v;
                for (const std::string &s : units) v.units.push_back(vocab.IdOf(Unit::FromMarked(s)));
                v.weight = weight;
                converted[word].push_back(std::move(v));
              }
            return SegTable::Explicit(vocab, std::move(converted));
          },
          py::arg("vocab"), py::arg("entries"))
      .def_property_readonly("vocab", &SegTable::vocab)
      .def_property_readonly("is_explicit",
                             [](const SegTable &t) { return t.mode() == SegMode::kExplicit; })
      .def_property_readonly("words",
                             [](const SegTable &t) {
                               std::vector<std::string> out;
                               for (const auto &kv : t.entries()) out.push_back(kv.first);
                               return out;
                             })
      .def("variants",
           [](const SegTable &t, const std::string &word) {
             MarkedVariants out;
             for (const Variant &v : t.VariantsOf(word))
               out.emplace_back(Marked(t.vocab(), v.units), v.weight);
             return out;
           })
      .def("to_text", &TableText);

  py::class_<CtcGraph>(m, "CtcGraph")
      .def_property_readonly("num_states", &CtcGraph::NumStates)
      .def_property_readonly("num_classes", &CtcGraph::NumClasses)
      .def_property_readonly("blank_id", &CtcGraph::BlankId)
      .def_property_readonly("min_frames", &CtcGraph::MinFrames)
      .def("label", &CtcGraph::label)
      .def("is_initial", &CtcGraph::IsInitial)
      .def("is_final", &CtcGraph::IsFinal)
      .def("succs", &CtcGraph::succs)
      .def("accepts", &CtcGraph::Accepts);

  m.def(
      "ctc_graph",
      [](const std::vector<std::string> &words, const SegTable &table) {
        return ExpandCtc(BuildUttLattice(words, table), table.vocab().NumClasses());
      },
      py::arg("words"), py::arg("table"), "CTC alignment graph of a transcription.");

  m.def("collapse", [](const std::vector<int> &labels, int blank) {
    return Collapse(labels, blank);
  }, py::arg("frame_labels"), py::arg("blank"));

  m.def("log_softmax", [](const Matrix &scores) {
    return PosteriorMatrix::FromScores(scores).log_probs();
  }, py::arg("scores"));

  m.def(
      "log_loss",
      [](const CtcGraph &graph, const Matrix &log_probs) {
        const LossResult r = LogLoss(graph, PosteriorMatrix(log_probs));
        py::dict d;
        d["loss"] = r.loss;
        d["occupancy"] = r.occupancy;
        return d;
      },
      py::arg("graph"), py::arg("log_probs"),
      "Negative log of the total probability of all accepted frame paths.");

  m.def(
      "score_gradient",
      [](const CtcGraph &graph, const Matrix &log_probs) {
        const PosteriorMatrix p(log_probs);
        return ScoreGradient(p, LogLoss(graph, p).occupancy);
      },
      py::arg("graph"), py::arg("log_probs"));

  m.def(
      "viterbi",
      [](const CtcGraph &graph, const Matrix &log_probs, std::optional<Vector> prior,
         double prior_scale) {
        const PosteriorMatrix p(log_probs);
        if (!prior) return AlignmentDict(Viterbi(graph, p));
        return AlignmentDict(Viterbi(graph, p, *prior, prior_scale));
      },
      py::arg("graph"), py::arg("log_probs"), py::arg("prior") = py::none(),
      py::arg("prior_scale") = 0.0);

  m.def(
      "estimate_prior",
      [](const std::vector<Matrix> &log_probs) {
        std::vector<PosteriorMatrix> p;
        for (const Matrix &lp : log_probs) p.emplace_back(lp);
        return EstimatePrior(p);
      },
      py::arg("log_probs"));

  m.def(
      "sample_path",
      [](const CtcGraph &graph, const Matrix &log_probs, double temperature,
         std::uint64_t seed) {
        return AlignmentDict(SamplePath(graph, PosteriorMatrix(log_probs), temperature, seed));
      },
      py::arg("graph"), py::arg("log_probs"), py::arg("temperature") = 1.0,
      py::arg("seed") = 0);

  m.def(
      "enumerate_oracle",
      [](const CtcGraph &graph, const Matrix &log_probs) {
        const OracleResult r = EnumerateOracle(graph, PosteriorMatrix(log_probs));
        py::dict d;
        d["loss"] = r.loss;
        d["best_path"] = r.best_path;
        std::vector<std::pair<std::vector<int>, double>> paths;
        for (const EnumeratedPath &p : r.paths) paths.emplace_back(p.frame_labels, p.posterior);
        d["paths"] = paths;
        return d;
      },
      py::arg("graph"), py::arg("log_probs"), "Brute-force reference for tiny problems.");

  m.def("count_segmentations", &CountSegmentations, py::arg("word"), py::arg("vocab"));
  m.def("merge_subwords", &MergeSubwords, py::arg("table"));

  py::class_<SubwordNgramLM>(m, "SubwordNgramLM")
      .def_property_readonly("order", &SubwordNgramLM::order)
      .def("score", [](const SubwordNgramLM &lm, const std::vector<std::string> &units) {
        std::vector<int> ids;
        for (const std::string &s : units) ids.push_back(lm.vocab().IdOf(Unit::FromMarked(s)));
        return lm.ScoreSequence(ids);
      });
  m.def("train_lm", &TrainLM, py::arg("table"), py::arg("order") = 2, py::arg("add_k") = 0.1);

  py::class_<TextSegmenter>(m, "TextSegmenter")
      .def(py::init([](const SegTable &table, const SubwordNgramLM &lm, const std::string &mode,
                       std::uint64_t seed) {
             if (mode != "best" && mode != "sample")
               throw InputError("mode must be 'best' or 'sample'");
             return TextSegmenter(table, lm,
                                  mode == "best" ? SegmentMode::kBest : SegmentMode::kSample,
                                  seed);
           }),
           py::arg("table"), py::arg("lm"), py::arg("mode") = "best", py::arg("seed") = 0)
      .def("segment_word",
           [](TextSegmenter &s, const std::string &word) {
             return Marked(s.table().vocab(), s.SegmentWord(word));
           })
      .def("segment_line", &TextSegmenter::SegmentLine);
  m.def("detokenize", &Detokenize, py::arg("segmented"));

  m.def(
      "toy_corpus",
      [](int num_words, int num_utterances, double noise, std::uint64_t seed) {
        SyntheticSpec spec;
        spec.lexicon = MakeToyLexicon(num_words, seed);
        spec.num_utterances = num_utterances;
        spec.noise = noise;
        spec.seed = seed;
        const SyntheticCorpus syn = GenerateSynthetic(spec);
        std::vector<std::tuple<std::string, Matrix, std::vector<std::string>>> utts;
        for (const Utterance &u : syn.corpus.utterances)
          utts.emplace_back(u.id, u.features.values, u.words);
        std::ostringstream g2p;
        WriteG2P(g2p, syn.g2p);
        py::dict d;
        d["utterances"] = utts;
        d["g2p"] = g2p.str();
        d["ground_truth"] = syn.ground_truth;
        return d;
      },
      py::arg("num_words") = 50, py::arg("num_utterances") = 500, py::arg("noise") = 0.1,
      py::arg("seed") = 1, "Synthetic corpus: list of (utt_id, features, words), G2P text.");

  m.def(
      "run_pipeline",
      [](const std::vector<std::tuple<std::string, Matrix, std::vector<std::string>>> &utts,
         const std::string &g2p_text, double prior_scale, double mu, int k, int merge_rounds,
         int subsample, std::uint64_t seed, int epochs, int num_workers) {
        const Corpus corpus = ToCorpus(utts);
        std::istringstream g2p_in(g2p_text);
        const G2PParseResult g2p = ParseG2P(g2p_in);
        PipelineConfig cfg;
        cfg.prior_scale = prior_scale;
        cfg.mu = mu;
        cfg.k = k;
        cfg.merge_rounds = merge_rounds;
        cfg.initial_subsample = subsample;
        cfg.train.seed = seed;
        cfg.train.max_epochs = epochs;
        cfg.num_workers = num_workers;
        PipelineResult r;
        {
          py::gil_scoped_release release;
          r = RunPipeline(corpus, g2p.entries, cfg);
        }
        py::dict d;
        std::map<std::string, std::vector<std::string>> targets;
        for (const auto &[id, units] : r.targets) targets[id] = Marked(units);
        d["targets"] = targets;
        d["final_table"] = r.final_table;
        std::vector<std::tuple<std::string, int, double, double>> metrics;
        for (const MetricsRow &row : r.metrics)
          metrics.emplace_back(row.step, row.vocab_size, row.avg_variants, row.avg_length);
        d["metrics"] = metrics;
        return d;
      },
      py::arg("utterances"), py::arg("g2p"), py::arg("prior_scale") = 0.3, py::arg("mu") = 0.05,
      py::arg("k") = 20, py::arg("merge_rounds") = 1, py::arg("subsample") = 2,
      py::arg("seed") = 1, py::arg("epochs") = 20, py::arg("num_workers") = 1);
}
