// src/corpus.cc

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

#include "adsm/corpus.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace adsm {

namespace {

std::string LineError(const std::string &what, int line_no, const std::string &msg) {
  return what + " line " + std::to_string(line_no) + ": " + msg;
}

double ParseDouble(const std::string &token, int line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception &) {
    throw InputError(LineError("feature file", line_no, "bad number '" + token + "'"));
  }
}

int ParsePositive(const std::string &token, const std::string &what, int line_no) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(token, &used);
    if (used != token.size() || v < 1) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception &) {
    throw InputError(LineError(what, line_no, "expected a positive integer, got '" + token + "'"));
  }
}

}  // namespace

std::set<std::string> Corpus::Alphabet() const {
  std::set<std::string> chars;
  for (const Utterance &u : utterances)
    for (const std::string &w : u.words)
      for (std::string &c : SplitChars(w)) chars.insert(std::move(c));
  return chars;
}

std::map<std::string, int> Corpus::WordCounts() const {
  std::map<std::string, int> counts;
  for (const Utterance &u : utterances)
    for (const std::string &w : u.words) ++counts[w];
  return counts;
}

std::vector<std::string> Corpus::WordTypes() const {
  std::vector<std::string> types;
  std::set<std::string> seen;
  for (const Utterance &u : utterances)
    for (const std::string &w : u.words)
      if (seen.insert(w).second) types.push_back(w);
  return types;
}

std::vector<FeatureMatrix> ReadFeatures(std::istream &is) {
  std::vector<FeatureMatrix> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto header = SplitWhitespace(line);
    if (header.empty()) continue;
    if (header.size() != 3)
      throw InputError(LineError("feature file", line_no, "expected header 'utt_id T D'"));
    FeatureMatrix f;
    f.utt_id = header[0];
    const int T = ParsePositive(header[1], "feature file", line_no);
    const int D = ParsePositive(header[2], "feature file", line_no);
    f.values.resize(T, D);
    for (int t = 0; t < T; ++t) {
      if (!std::getline(is, line))
        throw InputError("feature file: utterance " + f.utt_id + " is truncated");
      ++line_no;
      const auto fields = SplitWhitespace(line);
      if (static_cast<int>(fields.size()) != D)
        throw InputError(LineError("feature file", line_no,
                                   "expected " + std::to_string(D) + " values"));
      for (int d = 0; d < D; ++d) f.values(t, d) = ParseDouble(fields[d], line_no);
    }
    out.push_back(std::move(f));
  }
  return out;
}

void WriteFeatures(std::ostream &os, const std::vector<FeatureMatrix> &features) {
  const auto old_precision = os.precision(17);
  for (const FeatureMatrix &f : features) {
    os << f.utt_id << ' ' << f.NumFrames() << ' ' << f.Dim() << '\n';
    for (int t = 0; t < f.NumFrames(); ++t) {
      for (int d = 0; d < f.Dim(); ++d) os << (d ? " " : "") << f.values(t, d);
      os << '\n';
    }
  }
  os.precision(old_precision);
}

std::vector<std::pair<std::string, std::vector<std::string>>> ReadTranscripts(
    std::istream &is) {
  std::vector<std::pair<std::string, std::vector<std::string>>> rows;
  std::set<std::string> ids;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw InputError(LineError("transcript file", line_no, "expected utt_id<TAB>words"));
    std::string id = line.substr(0, tab);
    auto words = SplitWhitespace(line.substr(tab + 1));
    if (words.empty())
      throw InputError(LineError("transcript file", line_no, "empty transcription"));
    for (const std::string &w : words) {
      if (w.find(kWordEndMarker) != std::string::npos)
        throw InputError(LineError("transcript file", line_no,
                                   "word \"" + w + "\" contains the word-end marker"));
      SplitChars(w);
    }
    if (!ids.insert(id).second)
      throw InputError(LineError("transcript file", line_no, "duplicate utt_id " + id));
    rows.emplace_back(std::move(id), std::move(words));
  }
  return rows;
}

void WriteTranscripts(std::ostream &os, const Corpus &corpus) {
  for (const Utterance &u : corpus.utterances) {
    os << u.id << '\t';
    for (std::size_t i = 0; i < u.words.size(); ++i) os << (i ? " " : "") << u.words[i];
    os << '\n';
  }
}

Corpus LoadCorpus(std::istream &features, std::istream &transcripts) {
  std::vector<FeatureMatrix> feats = ReadFeatures(features);
  auto rows = ReadTranscripts(transcripts);
  std::map<std::string, std::vector<std::string>> words_of;
  for (auto &[id, words] : rows) words_of.emplace(id, std::move(words));

  Corpus corpus;
  std::set<std::string> seen;
  for (FeatureMatrix &f : feats) {
    if (!seen.insert(f.utt_id).second)
      throw InputError("feature file: duplicate utt_id " + f.utt_id);
    auto it = words_of.find(f.utt_id);
    if (it == words_of.end()) {
      Warn("utterance " + f.utt_id + " has features but no transcript; excluded");
      continue;
    }
    Utterance u;
    u.id = f.utt_id;
    u.features = std::move(f);
    u.words = std::move(it->second);
    corpus.utterances.push_back(std::move(u));
  }
  for (const auto &[id, words] : words_of)
    if (!seen.count(id)) Warn("utterance " + id + " has a transcript but no features; excluded");
  return corpus;
}

std::map<std::string, std::vector<std::string>> MakeToyLexicon(int num_words,
                                                               std::uint64_t seed) {
  if (num_words < 1) throw InputError("toy lexicon needs at least one word");
  const std::string letters = "abcdefghijkl";
  std::mt19937_64 rng(seed);
  auto random_string = [&](int min_len, int max_len) {
    const int len = std::uniform_int_distribution<int>(min_len, max_len)(rng);
    std::string s;
    for (int i = 0; i < len; ++i)
      s += letters[std::uniform_int_distribution<std::size_t>(0, letters.size() - 1)(rng)];
    return s;
  };
  // Inventory sizes scale with the lexicon so that every unit is reused.
  // Each word ends in its own (internal, final) pair, so keep twice as many
  // such pairs as words.
  const int num_final = std::max(3, num_words / 5);
  int num_internal = std::max(4, num_words / 4);
  while (num_internal * num_final < 2 * num_words) ++num_internal;
  // No unit spelling contains another, so the generating segmentation is the
  // only one made of inventory units alone.
  std::set<std::string> internal_set, final_set, spellings;
  auto add_unit = [&](std::set<std::string> &target, int min_len, int max_len) {
    for (int guard = 0; guard < 100000; ++guard) {
      const std::string s = random_string(min_len, max_len);
      const bool clash = std::any_of(spellings.begin(), spellings.end(), [&](const std::string &o) {
        return o.find(s) != std::string::npos || s.find(o) != std::string::npos;
      });
      if (clash) continue;
      spellings.insert(s);
      target.insert(s);
      return;
    }
    throw InputError("could not build a toy unit inventory for " + std::to_string(num_words) +
                     " words");
  };
  while (static_cast<int>(internal_set.size()) < num_internal) add_unit(internal_set, 1, 3);
  while (static_cast<int>(final_set.size()) < num_final) add_unit(final_set, 1, 2);
  std::vector<std::string> internal(internal_set.begin(), internal_set.end());
  std::vector<std::string> finals(final_set.begin(), final_set.end());

  std::map<std::string, std::vector<std::string>> fallback;
  int fallback_single_use = std::numeric_limits<int>::max();
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::map<std::string, std::vector<std::string>> lexicon;
    std::map<std::string, int> uses;
    // Adjacent unit pairs are never shared between words, so any merged unit
    // is specific to a single word while the generating units are shared.
    std::set<std::pair<std::string, std::string>> pairs;
    std::vector<std::string> internal_pool, final_pool;
    auto draw = [&](std::vector<std::string> &pool, const std::vector<std::string> &source) {
      if (pool.empty()) {
        pool = source;
        std::shuffle(pool.begin(), pool.end(), rng);
      }
      std::string u = pool.back();
      pool.pop_back();
      return u;
    };
    int guard = 0;
    while (static_cast<int>(lexicon.size()) < num_words && guard++ < 100 * num_words) {
      const int num_prefix = std::uniform_int_distribution<int>(1, 2)(rng);
      std::vector<std::string> seg;
      std::string word;
      for (int i = 0; i < num_prefix; ++i) {
        seg.push_back(draw(internal_pool, internal));
        word += seg.back();
      }
      const std::string last = draw(final_pool, finals);
      seg.push_back(last + kWordEndMarker);
      word += last;
      if (lexicon.count(word)) continue;
      bool fresh = true;
      for (std::size_t i = 0; i + 1 < seg.size(); ++i)
        fresh = fresh && !pairs.count({seg[i], seg[i + 1]});
      if (!fresh) continue;
      for (std::size_t i = 0; i + 1 < seg.size(); ++i) pairs.insert({seg[i], seg[i + 1]});
      for (const std::string &u : seg) ++uses[u];
      lexicon.emplace(word, std::move(seg));
    }
    if (static_cast<int>(lexicon.size()) != num_words) continue;
    const int single_use = static_cast<int>(std::count_if(
        uses.begin(), uses.end(), [](const auto &kv) { return kv.second < 2; }));
    if (single_use == 0) return lexicon;
    // Very small lexicons cannot reuse every unit; keep the closest attempt.
    if (single_use < fallback_single_use) {
      fallback_single_use = single_use;
      fallback = std::move(lexicon);
    }
  }
  if (!fallback.empty()) return fallback;
  throw InputError("could not build a toy lexicon of " + std::to_string(num_words) + " words");
}

SyntheticCorpus GenerateSynthetic(const SyntheticSpec &spec) {
  if (spec.lexicon.empty()) throw InputError("synthetic corpus needs a lexicon");
  if (spec.feature_dim < 1 || spec.frames_per_unit < 1 || spec.num_utterances < 1 ||
      spec.min_words < 1 || spec.max_words < spec.min_words || !(spec.noise >= 0.0))
    throw InputError("degenerate synthetic corpus specification");

  SyntheticCorpus out;
  std::mt19937_64 rng(spec.seed);

  // Validate the generating segmentations and collect the unit inventory.
  std::set<std::string> units;
  for (const auto &[word, seg] : spec.lexicon) {
    if (seg.empty()) throw InputError("empty segmentation for \"" + word + "\"");
    std::string spelled;
    G2PEntry entry;
    entry.word = word;
    for (std::size_t i = 0; i < seg.size(); ++i) {
      const Unit u = Unit::FromMarked(seg[i]);
      if (u.word_end != (i + 1 == seg.size()))
        throw InputError("segmentation of \"" + word + "\" misplaces the word-end marker");
      spelled += u.spelling;
      units.insert(seg[i]);
      entry.pairs.push_back({u.spelling, std::nullopt});
    }
    if (spelled != word)
      throw InputError("segmentation does not spell \"" + word + "\"");
    out.g2p.push_back(std::move(entry));
  }

  // Prototypes: given ones first, the rest standard normal in unit order.
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (const std::string &u : units) {
    auto it = spec.prototypes.find(u);
    std::vector<double> proto;
    if (it != spec.prototypes.end()) {
      proto = it->second;
      if (static_cast<int>(proto.size()) != spec.feature_dim)
        throw InputError("prototype of " + u + " has the wrong dimension");
    } else {
      proto.resize(spec.feature_dim);
      for (double &v : proto) v = gauss(rng);
    }
    out.prototypes.emplace(u, std::move(proto));
  }
  for (auto a = out.prototypes.begin(); a != out.prototypes.end(); ++a)
    for (auto b = std::next(a); b != out.prototypes.end(); ++b)
      if (a->second == b->second)
        throw InputError("units " + a->first + " and " + b->first + " share a prototype");

  // Phoneme labels for the G2P view: one symbol per distinct chunk.
  std::map<std::string, int> phone_id;
  for (G2PEntry &entry : out.g2p)
    for (G2PPair &p : entry.pairs)
      p.phoneme = "P" + std::to_string(phone_id.emplace(p.chunk, phone_id.size()).first->second);

  std::vector<std::string> words;
  for (const auto &kv : spec.lexicon) words.push_back(kv.first);
  std::vector<std::size_t> rank(words.size());
  for (std::size_t i = 0; i < rank.size(); ++i) rank[i] = i;
  std::shuffle(rank.begin(), rank.end(), rng);
  std::vector<double> weights(words.size());
  for (std::size_t i = 0; i < words.size(); ++i)
    weights[i] = 1.0 / std::pow(static_cast<double>(rank[i] + 1), spec.zipf);
  std::discrete_distribution<std::size_t> pick_word(weights.begin(), weights.end());
  std::uniform_int_distribution<int> pick_len(spec.min_words, spec.max_words);
  std::normal_distribution<double> noise(0.0, spec.noise > 0.0 ? spec.noise : 1.0);

  for (int n = 0; n < spec.num_utterances; ++n) {
    std::ostringstream id;
    id << "utt" << std::setw(5) << std::setfill('0') << n;
    Utterance utt;
    utt.id = id.str();
    std::vector<std::string> truth;
    const int len = pick_len(rng);
    for (int i = 0; i < len; ++i) {
      const std::string &w = words[pick_word(rng)];
      utt.words.push_back(w);
      for (const std::string &u : spec.lexicon.at(w)) truth.push_back(u);
    }
    const int T = static_cast<int>(truth.size()) * spec.frames_per_unit;
    utt.features.utt_id = utt.id;
    utt.features.values.resize(T, spec.feature_dim);
    int t = 0;
    for (const std::string &u : truth) {
      const std::vector<double> &proto = out.prototypes.at(u);
      for (int k = 0; k < spec.frames_per_unit; ++k, ++t)
        for (int d = 0; d < spec.feature_dim; ++d)
          utt.features.values(t, d) = proto[d] + (spec.noise > 0.0 ? noise(rng) : 0.0);
    }
    out.ground_truth.emplace(utt.id, std::move(truth));
    out.corpus.utterances.push_back(std::move(utt));
  }
  return out;
}

void WriteGroundTruth(std::ostream &os,
                      const std::map<std::string, std::vector<std::string>> &truth) {
  for (const auto &[id, units] : truth) {
    os << id << '\t';
    for (std::size_t i = 0; i < units.size(); ++i) os << (i ? " " : "") << units[i];
    os << '\n';
  }
}

std::map<std::string, std::vector<std::string>> ReadGroundTruth(std::istream &is) {
  std::map<std::string, std::vector<std::string>> truth;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw InputError(LineError("ground-truth file", line_no, "expected utt_id<TAB>units"));
    if (!truth.emplace(line.substr(0, tab), SplitWhitespace(line.substr(tab + 1))).second)
      throw InputError(LineError("ground-truth file", line_no, "duplicate utt_id"));
  }
  return truth;
}

void WriteG2P(std::ostream &os, const std::vector<G2PEntry> &entries) {
  for (const G2PEntry &e : entries) {
    os << e.word << '\t';
    for (std::size_t i = 0; i < e.pairs.size(); ++i)
      os << (i ? " " : "") << e.pairs[i].chunk << '}'
         << (e.pairs[i].phoneme ? *e.pairs[i].phoneme : std::string("_"));
    os << '\n';
  }
}

}  // namespace adsm
