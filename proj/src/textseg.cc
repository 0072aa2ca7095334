// src/textseg.cc

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

#include "adsm/textseg.h"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace adsm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Partial {
  double score = kNegInf;
  std::vector<int> units;
  std::vector<std::string> marked;
};

// Higher score, then fewer units, then lexicographically smaller marked
// sequence.
bool Better(const Partial &a, const Partial &b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.units.size() != b.units.size()) return a.units.size() < b.units.size();
  return a.marked < b.marked;
}

std::string HistoryKey(const std::vector<int> &history, const Vocabulary &vocab, int begin) {
  std::string key;
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (i) key += ' ';
    key += history[i] == begin ? "<w>" : vocab.Label(history[i]);
  }
  return key;
}

}  // namespace

std::vector<int> SubwordNgramLM::Context(const std::vector<int> &history) const {
  const std::size_t width = static_cast<std::size_t>(order_ - 1);
  std::vector<int> ctx(width, BeginId());
  const std::size_t take = std::min(width, history.size());
  std::copy(history.end() - static_cast<std::ptrdiff_t>(take), history.end(),
            ctx.end() - static_cast<std::ptrdiff_t>(take));
  return ctx;
}

double SubwordNgramLM::LogProb(const std::vector<int> &history, int event) const {
  if (event < 0 || event > EndId()) throw InputError("LM event out of range");
  const std::vector<int> ctx = Context(history);
  double count = 0.0, total = 0.0;
  if (const auto it = counts_.find(ctx); it != counts_.end()) {
    if (const auto e = it->second.find(event); e != it->second.end()) count = e->second;
    total = totals_.at(ctx);
  }
  return std::log((count + add_k_) / (total + add_k_ * NumEvents()));
}

double SubwordNgramLM::ScoreSequence(const std::vector<int> &units) const {
  double score = 0.0;
  std::vector<int> history;
  for (int u : units) {
    score += LogProb(history, u);
    history.push_back(u);
  }
  return score + LogProb(history, EndId());
}

SubwordNgramLM TrainLM(const SegTable &table, int order, double add_k) {
  if (table.mode() != SegMode::kExplicit || table.entries().empty())
    throw InputError("LM training needs a non-empty explicit segmentation table");
  if (order < 1) throw InputError("LM order must be >= 1");
  if (!(add_k > 0.0)) throw InputError("add-k constant must be positive");
  SubwordNgramLM lm;
  lm.order_ = order;
  lm.add_k_ = add_k;
  lm.vocab_ = table.vocab();
  for (const auto &[word, variants] : table.entries()) {
    for (const Variant &v : variants) {
      std::vector<int> history;
      for (int u : v.units) {
        const auto ctx = lm.Context(history);
        lm.counts_[ctx][u] += v.weight;
        lm.totals_[ctx] += v.weight;
        history.push_back(u);
      }
      const auto ctx = lm.Context(history);
      lm.counts_[ctx][lm.EndId()] += v.weight;
      lm.totals_[ctx] += v.weight;
    }
  }
  return lm;
}

void WriteLM(std::ostream &os, const SubwordNgramLM &lm) {
  std::ostringstream num;
  num << std::setprecision(17);
  os << "#adsm-lm v1\n";
  os << "order " << lm.order() << '\n';
  num << lm.add_k();
  os << "add_k " << num.str() << '\n';
  os << "\\units\n";
  for (const Unit &u : lm.vocab().units()) os << u.Marked() << '\n';
  os << "\\counts\n";
  for (const auto &[ctx, events] : lm.counts()) {
    const std::string key = HistoryKey(ctx, lm.vocab(), lm.BeginId());
    for (const auto &[event, count] : events) {
      num.str("");
      num << count;
      os << key << '\t' << (event == lm.EndId() ? "</w>" : lm.vocab().Label(event)) << '\t'
         << num.str() << '\n';
    }
  }
  os << "\\end\n";
}

SubwordNgramLM ReadLM(std::istream &is) {
  std::string line;
  auto next = [&](const char *what) {
    if (!std::getline(is, line)) throw InputError(std::string("LM file: missing ") + what);
  };
  next("header");
  if (line != "#adsm-lm v1") throw InputError("LM file: missing '#adsm-lm v1' header");
  SubwordNgramLM lm;
  next("order");
  if (line.rfind("order ", 0) != 0) throw InputError("LM file: expected 'order'");
  lm.order_ = std::stoi(line.substr(6));
  next("add_k");
  if (line.rfind("add_k ", 0) != 0) throw InputError("LM file: expected 'add_k'");
  lm.add_k_ = std::stod(line.substr(6));
  if (lm.order_ < 1 || !(lm.add_k_ > 0.0)) throw InputError("LM file: bad order or add_k");
  next("\\units");
  if (line != "\\units") throw InputError("LM file: expected '\\units'");
  std::vector<Unit> units;
  while (true) {
    next("\\counts");
    if (line == "\\counts") break;
    units.push_back(Unit::FromMarked(line));
  }
  for (const Unit &u : units) lm.vocab_.Add(u);
  auto symbol = [&](const std::string &tok) {
    if (tok == "<w>") return lm.BeginId();
    if (tok == "</w>") return lm.EndId();
    return lm.vocab_.IdOf(Unit::FromMarked(tok));
  };
  while (true) {
    next("\\end");
    if (line == "\\end") break;
    const auto fields = SplitOn(line, '\t');
    if (fields.size() != 3) throw InputError("LM file: bad count line '" + line + "'");
    std::vector<int> ctx;
    for (const std::string &tok : SplitWhitespace(fields[0])) ctx.push_back(symbol(tok));
    if (static_cast<int>(ctx.size()) != lm.order_ - 1)
      throw InputError("LM file: history length does not match the order");
    const double count = std::stod(fields[2]);
    lm.counts_[ctx][symbol(fields[1])] += count;
    lm.totals_[ctx] += count;
  }
  return lm;
}

std::vector<int> BestLMSegmentation(const std::string &word, const SubwordNgramLM &lm) {
  const Vocabulary &vocab = lm.vocab();
  const auto chars = SplitChars(word);
  const int n = static_cast<int>(chars.size());
  if (n == 0) throw InputError("cannot segment an empty word");
  const auto alphabet = vocab.Alphabet();
  for (const std::string &c : chars)
    if (!alphabet.count(c))
      throw InputError("word \"" + word + "\" uses character '" + c + "' outside the alphabet");

  // best[pos][context]: best partial segmentation of chars[0, pos) whose
  // last order-1 units form `context`.
  const std::size_t width = static_cast<std::size_t>(lm.order() - 1);
  std::vector<std::map<std::vector<int>, Partial>> best(n);
  best[0][std::vector<int>(width, lm.BeginId())] = Partial{0.0, {}, {}};
  Partial final_best;
  for (int pos = 0; pos < n; ++pos) {
    for (const auto &[ctx, partial] : best[pos]) {
      std::string piece;
      for (int to = pos + 1; to <= n && to - pos <= vocab.MaxUnitChars(); ++to) {
        piece += chars[to - 1];
        const auto id = vocab.Find({piece, to == n});
        if (!id) continue;
        Partial cand = partial;
        cand.score += lm.LogProb(partial.units, *id);
        cand.units.push_back(*id);
        cand.marked.push_back(vocab.Label(*id));
        if (to == n) {
          cand.score += lm.LogProb(cand.units, lm.EndId());
          if (final_best.score == kNegInf || Better(cand, final_best)) final_best = std::move(cand);
          continue;
        }
        std::vector<int> next_ctx(ctx.begin(), ctx.end());
        if (width > 0) {
          next_ctx.erase(next_ctx.begin());
          next_ctx.push_back(*id);
        }
        auto [it, inserted] = best[to].try_emplace(next_ctx, cand);
        if (!inserted && Better(cand, it->second)) it->second = std::move(cand);
      }
    }
  }
  if (final_best.units.empty()) throw InputError("no segmentation of \"" + word + "\"");
  return final_best.units;
}

TextSegmenter::TextSegmenter(SegTable table, SubwordNgramLM lm, SegmentMode mode,
                             std::uint64_t seed)
    : table_(std::move(table)), lm_(std::move(lm)), mode_(mode), rng_(seed) {
  if (table_.mode() != SegMode::kExplicit)
    throw InputError("text segmentation needs an explicit segmentation table");
  if (!(lm_.vocab() == table_.vocab()))
    throw InputError("LM vocabulary differs from the segmentation table vocabulary");
}

std::vector<int> TextSegmenter::SegmentWord(const std::string &word) {
  if (!table_.Has(word)) return BestLMSegmentation(word, lm_);
  if (mode_ == SegmentMode::kBest) return BestVariant(table_, word).units;
  const auto &variants = table_.VariantsOf(word);
  double total = 0.0;
  for (const Variant &v : variants) total += v.weight;
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_) * total;
  double cumulative = 0.0;
  for (const Variant &v : variants) {
    cumulative += v.weight;
    if (u < cumulative) return v.units;
  }
  return variants.back().units;
}

std::string TextSegmenter::SegmentLine(const std::string &line) {
  std::string out;
  for (const std::string &word : SplitWhitespace(line)) {
    if (!out.empty()) out += ' ';
    out += MarkedString(table_.vocab(), SegmentWord(word));
  }
  return out;
}

std::vector<std::string> SegmentCorpus(const std::vector<std::string> &lines,
                                       TextSegmenter &segmenter) {
  std::vector<std::string> out;
  out.reserve(lines.size());
  for (const std::string &line : lines) out.push_back(segmenter.SegmentLine(line));
  return out;
}

std::string Detokenize(const std::string &segmented) {
  std::string out, word;
  for (const std::string &tok : SplitWhitespace(segmented)) {
    const Unit u = Unit::FromMarked(tok);
    word += u.spelling;
    if (u.word_end) {
      if (!out.empty()) out += ' ';
      out += word;
      word.clear();
    }
  }
  if (!word.empty()) {
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

}  // namespace adsm
