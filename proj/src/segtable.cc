// src/segtable.cc

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

#include "adsm/segtable.h"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace adsm {

namespace {

std::vector<Unit> UnitsOf(const Vocabulary &vocab, const std::vector<int> &ids) {
  std::vector<Unit> out;
  for (int id : ids) out.push_back(vocab.unit(id));
  return out;
}

}  // namespace

std::string Spell(const Vocabulary &vocab, const std::vector<int> &units) {
  std::string out;
  for (int id : units) out += vocab.unit(id).spelling;
  return out;
}

std::string MarkedString(const Vocabulary &vocab, const std::vector<int> &units) {
  std::string out;
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (i > 0) out += ' ';
    out += vocab.Label(units[i]);
  }
  return out;
}

SegTable SegTable::ImplicitAll(Vocabulary vocab) {
  SegTable table;
  table.mode_ = SegMode::kImplicitAll;
  table.vocab_ = std::move(vocab);
  return table;
}

SegTable SegTable::Explicit(Vocabulary vocab,
                            std::map<std::string, std::vector<Variant>> entries) {
  SegTable table;
  table.mode_ = SegMode::kExplicit;
  table.vocab_ = std::move(vocab);
  table.entries_ = std::move(entries);
  table.Validate();
  return table;
}

const std::vector<Variant> &SegTable::VariantsOf(const std::string &word) const {
  auto it = entries_.find(word);
  if (it == entries_.end()) throw InputError("no segmentation entry for \"" + word + "\"");
  return it->second;
}

void SegTable::Validate() const {
  if (mode_ == SegMode::kImplicitAll) {
    if (!entries_.empty()) throw InputError("implicit table must not store variants");
    return;
  }
  for (const auto &[word, variants] : entries_) {
    if (variants.empty()) throw InputError("word \"" + word + "\" has no variants");
    double total = 0.0;
    for (const Variant &v : variants) {
      if (v.units.empty()) throw InputError("empty variant for \"" + word + "\"");
      for (std::size_t i = 0; i < v.units.size(); ++i) {
        if (v.units[i] < 0 || v.units[i] >= vocab_.Size())
          throw InputError("variant of \"" + word + "\" uses an unknown unit id");
        const bool last = i + 1 == v.units.size();
        if (vocab_.unit(v.units[i]).word_end != last)
          throw InputError("variant \"" + MarkedString(vocab_, v.units) + "\" of \"" +
                           word + "\" misplaces the word-end flag");
      }
      if (Spell(vocab_, v.units) != word)
        throw InputError("variant \"" + MarkedString(vocab_, v.units) +
                         "\" does not spell \"" + word + "\"");
      if (!(v.weight > 0.0 && v.weight <= 1.0 + 1e-12))
        throw InputError("variant weight outside (0,1] for \"" + word + "\"");
      total += v.weight;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw InputError("weights of \"" + word + "\" sum to " + std::to_string(total));
  }
}

const Variant &BestVariant(const SegTable &table, const std::string &word) {
  const auto &variants = table.VariantsOf(word);
  const Vocabulary &vocab = table.vocab();
  const Variant *best = &variants.front();
  for (const Variant &v : variants) {
    if (v.weight > best->weight ||
        (v.weight == best->weight && UnitsOf(vocab, v.units) < UnitsOf(vocab, best->units)))
      best = &v;
  }
  return *best;
}

void WriteSegTable(std::ostream &os, const SegTable &table) {
  if (table.mode() == SegMode::kImplicitAll) {
    os << "#adsm-segtable v1 implicit_all\n";
    return;
  }
  os << "#adsm-segtable v1 explicit\n";
  std::ostringstream weight;
  for (const auto &[word, variants] : table.entries()) {
    for (const Variant &v : variants) {
      weight.str("");
      weight << std::setprecision(17) << v.weight;
      os << word << '\t' << MarkedString(table.vocab(), v.units) << '\t' << weight.str()
         << '\n';
    }
  }
}

SegTable ReadSegTable(std::istream &is, const Vocabulary &vocab) {
  std::string line;
  if (!std::getline(is, line)) throw InputError("segtable file: empty");
  if (line == "#adsm-segtable v1 implicit_all") {
    while (std::getline(is, line)) {
      if (!line.empty()) throw InputError("implicit segtable file must have no variants");
    }
    return SegTable::ImplicitAll(vocab);
  }
  if (line != "#adsm-segtable v1 explicit")
    throw InputError("segtable file: unknown header '" + line + "'");
  std::map<std::string, std::vector<Variant>> entries;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = SplitOn(line, '\t');
    if (fields.size() != 3)
      throw InputError("segtable line " + std::to_string(line_no) +
                       ": expected word<TAB>units<TAB>weight");
    Variant v;
    for (const std::string &tok : SplitWhitespace(fields[1]))
      v.units.push_back(vocab.IdOf(Unit::FromMarked(tok)));
    try {
      std::size_t used = 0;
      v.weight = std::stod(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception &) {
      throw InputError("segtable line " + std::to_string(line_no) + ": bad weight");
    }
    entries[fields[0]].push_back(std::move(v));
  }
  return SegTable::Explicit(vocab, std::move(entries));
}

}  // namespace adsm
