// src/vocabulary.cc

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

#include "adsm/vocabulary.h"

#include <algorithm>
#include <iterator>
#include <istream>
#include <ostream>

namespace adsm {

Vocabulary Vocabulary::FromUnits(std::vector<Unit> units) {
  std::sort(units.begin(), units.end());
  units.erase(std::unique(units.begin(), units.end()), units.end());
  Vocabulary vocab;
  for (const Unit &u : units) vocab.Add(u);
  return vocab;
}

int Vocabulary::Add(const Unit &unit) {
  if (unit.spelling.empty())
    throw InputError("unit with empty spelling");
  if (unit.spelling.find(kWordEndMarker) != std::string::npos ||
      unit.spelling.find_first_of(" \t\n\r") != std::string::npos)
    throw InputError("unit spelling \"" + unit.spelling +
                     "\" contains whitespace or the word-end marker");
  auto [it, inserted] = id_of_.emplace(unit, Size());
  if (inserted) {
    units_.push_back(unit);
    max_unit_chars_ = std::max(max_unit_chars_,
                               static_cast<int>(SplitChars(unit.spelling).size()));
  }
  return it->second;
}

std::optional<int> Vocabulary::Find(const Unit &unit) const {
  auto it = id_of_.find(unit);
  if (it == id_of_.end()) return std::nullopt;
  return it->second;
}

int Vocabulary::IdOf(const Unit &unit) const {
  auto id = Find(unit);
  if (!id) throw InputError("unit \"" + unit.Marked() + "\" not in vocabulary");
  return *id;
}

std::string Vocabulary::Label(int id) const {
  if (id == BlankId()) return "<b>";
  return unit(id).Marked();
}

std::set<std::string> Vocabulary::Alphabet() const {
  std::set<std::string> plain, final;
  for (const Unit &u : units_) {
    if (SplitChars(u.spelling).size() != 1) continue;
    (u.word_end ? final : plain).insert(u.spelling);
  }
  std::set<std::string> both;
  std::set_intersection(plain.begin(), plain.end(), final.begin(), final.end(),
                        std::inserter(both, both.end()));
  return both;
}

std::vector<Unit> SingleCharUnits(const std::set<std::string> &alphabet) {
  std::vector<Unit> units;
  for (const std::string &c : alphabet) {
    units.push_back({c, false});
    units.push_back({c, true});
  }
  return units;
}

void WriteVocabulary(std::ostream &os, const Vocabulary &vocab) {
  os << "#adsm-vocab v1\n";
  for (int i = 0; i < vocab.Size(); ++i) {
    const Unit &u = vocab.unit(i);
    os << u.spelling << '\t' << (u.word_end ? 1 : 0) << '\t' << i << '\n';
  }
}

Vocabulary ReadVocabulary(std::istream &is) {
  std::string line;
  if (!std::getline(is, line) || line != "#adsm-vocab v1")
    throw InputError("vocabulary file: missing '#adsm-vocab v1' header");
  Vocabulary vocab;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = SplitOn(line, '\t');
    if (fields.size() != 3 || (fields[1] != "0" && fields[1] != "1"))
      throw InputError("vocabulary file line " + std::to_string(line_no) +
                       ": expected spelling<TAB>0|1<TAB>id");
    int id = 0;
    try {
      id = std::stoi(fields[2]);
    } catch (const std::exception &) {
      throw InputError("vocabulary file line " + std::to_string(line_no) + ": bad id");
    }
    Unit unit{fields[0], fields[1] == "1"};
    if (vocab.Contains(unit))
      throw InputError("vocabulary file line " + std::to_string(line_no) +
                       ": duplicate unit " + unit.Marked());
    if (id != vocab.Size())
      throw InputError("vocabulary file line " + std::to_string(line_no) +
                       ": ids must be dense and in order");
    vocab.Add(unit);
  }
  return vocab;
}

}  // namespace adsm
