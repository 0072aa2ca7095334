// adsm/vocabulary.h

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

#ifndef ADSM_VOCABULARY_H_
#define ADSM_VOCABULARY_H_

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "adsm/common.h"

namespace adsm {

/// The unit inventory V.  Ids are dense in [0, Size()); the CTC blank takes
/// the extra id Size() and is not a unit.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Canonical vocabulary: units deduplicated and sorted by (spelling,
  /// word_end), ids assigned in that order.
  static Vocabulary FromUnits(std::vector<Unit> units);

  /// Appends a unit if absent; returns its id either way.
  int Add(const Unit &unit);

  int Size() const { return static_cast<int>(units_.size()); }
  int BlankId() const { return Size(); }
  int NumClasses() const { return Size() + 1; }

  const Unit &unit(int id) const { return units_.at(id); }
  const std::vector<Unit> &units() const { return units_; }

  std::optional<int> Find(const Unit &unit) const;
  bool Contains(const Unit &unit) const { return Find(unit).has_value(); }
  /// Throws InputError when the unit is unknown.
  int IdOf(const Unit &unit) const;

  /// Marked text form of an id; the blank prints as "<b>".
  std::string Label(int id) const;

  /// Characters that exist as single-character units in both forms.
  std::set<std::string> Alphabet() const;

  /// Length in characters of the longest unit spelling.
  int MaxUnitChars() const { return max_unit_chars_; }

  bool operator==(const Vocabulary &other) const { return units_ == other.units_; }

 private:
  std::vector<Unit> units_;
  std::map<Unit, int> id_of_;
  int max_unit_chars_ = 0;
};

/// Every single character of `alphabet` in both word-end and non-word-end
/// form.
std::vector<Unit> SingleCharUnits(const std::set<std::string> &alphabet);

/// Vocabulary file: `spelling<TAB>word_end(0|1)<TAB>id` per line, preceded by
/// a `#adsm-vocab v1` header.
void WriteVocabulary(std::ostream &os, const Vocabulary &vocab);
Vocabulary ReadVocabulary(std::istream &is);

}  // namespace adsm

#endif  // ADSM_VOCABULARY_H_
