// adsm/segtable.h

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

#ifndef ADSM_SEGTABLE_H_
#define ADSM_SEGTABLE_H_

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "adsm/vocabulary.h"

namespace adsm {

enum class SegMode {
  kImplicitAll,  // S(w) = every segmentation of w over the vocabulary
  kExplicit,     // S(w) = the stored variant list
};

struct Variant {
  std::vector<int> units;
  double weight = 1.0;
};

/// Concatenated spelling of a unit-id sequence with word-end markers
/// removed.
std::string Spell(const Vocabulary &vocab, const std::vector<int> &units);

/// Space-joined marked units, e.g. "a ble_".
std::string MarkedString(const Vocabulary &vocab, const std::vector<int> &units);

/// Per-word segmentation sets together with the vocabulary their unit ids
/// refer to.
class SegTable {
 public:
  SegTable() = default;

  static SegTable ImplicitAll(Vocabulary vocab);
  static SegTable Explicit(Vocabulary vocab,
                           std::map<std::string, std::vector<Variant>> entries);

  SegMode mode() const { return mode_; }
  const Vocabulary &vocab() const { return vocab_; }
  const std::map<std::string, std::vector<Variant>> &entries() const {
    return entries_;
  }
  bool Has(const std::string &word) const { return entries_.count(word) > 0; }
  /// Throws InputError for words without an entry.
  const std::vector<Variant> &VariantsOf(const std::string &word) const;

  /// Checks the mode-specific invariants; throws InputError on violation.
  void Validate() const;

 private:
  SegMode mode_ = SegMode::kImplicitAll;
  Vocabulary vocab_;
  std::map<std::string, std::vector<Variant>> entries_;
};

/// Best variant of a word in an explicit table: highest weight, then the
/// lexicographically smallest unit sequence.
const Variant &BestVariant(const SegTable &table, const std::string &word);

/// SegTable file.  Header `#adsm-segtable v1 explicit` or
/// `#adsm-segtable v1 implicit_all`; explicit tables then list one variant per
/// line as `word<TAB>unit unit unit_<TAB>weight`.
void WriteSegTable(std::ostream &os, const SegTable &table);
SegTable ReadSegTable(std::istream &is, const Vocabulary &vocab);

}  // namespace adsm

#endif  // ADSM_SEGTABLE_H_
