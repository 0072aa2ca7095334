// adsm/common.h

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

#ifndef ADSM_COMMON_H_
#define ADSM_COMMON_H_

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace adsm {

// Row-major so that one frame is contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Base class of every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input (files, arguments, tables).
class InputError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf or divergence inside a numerical routine.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The utterance has fewer frames than its shortest CTC alignment.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Brute-force routine refused because its cost guard was exceeded.
class CostGuardError : public Error {
 public:
  using Error::Error;
};

/// Marker appended to the spelling of word-final units in text formats.
inline constexpr char kWordEndMarker = '_';

/// A subword label: a character span plus the word-end flag.  "le" and "le_"
/// are distinct labels.
struct Unit {
  std::string spelling;
  bool word_end = false;

  /// Text form, e.g. "le_" for a word-final "le".
  std::string Marked() const {
    return word_end ? spelling + kWordEndMarker : spelling;
  }
  /// Inverse of Marked().  Throws InputError on an empty spelling.
  static Unit FromMarked(std::string_view token);

  auto operator<=>(const Unit &) const = default;
  bool operator==(const Unit &) const = default;
};

/// Splits a UTF-8 string into its code points, one string per character.
/// Throws InputError on invalid UTF-8.
std::vector<std::string> SplitChars(std::string_view text);

/// Splits on runs of ASCII whitespace.
std::vector<std::string> SplitWhitespace(std::string_view text);

/// Splits on a single delimiter, keeping empty fields.
std::vector<std::string> SplitOn(std::string_view text, char delim);

/// Numerically stable log(exp(a) + exp(b)).
double LogAdd(double a, double b);

/// Writes a warning line to stderr unless warnings are silenced.
void Warn(const std::string &message);
void SetWarningsEnabled(bool enabled);

}  // namespace adsm

#endif  // ADSM_COMMON_H_
