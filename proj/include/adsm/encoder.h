// adsm/encoder.h

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

#ifndef ADSM_ENCODER_H_
#define ADSM_ENCODER_H_

// A small context-window feed-forward encoder producing per-frame label
// posteriors, trained on the marginal CTC loss.
//
// Input frames are stacked with `context` neighbours on each side (zero
// padded), passed through tanh layers and a softmax output layer.  A
// subsampling factor of 2^p inserts p non-overlapping max-pooling stages of
// width 2, one after each of the first p hidden layers (extra stages go after
// the last hidden layer).  A partial final pooling window is kept, so
// T' = ceil(T / factor).

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "adsm/common.h"
#include "adsm/ctc.h"
#include "adsm/lattice.h"

namespace adsm {

struct FeatureMatrix {
  std::string utt_id;
  Matrix values;  // T x D

  int NumFrames() const { return static_cast<int>(values.rows()); }
  int Dim() const { return static_cast<int>(values.cols()); }
};

struct EncoderConfig {
  int input_dim = 1;
  int context = 1;
  std::vector<int> hidden = {64};
  int num_classes = 2;
  int subsample_factor = 1;

  bool operator==(const EncoderConfig &) const = default;
};

/// ceil(num_frames / subsample_factor).
int SubsampledLength(int num_frames, int subsample_factor);

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

class EncoderParams {
 public:
  EncoderParams() = default;

  /// Uniform Glorot initialization from `seed`.  Throws InputError on a bad
  /// configuration (factor not a power of two, num_classes < 2, ...).
  static EncoderParams Init(const EncoderConfig &config, std::uint64_t seed);
  /// All weights zero.
  static EncoderParams Zeros(const EncoderConfig &config);

  const EncoderConfig &config() const { return config_; }
  int NumPoolStages() const;

  std::vector<DenseLayer> &layers() { return layers_; }
  const std::vector<DenseLayer> &layers() const { return layers_; }
  /// The last layer is the output projection.
  DenseLayer &output() { return layers_.back(); }
  const DenseLayer &output() const { return layers_.back(); }

  int NumParams() const;
  Vector Flatten() const;
  void Unflatten(const Vector &flat);

 private:
  EncoderConfig config_;
  std::vector<DenseLayer> layers_;
};

/// Per-frame log-posteriors.  Throws InputError on a dimension mismatch.
PosteriorMatrix Encode(const FeatureMatrix &features, const EncoderParams &params);

/// Loss and flattened parameter gradient of one utterance.
struct UttGradient {
  double loss = 0.0;
  Vector gradient;
};

/// Marginal CTC loss of one utterance and its gradient with respect to every
/// parameter (same layout as EncoderParams::Flatten()).
UttGradient LossAndGradient(const FeatureMatrix &features, const CtcGraph &graph,
                            const EncoderParams &params);

/// Fresh output layer of width `num_classes`; lower layers are reinitialized
/// too unless `keep_lower` is set.
EncoderParams ResizeOutput(const EncoderParams &params, int num_classes,
                           std::uint64_t seed, bool keep_lower = false);

struct TrainConfig {
  double learning_rate = 0.1;
  double decay = 0.5;        // newbob factor, in (0, 1]
  double min_learning_rate = 1e-4;
  int batch_size = 16;
  int max_epochs = 20;
  std::uint64_t seed = 1;
  double clip_norm = 5.0;    // 0 disables clipping
  double holdout_fraction = 0.1;
  double momentum = 0.9;     // 0 gives plain gradient descent

  /// Throws InputError on an out-of-range field.
  void Validate() const;
};

struct TrainExample {
  const FeatureMatrix *features = nullptr;
  CtcGraph graph;
};

struct TrainResult {
  EncoderParams params;             // best epoch by held-out loss
  std::vector<double> train_loss;   // mean per-utterance loss after each epoch
  std::vector<double> heldout_loss;
  int best_epoch = -1;
  int skipped = 0;                  // infeasible utterances
};

/// Mini-batch gradient descent with newbob learning-rate decay.  Utterances
/// too short for their graph are skipped and counted.  Throws InputError when
/// every utterance is infeasible and NumericalError when the loss diverges.
TrainResult Train(const std::vector<TrainExample> &data, const EncoderParams &init,
                  const TrainConfig &config);

/// Mean per-utterance loss over the feasible examples.
double MeanLoss(const std::vector<TrainExample> &data, const EncoderParams &params);

/// Text checkpoint with an explicit shape header (`#adsm-encoder v1`).
/// Values are printed with 17 significant digits and read back exactly.
void WriteParams(std::ostream &os, const EncoderParams &params);
EncoderParams ReadParams(std::istream &is);

}  // namespace adsm

#endif  // ADSM_ENCODER_H_
