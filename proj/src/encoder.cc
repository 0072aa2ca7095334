// src/encoder.cc

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

#include "adsm/encoder.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace adsm {

namespace {

bool IsPowerOfTwo(int x) { return x >= 1 && (x & (x - 1)) == 0; }

// Rows t-c .. t+c of `x` side by side, zero outside [0, T).
Matrix StackContext(const Matrix &x, int context) {
  const int T = static_cast<int>(x.rows());
  const int D = static_cast<int>(x.cols());
  const int width = 2 * context + 1;
  Matrix out = Matrix::Zero(T, width * D);
  for (int t = 0; t < T; ++t) {
    for (int k = 0; k < width; ++k) {
      const int src = t + k - context;
      if (src >= 0 && src < T) out.block(t, k * D, 1, D) = x.row(src);
    }
  }
  return out;
}

struct PoolResult {
  Matrix out;
  std::vector<int> argmax;  // source row per output element, row-major
};

// Non-overlapping width-2 temporal max-pooling; a trailing odd row forms its
// own window.  Ties keep the earlier frame.
PoolResult MaxPool2(const Matrix &in) {
  const int T = static_cast<int>(in.rows());
  const int H = static_cast<int>(in.cols());
  const int T2 = (T + 1) / 2;
  PoolResult r;
  r.out.resize(T2, H);
  r.argmax.resize(static_cast<std::size_t>(T2) * H);
  for (int j = 0; j < T2; ++j) {
    const int a = 2 * j;
    const int b = std::min(2 * j + 1, T - 1);
    for (int h = 0; h < H; ++h) {
      const int src = in(b, h) > in(a, h) ? b : a;
      r.out(j, h) = in(src, h);
      r.argmax[static_cast<std::size_t>(j) * H + h] = src;
    }
  }
  return r;
}

Matrix UnPool(const Matrix &grad_out, const std::vector<int> &argmax, int in_rows) {
  const int H = static_cast<int>(grad_out.cols());
  Matrix grad_in = Matrix::Zero(in_rows, H);
  for (int j = 0; j < grad_out.rows(); ++j)
    for (int h = 0; h < H; ++h)
      grad_in(argmax[static_cast<std::size_t>(j) * H + h], h) += grad_out(j, h);
  return grad_in;
}

// Pooling stages after hidden layer i (index L = number of hidden layers
// stands for "before the output layer when there are no hidden layers").
std::vector<int> PoolSchedule(const EncoderConfig &config, int num_stages) {
  const int L = static_cast<int>(config.hidden.size());
  std::vector<int> pools(std::max(L, 1), 0);
  if (L == 0) {
    pools[0] = num_stages;
    return pools;
  }
  for (int i = 0; i < L && i < num_stages; ++i) pools[i] = 1;
  if (num_stages > L) pools[L - 1] += num_stages - L;
  return pools;
}

struct ForwardCache {
  std::vector<Matrix> inputs;   // input to each layer (hidden..., output)
  std::vector<Matrix> acts;     // tanh output of each hidden layer
  std::vector<std::vector<PoolResult>> pools;  // per hidden layer
  std::vector<PoolResult> input_pools;         // only without hidden layers
  Matrix log_probs;
};

ForwardCache RunForward(const FeatureMatrix &features, const EncoderParams &params) {
  const EncoderConfig &cfg = params.config();
  if (features.Dim() != cfg.input_dim)
    throw InputError("feature dimension " + std::to_string(features.Dim()) +
                     " does not match the encoder input " + std::to_string(cfg.input_dim));
  if (features.NumFrames() < 1) throw InputError("empty feature matrix");
  if (!features.values.allFinite()) throw NumericalError("non-finite feature value");

  const int L = static_cast<int>(cfg.hidden.size());
  const std::vector<int> schedule = PoolSchedule(cfg, params.NumPoolStages());
  ForwardCache cache;
  Matrix x = StackContext(features.values, cfg.context);
  if (L == 0) {
    for (int k = 0; k < schedule[0]; ++k) {
      cache.input_pools.push_back(MaxPool2(x));
      x = cache.input_pools.back().out;
    }
  }
  cache.pools.resize(L);
  for (int i = 0; i < L; ++i) {
    const DenseLayer &layer = params.layers()[i];
    cache.inputs.push_back(x);
    Matrix pre = x * layer.weight.transpose();
    pre.rowwise() += layer.bias.transpose();
    Matrix act = pre.array().tanh().matrix();
    cache.acts.push_back(act);
    for (int k = 0; k < schedule[i]; ++k) {
      cache.pools[i].push_back(MaxPool2(act));
      act = cache.pools[i].back().out;
    }
    x = std::move(act);
  }
  cache.inputs.push_back(x);
  Matrix logits = x * params.output().weight.transpose();
  logits.rowwise() += params.output().bias.transpose();
  cache.log_probs = PosteriorMatrix::FromScores(logits).log_probs();
  return cache;
}

void WriteMatrix(std::ostream &os, const Matrix &m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? " " : "") << m(r, c);
    os << '\n';
  }
}

Matrix ReadMatrix(std::istream &is, int rows, int cols) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      if (!(is >> m(r, c))) throw InputError("encoder checkpoint: truncated matrix");
  return m;
}

void ExpectToken(std::istream &is, const std::string &token) {
  std::string got;
  if (!(is >> got) || got != token)
    throw InputError("encoder checkpoint: expected '" + token + "', got '" + got + "'");
}

}  // namespace

int SubsampledLength(int num_frames, int subsample_factor) {
  return (num_frames + subsample_factor - 1) / subsample_factor;
}

EncoderParams EncoderParams::Zeros(const EncoderConfig &config) {
  if (config.input_dim < 1) throw InputError("input_dim must be >= 1");
  if (config.context < 0) throw InputError("context must be >= 0");
  if (config.num_classes < 2) throw InputError("num_classes must be >= 2");
  if (!IsPowerOfTwo(config.subsample_factor))
    throw InputError("subsample factor must be a power of two");
  for (int h : config.hidden)
    if (h < 1) throw InputError("hidden layer sizes must be >= 1");
  EncoderParams p;
  p.config_ = config;
  int in = (2 * config.context + 1) * config.input_dim;
  for (int h : config.hidden) {
    p.layers_.push_back({Matrix::Zero(h, in), Vector::Zero(h)});
    in = h;
  }
  p.layers_.push_back({Matrix::Zero(config.num_classes, in), Vector::Zero(config.num_classes)});
  return p;
}

EncoderParams EncoderParams::Init(const EncoderConfig &config, std::uint64_t seed) {
  EncoderParams p = Zeros(config);
  std::mt19937_64 rng(seed);
  for (DenseLayer &layer : p.layers_) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(layer.weight.rows() + layer.weight.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = dist(rng);
  }
  return p;
}

int EncoderParams::NumPoolStages() const {
  int stages = 0;
  for (int f = config_.subsample_factor; f > 1; f /= 2) ++stages;
  return stages;
}

int EncoderParams::NumParams() const {
  int n = 0;
  for (const DenseLayer &l : layers_) n += static_cast<int>(l.weight.size() + l.bias.size());
  return n;
}

Vector EncoderParams::Flatten() const {
  Vector flat(NumParams());
  Eigen::Index k = 0;
  for (const DenseLayer &l : layers_) {
    flat.segment(k, l.weight.size()) = l.weight.reshaped<Eigen::RowMajor>();
    k += l.weight.size();
    flat.segment(k, l.bias.size()) = l.bias;
    k += l.bias.size();
  }
  return flat;
}

void EncoderParams::Unflatten(const Vector &flat) {
  if (flat.size() != NumParams()) throw InputError("flat parameter vector has the wrong size");
  Eigen::Index k = 0;
  for (DenseLayer &l : layers_) {
    l.weight.reshaped<Eigen::RowMajor>() = flat.segment(k, l.weight.size());
    k += l.weight.size();
    l.bias = flat.segment(k, l.bias.size());
    k += l.bias.size();
  }
}

PosteriorMatrix Encode(const FeatureMatrix &features, const EncoderParams &params) {
  return PosteriorMatrix::Unchecked(RunForward(features, params).log_probs);
}

UttGradient LossAndGradient(const FeatureMatrix &features, const CtcGraph &graph,
                            const EncoderParams &params) {
  ForwardCache cache = RunForward(features, params);
  const PosteriorMatrix posteriors = PosteriorMatrix::Unchecked(std::move(cache.log_probs));
  const LossResult loss = LogLoss(graph, posteriors);

  const int L = static_cast<int>(params.config().hidden.size());
  const std::vector<int> schedule = PoolSchedule(params.config(), params.NumPoolStages());
  std::vector<DenseLayer> grads(params.layers().size());

  Matrix delta = ScoreGradient(posteriors, loss.occupancy);  // d loss / d logits
  {
    DenseLayer &g = grads[L];
    g.weight = delta.transpose() * cache.inputs[L];
    g.bias = delta.colwise().sum().transpose();
    delta = delta * params.output().weight;
  }
  for (int i = L - 1; i >= 0; --i) {
    for (int k = schedule[i] - 1; k >= 0; --k) {
      const int rows = k == 0 ? static_cast<int>(cache.acts[i].rows())
                              : static_cast<int>(cache.pools[i][k - 1].out.rows());
      delta = UnPool(delta, cache.pools[i][k].argmax, rows);
    }
    delta = (delta.array() * (1.0 - cache.acts[i].array().square())).matrix();
    DenseLayer &g = grads[i];
    g.weight = delta.transpose() * cache.inputs[i];
    g.bias = delta.colwise().sum().transpose();
    if (i > 0) delta = delta * params.layers()[i].weight;
  }

  UttGradient out;
  out.loss = loss.loss;
  out.gradient.resize(params.NumParams());
  Eigen::Index k = 0;
  for (const DenseLayer &g : grads) {
    out.gradient.segment(k, g.weight.size()) = g.weight.reshaped<Eigen::RowMajor>();
    k += g.weight.size();
    out.gradient.segment(k, g.bias.size()) = g.bias;
    k += g.bias.size();
  }
  return out;
}

EncoderParams ResizeOutput(const EncoderParams &params, int num_classes, std::uint64_t seed,
                           bool keep_lower) {
  EncoderConfig config = params.config();
  config.num_classes = num_classes;
  EncoderParams fresh = EncoderParams::Init(config, seed);
  if (keep_lower) {
    for (std::size_t i = 0; i + 1 < fresh.layers().size(); ++i)
      fresh.layers()[i] = params.layers()[i];
  }
  return fresh;
}

void TrainConfig::Validate() const {
  if (!(learning_rate >= 0.0)) throw InputError("learning rate must be >= 0");
  if (!(decay > 0.0 && decay <= 1.0)) throw InputError("decay factor must lie in (0, 1]");
  if (!(min_learning_rate >= 0.0)) throw InputError("minimum learning rate must be >= 0");
  if (batch_size < 1) throw InputError("batch size must be >= 1");
  if (max_epochs < 0) throw InputError("max epochs must be >= 0");
  if (!(clip_norm >= 0.0)) throw InputError("clip threshold must be >= 0");
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0))
    throw InputError("holdout fraction must lie in [0, 1)");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw InputError("momentum must lie in [0, 1)");
}

double MeanLoss(const std::vector<TrainExample> &data, const EncoderParams &params) {
  double total = 0.0;
  int n = 0;
  for (const TrainExample &ex : data) {
    const int frames =
        SubsampledLength(ex.features->NumFrames(), params.config().subsample_factor);
    if (frames < ex.graph.MinFrames()) continue;
    total += LogLoss(ex.graph, Encode(*ex.features, params)).loss;
    ++n;
  }
  return n ? total / n : 0.0;
}

TrainResult Train(const std::vector<TrainExample> &data, const EncoderParams &init,
                  const TrainConfig &config) {
  config.Validate();
  TrainResult result;
  const int factor = init.config().subsample_factor;

  std::vector<int> usable;
  for (int i = 0; i < static_cast<int>(data.size()); ++i) {
    const TrainExample &ex = data[i];
    if (ex.graph.NumClasses() != init.config().num_classes)
      throw InputError("training graph class count does not match the encoder output");
    if (SubsampledLength(ex.features->NumFrames(), factor) < ex.graph.MinFrames())
      ++result.skipped;
    else
      usable.push_back(i);
  }
  if (usable.empty()) throw InputError("every training utterance is infeasible");

  std::mt19937_64 rng(config.seed);
  std::shuffle(usable.begin(), usable.end(), rng);
  std::size_t num_heldout = 0;
  if (config.holdout_fraction > 0.0 && usable.size() >= 2) {
    num_heldout = static_cast<std::size_t>(
        std::ceil(config.holdout_fraction * static_cast<double>(usable.size())));
    num_heldout = std::min(num_heldout, usable.size() - 1);
  }
  std::vector<int> heldout(usable.end() - static_cast<std::ptrdiff_t>(num_heldout), usable.end());
  std::vector<int> train(usable.begin(), usable.end() - static_cast<std::ptrdiff_t>(num_heldout));
  std::sort(heldout.begin(), heldout.end());
  std::sort(train.begin(), train.end());

  auto heldout_loss = [&](const EncoderParams &p) {
    double total = 0.0;
    for (int i : heldout) total += LogLoss(data[i].graph, Encode(*data[i].features, p)).loss;
    return total / static_cast<double>(heldout.size());
  };

  EncoderParams params = init;
  Vector theta = params.Flatten();
  Vector velocity = Vector::Zero(theta.size());
  double lr = config.learning_rate;
  double best_loss = std::numeric_limits<double>::infinity();
  result.params = params;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::shuffle(train.begin(), train.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < train.size(); start += config.batch_size) {
      const std::size_t end = std::min(train.size(), start + config.batch_size);
      Vector grad = Vector::Zero(theta.size());
      for (std::size_t b = start; b < end; ++b) {
        const TrainExample &ex = data[train[b]];
        UttGradient g = LossAndGradient(*ex.features, ex.graph, params);
        if (!std::isfinite(g.loss) || !g.gradient.allFinite())
          throw NumericalError("training diverged at epoch " + std::to_string(epoch) +
                               " on utterance " + ex.features->utt_id);
        epoch_loss += g.loss;
        grad += g.gradient;
      }
      grad /= static_cast<double>(end - start);
      const double norm = grad.norm();
      if (config.clip_norm > 0.0 && norm > config.clip_norm) grad *= config.clip_norm / norm;
      velocity = config.momentum * velocity - lr * grad;
      theta += velocity;
      params.Unflatten(theta);
    }
    epoch_loss /= static_cast<double>(train.size());
    if (!std::isfinite(epoch_loss)) throw NumericalError("training loss is not finite");
    result.train_loss.push_back(epoch_loss);
    const double held = heldout.empty() ? epoch_loss : heldout_loss(params);
    result.heldout_loss.push_back(held);
    if (held < best_loss) {
      best_loss = held;
      result.best_epoch = epoch;
      result.params = params;
    } else {
      lr *= config.decay;
      if (lr < config.min_learning_rate) break;
    }
  }
  return result;
}

void WriteParams(std::ostream &os, const EncoderParams &params) {
  const EncoderConfig &c = params.config();
  const auto old_precision = os.precision(17);
  os << "#adsm-encoder v1\n";
  os << "input_dim " << c.input_dim << '\n';
  os << "context " << c.context << '\n';
  os << "hidden " << c.hidden.size();
  for (int h : c.hidden) os << ' ' << h;
  os << '\n';
  os << "num_classes " << c.num_classes << '\n';
  os << "subsample " << c.subsample_factor << '\n';
  for (std::size_t i = 0; i < params.layers().size(); ++i) {
    const DenseLayer &l = params.layers()[i];
    os << "layer " << i << ' ' << l.weight.rows() << ' ' << l.weight.cols() << '\n';
    WriteMatrix(os, l.weight);
    os << "bias\n";
    WriteMatrix(os, l.bias.transpose());
  }
  os.precision(old_precision);
}

EncoderParams ReadParams(std::istream &is) {
  std::string line;
  if (!std::getline(is, line) || line != "#adsm-encoder v1")
    throw InputError("encoder checkpoint: missing '#adsm-encoder v1' header");
  EncoderConfig c;
  std::size_t num_hidden = 0;
  ExpectToken(is, "input_dim");
  is >> c.input_dim;
  ExpectToken(is, "context");
  is >> c.context;
  ExpectToken(is, "hidden");
  is >> num_hidden;
  if (!is || num_hidden > 1000) throw InputError("encoder checkpoint: bad hidden layer count");
  c.hidden.resize(num_hidden);
  for (int &h : c.hidden) is >> h;
  ExpectToken(is, "num_classes");
  is >> c.num_classes;
  ExpectToken(is, "subsample");
  is >> c.subsample_factor;
  if (!is) throw InputError("encoder checkpoint: malformed header");
  EncoderParams params = EncoderParams::Zeros(c);
  for (std::size_t i = 0; i < params.layers().size(); ++i) {
    DenseLayer &l = params.layers()[i];
    std::size_t index = 0;
    int rows = 0, cols = 0;
    ExpectToken(is, "layer");
    is >> index >> rows >> cols;
    if (!is || index != i || rows != l.weight.rows() || cols != l.weight.cols())
      throw InputError("encoder checkpoint: layer " + std::to_string(i) + " shape mismatch");
    l.weight = ReadMatrix(is, rows, cols);
    ExpectToken(is, "bias");
    l.bias = ReadMatrix(is, 1, rows).transpose();
  }
  return params;
}

}  // namespace adsm
