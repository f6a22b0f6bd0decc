/* Copyright 2026 The vlprep Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Reference implementation of the position-aware vision-language adapter: a
// single cross-attention layer in which a fixed set of learnable queries
// attends over visual patch features. Both queries and keys receive 2D
// sinusoidal position encodings before projection, so the output length is
// the query count regardless of the patch grid.
//
// Everything is templated on the scalar type; tests and the CLI use double.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "vlprep/error.hpp"

namespace vlprep {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Index = Eigen::Index;

struct ResamplerConfig {
  Index d_model = 16;
  Index n_queries = 256;
  Index n_heads = 1;
  Index grid_h = 16;
  Index grid_w = 16;
  std::uint64_t seed = 0;

  /// Side of the virtual query grid; n_queries must be a perfect square.
  Index query_side() const {
    const auto side = static_cast<Index>(std::llround(std::sqrt(double(n_queries))));
    return side * side == n_queries ? side : 0;
  }
  Index head_dim() const { return d_model / n_heads; }
  Index n_keys() const { return grid_h * grid_w; }

  void validate() const {
    if (n_heads < 1 || d_model < 4 || d_model % (4 * n_heads) != 0) {
      throw Error(Errc::InvalidConfig,
                  "d_model must be a positive multiple of 4 * n_heads");
    }
    if (n_queries < 1 || query_side() == 0) {
      throw Error(Errc::InvalidConfig, "n_queries must be a perfect square");
    }
    if (grid_h < 1 || grid_w < 1) {
      throw Error(Errc::InvalidConfig, "patch grid must be non-empty");
    }
  }
};

/// Sinusoidal 2D encoding, one row per grid cell (row-major). Channels
/// [0, d/2) encode the row index and [d/2, d) the column index; inside each
/// half, channel 2i is sin(pos·ω_i) and 2i+1 is cos(pos·ω_i) with
/// ω_i = 10000^(−2i/(d/2)).
template <typename Scalar>
Mat<Scalar> posenc_2d(Index h, Index w, Index d) {
  if (d <= 0 || d % 4 != 0) {
    throw Error(Errc::InvalidWidth,
                "encoding width " + std::to_string(d) + " is not a multiple of 4");
  }
  const Index half = d / 2;
  Mat<Scalar> pe(h * w, d);
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      const Index row = r * w + c;
      for (Index i = 0; i < half / 2; ++i) {
        const Scalar freq = std::pow(Scalar(10000), -Scalar(2 * i) / Scalar(half));
        pe(row, 2 * i) = std::sin(Scalar(r) * freq);
        pe(row, 2 * i + 1) = std::cos(Scalar(r) * freq);
        pe(row, half + 2 * i) = std::sin(Scalar(c) * freq);
        pe(row, half + 2 * i + 1) = std::cos(Scalar(c) * freq);
      }
    }
  }
  return pe;
}

template <typename Scalar>
struct ResamplerParams {
  Mat<Scalar> queries;  // n_queries × d_model
  Mat<Scalar> w_q, w_k, w_v, w_o;  // d_model × d_model

  static constexpr std::array<std::string_view, 5> kNames = {
      "queries", "w_q", "w_k", "w_v", "w_o"};

  std::array<Mat<Scalar>*, 5> tensors() { return {&queries, &w_q, &w_k, &w_v, &w_o}; }
  std::array<const Mat<Scalar>*, 5> tensors() const {
    return {&queries, &w_q, &w_k, &w_v, &w_o};
  }

  static ResamplerParams zeros_like(const ResamplerConfig& cfg) {
    const Index d = cfg.d_model;
    return {Mat<Scalar>::Zero(cfg.n_queries, d), Mat<Scalar>::Zero(d, d),
            Mat<Scalar>::Zero(d, d), Mat<Scalar>::Zero(d, d), Mat<Scalar>::Zero(d, d)};
  }

  /// Seeded normal(0, 0.02) initialization of every tensor.
  static ResamplerParams init(const ResamplerConfig& cfg) {
    cfg.validate();
    ResamplerParams p = zeros_like(cfg);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 0.02);
    for (Mat<Scalar>* t : p.tensors()) {
      for (Index i = 0; i < t->size(); ++i) t->data()[i] = Scalar(normal(rng));
    }
    return p;
  }

  Scalar squared_norm() const {
    Scalar s = 0;
    for (const Mat<Scalar>* t : tensors()) s += t->squaredNorm();
    return s;
  }

  bool all_finite() const {
    for (const Mat<Scalar>* t : tensors()) {
      if (!t->allFinite()) return false;
    }
    return true;
  }
};

/// Intermediate values of one forward pass, kept for the backward pass.
template <typename Scalar>
struct ResamplerForward {
  Mat<Scalar> query_in;  // queries + query encodings
  Mat<Scalar> key_in;    // features + key encodings
  Mat<Scalar> q, k, v;
  std::vector<Mat<Scalar>> probs;  // per head, n_queries × n_keys
  Mat<Scalar> context;             // heads concatenated
  Mat<Scalar> output;
};

namespace resampler_detail {

template <typename Scalar>
void check_shapes(const Mat<Scalar>& x, const Mat<Scalar>& key_pos,
                  const ResamplerParams<Scalar>& p, const ResamplerConfig& cfg) {
  cfg.validate();
  const Index d = cfg.d_model;
  const auto bad = [](const Mat<Scalar>& m, Index rows, Index cols) {
    return m.rows() != rows || m.cols() != cols;
  };
  if (bad(x, x.rows(), d) || x.rows() < 1 || bad(key_pos, x.rows(), d)) {
    throw Error(Errc::ShapeError, "features must be n_keys × d_model with matching encodings");
  }
  if (bad(p.queries, cfg.n_queries, d) || bad(p.w_q, d, d) || bad(p.w_k, d, d) ||
      bad(p.w_v, d, d) || bad(p.w_o, d, d)) {
    throw Error(Errc::ShapeError, "parameter shapes do not match the config");
  }
  if (!x.allFinite()) throw Error(Errc::NumericalError, "features contain NaN or Inf");
  if (!p.all_finite()) throw Error(Errc::NumericalError, "parameters contain NaN or Inf");
}

template <typename Scalar>
void softmax_rows(Mat<Scalar>& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    row.array() = (row.array() - row.maxCoeff()).exp();
    row /= row.sum();
  }
}

}  // namespace resampler_detail

/// Forward pass with caller-supplied key encodings (one row per feature row).
template <typename Scalar>
ResamplerForward<Scalar> resampler_forward(const Mat<Scalar>& x, const Mat<Scalar>& key_pos,
                                           const ResamplerParams<Scalar>& p,
                                           const ResamplerConfig& cfg) {
  resampler_detail::check_shapes(x, key_pos, p, cfg);
  const Index side = cfg.query_side();
  const Index dh = cfg.head_dim();
  const Scalar scale = Scalar(1) / std::sqrt(Scalar(dh));

  ResamplerForward<Scalar> f;
  f.query_in = p.queries + posenc_2d<Scalar>(side, side, cfg.d_model);
  f.key_in = x + key_pos;
  f.q = f.query_in * p.w_q;
  f.k = f.key_in * p.w_k;
  f.v = x * p.w_v;
  f.context.resize(cfg.n_queries, cfg.d_model);
  for (Index h = 0; h < cfg.n_heads; ++h) {
    Mat<Scalar> logits =
        (f.q.middleCols(h * dh, dh) * f.k.middleCols(h * dh, dh).transpose()) * scale;
    resampler_detail::softmax_rows(logits);
    f.context.middleCols(h * dh, dh) = logits * f.v.middleCols(h * dh, dh);
    f.probs.push_back(std::move(logits));
  }
  f.output = f.context * p.w_o;
  if (!f.output.allFinite()) throw Error(Errc::NumericalError, "non-finite output");
  return f;
}

/// Forward pass over a grid_h × grid_w patch grid.
template <typename Scalar>
ResamplerForward<Scalar> resampler_forward(const Mat<Scalar>& x,
                                           const ResamplerParams<Scalar>& p,
                                           const ResamplerConfig& cfg) {
  if (x.rows() != cfg.n_keys()) {
    throw Error(Errc::ShapeError, "expected " + std::to_string(cfg.n_keys()) +
                                      " patch rows, got " + std::to_string(x.rows()));
  }
  return resampler_forward<Scalar>(x, posenc_2d<Scalar>(cfg.grid_h, cfg.grid_w, cfg.d_model),
                                   p, cfg);
}

/// n_queries × d_model compressed features.
template <typename Scalar>
Mat<Scalar> resample(const Mat<Scalar>& x, const ResamplerParams<Scalar>& p,
                     const ResamplerConfig& cfg) {
  return resampler_forward(x, p, cfg).output;
}

/// Softmax attention matrices, one per head (n_queries × n_keys each).
template <typename Scalar>
std::vector<Mat<Scalar>> attention_weights(const Mat<Scalar>& x,
                                           const ResamplerParams<Scalar>& p,
                                           const ResamplerConfig& cfg) {
  return resampler_forward(x, p, cfg).probs;
}

/// Gradients of a scalar loss with respect to every parameter, given the
/// loss gradient with respect to the output.
template <typename Scalar>
ResamplerParams<Scalar> resampler_backward(const ResamplerForward<Scalar>& f,
                                           const Mat<Scalar>& x,
                                           const ResamplerParams<Scalar>& p,
                                           const ResamplerConfig& cfg,
                                           const Mat<Scalar>& d_output) {
  const Index dh = cfg.head_dim();
  const Scalar scale = Scalar(1) / std::sqrt(Scalar(dh));

  ResamplerParams<Scalar> g;
  g.w_o = f.context.transpose() * d_output;
  const Mat<Scalar> d_context = d_output * p.w_o.transpose();

  Mat<Scalar> d_q(f.q.rows(), f.q.cols());
  Mat<Scalar> d_k(f.k.rows(), f.k.cols());
  Mat<Scalar> d_v(f.v.rows(), f.v.cols());
  for (Index h = 0; h < cfg.n_heads; ++h) {
    const Mat<Scalar>& P = f.probs[static_cast<std::size_t>(h)];
    const auto dc = d_context.middleCols(h * dh, dh);
    const Mat<Scalar> d_probs = dc * f.v.middleCols(h * dh, dh).transpose();
    d_v.middleCols(h * dh, dh) = P.transpose() * dc;
    // softmax backward, row by row
    const auto row_dot = (d_probs.array() * P.array()).rowwise().sum().eval();
    Mat<Scalar> d_logits =
        (P.array() * (d_probs.array().colwise() - row_dot)).matrix() * scale;
    d_q.middleCols(h * dh, dh) = d_logits * f.k.middleCols(h * dh, dh);
    d_k.middleCols(h * dh, dh) = d_logits.transpose() * f.q.middleCols(h * dh, dh);
  }
  g.w_q = f.query_in.transpose() * d_q;
  g.queries = d_q * p.w_q.transpose();
  g.w_k = f.key_in.transpose() * d_k;
  g.w_v = x.transpose() * d_v;
  if (!g.all_finite()) throw Error(Errc::NumericalError, "non-finite gradient");
  return g;
}

// ---------------------------------------------------------------------------
// AdamW with global-norm clipping.

struct AdamWHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-6;
  double weight_decay = 0.05;
  double max_grad_norm = 1.0;  // <= 0 disables clipping
};

template <typename Scalar>
struct AdamWState {
  std::int64_t step = 0;
  ResamplerParams<Scalar> m;
  ResamplerParams<Scalar> v;

  static AdamWState zeros(const ResamplerConfig& cfg) {
    return {0, ResamplerParams<Scalar>::zeros_like(cfg),
            ResamplerParams<Scalar>::zeros_like(cfg)};
  }
};

/// One optimizer step in place: clip the gradients to the global norm
/// budget, update bias-corrected moments, then apply decoupled weight decay
/// and the Adam update. Returns the gradient norm before clipping.
template <typename Scalar>
Scalar adamw_step(ResamplerParams<Scalar>& params, const ResamplerParams<Scalar>& grads,
                  AdamWState<Scalar>& state, const AdamWHyper& hp) {
  if (!grads.all_finite()) throw Error(Errc::NumericalError, "non-finite gradient");
  const Scalar norm = std::sqrt(grads.squared_norm());
  Scalar clip = 1;
  if (hp.max_grad_norm > 0 && norm > Scalar(hp.max_grad_norm)) {
    clip = Scalar(hp.max_grad_norm) / norm;
  }
  ++state.step;
  const Scalar b1 = Scalar(hp.beta1), b2 = Scalar(hp.beta2);
  const Scalar bc1 = Scalar(1) - std::pow(b1, Scalar(state.step));
  const Scalar bc2 = Scalar(1) - std::pow(b2, Scalar(state.step));
  const Scalar lr = Scalar(hp.lr);

  auto ps = params.tensors();
  auto gs = grads.tensors();
  auto ms = state.m.tensors();
  auto vs = state.v.tensors();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto g = (*gs[i] * clip).array().eval();
    ms[i]->array() = b1 * ms[i]->array() + (Scalar(1) - b1) * g;
    vs[i]->array() = b2 * vs[i]->array() + (Scalar(1) - b2) * g.square();
    *ps[i] *= Scalar(1) - lr * Scalar(hp.weight_decay);
    ps[i]->array() -= lr * (ms[i]->array() / bc1) /
                      ((vs[i]->array() / bc2).sqrt() + Scalar(hp.eps));
  }
  return norm;
}

// ---------------------------------------------------------------------------
// Verification and the toy training run (double precision).

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  Index worst_index = 0;
  Index entries = 0;
};

/// Seeded random features (standard normal) for a config's patch grid.
Mat<double> random_features(const ResamplerConfig& cfg, std::uint64_t seed);

/// Compares analytic gradients of sum(output²) with central differences
/// (step 1e-5) over every parameter entry.
GradCheckReport grad_check(const ResamplerConfig& cfg, double step = 1e-5);

/// Same check on caller-supplied features.
GradCheckReport grad_check(const ResamplerConfig& cfg, const Mat<double>& features,
                           double step = 1e-5);

struct DemoConfig {
  ResamplerConfig model{16, 4, 1, 4, 4, 0};
  int samples = 32;
  std::int64_t steps = 2000;
  double peak_lr = 1e-2;
  double min_lr = 1e-4;
  std::int64_t warmup_steps = 100;
  AdamWHyper optimizer{};
};

struct DemoResult {
  std::vector<double> losses;  // loss before each update, then the final loss
  bool diverged = false;

  double ratio() const {
    return losses.empty() || losses.front() == 0.0 ? 0.0 : losses.back() / losses.front();
  }
};

/// Trains the adapter plus a fixed random linear readout (mean over query
/// rows, then a d×d map) to regress the mean patch of each seeded sample.
DemoResult overfit_demo(const DemoConfig& cfg);

}  // namespace vlprep
