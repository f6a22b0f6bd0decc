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

#include "vlprep/resampler.hpp"

#include <algorithm>

#include "vlprep/schedules.hpp"

namespace vlprep {

namespace {

double sum_squares_loss(const Mat<double>& x, const ResamplerParams<double>& p,
                        const ResamplerConfig& cfg) {
  return resample(x, p, cfg).squaredNorm();
}

Mat<double> seeded_normal(Index rows, Index cols, std::mt19937_64& rng, double stddev) {
  std::normal_distribution<double> normal(0.0, stddev);
  Mat<double> m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

}  // namespace

Mat<double> random_features(const ResamplerConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return seeded_normal(cfg.n_keys(), cfg.d_model, rng, 1.0);
}

GradCheckReport grad_check(const ResamplerConfig& cfg, double step) {
  return grad_check(cfg, random_features(cfg, cfg.seed + 1), step);
}

GradCheckReport grad_check(const ResamplerConfig& cfg, const Mat<double>& x, double step) {
  auto params = ResamplerParams<double>::init(cfg);
  const auto fwd = resampler_forward(x, params, cfg);
  const auto grads = resampler_backward(fwd, x, params, cfg, Mat<double>(2.0 * fwd.output));

  GradCheckReport report;
  auto tensors = params.tensors();
  const auto grad_tensors = grads.tensors();
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    Mat<double>& w = *tensors[t];
    for (Index i = 0; i < w.size(); ++i) {
      const double saved = w.data()[i];
      w.data()[i] = saved + step;
      const double up = sum_squares_loss(x, params, cfg);
      w.data()[i] = saved - step;
      const double down = sum_squares_loss(x, params, cfg);
      w.data()[i] = saved;

      const double numeric = (up - down) / (2.0 * step);
      const double analytic = grad_tensors[t]->data()[i];
      if (!std::isfinite(numeric)) {
        throw Error(Errc::NumericalError, "non-finite finite-difference gradient");
      }
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double rel = std::abs(analytic - numeric) / denom;
      ++report.entries;
      if (rel > report.max_rel_error || report.worst_tensor.empty()) {
        report.max_rel_error = std::max(rel, report.max_rel_error);
        report.worst_tensor = ResamplerParams<double>::kNames[t];
        report.worst_index = i;
      }
    }
  }
  return report;
}

DemoResult overfit_demo(const DemoConfig& cfg) {
  const ResamplerConfig& mc = cfg.model;
  mc.validate();
  if (cfg.samples < 1 || cfg.steps < 1) {
    throw Error(Errc::InvalidConfig, "demo needs at least one sample and one step");
  }
  const Index d = mc.d_model;

  std::mt19937_64 rng(mc.seed ^ 0x9E3779B97F4A7C15ull);
  std::vector<Mat<double>> inputs;
  std::vector<Eigen::RowVectorXd> targets;
  for (int s = 0; s < cfg.samples; ++s) {
    inputs.push_back(seeded_normal(mc.n_keys(), d, rng, 1.0));
    targets.push_back(inputs.back().colwise().mean());
  }
  const Mat<double> readout = seeded_normal(d, d, rng, 1.0 / std::sqrt(double(d)));

  auto params = ResamplerParams<double>::init(mc);
  auto state = AdamWState<double>::zeros(mc);
  const ScheduleConfig schedule{cfg.peak_lr, cfg.min_lr, cfg.warmup_steps, cfg.steps};
  const Mat<double> key_pos = posenc_2d<double>(mc.grid_h, mc.grid_w, d);

  DemoResult result;
  const double inv_samples = 1.0 / cfg.samples;
  const double inv_queries = 1.0 / double(mc.n_queries);
  for (std::int64_t step = 0; step <= cfg.steps; ++step) {
    double loss = 0.0;
    auto grads = ResamplerParams<double>::zeros_like(mc);
    const bool last = step == cfg.steps;
    for (int s = 0; s < cfg.samples; ++s) {
      const auto fwd = resampler_forward(inputs[s], key_pos, params, mc);
      const Eigen::RowVectorXd pred = fwd.output.colwise().mean() * readout;
      const Eigen::RowVectorXd err = pred - targets[s];
      loss += err.squaredNorm() * inv_samples;
      if (last) continue;
      const Eigen::RowVectorXd d_pred = 2.0 * inv_samples * err;
      const Eigen::RowVectorXd d_row = inv_queries * d_pred * readout.transpose();
      const Mat<double> d_out = d_row.replicate(mc.n_queries, 1);
      const auto g = resampler_backward(fwd, inputs[s], params, mc, d_out);
      auto acc = grads.tensors();
      const auto add = g.tensors();
      for (std::size_t t = 0; t < acc.size(); ++t) *acc[t] += *add[t];
    }
    result.losses.push_back(loss);
    if (!std::isfinite(loss)) {
      result.diverged = true;
      break;
    }
    if (last) break;
    AdamWHyper hp = cfg.optimizer;
    hp.lr = cfg.peak_lr > 0.0 ? lr_at(schedule, step) : 0.0;
    adamw_step(params, grads, state, hp);
  }
  return result;
}

}  // namespace vlprep
