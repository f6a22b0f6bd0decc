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

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "vlprep/error.hpp"
#include "vlprep/resampler.hpp"

using namespace vlprep;

namespace {

ResamplerConfig small_cfg(std::uint64_t seed = 0) { return {16, 4, 1, 3, 3, seed}; }

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::IOFailure;
}

double loss_of(const Mat<double>& x, const ResamplerParams<double>& p,
               const ResamplerConfig& cfg) {
  return resample(x, p, cfg).squaredNorm();
}

}  // namespace

TEST_CASE("posenc_2d") {
  const Mat<double> one = posenc_2d<double>(1, 1, 8);
  REQUIRE(one.rows() == 1);
  for (Index j = 0; j < 8; ++j) CHECK(one(0, j) == (j % 2 == 0 ? 0.0 : 1.0));

  const Index d = 16;
  const Mat<double> pe = posenc_2d<double>(5, 7, d);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 7; ++c) {
      for (Index i = 0; i < d / 4; ++i) {
        const double w = std::pow(10000.0, -2.0 * double(i) / double(d / 2));
        CHECK(pe(r * 7 + c, 2 * i) == doctest::Approx(std::sin(r * w)).epsilon(1e-14));
        CHECK(pe(r * 7 + c, 2 * i + 1) == doctest::Approx(std::cos(r * w)).epsilon(1e-14));
        CHECK(pe(r * 7 + c, d / 2 + 2 * i) == doctest::Approx(std::sin(c * w)).epsilon(1e-14));
      }
    }
  }
  // same column, different rows: only the first half changes
  CHECK(pe.row(1 * 7 + 3).tail(d / 2) == pe.row(4 * 7 + 3).tail(d / 2));
  CHECK(pe.row(1 * 7 + 3).head(d / 2) != pe.row(4 * 7 + 3).head(d / 2));

  CHECK(code_of([] { posenc_2d<double>(2, 2, 6); }) == Errc::InvalidWidth);
}

TEST_CASE("posenc_2d is injective up to 64x64") {
  const Mat<double> pe = posenc_2d<double>(64, 64, 16);
  for (Index a = 0; a < pe.rows(); ++a) {
    for (Index b = a + 1; b < pe.rows(); ++b) {
      REQUIRE((pe.row(a) - pe.row(b)).cwiseAbs().maxCoeff() > 1e-9);
    }
  }
}

TEST_CASE("output has n_queries rows for any grid") {
  for (Index side : {16, 32}) {
    ResamplerConfig cfg{16, 256, 1, side, side, 1};
    const auto p = ResamplerParams<double>::init(cfg);
    const auto out = resample(random_features(cfg, 2), p, cfg);
    CHECK(out.rows() == 256);
    CHECK(out.cols() == 16);
  }
}

TEST_CASE("attention rows sum to one") {
  for (Index heads : {1, 2, 4}) {
    ResamplerConfig cfg{16, 9, heads, 5, 4, 3};
    const auto p = ResamplerParams<double>::init(cfg);
    Mat<double> x = random_features(cfg, 4) * 50.0;
    for (const auto& probs : attention_weights(x, p, cfg)) {
      REQUIRE(probs.rows() == 9);
      REQUIRE(probs.cols() == 20);
      CHECK((probs.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-9);
      CHECK(probs.minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("zero query and key projections give uniform attention") {
  const ResamplerConfig cfg{8, 4, 1, 3, 2, 5};
  auto p = ResamplerParams<double>::init(cfg);
  p.w_q.setZero();
  p.w_k.setZero();
  const Mat<double> x = random_features(cfg, 6);
  const auto probs = attention_weights(x, p, cfg).front();
  CHECK((probs.array() - 1.0 / 6.0).abs().maxCoeff() <= 1e-15);
  const Mat<double> out = resample(x, p, cfg);
  const Mat<double> expected = (x * p.w_v).colwise().mean() * p.w_o;
  for (Index r = 0; r < out.rows(); ++r) {
    CHECK((out.row(r) - expected).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("joint permutation of keys and encodings leaves output unchanged") {
  const ResamplerConfig cfg{16, 16, 2, 6, 5, 7};
  const auto p = ResamplerParams<double>::init(cfg);
  const Mat<double> x = random_features(cfg, 8);
  const Mat<double> pos = posenc_2d<double>(cfg.grid_h, cfg.grid_w, cfg.d_model);
  const auto base = resampler_forward<double>(x, pos, p, cfg);

  std::vector<Index> perm(static_cast<std::size_t>(cfg.n_keys()));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(9);
  std::shuffle(perm.begin(), perm.end(), rng);
  Mat<double> xp(x.rows(), x.cols()), posp(pos.rows(), pos.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    xp.row(Index(i)) = x.row(perm[i]);
    posp.row(Index(i)) = pos.row(perm[i]);
  }
  const auto moved = resampler_forward<double>(xp, posp, p, cfg);
  CHECK((moved.output - base.output).cwiseAbs().maxCoeff() <= 1e-12);
  for (std::size_t h = 0; h < base.probs.size(); ++h) {
    for (std::size_t i = 0; i < perm.size(); ++i) {
      CHECK((moved.probs[h].col(Index(i)) - base.probs[h].col(perm[i])).cwiseAbs().maxCoeff() <=
            1e-15);
    }
  }
}

TEST_CASE("shape and numeric errors") {
  const ResamplerConfig cfg = small_cfg();
  const auto p = ResamplerParams<double>::init(cfg);
  CHECK(code_of([&] { resample(Mat<double>(Mat<double>::Zero(8, 16)), p, cfg); }) ==
        Errc::ShapeError);
  CHECK(code_of([&] { resample(Mat<double>(Mat<double>::Zero(9, 12)), p, cfg); }) ==
        Errc::ShapeError);
  Mat<double> x = random_features(cfg, 1);
  x(2, 3) = std::nan("");
  CHECK(code_of([&] { resample(x, p, cfg); }) == Errc::NumericalError);
  x(2, 3) = INFINITY;
  CHECK(code_of([&] { resample(x, p, cfg); }) == Errc::NumericalError);
  CHECK_THROWS_AS((ResamplerConfig{12, 4, 2, 3, 3, 0}.validate()), Error);
  CHECK_THROWS_AS((ResamplerConfig{16, 5, 1, 3, 3, 0}.validate()), Error);
  CHECK_THROWS_AS((ResamplerConfig{16, 4, 1, 0, 3, 0}.validate()), Error);
}

TEST_CASE("analytic gradients match central differences") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto report = grad_check(small_cfg(seed));
    CAPTURE(seed);
    CHECK(report.max_rel_error < 1e-4);
    CHECK(report.entries == 4 * 16 + 4 * 16 * 16);
  }
  const auto multi = grad_check(ResamplerConfig{16, 9, 2, 3, 4, 11});
  CHECK(multi.max_rel_error < 1e-4);
}

TEST_CASE("backward agrees with a hand-rolled difference quotient") {
  const ResamplerConfig cfg = small_cfg(42);
  auto p = ResamplerParams<double>::init(cfg);
  const Mat<double> x = random_features(cfg, 43);
  const auto f = resampler_forward(x, p, cfg);
  const auto g = resampler_backward(f, x, p, cfg, Mat<double>(2.0 * f.output));
  const double h = 1e-6;
  auto probe = [&](Mat<double>& t, const Mat<double>& gt, Index i) {
    const double keep = t.data()[i];
    t.data()[i] = keep + h;
    const double up = loss_of(x, p, cfg);
    t.data()[i] = keep - h;
    const double down = loss_of(x, p, cfg);
    t.data()[i] = keep;
    const double numeric = (up - down) / (2 * h);
    CHECK(gt.data()[i] == doctest::Approx(numeric).epsilon(1e-5).scale(1e-8));
  };
  for (Index i : {0, 17, 63}) probe(p.queries, g.queries, i);
  for (Index i : {0, 100, 255}) {
    probe(p.w_q, g.w_q, i);
    probe(p.w_k, g.w_k, i);
    probe(p.w_v, g.w_v, i);
    probe(p.w_o, g.w_o, i);
  }
}

TEST_CASE("gradient special cases") {
  const ResamplerConfig cfg = small_cfg(1);
  const auto p = ResamplerParams<double>::init(cfg);
  const Mat<double> zero = Mat<double>::Zero(cfg.n_keys(), cfg.d_model);
  const auto fz = resampler_forward(zero, p, cfg);
  const auto gz = resampler_backward(fz, zero, p, cfg, Mat<double>(2.0 * fz.output));
  CHECK(gz.w_v.cwiseAbs().maxCoeff() == 0.0);

  const Mat<double> x = random_features(cfg, 2);
  const auto f = resampler_forward(x, p, cfg);
  const Mat<double> d1 = 2.0 * f.output;
  const auto g1 = resampler_backward(f, x, p, cfg, d1);
  const auto g2 = resampler_backward(f, x, p, cfg, Mat<double>(2.0 * d1));
  const auto t1 = g1.tensors();
  const auto t2 = g2.tensors();
  for (std::size_t i = 0; i < t1.size(); ++i) {
    CHECK((*t2[i] - 2.0 * *t1[i]).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("adamw_step") {
  const ResamplerConfig cfg = small_cfg(3);
  SUBCASE("zero gradient without decay keeps parameters") {
    auto p = ResamplerParams<double>::init(cfg);
    const auto before = p;
    auto state = AdamWState<double>::zeros(cfg);
    AdamWHyper hp;
    hp.weight_decay = 0;
    adamw_step(p, ResamplerParams<double>::zeros_like(cfg), state, hp);
    CHECK(p.queries == before.queries);
    CHECK(p.w_o == before.w_o);
  }
  SUBCASE("global norm is clipped before the moments") {
    auto p = ResamplerParams<double>::init(cfg);
    auto g = ResamplerParams<double>::zeros_like(cfg);
    g.w_q(0, 0) = 2.0;
    auto state = AdamWState<double>::zeros(cfg);
    const double norm = adamw_step(p, g, state, AdamWHyper{});
    CHECK(norm == doctest::Approx(2.0));
    CHECK(state.m.w_q(0, 0) == doctest::Approx((1 - 0.9) * 1.0));
    CHECK(state.v.w_q(0, 0) == doctest::Approx((1 - 0.98) * 1.0));
  }
  SUBCASE("first step moves each entry by about lr against its gradient sign") {
    auto p = ResamplerParams<double>::init(cfg);
    const auto before = p;
    auto g = ResamplerParams<double>::zeros_like(cfg);
    g.w_k(1, 2) = 0.3;
    g.w_k(2, 1) = -0.4;
    auto state = AdamWState<double>::zeros(cfg);
    AdamWHyper hp;
    hp.weight_decay = 0;
    hp.lr = 1e-2;
    adamw_step(p, g, state, hp);
    CHECK(p.w_k(1, 2) - before.w_k(1, 2) ==
          doctest::Approx(-1e-2 * 0.3 / (0.3 + 1e-6)).epsilon(1e-9));
    CHECK(p.w_k(2, 1) - before.w_k(2, 1) ==
          doctest::Approx(1e-2 * 0.4 / (0.4 + 1e-6)).epsilon(1e-9));
    CHECK(p.w_k(0, 0) == before.w_k(0, 0));
  }
  SUBCASE("decoupled weight decay") {
    auto p = ResamplerParams<double>::init(cfg);
    const auto before = p;
    auto state = AdamWState<double>::zeros(cfg);
    AdamWHyper hp;
    hp.lr = 0.1;
    hp.weight_decay = 0.5;
    adamw_step(p, ResamplerParams<double>::zeros_like(cfg), state, hp);
    CHECK((p.w_v - 0.95 * before.w_v).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("non-finite gradients are rejected") {
    auto p = ResamplerParams<double>::init(cfg);
    auto g = ResamplerParams<double>::zeros_like(cfg);
    g.queries(0, 0) = std::nan("");
    auto state = AdamWState<double>::zeros(cfg);
    CHECK(code_of([&] { adamw_step(p, g, state, AdamWHyper{}); }) == Errc::NumericalError);
  }
}

TEST_CASE("single precision instantiation") {
  const ResamplerConfig cfg{8, 4, 2, 2, 3, 0};
  const auto p = ResamplerParams<float>::init(cfg);
  const Mat<float> x = random_features(cfg, 1).cast<float>();
  const auto probs = attention_weights(x, p, cfg);
  CHECK((probs[0].rowwise().sum().array() - 1.0f).abs().maxCoeff() <= 1e-6f);
  const auto pd = ResamplerParams<double>::init(cfg);
  const Mat<double> out_d = resample(random_features(cfg, 1), pd, cfg);
  CHECK((resample(x, p, cfg).cast<double>() - out_d).cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("overfit demo") {
  const DemoResult a = overfit_demo(DemoConfig{});
  CHECK_FALSE(a.diverged);
  CHECK(a.losses.size() == 2001);
  CHECK(a.ratio() <= 0.01);
  const DemoResult b = overfit_demo(DemoConfig{});
  CHECK(a.losses == b.losses);

  DemoConfig frozen;
  frozen.peak_lr = 0;
  frozen.min_lr = 0;
  frozen.steps = 50;
  const DemoResult flat = overfit_demo(frozen);
  for (double l : flat.losses) CHECK(l == flat.losses.front());
}
