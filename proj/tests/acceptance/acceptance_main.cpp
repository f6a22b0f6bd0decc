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

// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "vlprep/chat_builder.hpp"
#include "vlprep/corpus_filters.hpp"
#include "vlprep/grounding_markup.hpp"
#include "vlprep/packer.hpp"
#include "vlprep/resampler.hpp"
#include "vlprep/schedules.hpp"
#include "vlprep/jsonl.hpp"

#include <fstream>

using namespace vlprep;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void expect(Outcome& o, bool cond, const std::string& what) {
  if (!cond && o.pass) {
    o.pass = false;
    o.detail = what;
  }
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// 1 -------------------------------------------------------------------------
Outcome markup_golden() {
  Outcome o;
  const auto t0 = Clock::now();
  for (const auto& fx : fixtures::multitask_samples()) {
    const std::string name = fx.name;
    const AnnotatedText a = build_task_sample(fx.task, fx.fields);
    expect(o, a.text == fx.expected, name + ": rendering differs");
    std::string target;
    for (const auto& piece : a.supervised_pieces()) target += piece;
    expect(o, target == fx.target, name + ": supervised part differs");
    const Markup parsed = parse_markup(fx.expected);
    expect(o, emit_markup(parsed) == fx.expected, name + ": parse/emit differs");
    if (fx.fields.markup) {
      const Markup body = parse_markup(emit_markup(*fx.fields.markup));
      expect(o, body == *fx.fields.markup, name + ": markup AST not recovered");
    }
    if (fx.fields.regions) {
      std::string regions;
      for (const auto& r : *fx.fields.regions) regions += emit_region(r);
      expect(o, parse_regions(regions) == *fx.fields.regions, name + ": regions not recovered");
    }
  }
  const double t = seconds_since(t0);
  expect(o, t < 1.0, "runtime " + std::to_string(t) + " s");
  if (o.pass) o.detail = "7 samples byte-exact, " + std::to_string(t) + " s";
  return o;
}

// 2 -------------------------------------------------------------------------
Outcome round_trips() {
  Outcome o;
  std::mt19937_64 rng(2024);
  int ast_fail = 0, box_fail = 0;
  for (int i = 0; i < 10000; ++i) {
    const Markup m = oracle::random_markup(rng);
    try {
      if (parse_markup(emit_markup(m)) != m) ++ast_fail;
    } catch (const Error&) {
      ++ast_fail;
    }
  }
  std::uniform_int_distribution<int> extent(1, 10000);
  for (int i = 0; i < 10000; ++i) {
    const auto g = std::get<GridBox>(oracle::random_region(rng, false));
    if (normalize_box(denormalize_box(g, extent(rng), extent(rng))) != g) ++box_fail;
  }
  expect(o, ast_fail == 0, std::to_string(ast_fail) + " AST failures");
  expect(o, box_fail == 0, std::to_string(box_fail) + " box failures");
  if (o.pass) o.detail = "10000 ASTs, 10000 boxes, 0 failures";
  return o;
}

// 3 -------------------------------------------------------------------------
Outcome mask_correctness() {
  Outcome o;
  const AnnotatedText a = build_chatml(fixtures::chatml_example());
  expect(o, a.text == fixtures::chatml_example_text(), "fixture text differs");
  expect(o, a.supervised_pieces() == fixtures::chatml_example_supervised(),
         "fixture supervision differs");
  const MockTokenizer tok;
  std::mt19937_64 rng(33);
  int failures = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto plain = oracle::random_dialogue(rng);
    const auto expected = oracle::render_chatml(plain);
    const AnnotatedText got = build_chatml(oracle::to_turns(plain));
    std::vector<std::pair<std::size_t, std::size_t>> sup;
    for (const auto& s : got.spans) {
      if (s.supervised) sup.emplace_back(s.begin, s.end);
    }
    const auto m = project_mask(got, tok);
    if (got.text != expected.text || sup != expected.supervised || !got.partitions_text() ||
        tok.decode(m.ids) != got.text) {
      ++failures;
    }
  }
  expect(o, failures == 0, std::to_string(failures) + " dialogue failures");
  if (o.pass) o.detail = "fixture exact, 1000 random dialogues, 0 failures";
  return o;
}

// 4 -------------------------------------------------------------------------
Outcome packing() {
  Outcome o;
  const PackerConfig cfg;
  std::mt19937_64 rng(44);
  std::uniform_int_distribution<int> count(0, 60), task(0, 3), images(0, 4);
  std::uniform_int_distribution<std::int64_t> len(1, 2100);
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Sample> samples;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      samples.push_back({std::to_string(i), "t" + std::to_string(task(rng)), len(rng),
                         images(rng)});
    }
    const auto r = pack(samples, cfg);
    std::map<std::string, const Sample*> by_id;
    for (const auto& s : samples) by_id[s.id] = &s;
    std::set<std::string> seen;
    std::int64_t kept = 0, packed = 0;
    bool ok = true;
    for (const auto& seq : r.sequences) {
      std::int64_t sum = 0;
      for (const auto& id : seq.sample_ids) {
        ok &= seen.insert(id).second && by_id.at(id)->task == seq.task;
        sum += effective_len(*by_id.at(id), cfg);
      }
      ok &= sum == seq.total_len && seq.total_len <= cfg.max_len;
      packed += seq.total_len;
    }
    for (const auto& id : r.dropped) {
      ok &= seen.insert(id).second && effective_len(*by_id.at(id), cfg) > cfg.max_len;
    }
    for (const auto& s : samples) {
      const auto e = effective_len(s, cfg);
      if (e <= cfg.max_len) kept += e;
    }
    ok &= seen.size() == samples.size() && kept == packed;
    if (!ok) ++violations;
  }
  expect(o, violations == 0, std::to_string(violations) + " invariant violations");

  int instances = 0, bound_fail = 0;
  std::uniform_int_distribution<int> small(1, 10);
  std::uniform_int_distribution<std::int64_t> item(1, 2048);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::int64_t> lens(small(rng));
    std::vector<Sample> samples;
    for (std::size_t i = 0; i < lens.size(); ++i) {
      lens[i] = item(rng);
      samples.push_back({std::to_string(i), "t", lens[i], 0});
    }
    const int got = static_cast<int>(pack(samples, cfg).sequences.size());
    const int best = oracle::optimal_bins(lens, cfg.max_len);
    ++instances;
    if (got > 2 * best || got < best) ++bound_fail;
  }
  expect(o, bound_fail == 0, std::to_string(bound_fail) + " instances above 2x optimum");
  if (o.pass) {
    o.detail = "1000 random sets conserved; " + std::to_string(instances) +
               " instances (n<=10) within 2x optimum";
  }
  return o;
}

// 5 -------------------------------------------------------------------------
Outcome resampler() {
  Outcome o;
  const auto t0 = Clock::now();
  for (Index side : {16, 32}) {
    const ResamplerConfig cfg{16, 256, 1, side, side, 5};
    const auto p = ResamplerParams<double>::init(cfg);
    const Mat<double> x = random_features(cfg, 6);
    const auto f = resampler_forward(x, p, cfg);
    expect(o, f.output.rows() == 256, "output rows for grid " + std::to_string(side));
    const double dev = (f.probs[0].rowwise().sum().array() - 1.0).abs().maxCoeff();
    expect(o, dev <= 1e-9, "row-sum deviation " + std::to_string(dev));
  }

  const ResamplerConfig cfg{16, 16, 1, 7, 6, 8};
  const auto p = ResamplerParams<double>::init(cfg);
  const Mat<double> x = random_features(cfg, 9);
  const Mat<double> pos = posenc_2d<double>(cfg.grid_h, cfg.grid_w, cfg.d_model);
  std::vector<Index> perm(static_cast<std::size_t>(cfg.n_keys()));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(10);
  std::shuffle(perm.begin(), perm.end(), rng);
  Mat<double> xp(x.rows(), x.cols()), pp(pos.rows(), pos.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    xp.row(Index(i)) = x.row(perm[i]);
    pp.row(Index(i)) = pos.row(perm[i]);
  }
  const double perm_dev = (resampler_forward<double>(xp, pp, p, cfg).output -
                           resampler_forward<double>(x, pos, p, cfg).output)
                              .cwiseAbs()
                              .maxCoeff();
  expect(o, perm_dev <= 1e-12, "permutation deviation " + std::to_string(perm_dev));

  double worst = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    worst = std::max(worst, grad_check(ResamplerConfig{16, 4, 1, 3, 3, seed}).max_rel_error);
  }
  expect(o, worst < 1e-4, "grad_check error " + std::to_string(worst));
  const double t = seconds_since(t0);
  expect(o, t < 30.0, "runtime " + std::to_string(t) + " s");
  if (o.pass) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "256 rows at 16x16 and 32x32; perm dev %.1e; grad rel err %.2e; %.2f s",
                  perm_dev, worst, t);
    o.detail = buf;
  }
  return o;
}

// 6 -------------------------------------------------------------------------
Outcome overfit() {
  Outcome o;
  const DemoResult a = overfit_demo(DemoConfig{});
  const DemoResult b = overfit_demo(DemoConfig{});
  expect(o, !a.diverged, "diverged");
  expect(o, a.losses.size() <= 2001, "more than 2000 steps");
  expect(o, a.ratio() <= 0.01, "ratio " + std::to_string(a.ratio()));
  expect(o, a.losses == b.losses, "runs differ");
  if (o.pass) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "loss %.4g -> %.4g (ratio %.2e), deterministic",
                  a.losses.front(), a.losses.back(), a.ratio());
    o.detail = buf;
  }
  return o;
}

// 7 -------------------------------------------------------------------------
Outcome schedules() {
  Outcome o;
  const ScheduleConfig c = stage_preset(Stage::pretrain).schedule();
  expect(o, lr_at(c, 500) == 2e-4, "lr(500) != 2e-4");
  expect(o, std::abs(lr_at(c, 50000) - 1e-6) <= 1e-12, "lr(50000) != 1e-6");
  const double w = static_cast<double>(c.warmup_steps);
  expect(o,
         std::abs(schedule_detail::warmup_lr(c, w) - schedule_detail::cosine_lr(c, w)) <= 1e-15,
         "discontinuous at warmup");
  std::ifstream in(VLPREP_TEST_DATA_DIR "/golden/stage_presets.json");
  expect(o, in.good(), "golden file missing");
  if (in.good()) {
    const auto golden = nlohmann::json::parse(in);
    for (Stage s : {Stage::pretrain, Stage::multitask, Stage::sft}) {
      expect(o, jsonl::stage_to_json(stage_preset(s)) == golden.at(std::string(stage_name(s))),
             std::string(stage_name(s)) + " preset differs from golden");
    }
  }
  if (o.pass) o.detail = "endpoints exact, continuous, 3 presets match golden";
  return o;
}

// 8 -------------------------------------------------------------------------
Outcome filters() {
  Outcome o;
  FilterConfig cfg;
  cfg.clip_thresholds["laion_en"] = 0.3;
  cfg.banned_patterns = {"click here*"};
  auto rec = [](std::string text, int w = 512, int h = 512, double clip = 0.35) {
    CorpusRecord r;
    r.id = "x";
    r.dataset = "laion_en";
    r.text = std::move(text);
    r.image_width = w;
    r.image_height = h;
    r.clip_score = clip;
    r.language = Language::en;
    return r;
  };
  const std::vector<std::pair<CorpusRecord, RuleId>> pairs = {
      {rec("a dog on the grass", 1000, 300), RuleId::R1_aspect},
      {rec("a dog on the grass", 200, 200), RuleId::R2_small},
      {rec("a dog on the grass", 512, 512, 0.1), RuleId::R3_clip},
      {rec("Привет, собака"), RuleId::R4_script},
      {rec("🙂 nice"), RuleId::R5_emoji},
      {rec("hi"), RuleId::R6_length},
      {rec("a nice <b photo of a dog"), RuleId::R7_html},
      {rec("click here to buy"), RuleId::R8_pattern},
  };
  int checked = 0;
  for (const auto& [r, rule] : pairs) {
    const auto v = filter_pair(r, cfg);
    expect(o, v.rule == rule, "expected " + std::string(rule_name(rule)));
    ++checked;
  }
  CorpusRecord tagged = rec("a photo of <PERSON> smiling");
  tagged.dataset = "cc12m";
  expect(o, check_special_tags(tagged, cfg).rule == RuleId::T_special_tag, "special tag");
  CorpusRecord latin = rec("the word māori in a document");
  expect(o, filter_document_text(latin, SourceKind::pdf, cfg).rule == RuleId::P_latin_ext,
         "pdf Latin-Extended");
  expect(o, filter_document_text(latin, SourceKind::html, cfg).kept(),
         "html must keep Latin-Extended");
  CorpusRecord pua = rec("glyph  garbage text");
  expect(o, filter_document_text(pua, SourceKind::html, cfg).rule == RuleId::P_pua, "PUA");
  checked += 4;
  if (o.pass) o.detail = std::to_string(checked) + " rule fixtures, pdf/html diverge on U+0101";
  return o;
}

// 9 -------------------------------------------------------------------------
Outcome denesting() {
  Outcome o;
  // every interval [b, e) on a 4-character caption, with 1 or 2 boxes
  std::vector<GroundedSpan> kinds;
  for (std::size_t b = 0; b < 4; ++b) {
    for (std::size_t e = b + 1; e <= 4; ++e) {
      for (std::size_t boxes : {1, 2}) {
        kinds.push_back({b, e, std::vector<Region>(boxes, GridBox{0, 0, 1, 1})});
      }
    }
  }
  std::int64_t instances = 0, optimal = 0, bad = 0;
  std::vector<std::size_t> pick;
  std::function<void(std::size_t)> visit = [&](std::size_t from) {
    std::vector<GroundedSpan> spans;
    for (std::size_t k : pick) spans.push_back(kinds[k]);
    ++instances;
    const auto kept = denest_select(spans);

    // reference: visit in the documented order, keep what does not intersect
    std::vector<std::size_t> order(spans.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return oracle::ranks_before(spans[a], a, spans[b], b);
    });
    std::vector<std::size_t> ref;
    for (std::size_t i : order) {
      bool clash = false;
      for (std::size_t j : ref) {
        clash |= spans[i].begin < spans[j].end && spans[j].begin < spans[i].end;
      }
      if (!clash) ref.push_back(i);
    }
    std::sort(ref.begin(), ref.end(),
              [&](std::size_t a, std::size_t b) {
                return std::tie(spans[a].begin, a) < std::tie(spans[b].begin, b);
              });
    std::size_t total = 0;
    bool overlap = false;
    for (std::size_t a = 0; a < kept.size(); ++a) {
      total += spans[kept[a]].regions.size();
      for (std::size_t b = a + 1; b < kept.size(); ++b) {
        overlap |= spans_conflict(spans[kept[a]], spans[kept[b]]);
      }
    }
    if (overlap || kept != ref) ++bad;
    if (total == oracle::best_region_total(spans)) ++optimal;

    if (pick.size() == 5) return;
    for (std::size_t k = from; k < kinds.size(); ++k) {
      pick.push_back(k);
      visit(k);
      pick.pop_back();
    }
  };
  visit(0);
  const double rate = double(optimal) / double(instances);
  expect(o, bad == 0, std::to_string(bad) + " instances overlap or break the tie rule");
  char buf[160];
  std::snprintf(buf, sizeof buf, "%lld configurations, tie rule exact; greedy optimal on %.2f%% "
                "(target 90%%, %s; reported, not gated)",
                static_cast<long long>(instances), 100.0 * rate,
                rate >= 0.9 ? "met" : "not met");
  if (o.pass) o.detail = buf;
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"markup golden files", markup_golden},
      {"round-trip properties", round_trips},
      {"mask correctness", mask_correctness},
      {"packing", packing},
      {"resampler", resampler},
      {"overfit demo", overfit},
      {"schedules", schedules},
      {"filters", filters},
      {"GRIT de-nesting", denesting},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %zu. %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
    failed += o.pass ? 0 : 1;
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
