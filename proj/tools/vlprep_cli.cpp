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

// vlprep: command-line front end for the corpus, sample-building, packing,
// schedule and adapter-verification tools.
//
// Exit codes: 0 success, 1 usage or config error, 2 I/O error.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "vlprep/error.hpp"
#include "vlprep/jsonl.hpp"
#include "vlprep/pipeline.hpp"
#include "vlprep/resampler.hpp"
#include "vlprep/schedules.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitIO = 2;

void print_summary(const vlprep::RunReport& r) {
  std::cerr << r.command << ": in=" << r.records_in << " kept=" << r.records_kept
            << " dropped=" << r.dropped() << " errors=" << r.errors;
  if (r.sequences_out > 0) std::cerr << " sequences=" << r.sequences_out;
  if (r.mean_fill) std::cerr << " fill=" << *r.mean_fill;
  std::cerr << '\n';
}

// Writes `body` to `path`, or stdout when the path is empty or "-".
void emit(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-") {
    std::cout << body;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw vlprep::Error(vlprep::Errc::IOFailure, "cannot write " + path);
  f << body;
  if (!f) throw vlprep::Error(vlprep::Errc::IOFailure, "failed writing " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vlprep: vision-language training data and adapter tools"};
  app.require_subcommand(1);

  vlprep::PipelineConfig cfg;
  std::string config_path;
  int cli_workers = 0;
  auto add_io = [&](CLI::App* sub) {
    sub->add_option("--input", cfg.inputs, "input JSON Lines file(s)")->required();
    sub->add_option("--output", cfg.output, "output path (default stdout)");
    sub->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--workers", cli_workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--report", cfg.report, "write the run report (JSON) here");
  };

  auto* clean = app.add_subcommand("clean", "filter image-text / document records");
  add_io(clean);
  clean->add_option("--verdicts", cfg.verdicts, "verdict report path");

  auto* build_task = app.add_subcommand("build-task", "render multi-task samples with masks");
  add_io(build_task);
  auto* build_chat = app.add_subcommand("build-chat", "render ChatML dialogues with masks");
  add_io(build_chat);
  auto* pack = app.add_subcommand("pack", "pack built samples into fixed-length sequences");
  add_io(pack);
  auto* stats = app.add_subcommand("stats", "summarize a JSON Lines file");
  add_io(stats);
  auto* check = app.add_subcommand("check-markup", "validate grounding markup line by line");
  add_io(check);
  check->add_flag("--lenient", cfg.lenient_markup, "accept region tags without <ref>");

  auto* lr_curve = app.add_subcommand("lr-curve", "dump (step, lr) for a stage preset");
  std::string stage = "pretrain";
  std::string curve_out;
  std::int64_t every = 1;
  lr_curve->add_option("--stage", stage, "pretrain | multitask | sft");
  lr_curve->add_option("--out,--output", curve_out, "CSV path (default stdout)");
  lr_curve->add_option("--every", every, "emit every Nth step")->check(CLI::PositiveNumber);

  vlprep::ResamplerConfig rc{16, 4, 1, 3, 3, 0};
  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--d-model", rc.d_model, "embedding width");
    sub->add_option("--queries", rc.n_queries, "learnable query count (perfect square)");
    sub->add_option("--heads", rc.n_heads, "attention heads");
    sub->add_option("--grid-h", rc.grid_h, "patch grid rows");
    sub->add_option("--grid-w", rc.grid_w, "patch grid columns");
    sub->add_option("--seed", rc.seed, "RNG seed");
  };
  auto* grad = app.add_subcommand("grad-check", "finite-difference check of adapter gradients");
  add_model(grad);
  int n_seeds = 1;
  std::string grad_out;
  grad->add_option("--seeds", n_seeds, "check seeds seed..seed+N-1")->check(CLI::PositiveNumber);
  grad->add_option("--output", grad_out, "report path (default stdout)");

  auto* demo = app.add_subcommand("demo-resampler", "overfit the adapter on a toy regression");
  vlprep::DemoConfig dc;
  std::string demo_out, demo_report;
  demo->add_option("--seed", dc.model.seed, "RNG seed");
  demo->add_option("--steps", dc.steps, "optimizer steps")->check(CLI::PositiveNumber);
  demo->add_option("--lr", dc.peak_lr, "peak learning rate");
  demo->add_option("--output", demo_out, "loss curve CSV (default stdout)");
  demo->add_option("--report", demo_report, "plain-text summary (default stderr)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (!config_path.empty()) vlprep::apply_config_file(cfg, config_path);
    if (cli_workers > 0) cfg.workers = cli_workers;  // flag beats config file

    if (*clean) {
      print_summary(vlprep::cmd_clean(cfg));
    } else if (*build_task) {
      print_summary(vlprep::cmd_build_task(cfg));
    } else if (*build_chat) {
      print_summary(vlprep::cmd_build_chat(cfg));
    } else if (*pack) {
      print_summary(vlprep::cmd_pack(cfg));
    } else if (*check) {
      print_summary(vlprep::cmd_check_markup(cfg));
    } else if (*stats) {
      emit(cfg.output, vlprep::cmd_stats(cfg).dump(2) + "\n");
    } else if (*lr_curve) {
      const auto parsed = vlprep::stage_from_name(stage);
      if (!parsed) throw vlprep::Error(vlprep::Errc::InvalidConfig, "unknown stage " + stage);
      const auto sched = vlprep::stage_preset(*parsed).schedule();
      std::ostringstream csv;
      csv << std::setprecision(17) << "step,lr\n";
      for (std::int64_t s = 0; s <= sched.total_steps; s += every) {
        csv << s << ',' << vlprep::lr_at(sched, s) << '\n';
      }
      if (sched.total_steps % every != 0) {
        csv << sched.total_steps << ',' << vlprep::lr_at(sched, sched.total_steps) << '\n';
      }
      emit(curve_out, csv.str());
    } else if (*grad) {
      std::ostringstream out;
      out << std::setprecision(6);
      double worst = 0.0;
      for (int i = 0; i < n_seeds; ++i) {
        auto c = rc;
        c.seed = rc.seed + static_cast<std::uint64_t>(i);
        const auto r = vlprep::grad_check(c);
        worst = std::max(worst, r.max_rel_error);
        out << "seed " << c.seed << ": max relative error " << std::scientific
            << r.max_rel_error << std::defaultfloat << " over " << r.entries
            << " entries (worst " << r.worst_tensor << "[" << r.worst_index << "])\n";
      }
      out << "max relative error " << std::scientific << worst << '\n';
      emit(grad_out, out.str());
    } else if (*demo) {
      const auto result = vlprep::overfit_demo(dc);
      std::ostringstream csv;
      csv << std::setprecision(17) << "step,loss\n";
      for (std::size_t s = 0; s < result.losses.size(); ++s) {
        csv << s << ',' << result.losses[s] << '\n';
      }
      emit(demo_out, csv.str());
      std::ostringstream summary;
      summary << "initial loss " << result.losses.front() << ", final loss "
              << result.losses.back() << ", ratio " << result.ratio()
              << (result.diverged ? " (diverged)" : "") << '\n';
      if (demo_report.empty()) {
        std::cerr << summary.str();
      } else {
        emit(demo_report, summary.str());
      }
      if (result.diverged) return kExitConfig;
    }
  } catch (const vlprep::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == vlprep::Errc::IOFailure ? kExitIO : kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
