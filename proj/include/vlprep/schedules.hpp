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

// Learning-rate schedules and the three training-stage presets.

#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace vlprep {

struct ScheduleConfig {
  double peak_lr = 2e-4;
  double min_lr = 1e-6;
  std::int64_t warmup_steps = 500;
  std::int64_t total_steps = 50000;

  void validate() const;
};

/// Linear warmup from 0 to peak, then cosine decay reaching min_lr exactly at
/// total_steps.
double lr_at(const ScheduleConfig& c, std::int64_t step);

namespace schedule_detail {
// The two branches of lr_at, exposed for boundary checks.
double warmup_lr(const ScheduleConfig& c, double step);
double cosine_lr(const ScheduleConfig& c, double step);
}  // namespace schedule_detail

/// base · decay^depth_from_top. A decay of 0 means the encoder is frozen;
/// callers must not train it (the formula still returns `base` at depth 0).
double layer_lr(double base, std::int64_t depth_from_top, double decay);

enum class Stage { pretrain, multitask, sft };

std::string_view stage_name(Stage stage) noexcept;
std::optional<Stage> stage_from_name(std::string_view name) noexcept;

struct StageConfig {
  Stage stage = Stage::pretrain;
  int image_resolution = 224;
  int vit_seq_len = 256;
  int llm_seq_len = 512;
  int learnable_queries = 256;
  double peak_lr = 2e-4;
  double min_lr = 1e-6;
  std::int64_t warmup_steps = 500;
  std::int64_t total_steps = 50000;
  std::int64_t global_batch = 30720;
  int gradient_accumulation = 6;
  double vit_lr_decay = 0.95;
  double weight_decay = 0.05;
  double grad_clip = 1.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.98;
  double adam_eps = 1e-6;

  ScheduleConfig schedule() const {
    return {peak_lr, min_lr, warmup_steps, total_steps};
  }
};

StageConfig stage_preset(Stage stage);

struct PatchGrid {
  int h = 0;
  int w = 0;
  int count = 0;
};

PatchGrid patch_grid(int resolution, int stride = 14);

}  // namespace vlprep
