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

#include "vlprep/schedules.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "vlprep/error.hpp"

namespace vlprep {

void ScheduleConfig::validate() const {
  if (!(min_lr > 0.0 && min_lr <= peak_lr)) {
    throw Error(Errc::InvalidConfig, "schedule needs 0 < min_lr <= peak_lr");
  }
  if (warmup_steps < 0 || warmup_steps >= total_steps) {
    throw Error(Errc::InvalidConfig, "schedule needs 0 <= warmup_steps < total_steps");
  }
}

namespace schedule_detail {

double warmup_lr(const ScheduleConfig& c, double step) {
  return c.peak_lr * step / static_cast<double>(c.warmup_steps);
}

// Anchored at the peak so the warmup boundary is exact; equal to
// min + ½(peak − min)(1 + cos θ).
double cosine_lr(const ScheduleConfig& c, double step) {
  const double progress = (step - static_cast<double>(c.warmup_steps)) /
                          static_cast<double>(c.total_steps - c.warmup_steps);
  const double theta = std::numbers::pi * progress;
  return c.peak_lr - 0.5 * (c.peak_lr - c.min_lr) * (1.0 - std::cos(theta));
}

}  // namespace schedule_detail

double lr_at(const ScheduleConfig& c, std::int64_t step) {
  c.validate();
  if (step < 0 || step > c.total_steps) {
    throw Error(Errc::StepOutOfRange, "step " + std::to_string(step) +
                                          " outside [0, " +
                                          std::to_string(c.total_steps) + "]");
  }
  if (step < c.warmup_steps) {
    return schedule_detail::warmup_lr(c, static_cast<double>(step));
  }
  if (step == c.total_steps) return c.min_lr;
  return schedule_detail::cosine_lr(c, static_cast<double>(step));
}

double layer_lr(double base, std::int64_t depth_from_top, double decay) {
  if (depth_from_top < 0) {
    throw Error(Errc::InvalidDepth, "depth " + std::to_string(depth_from_top) +
                                        " must be non-negative");
  }
  return base * std::pow(decay, static_cast<double>(depth_from_top));
}

std::string_view stage_name(Stage stage) noexcept {
  switch (stage) {
    case Stage::pretrain: return "pretrain";
    case Stage::multitask: return "multitask";
    case Stage::sft: return "sft";
  }
  return "unknown";
}

std::optional<Stage> stage_from_name(std::string_view name) noexcept {
  for (Stage s : {Stage::pretrain, Stage::multitask, Stage::sft}) {
    if (stage_name(s) == name) return s;
  }
  return std::nullopt;
}

StageConfig stage_preset(Stage stage) {
  StageConfig c;
  c.stage = stage;
  switch (stage) {
    case Stage::pretrain:
      break;  // defaults are the first-stage values
    case Stage::multitask:
      c.image_resolution = 448;
      c.vit_seq_len = 1024;
      c.llm_seq_len = 2048;
      c.peak_lr = 5e-5;
      c.min_lr = 1e-5;
      c.warmup_steps = 400;
      c.total_steps = 19000;
      c.global_batch = 4096;
      c.gradient_accumulation = 8;
      break;
    case Stage::sft:
      c.image_resolution = 448;
      c.vit_seq_len = 1024;
      c.llm_seq_len = 2048;
      c.peak_lr = 1e-5;
      c.min_lr = 1e-6;
      c.warmup_steps = 3000;
      c.total_steps = 8000;
      c.global_batch = 128;
      c.gradient_accumulation = 8;
      c.vit_lr_decay = 0.0;  // visual encoder frozen
      break;
  }
  return c;
}

PatchGrid patch_grid(int resolution, int stride) {
  if (stride <= 0 || resolution <= 0 || resolution % stride != 0) {
    throw Error(Errc::InvalidResolution, "resolution " + std::to_string(resolution) +
                                             " is not a positive multiple of " +
                                             std::to_string(stride));
  }
  const int side = resolution / stride;
  return {side, side, side * side};
}

}  // namespace vlprep
