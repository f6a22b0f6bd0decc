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

// Fixed-length sequence packing of same-task samples.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vlprep {

struct Sample {
  std::string id;
  std::string task;
  std::int64_t token_len = 1;
  std::int64_t n_images = 0;
};

struct PackedSequence {
  std::string task;
  std::vector<std::string> sample_ids;
  std::int64_t total_len = 0;
};

struct PackerConfig {
  std::int64_t max_len = 2048;
  /// 256 resampled features plus the <img> and </img> delimiters.
  std::int64_t image_cost = 258;

  void validate() const;
};

std::int64_t effective_len(const Sample& s, const PackerConfig& cfg);

struct PackResult {
  std::vector<PackedSequence> sequences;  // in the order they were opened
  std::vector<std::string> dropped;       // oversize samples, arrival order
};

/// Next-fit per task: each sample goes into its task's most recently opened
/// sequence, or opens a new one. Samples are never split or reordered.
PackResult pack(const std::vector<Sample>& samples, const PackerConfig& cfg);

struct TaskUsage {
  std::int64_t sequences = 0;
  std::int64_t samples = 0;
  std::int64_t tokens = 0;
};

struct UtilizationReport {
  std::map<std::string, TaskUsage> per_task;
  std::int64_t sequences = 0;
  std::int64_t tokens = 0;
  /// Σ total_len / (sequences · max_len); empty when there are no sequences.
  std::optional<double> mean_fill;
};

UtilizationReport utilization_report(const std::vector<PackedSequence>& sequences,
                                     const PackerConfig& cfg);

}  // namespace vlprep
