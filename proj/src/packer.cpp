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

#include "vlprep/packer.hpp"

#include <unordered_map>

#include "vlprep/error.hpp"

namespace vlprep {

void PackerConfig::validate() const {
  if (image_cost < 0 || max_len <= image_cost) {
    throw Error(Errc::InvalidConfig, "packer needs max_len > image_cost >= 0");
  }
}

std::int64_t effective_len(const Sample& s, const PackerConfig& cfg) {
  return s.token_len + s.n_images * cfg.image_cost;
}

PackResult pack(const std::vector<Sample>& samples, const PackerConfig& cfg) {
  cfg.validate();
  PackResult out;
  std::unordered_map<std::string, std::size_t> open;  // task -> sequence index
  for (const auto& s : samples) {
    if (s.token_len < 1 || s.n_images < 0) {
      throw Error(Errc::InvalidConfig, "sample " + s.id + " has invalid lengths");
    }
    const std::int64_t len = effective_len(s, cfg);
    if (len > cfg.max_len) {
      out.dropped.push_back(s.id);
      continue;
    }
    auto it = open.find(s.task);
    if (it == open.end() || out.sequences[it->second].total_len + len > cfg.max_len) {
      out.sequences.push_back({s.task, {}, 0});
      open[s.task] = out.sequences.size() - 1;
      it = open.find(s.task);
    }
    auto& seq = out.sequences[it->second];
    seq.sample_ids.push_back(s.id);
    seq.total_len += len;
  }
  return out;
}

UtilizationReport utilization_report(const std::vector<PackedSequence>& sequences,
                                     const PackerConfig& cfg) {
  UtilizationReport r;
  for (const auto& seq : sequences) {
    auto& u = r.per_task[seq.task];
    ++u.sequences;
    u.samples += static_cast<std::int64_t>(seq.sample_ids.size());
    u.tokens += seq.total_len;
    ++r.sequences;
    r.tokens += seq.total_len;
  }
  if (r.sequences > 0) {
    r.mean_fill = static_cast<double>(r.tokens) /
                  (static_cast<double>(r.sequences) * static_cast<double>(cfg.max_len));
  }
  return r;
}

}  // namespace vlprep
