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

// Batch drivers behind the command-line tool. Each stage reads JSON Lines,
// processes records independently (optionally across worker threads), and
// merges results back in input order so output never depends on `workers`.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vlprep/corpus_filters.hpp"
#include "vlprep/packer.hpp"
#include "vlprep/tokenizer.hpp"

namespace vlprep {

struct PipelineConfig {
  std::vector<std::string> inputs;
  std::string output;
  std::string report;
  std::string verdicts;  // clean only; defaults to <output>.verdicts.jsonl
  FilterConfig filter;
  PackerConfig packer;
  std::string tokenizer = "mock";
  bool lenient_markup = false;
  int workers = 1;

  /// Throws Errc::InvalidConfig if paths collide or workers < 1.
  void validate() const;
};

/// Reads a JSON config file (sections "filter", "packer", plus "tokenizer",
/// "workers", "lenient_markup") on top of `base`.
void apply_config_file(PipelineConfig& base, const std::string& path);

struct RunReport {
  std::string command;
  std::int64_t records_in = 0;
  std::int64_t records_kept = 0;
  std::map<std::string, std::int64_t> drops;
  std::int64_t errors = 0;
  std::vector<std::string> error_samples;  // first few messages
  std::int64_t sequences_out = 0;
  std::optional<double> mean_fill;
  double wall_time_s = 0.0;
  nlohmann::json extra = nlohmann::json::object();

  std::int64_t dropped() const;
  /// records_in == kept + Σ drops + errors
  bool balanced() const { return records_in == records_kept + dropped() + errors; }
  nlohmann::json to_json() const;
};

std::unique_ptr<Tokenizer> make_tokenizer(const std::string& name);

// Stream-level stages.
RunReport clean_stream(std::istream& in, std::ostream& kept, std::ostream& verdicts,
                       const FilterConfig& cfg, int workers = 1);
RunReport build_task_stream(std::istream& in, std::ostream& out, const Tokenizer& tok,
                            int workers = 1, bool lenient_markup = false);
RunReport build_chat_stream(std::istream& in, std::ostream& out, const Tokenizer& tok,
                            int workers = 1);
RunReport pack_stream(std::istream& in, std::ostream& out, const PackerConfig& cfg);
RunReport check_markup_stream(std::istream& in, std::ostream& out, bool lenient,
                              int workers = 1);
nlohmann::json stats_stream(std::istream& in, const PackerConfig& cfg);

// File-level commands: open inputs/outputs, run the stage, write the report.
// Unreadable inputs or unwritable outputs raise Errc::IOFailure.
RunReport cmd_clean(const PipelineConfig& cfg);
RunReport cmd_build_task(const PipelineConfig& cfg);
RunReport cmd_build_chat(const PipelineConfig& cfg);
RunReport cmd_pack(const PipelineConfig& cfg);
RunReport cmd_check_markup(const PipelineConfig& cfg);
nlohmann::json cmd_stats(const PipelineConfig& cfg);

}  // namespace vlprep
