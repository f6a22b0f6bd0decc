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

#include "vlprep/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "vlprep/error.hpp"
#include "vlprep/jsonl.hpp"

namespace vlprep {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxErrorSamples = 20;

struct Line {
  std::int64_t number = 0;  // 1-based
  std::string text;
};

std::vector<Line> read_lines(std::istream& in) {
  std::vector<Line> lines;
  std::string s;
  for (std::int64_t n = 1; std::getline(in, s); ++n) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    if (s.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back({n, std::move(s)});
  }
  return lines;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads, contiguous chunks.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t threads =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), std::max<std::size_t>(n, 1));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t chunk = (n + threads - 1) / threads;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::string dump(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string describe(const std::exception& e) { return e.what(); }

void note_error(RunReport& r, std::int64_t line, const std::string& msg) {
  ++r.errors;
  if (r.error_samples.size() < kMaxErrorSamples) {
    r.error_samples.push_back("line " + std::to_string(line) + ": " + msg);
  }
}

// Parses one line as a JSON value, mapping syntax errors to RecordError.
json parse_line(const std::string& s) {
  try {
    return json::parse(s);
  } catch (const json::parse_error& e) {
    throw Error(Errc::RecordError, std::string("invalid JSON: ") + e.what());
  }
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string read_inputs(const std::vector<std::string>& paths) {
  if (paths.empty()) throw Error(Errc::InvalidConfig, "no --input given");
  std::string all;
  for (const auto& path : paths) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(Errc::IOFailure, "cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    all += ss.str();
    if (!all.empty() && all.back() != '\n') all += '\n';
  }
  return all;
}

// Output sink: a file, or stdout for "-" / empty path.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path, std::ios::binary | std::ios::trunc);
    if (!file_) throw Error(Errc::IOFailure, "cannot write " + path);
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  void close(const std::string& path) {
    if (!file_.is_open()) return;
    file_.close();
    if (!file_) throw Error(Errc::IOFailure, "failed writing " + path);
  }

 private:
  std::ofstream file_;
};

void write_report(const RunReport& r, const std::string& path) {
  if (path.empty()) return;
  Sink sink(path);
  sink.stream() << r.to_json().dump(2) << '\n';
  sink.close(path);
}

}  // namespace

void PipelineConfig::validate() const {
  if (workers < 1) throw Error(Errc::InvalidConfig, "--workers must be >= 1");
  std::set<std::string> seen;
  auto claim = [&](const std::string& p) {
    if (p.empty() || p == "-") return;
    if (!seen.insert(p).second) {
      throw Error(Errc::InvalidConfig, "path used twice: " + p);
    }
  };
  for (const auto& p : inputs) claim(p);
  claim(output);
  claim(report);
  claim(verdicts);
  filter.validate();
  packer.validate();
}

void apply_config_file(PipelineConfig& base, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::IOFailure, "cannot read config " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw Error(Errc::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::InvalidConfig, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "filter") {
        base.filter = jsonl::filter_config_from_json(value);
      } else if (key == "packer") {
        base.packer = jsonl::packer_config_from_json(value);
      } else if (key == "tokenizer") {
        base.tokenizer = value.get<std::string>();
      } else if (key == "workers") {
        base.workers = value.get<int>();
      } else if (key == "lenient_markup") {
        base.lenient_markup = value.get<bool>();
      } else {
        throw Error(Errc::InvalidConfig, "unknown config key '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw Error(Errc::InvalidConfig, "config key '" + key + "': " + e.what());
    }
  }
}

std::int64_t RunReport::dropped() const {
  std::int64_t n = 0;
  for (const auto& [_, c] : drops) n += c;
  return n;
}

json RunReport::to_json() const {
  json j = {{"command", command},
            {"records_in", records_in},
            {"records_kept", records_kept},
            {"drops", drops},
            {"errors", errors},
            {"error_samples", error_samples},
            {"sequences_out", sequences_out},
            {"mean_fill", mean_fill ? json(*mean_fill) : json(nullptr)},
            {"wall_time_s", wall_time_s}};
  for (const auto& [k, v] : extra.items()) j[k] = v;
  return j;
}

std::unique_ptr<Tokenizer> make_tokenizer(const std::string& name) {
  if (name == "mock") return std::make_unique<MockTokenizer>();
  throw Error(Errc::InvalidConfig, "unknown tokenizer '" + name + "'");
}

// ---------------------------------------------------------------------------

RunReport clean_stream(std::istream& in, std::ostream& kept_out, std::ostream& verdicts_out,
                       const FilterConfig& cfg, int workers) {
  cfg.validate();
  Timer timer;
  const auto lines = read_lines(in);

  struct Outcome {
    std::string error;
    json original;
    CorpusRecord record;
    FilterVerdict verdict;
  };
  std::vector<Outcome> results(lines.size());
  parallel_for(lines.size(), workers, [&](std::size_t i) {
    Outcome& o = results[i];
    try {
      o.original = parse_line(lines[i].text);
      o.record = jsonl::record_from_json(o.original);
      const auto& r = o.record;
      if (r.kind != SourceKind::pair) {
        o.verdict = filter_document_text(r, r.kind, cfg);
      } else if (cfg.academic_datasets.contains(r.dataset)) {
        o.verdict = check_special_tags(r, cfg);
      } else {
        std::string cleaned;
        o.verdict = filter_pair(r, cfg, &cleaned);
        if (o.verdict.kept()) o.record.text = std::move(cleaned);
      }
    } catch (const std::exception& e) {
      o.error = describe(e);
    }
  });

  // Keep only the longest caption per image.
  std::unordered_map<std::string, std::vector<std::size_t>> groups;
  std::vector<std::string> group_order;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& o = results[i];
    if (!o.error.empty() || !o.verdict.kept() || !o.record.group_key) continue;
    auto [it, fresh] = groups.try_emplace(*o.record.group_key);
    if (fresh) group_order.push_back(*o.record.group_key);
    it->second.push_back(i);
  }
  for (const auto& key : group_order) {
    const auto& members = groups[key];
    if (members.size() < 2) continue;
    std::vector<CorpusRecord> group;
    for (std::size_t i : members) group.push_back(results[i].record);
    const std::string winner = select_longest_caption(group).id;
    bool winner_seen = false;
    for (std::size_t i : members) {
      if (results[i].record.id == winner && !winner_seen) {
        winner_seen = true;
        continue;
      }
      results[i].verdict = FilterVerdict::drop(RuleId::D_duplicate,
                                               "shorter caption than " + winner);
    }
  }

  RunReport report;
  report.command = "clean";
  for (std::size_t i = 0; i < results.size(); ++i) {
    auto& o = results[i];
    ++report.records_in;
    if (!o.error.empty()) {
      note_error(report, lines[i].number, o.error);
      verdicts_out << dump({{"id", o.record.id.empty() ? json(nullptr) : json(o.record.id)},
                            {"decision", "error"},
                            {"rule_id", nullptr},
                            {"detail", o.error}})
                   << '\n';
      continue;
    }
    verdicts_out << dump(jsonl::verdict_to_json(o.record.id, o.verdict)) << '\n';
    if (o.verdict.kept()) {
      ++report.records_kept;
      o.original["text"] = o.record.text;
      kept_out << dump(o.original) << '\n';
    } else {
      ++report.drops[std::string(rule_name(*o.verdict.rule))];
    }
  }
  report.wall_time_s = timer.seconds();
  return report;
}

namespace {

// Shared body of the two build stages: `make` turns a parsed line into
// (id, task, annotated text).
struct Built {
  std::string id;
  std::string task;
  AnnotatedText text;
};

RunReport build_stream(std::istream& in, std::ostream& out, const Tokenizer& tok,
                       int workers, const char* command,
                       const std::function<Built(const json&, std::int64_t)>& make) {
  Timer timer;
  const auto lines = read_lines(in);
  struct Outcome {
    std::string error;
    std::string line;
  };
  std::vector<Outcome> results(lines.size());
  parallel_for(lines.size(), workers, [&](std::size_t i) {
    try {
      const json j = parse_line(lines[i].text);
      Built b = make(j, lines[i].number);
      const MaskedTokens tokens = project_mask(b.text, tok);
      results[i].line = dump(jsonl::built_record(b.id, b.task, b.text, tokens));
    } catch (const std::exception& e) {
      results[i].error = describe(e);
    }
  });
  RunReport report;
  report.command = command;
  for (std::size_t i = 0; i < results.size(); ++i) {
    ++report.records_in;
    if (!results[i].error.empty()) {
      note_error(report, lines[i].number, results[i].error);
      continue;
    }
    ++report.records_kept;
    out << results[i].line << '\n';
  }
  report.wall_time_s = timer.seconds();
  return report;
}

std::string id_or_line(const json& j, const char* prefix, std::int64_t line) {
  if (j.is_object() && j.contains("id") && j["id"].is_string()) return j["id"].get<std::string>();
  return std::string(prefix) + std::to_string(line);
}

}  // namespace

RunReport build_task_stream(std::istream& in, std::ostream& out, const Tokenizer& tok,
                            int workers, bool lenient_markup) {
  const ParseOptions opts{lenient_markup};
  return build_stream(in, out, tok, workers, "build-task",
                      [&](const json& j, std::int64_t line) {
                        const TaskKind task = jsonl::task_from_json(j);
                        return Built{id_or_line(j, "task-", line),
                                     std::string(task_name(task)),
                                     build_task_sample(task, jsonl::task_fields_from_json(j, opts))};
                      });
}

RunReport build_chat_stream(std::istream& in, std::ostream& out, const Tokenizer& tok,
                            int workers) {
  return build_stream(in, out, tok, workers, "build-chat",
                      [](const json& j, std::int64_t line) {
                        return Built{id_or_line(j, "chat-", line), "chat",
                                     build_chatml(jsonl::dialogue_from_json(j))};
                      });
}

RunReport pack_stream(std::istream& in, std::ostream& out, const PackerConfig& cfg) {
  cfg.validate();
  Timer timer;
  RunReport report;
  report.command = "pack";
  std::vector<Sample> samples;
  for (const auto& line : read_lines(in)) {
    ++report.records_in;
    try {
      samples.push_back(jsonl::sample_from_json(parse_line(line.text)));
    } catch (const std::exception& e) {
      note_error(report, line.number, describe(e));
    }
  }
  const PackResult packed = pack(samples, cfg);
  for (const auto& seq : packed.sequences) {
    out << dump(jsonl::sequence_to_json(seq)) << '\n';
    report.records_kept += static_cast<std::int64_t>(seq.sample_ids.size());
  }
  if (!packed.dropped.empty()) {
    report.drops["oversize"] = static_cast<std::int64_t>(packed.dropped.size());
  }
  const auto util = utilization_report(packed.sequences, cfg);
  report.sequences_out = util.sequences;
  report.mean_fill = util.mean_fill;
  report.extra["utilization"] = jsonl::utilization_to_json(util);
  report.extra["dropped_ids"] = packed.dropped;
  std::int64_t kept_effective = 0;
  std::set<std::string> dropped(packed.dropped.begin(), packed.dropped.end());
  for (const auto& s : samples) {
    if (!dropped.contains(s.id)) kept_effective += effective_len(s, cfg);
  }
  report.extra["conserved"] = kept_effective == util.tokens;
  report.wall_time_s = timer.seconds();
  return report;
}

RunReport check_markup_stream(std::istream& in, std::ostream& out, bool lenient, int workers) {
  Timer timer;
  const auto lines = read_lines(in);
  std::vector<json> results(lines.size());
  parallel_for(lines.size(), workers, [&](std::size_t i) {
    json& r = results[i];
    r["line"] = lines[i].number;
    try {
      std::string text = lines[i].text;
      if (!text.empty() && text.front() == '{') {
        const json j = parse_line(text);
        if (!j.contains("text") || !j["text"].is_string()) {
          throw Error(Errc::RecordError, "JSON line needs a 'text' string");
        }
        text = j["text"].get<std::string>();
      }
      const Markup nodes = parse_markup(text, ParseOptions{lenient});
      std::size_t refs = 0;
      for (const auto& n : nodes) refs += std::holds_alternative<RefNode>(n);
      r["ok"] = true;
      r["refs"] = refs;
      r["canonical"] = emit_markup(nodes);
    } catch (const std::exception& e) {
      r["ok"] = false;
      r["error"] = describe(e);
    }
  });
  RunReport report;
  report.command = "check-markup";
  for (std::size_t i = 0; i < results.size(); ++i) {
    ++report.records_in;
    if (results[i]["ok"].get<bool>()) {
      ++report.records_kept;
    } else {
      note_error(report, lines[i].number, results[i]["error"].get<std::string>());
    }
    out << dump(results[i]) << '\n';
  }
  report.wall_time_s = timer.seconds();
  return report;
}

json stats_stream(std::istream& in, const PackerConfig& cfg) {
  std::int64_t malformed = 0;
  std::vector<PackedSequence> sequences;
  std::int64_t built = 0, tokens = 0, supervised = 0, images = 0;
  std::map<std::string, std::int64_t> built_tasks;
  std::int64_t corpus = 0;
  std::map<std::string, std::int64_t> datasets, languages;
  for (const auto& line : read_lines(in)) {
    try {
      const json j = parse_line(line.text);
      if (j.contains("sample_ids")) {
        sequences.push_back(jsonl::sequence_from_json(j));
      } else if (j.contains("token_ids")) {
        ++built;
        ++built_tasks[j.value("task", "")];
        const auto mask = j.at("token_mask").get<std::vector<int>>();
        tokens += static_cast<std::int64_t>(mask.size());
        supervised += std::count(mask.begin(), mask.end(), 1);
        images += j.value("n_images", 0);
      } else if (j.contains("text")) {
        const auto r = jsonl::record_from_json(j);
        ++corpus;
        ++datasets[r.dataset];
        ++languages[r.language == Language::en   ? "en"
                    : r.language == Language::zh ? "zh"
                                                 : "other"];
      } else {
        ++malformed;
      }
    } catch (const std::exception&) {
      ++malformed;
    }
  }
  json out = {{"malformed_lines", malformed}};
  if (!sequences.empty()) {
    out["sequences"] = jsonl::utilization_to_json(utilization_report(sequences, cfg));
  }
  if (built > 0) {
    out["samples"] = {{"count", built},
                      {"tokens", tokens},
                      {"supervised_tokens", supervised},
                      {"images", images},
                      {"per_task", built_tasks}};
  }
  if (corpus > 0) {
    out["records"] = {{"count", corpus}, {"per_dataset", datasets}, {"per_language", languages}};
  }
  return out;
}

// ---------------------------------------------------------------------------

RunReport cmd_clean(const PipelineConfig& cfg) {
  cfg.validate();
  std::istringstream in(read_inputs(cfg.inputs));
  const std::string verdict_path =
      !cfg.verdicts.empty() ? cfg.verdicts
      : (cfg.output.empty() || cfg.output == "-") ? std::string()
                                                  : cfg.output + ".verdicts.jsonl";
  Sink kept(cfg.output);
  std::ostringstream discard;
  std::unique_ptr<Sink> verdicts;
  if (!verdict_path.empty()) verdicts = std::make_unique<Sink>(verdict_path);
  RunReport r = clean_stream(in, kept.stream(), verdicts ? verdicts->stream() : discard,
                             cfg.filter, cfg.workers);
  kept.close(cfg.output);
  if (verdicts) verdicts->close(verdict_path);
  write_report(r, cfg.report);
  return r;
}

RunReport cmd_build_task(const PipelineConfig& cfg) {
  cfg.validate();
  const auto tok = make_tokenizer(cfg.tokenizer);
  std::istringstream in(read_inputs(cfg.inputs));
  Sink out(cfg.output);
  RunReport r = build_task_stream(in, out.stream(), *tok, cfg.workers, cfg.lenient_markup);
  out.close(cfg.output);
  write_report(r, cfg.report);
  return r;
}

RunReport cmd_build_chat(const PipelineConfig& cfg) {
  cfg.validate();
  const auto tok = make_tokenizer(cfg.tokenizer);
  std::istringstream in(read_inputs(cfg.inputs));
  Sink out(cfg.output);
  RunReport r = build_chat_stream(in, out.stream(), *tok, cfg.workers);
  out.close(cfg.output);
  write_report(r, cfg.report);
  return r;
}

RunReport cmd_pack(const PipelineConfig& cfg) {
  cfg.validate();
  std::istringstream in(read_inputs(cfg.inputs));
  Sink out(cfg.output);
  RunReport r = pack_stream(in, out.stream(), cfg.packer);
  out.close(cfg.output);
  write_report(r, cfg.report);
  return r;
}

RunReport cmd_check_markup(const PipelineConfig& cfg) {
  cfg.validate();
  std::istringstream in(read_inputs(cfg.inputs));
  Sink out(cfg.output);
  RunReport r = check_markup_stream(in, out.stream(), cfg.lenient_markup, cfg.workers);
  out.close(cfg.output);
  write_report(r, cfg.report);
  return r;
}

json cmd_stats(const PipelineConfig& cfg) {
  cfg.validate();
  std::istringstream in(read_inputs(cfg.inputs));
  return stats_stream(in, cfg.packer);
}

}  // namespace vlprep
