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

#include "vlprep/jsonl.hpp"

#include <set>

#include "vlprep/error.hpp"

namespace vlprep::jsonl {

namespace {

[[noreturn]] void record_error(const std::string& what) {
  throw Error(Errc::RecordError, what);
}

template <typename T>
T get(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) record_error(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    record_error(std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get<T>(j, key);
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> known,
                    std::string_view section) {
  if (!j.is_object()) {
    throw Error(Errc::InvalidConfig, std::string(section) + " must be an object");
  }
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(Errc::InvalidConfig,
                  "unknown key '" + key + "' in " + std::string(section));
    }
  }
}

std::vector<CodePointRange> ranges_from_json(const json& j) {
  std::vector<CodePointRange> out;
  for (const auto& r : j) {
    if (!r.is_array() || r.size() != 2) {
      throw Error(Errc::InvalidConfig, "code point ranges are [first, last] pairs");
    }
    out.push_back({r[0].get<char32_t>(), r[1].get<char32_t>()});
  }
  return out;
}

}  // namespace

CorpusRecord record_from_json(const json& j) {
  if (!j.is_object()) record_error("record is not a JSON object");
  CorpusRecord r;
  r.id = get<std::string>(j, "id");
  r.text = get<std::string>(j, "text");
  r.dataset = get_opt<std::string>(j, "dataset").value_or("");
  r.image_width = get_opt<int>(j, "image_width");
  r.image_height = get_opt<int>(j, "image_height");
  r.clip_score = get_opt<double>(j, "clip_score");
  r.image_key = get_opt<std::string>(j, "image_key").value_or("");
  r.group_key = get_opt<std::string>(j, "group_key");
  const auto lang = get_opt<std::string>(j, "language").value_or("other");
  r.language = lang == "en" ? Language::en : lang == "zh" ? Language::zh : Language::other;
  const auto kind = get_opt<std::string>(j, "kind").value_or("pair");
  if (kind == "pair") {
    r.kind = SourceKind::pair;
  } else if (kind == "pdf") {
    r.kind = SourceKind::pdf;
  } else if (kind == "html") {
    r.kind = SourceKind::html;
  } else {
    record_error("unknown kind '" + kind + "'");
  }
  return r;
}

json verdict_to_json(const std::string& id, const FilterVerdict& v) {
  return {{"id", id},
          {"decision", v.kept() ? "keep" : "drop"},
          {"rule_id", v.rule ? json(rule_name(*v.rule)) : json(nullptr)},
          {"detail", v.detail}};
}

TaskKind task_from_json(const json& j) {
  const auto name = get<std::string>(j, "task");
  const auto task = task_from_name(name);
  if (!task) record_error("unknown task '" + name + "'");
  return *task;
}

TaskFields task_fields_from_json(const json& j, const ParseOptions& markup) {
  TaskFields f;
  f.image = get_opt<std::string>(j, "image");
  f.question = get_opt<std::string>(j, "question");
  f.answer = get_opt<std::string>(j, "answer");
  f.caption = get_opt<std::string>(j, "caption");
  f.expression = get_opt<std::string>(j, "expression");
  if (auto m = get_opt<std::string>(j, "markup")) f.markup = parse_markup(*m, markup);
  if (auto r = get_opt<std::string>(j, "regions")) f.regions = parse_regions(*r);
  return f;
}

std::vector<ChatTurn> dialogue_from_json(const json& j) {
  if (!j.is_object() || !j.contains("turns") || !j["turns"].is_array()) {
    record_error("dialogue needs a 'turns' array");
  }
  std::vector<ChatTurn> turns;
  for (const auto& t : j["turns"]) {
    const auto role = get<std::string>(t, "role");
    if (role != "user" && role != "assistant") record_error("unknown role '" + role + "'");
    turns.push_back(ChatTurn::make(role == "user" ? Role::user : Role::assistant,
                                   get_opt<std::string>(t, "content").value_or(""),
                                   get_opt<std::vector<std::string>>(t, "images")
                                       .value_or(std::vector<std::string>{})));
  }
  return turns;
}

json annotated_to_json(const AnnotatedText& a) {
  json spans = json::array();
  for (const auto& s : a.spans) spans.push_back({s.begin, s.end, s.supervised});
  json images = json::array();
  for (const auto& im : a.images) images.push_back({im.position, im.ref});
  return {{"text", a.text}, {"spans", spans}, {"images", images}};
}

AnnotatedText annotated_from_json(const json& j) {
  AnnotatedText a;
  a.text = get<std::string>(j, "text");
  try {
    for (const auto& s : j.at("spans")) {
      a.spans.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>(),
                         s.at(2).get<bool>()});
    }
    if (j.contains("images")) {
      for (const auto& im : j.at("images")) {
        a.images.push_back({im.at(0).get<std::size_t>(), im.at(1).get<std::string>()});
      }
    }
  } catch (const json::exception&) {
    record_error("malformed spans or images");
  }
  return a;
}

json built_record(const std::string& id, std::string_view task, const AnnotatedText& a,
                  const MaskedTokens& tokens) {
  json out = annotated_to_json(a);
  out["id"] = id;
  out["task"] = task;
  out["token_ids"] = tokens.ids;
  std::vector<int> mask(tokens.mask.begin(), tokens.mask.end());
  out["token_mask"] = mask;
  out["n_images"] = a.images.size();
  return out;
}

Sample sample_from_json(const json& j) {
  Sample s;
  s.id = get<std::string>(j, "id");
  s.task = get<std::string>(j, "task");
  if (j.contains("token_ids")) {
    s.token_len = static_cast<std::int64_t>(get<std::vector<std::int64_t>>(j, "token_ids").size());
  } else {
    s.token_len = get<std::int64_t>(j, "token_len");
  }
  if (j.contains("n_images")) {
    s.n_images = get<std::int64_t>(j, "n_images");
  } else if (j.contains("images") && j["images"].is_array()) {
    s.n_images = static_cast<std::int64_t>(j["images"].size());
  }
  if (s.token_len < 1 || s.n_images < 0) record_error("sample " + s.id + " has invalid lengths");
  return s;
}

json sequence_to_json(const PackedSequence& s) {
  return {{"task", s.task}, {"sample_ids", s.sample_ids}, {"total_len", s.total_len}};
}

PackedSequence sequence_from_json(const json& j) {
  return {get<std::string>(j, "task"), get<std::vector<std::string>>(j, "sample_ids"),
          get<std::int64_t>(j, "total_len")};
}

json utilization_to_json(const UtilizationReport& r) {
  json tasks = json::object();
  for (const auto& [task, u] : r.per_task) {
    tasks[task] = {{"sequences", u.sequences}, {"samples", u.samples}, {"tokens", u.tokens}};
  }
  return {{"sequences", r.sequences},
          {"tokens", r.tokens},
          {"mean_fill", r.mean_fill ? json(*r.mean_fill) : json(nullptr)},
          {"per_task", tasks}};
}

FilterConfig filter_config_from_json(const json& j) {
  reject_unknown(j,
                 {"max_aspect_ratio", "min_side_px", "clip_thresholds", "allowed_scripts",
                  "emoji_ranges", "min_chars", "max_chars", "banned_patterns",
                  "special_tags", "academic_datasets", "disabled_rules"},
                 "filter config");
  FilterConfig c;
  try {
    if (j.contains("max_aspect_ratio")) c.max_aspect_ratio = j["max_aspect_ratio"].get<double>();
    if (j.contains("min_side_px")) c.min_side_px = j["min_side_px"].get<int>();
    if (j.contains("clip_thresholds")) {
      c.clip_thresholds = j["clip_thresholds"].get<std::map<std::string, double>>();
    }
    if (j.contains("allowed_scripts")) c.allowed_scripts = ranges_from_json(j["allowed_scripts"]);
    if (j.contains("emoji_ranges")) c.emoji_ranges = ranges_from_json(j["emoji_ranges"]);
    if (j.contains("min_chars")) c.min_chars = j["min_chars"].get<std::size_t>();
    if (j.contains("max_chars")) c.max_chars = j["max_chars"].get<std::size_t>();
    if (j.contains("banned_patterns")) {
      c.banned_patterns = j["banned_patterns"].get<std::vector<std::string>>();
    }
    if (j.contains("special_tags")) c.special_tags = j["special_tags"].get<std::vector<std::string>>();
    if (j.contains("academic_datasets")) {
      c.academic_datasets = j["academic_datasets"].get<std::set<std::string>>();
    }
    if (j.contains("disabled_rules")) {
      for (const auto& name : j["disabled_rules"].get<std::vector<std::string>>()) {
        const auto rule = rule_from_name(name);
        if (!rule) throw Error(Errc::InvalidConfig, "unknown rule '" + name + "'");
        c.disabled_rules.insert(*rule);
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, std::string("filter config: ") + e.what());
  }
  c.validate();
  return c;
}

PackerConfig packer_config_from_json(const json& j) {
  reject_unknown(j, {"max_len", "image_cost"}, "packer config");
  PackerConfig c;
  try {
    if (j.contains("max_len")) c.max_len = j["max_len"].get<std::int64_t>();
    if (j.contains("image_cost")) c.image_cost = j["image_cost"].get<std::int64_t>();
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, std::string("packer config: ") + e.what());
  }
  c.validate();
  return c;
}

json stage_to_json(const StageConfig& s) {
  return {
      {"stage", stage_name(s.stage)},
      {"image_resolution", s.image_resolution},
      {"vit_seq_len", s.vit_seq_len},
      {"llm_seq_len", s.llm_seq_len},
      {"learnable_queries", s.learnable_queries},
      {"peak_lr", s.peak_lr},
      {"min_lr", s.min_lr},
      {"warmup_steps", s.warmup_steps},
      {"total_steps", s.total_steps},
      {"global_batch", s.global_batch},
      {"gradient_accumulation", s.gradient_accumulation},
      {"vit_lr_decay", s.vit_lr_decay},
      {"weight_decay", s.weight_decay},
      {"grad_clip", s.grad_clip},
      {"adam_beta1", s.adam_beta1},
      {"adam_beta2", s.adam_beta2},
      {"adam_eps", s.adam_eps},
  };
}

}  // namespace vlprep::jsonl
