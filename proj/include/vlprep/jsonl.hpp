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

// JSON Lines encodings of the record types exchanged between pipeline stages.

#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "vlprep/chat_builder.hpp"
#include "vlprep/corpus_filters.hpp"
#include "vlprep/packer.hpp"
#include "vlprep/schedules.hpp"
#include "vlprep/tokenizer.hpp"

namespace vlprep::jsonl {

using nlohmann::json;

/// Field readers throw Error(RecordError) on missing or mistyped fields.
CorpusRecord record_from_json(const json& j);
json verdict_to_json(const std::string& id, const FilterVerdict& v);

TaskKind task_from_json(const json& j);
TaskFields task_fields_from_json(const json& j, const ParseOptions& markup = {});
std::vector<ChatTurn> dialogue_from_json(const json& j);

json annotated_to_json(const AnnotatedText& a);
AnnotatedText annotated_from_json(const json& j);
json built_record(const std::string& id, std::string_view task,
                  const AnnotatedText& a, const MaskedTokens& tokens);

Sample sample_from_json(const json& j);
json sequence_to_json(const PackedSequence& s);
PackedSequence sequence_from_json(const json& j);
json utilization_to_json(const UtilizationReport& r);

/// Config sections; unknown keys are rejected with Errc::InvalidConfig.
FilterConfig filter_config_from_json(const json& j);
PackerConfig packer_config_from_json(const json& j);

json stage_to_json(const StageConfig& s);

}  // namespace vlprep::jsonl
