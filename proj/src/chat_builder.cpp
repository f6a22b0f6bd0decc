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

#include "vlprep/chat_builder.hpp"

#include <array>
#include <map>
#include <utility>

#include "vlprep/error.hpp"

namespace vlprep {

namespace {

constexpr std::array<std::pair<TaskKind, std::string_view>, 7> kTaskNames = {{
    {TaskKind::caption, "caption"},
    {TaskKind::vqa, "vqa"},
    {TaskKind::ocr_vqa, "ocr_vqa"},
    {TaskKind::caption_grounded, "caption_grounded"},
    {TaskKind::ref_grounding, "ref_grounding"},
    {TaskKind::grounded_caption, "grounded_caption"},
    {TaskKind::ocr, "ocr"},
}};

template <typename T>
const T& require(const std::optional<T>& slot, TaskKind task, std::string_view name) {
  if (!slot) {
    throw Error(Errc::MissingField, std::string(task_name(task)) +
                                        " sample needs field '" +
                                        std::string(name) + "'");
  }
  return *slot;
}

void check_image_ref(std::string_view ref) {
  if (ref.find(tags::kImgOpen) != std::string_view::npos ||
      ref.find(tags::kImgClose) != std::string_view::npos) {
    throw Error(Errc::InvalidSegment, "image ref contains an image tag");
  }
}

}  // namespace

void AnnotatedText::append(std::string_view piece, bool supervised) {
  if (piece.empty()) return;
  spans.push_back({text.size(), text.size() + piece.size(), supervised});
  text += piece;
}

void AnnotatedText::append_image(std::string_view ref) {
  check_image_ref(ref);
  images.push_back({text.size(), std::string(ref)});
  append(image_tag(ref), false);
}

std::vector<std::string> AnnotatedText::supervised_pieces() const {
  std::vector<std::string> out;
  for (const auto& s : spans) {
    if (s.supervised) out.push_back(text.substr(s.begin, s.end - s.begin));
  }
  return out;
}

bool AnnotatedText::partitions_text() const noexcept {
  std::size_t cursor = 0;
  for (const auto& s : spans) {
    if (s.begin != cursor || s.end <= s.begin) return false;
    cursor = s.end;
  }
  return cursor == text.size();
}

std::string image_tag(std::string_view ref) {
  std::string out(tags::kImgOpen);
  out += ref;
  out += tags::kImgClose;
  return out;
}

std::string_view task_name(TaskKind task) noexcept {
  for (const auto& [kind, name] : kTaskNames) {
    if (kind == task) return name;
  }
  return "unknown";
}

std::optional<TaskKind> task_from_name(std::string_view name) noexcept {
  for (const auto& [kind, n] : kTaskNames) {
    if (n == name) return kind;
  }
  return std::nullopt;
}

AnnotatedText build_task_sample(TaskKind task, const TaskFields& f) {
  AnnotatedText out;
  out.append_image(require(f.image, task, "image"));

  switch (task) {
    case TaskKind::caption:
      out.append("Generate the caption in English: ", false);
      out.append(require(f.caption, task, "caption"), true);
      break;
    case TaskKind::vqa:
    case TaskKind::ocr_vqa:
      out.append(" " + require(f.question, task, "question") + " Answer: ", false);
      out.append(require(f.answer, task, "answer"), true);
      break;
    case TaskKind::caption_grounded: {
      const auto& markup = require(f.markup, task, "markup");
      validate_markup(markup);
      out.append("Generate the caption in English with grounding: ", false);
      out.append(emit_markup(markup), true);
      break;
    }
    case TaskKind::ref_grounding: {
      RefNode ref{require(f.expression, task, "expression"),
                  require(f.regions, task, "regions")};
      validate_markup({ref});
      out.append(emit_markup({RefNode{ref.content, {}}}), false);
      std::string target;
      for (const auto& r : ref.regions) target += emit_region(r);
      out.append(target, true);
      break;
    }
    case TaskKind::grounded_caption: {
      Markup prompt{RefNode{"This", require(f.regions, task, "regions")}};
      validate_markup(prompt);
      out.append(emit_markup(prompt) + " is ", false);
      out.append(require(f.caption, task, "caption"), true);
      break;
    }
    case TaskKind::ocr: {
      const auto& markup = require(f.markup, task, "markup");
      validate_markup(markup);
      out.append("OCR with grounding: ", false);
      out.append(emit_markup(markup), true);
      break;
    }
  }
  out.append(kEos, true);
  return out;
}

std::string_view role_name(Role role) noexcept {
  return role == Role::user ? "user" : "assistant";
}

Segment Segment::image(std::string_view ref) {
  return {image_tag(ref), false, std::string(ref)};
}

ChatTurn ChatTurn::make(Role role, std::string_view content,
                        const std::vector<std::string>& images) {
  ChatTurn turn{role, {}};
  for (const auto& ref : images) turn.segments.push_back(Segment::image(ref));
  if (!content.empty()) {
    turn.segments.push_back({std::string(content), role == Role::assistant, {}});
  }
  return turn;
}

AnnotatedText build_chatml(const std::vector<ChatTurn>& turns) {
  if (turns.empty()) throw Error(Errc::EmptyDialogue, "dialogue has no turns");
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const Role expected = i % 2 == 0 ? Role::user : Role::assistant;
    if (turns[i].role != expected) {
      throw Error(Errc::RoleOrderViolation,
                  "turn " + std::to_string(i) + " should be " +
                      std::string(role_name(expected)));
    }
  }

  AnnotatedText out;
  std::map<std::string, int, std::less<>> picture_ids;
  for (const auto& turn : turns) {
    const bool assistant = turn.role == Role::assistant;
    out.append(kImStart, false);
    out.append(std::string(role_name(turn.role)) + "\n", false);
    for (const auto& seg : turn.segments) {
      if (seg.image_ref) {
        if (seg.supervised || seg.text != image_tag(*seg.image_ref)) {
          throw Error(Errc::InvalidSegment,
                      "image segment must be unsupervised <img>ref</img>");
        }
        auto [it, fresh] = picture_ids.try_emplace(
            *seg.image_ref, static_cast<int>(picture_ids.size()) + 1);
        out.append("Picture " + std::to_string(it->second) + ": ", false);
        out.append_image(*seg.image_ref);
        continue;
      }
      if (seg.supervised != assistant) {
        throw Error(Errc::InvalidSegment,
                    std::string(role_name(turn.role)) + " text must be " +
                        (assistant ? "supervised" : "unsupervised"));
      }
      out.append(seg.text, seg.supervised);
    }
    out.append(kImEnd, assistant);
    out.append("\n", false);
  }
  return out;
}

}  // namespace vlprep
