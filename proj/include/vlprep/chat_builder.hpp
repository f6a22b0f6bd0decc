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

// Training-text construction with supervision annotations: the multi-task
// pretraining templates and ChatML dialogues.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vlprep/grounding_markup.hpp"

namespace vlprep {

inline constexpr std::string_view kEos = "<eos>";
inline constexpr std::string_view kImStart = "<|im_start|>";
inline constexpr std::string_view kImEnd = "<|im_end|>";

/// Bytes [begin, end) of an AnnotatedText and whether they carry loss.
struct TextSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool supervised = false;
  friend bool operator==(const TextSpan&, const TextSpan&) = default;
};

struct ImagePlacement {
  std::size_t position = 0;  // byte offset of the <img> tag
  std::string ref;
  friend bool operator==(const ImagePlacement&, const ImagePlacement&) = default;
};

/// Text whose spans partition [0, text.size()).
struct AnnotatedText {
  std::string text;
  std::vector<TextSpan> spans;
  std::vector<ImagePlacement> images;

  void append(std::string_view piece, bool supervised);
  void append_image(std::string_view ref);

  /// Text of each supervised span, in order.
  std::vector<std::string> supervised_pieces() const;
  bool partitions_text() const noexcept;
};

std::string image_tag(std::string_view ref);

// ---------------------------------------------------------------------------
// Multi-task samples.

enum class TaskKind {
  caption,
  vqa,
  ocr_vqa,
  caption_grounded,
  ref_grounding,
  grounded_caption,
  ocr,
};

std::string_view task_name(TaskKind task) noexcept;
std::optional<TaskKind> task_from_name(std::string_view name) noexcept;

/// Template slots. Which ones are required depends on the task.
struct TaskFields {
  std::optional<std::string> image;
  std::optional<std::string> question;    // vqa, ocr_vqa
  std::optional<std::string> answer;      // vqa, ocr_vqa
  std::optional<std::string> caption;     // caption, grounded_caption
  std::optional<Markup> markup;           // caption_grounded, ocr
  std::optional<std::string> expression;  // ref_grounding
  std::optional<std::vector<Region>> regions;  // ref_grounding, grounded_caption
};

/// Renders one task sample: the prompt prefix is unsupervised, the target and
/// the trailing <eos> are supervised.
AnnotatedText build_task_sample(TaskKind task, const TaskFields& fields);

// ---------------------------------------------------------------------------
// ChatML dialogues.

enum class Role { user, assistant };

std::string_view role_name(Role role) noexcept;

struct Segment {
  std::string text;
  bool supervised = false;
  std::optional<std::string> image_ref;

  static Segment image(std::string_view ref);
};

struct ChatTurn {
  Role role = Role::user;
  std::vector<Segment> segments;

  /// Images first, then the text, with supervision set from the role.
  static ChatTurn make(Role role, std::string_view content,
                       const std::vector<std::string>& images = {});
};

/// Renders `<|im_start|>role\n...<|im_end|>\n` per turn. Images are numbered
/// by first appearance across the dialogue and prefixed "Picture k: ".
/// Assistant content and the assistant <|im_end|> are supervised.
AnnotatedText build_chatml(const std::vector<ChatTurn>& turns);

}  // namespace vlprep
