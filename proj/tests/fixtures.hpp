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

// Reference samples transcribed from the published multi-task data format
// and ChatML dialogue examples.

#pragma once

#include <string>
#include <vector>

#include "vlprep/chat_builder.hpp"

namespace vlprep::fixtures {

struct TaskFixture {
  const char* name;
  TaskKind task;
  TaskFields fields;
  std::string expected;  // full rendered sample
  std::string target;    // supervised part, including <eos>
};

inline std::vector<TaskFixture> multitask_samples() {
  std::vector<TaskFixture> out;

  TaskFields caption;
  caption.image = "cc3m/01581435.jpg";
  caption.caption = "the beautiful flowers for design.";
  out.push_back({"caption", TaskKind::caption, caption,
                 "<img>cc3m/01581435.jpg</img>Generate the caption in English: "
                 "the beautiful flowers for design.<eos>",
                 "the beautiful flowers for design.<eos>"});

  TaskFields vqa;
  vqa.image = "VG_100K_2/1.jpg";
  vqa.question = "Does the bandage have a different color than the wrist band?";
  vqa.answer = "No, both the bandage and the wrist band are white.";
  out.push_back({"vqa", TaskKind::vqa, vqa,
                 "<img>VG_100K_2/1.jpg</img> Does the bandage have a different color "
                 "than the wrist band? Answer: No, both the bandage and the wrist band "
                 "are white.<eos>",
                 "No, both the bandage and the wrist band are white.<eos>"});

  TaskFields ocr_vqa;
  ocr_vqa.image = "ocr_vqa/1.jpg";
  ocr_vqa.question = "What is the title of this book?";
  ocr_vqa.answer =
      "Asi Se Dice!, Volume 2: Workbook And Audio Activities (Glencoe Spanish) "
      "(Spanish Edition)";
  out.push_back({"ocr_vqa", TaskKind::ocr_vqa, ocr_vqa,
                 "<img>ocr_vqa/1.jpg</img> What is the title of this book? Answer: Asi "
                 "Se Dice!, Volume 2: Workbook And Audio Activities (Glencoe Spanish) "
                 "(Spanish Edition)<eos>",
                 "Asi Se Dice!, Volume 2: Workbook And Audio Activities (Glencoe "
                 "Spanish) (Spanish Edition)<eos>"});

  TaskFields grounded;
  grounded.image = "coyo700m/1.jpg";
  grounded.markup = Markup{
      TextNode{"Beautiful shot of "},
      RefNode{"bees", {GridBox{661, 612, 833, 812}, GridBox{120, 555, 265, 770}}},
      TextNode{" gathering nectars from "},
      RefNode{"an apricot flower", {GridBox{224, 13, 399, 313}}},
  };
  out.push_back({"caption_grounded", TaskKind::caption_grounded, grounded,
                 "<img>coyo700m/1.jpg</img>Generate the caption in English with "
                 "grounding: Beautiful shot of <ref>bees</ref><box>(661,612),(833,812)"
                 "</box><box>(120,555),(265,770)</box> gathering nectars from <ref>an "
                 "apricot flower</ref><box>(224,13),(399,313)</box><eos>",
                 "Beautiful shot of <ref>bees</ref><box>(661,612),(833,812)</box><box>"
                 "(120,555),(265,770)</box> gathering nectars from <ref>an apricot "
                 "flower</ref><box>(224,13),(399,313)</box><eos>"});

  TaskFields ref;
  ref.image = "VG_100K_2/3.jpg";
  ref.expression = "the ear on a giraffe";
  ref.regions = std::vector<Region>{GridBox{176, 106, 232, 160}};
  out.push_back({"ref_grounding", TaskKind::ref_grounding, ref,
                 "<img>VG_100K_2/3.jpg</img><ref>the ear on a giraffe</ref><box>(176,"
                 "106),(232,160)</box><eos>",
                 "<box>(176,106),(232,160)</box><eos>"});

  TaskFields gcap;
  gcap.image = "VG_100K_2/4.jpg";
  gcap.regions = std::vector<Region>{GridBox{360, 542, 476, 705}};
  gcap.caption = "Yellow cross country ski racing gloves";
  out.push_back({"grounded_caption", TaskKind::grounded_caption, gcap,
                 "<img>VG_100K_2/4.jpg</img><ref>This</ref><box>(360,542),(476,705)"
                 "</box> is Yellow cross country ski racing gloves<eos>",
                 "Yellow cross country ski racing gloves<eos>"});

  TaskFields ocr;
  ocr.image = "synthdog/1.jpg";
  ocr.markup = Markup{
      RefNode{"It is managed",
              {QuadGrid{{{{568, 121}, {625, 131}, {624, 182}, {567, 172}}}}}},
      RefNode{"by South", {QuadGrid{{{{560, 224}, {629, 232}, {628, 283}, {559, 277}}}}}},
      TextNode{"..."},
  };
  out.push_back({"ocr", TaskKind::ocr, ocr,
                 "<img>synthdog/1.jpg</img>OCR with grounding: <ref>It is managed</ref>"
                 "<quad>(568,121), (625,131), (624,182), (567,172)</quad><ref>by South"
                 "</ref><quad>(560,224), (629,232), (628,283), (559,277)</quad>...<eos>",
                 "<ref>It is managed</ref><quad>(568,121), (625,131), (624,182), "
                 "(567,172)</quad><ref>by South</ref><quad>(560,224), (629,232), "
                 "(628,283), (559,277)</quad>...<eos>"});
  return out;
}

/// The two-round road-sign dialogue.
inline std::vector<ChatTurn> chatml_example() {
  return {
      ChatTurn::make(Role::user, "What is the sign in the picture?",
                     {"vg/VG_100K_2/649.jpg"}),
      ChatTurn::make(Role::assistant, "The sign is a road closure with an orange rhombus."),
      ChatTurn::make(Role::user, "How is the weather in the picture?"),
      ChatTurn::make(Role::assistant,
                     "The shape of the road closure sign is an orange rhombus."),
  };
}

inline const std::string& chatml_example_text() {
  static const std::string text =
      "<|im_start|>user\n"
      "Picture 1: <img>vg/VG_100K_2/649.jpg</img>What is the sign in the picture?"
      "<|im_end|>\n"
      "<|im_start|>assistant\n"
      "The sign is a road closure with an orange rhombus.<|im_end|>\n"
      "<|im_start|>user\n"
      "How is the weather in the picture?<|im_end|>\n"
      "<|im_start|>assistant\n"
      "The shape of the road closure sign is an orange rhombus.<|im_end|>\n";
  return text;
}

inline std::vector<std::string> chatml_example_supervised() {
  return {"The sign is a road closure with an orange rhombus.", "<|im_end|>",
          "The shape of the road closure sign is an orange rhombus.", "<|im_end|>"};
}

}  // namespace vlprep::fixtures
