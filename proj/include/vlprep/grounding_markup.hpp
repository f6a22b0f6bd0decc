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

// Grounding annotations: coordinate normalization onto the [0, 1000) grid and
// the <ref>/<box>/<quad> text markup used in grounded training samples.

#pragma once

#include <array>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace vlprep {

namespace tags {
inline constexpr std::string_view kImgOpen = "<img>";
inline constexpr std::string_view kImgClose = "</img>";
inline constexpr std::string_view kBoxOpen = "<box>";
inline constexpr std::string_view kBoxClose = "</box>";
inline constexpr std::string_view kRefOpen = "<ref>";
inline constexpr std::string_view kRefClose = "</ref>";
inline constexpr std::string_view kQuadOpen = "<quad>";
inline constexpr std::string_view kQuadClose = "</quad>";
}  // namespace tags

/// Grid resolution: normalized coordinates live in [0, kGridSize).
inline constexpr int kGridSize = 1000;

struct PixelBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  int width = 0;
  int height = 0;
};

struct GridPoint {
  int x = 0;
  int y = 0;
  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

struct GridBox {
  int x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  friend bool operator==(const GridBox&, const GridBox&) = default;
};

/// Four points, clockwise from top-left.
struct QuadGrid {
  std::array<GridPoint, 4> points{};
  friend bool operator==(const QuadGrid&, const QuadGrid&) = default;
};

using Region = std::variant<GridBox, QuadGrid>;

struct TextNode {
  std::string content;
  friend bool operator==(const TextNode&, const TextNode&) = default;
};

/// A referenced span. `regions` is non-empty and holds a single kind.
struct RefNode {
  std::string content;
  std::vector<Region> regions;
  friend bool operator==(const RefNode&, const RefNode&) = default;
};

using MarkupNode = std::variant<TextNode, RefNode>;
using Markup = std::vector<MarkupNode>;

GridBox normalize_box(const PixelBox& box);
PixelBox denormalize_box(const GridBox& box, int width, int height);

bool is_valid(const GridBox& box) noexcept;
bool is_valid(const QuadGrid& quad) noexcept;

/// True when `text` contains any of the six grounding tag literals.
bool contains_grounding_tag(std::string_view text) noexcept;

/// Throws the parser's error for any node that could not round-trip: tags
/// inside text, empty or mixed region lists, off-grid coordinates.
void validate_markup(const Markup& nodes);

std::string emit_region(const Region& region);
std::string emit_markup(const Markup& nodes);

struct ParseOptions {
  /// Accept region tags with no preceding </ref> as a Ref with empty content.
  bool lenient_orphans = false;
};

/// Parses grounded text. Tags other than ref/box/quad (e.g. <img>) are plain
/// text. Throws vlprep::Error on malformed input.
Markup parse_markup(std::string_view text, const ParseOptions& options = {});

/// Parses a run of adjacent region tags, e.g. "<box>(1,2),(3,4)</box>".
std::vector<Region> parse_regions(std::string_view text);

}  // namespace vlprep
