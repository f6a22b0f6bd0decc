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

#include "vlprep/grounding_markup.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>

#include "vlprep/error.hpp"

namespace vlprep {

namespace {

constexpr std::array<std::string_view, 6> kGroundingTags = {
    tags::kRefOpen, tags::kRefClose, tags::kBoxOpen,
    tags::kBoxClose, tags::kQuadOpen, tags::kQuadClose};

int normalize_coord(double coord, int extent) {
  const double scaled = std::floor(coord * kGridSize / extent);
  return static_cast<int>(std::clamp(scaled, 0.0, double(kGridSize - 1)));
}

bool in_grid(int v) noexcept { return v >= 0 && v < kGridSize; }

struct TagHit {
  std::size_t pos = std::string_view::npos;
  std::string_view tag;
};

TagHit find_tag(std::string_view s, std::size_t from) {
  for (std::size_t i = s.find('<', from); i != std::string_view::npos;
       i = s.find('<', i + 1)) {
    for (std::string_view tag : kGroundingTags) {
      if (s.substr(i, tag.size()) == tag) return {i, tag};
    }
  }
  return {};
}

void append_point(std::string& out, const GridPoint& p) {
  out += '(';
  out += std::to_string(p.x);
  out += ',';
  out += std::to_string(p.y);
  out += ')';
}

class CoordReader {
 public:
  explicit CoordReader(std::string_view body) : s_(body) {}

  std::vector<GridPoint> read_points() {
    std::vector<GridPoint> points;
    while (true) {
      expect('(');
      GridPoint p;
      p.x = read_int();
      expect(',');
      skip_ws();
      p.y = read_int();
      expect(')');
      points.push_back(p);
      if (pos_ == s_.size()) break;
      expect(',');
      skip_ws();
    }
    return points;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(Errc::MalformedRegion,
                what + " in region body \"" + std::string(s_) + "\"");
  }

  void expect(char c) {
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  int read_int() {
    const std::size_t start = pos_;
    if (pos_ < s_.size() && s_[pos_] == '-') ++pos_;
    const std::size_t digits = pos_;
    while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') ++pos_;
    if (pos_ == digits) fail("expected integer");
    long long value = 0;
    auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, value);
    if (ec == std::errc::result_out_of_range || value < 0 || value >= kGridSize) {
      throw Error(Errc::CoordinateOutOfRange,
                  "coordinate " + std::string(s_.substr(start, pos_ - start)) +
                      " outside [0, 999]");
    }
    if (ec != std::errc() || ptr != s_.data() + pos_) fail("bad integer");
    return static_cast<int>(value);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

// Parses one region tag starting at `pos` (which must point at <box> or
// <quad>) and advances `pos` past its closing tag.
Region read_region(std::string_view s, std::size_t& pos) {
  const bool is_box = s.substr(pos, tags::kBoxOpen.size()) == tags::kBoxOpen;
  const std::string_view open = is_box ? tags::kBoxOpen : tags::kQuadOpen;
  const std::string_view close = is_box ? tags::kBoxClose : tags::kQuadClose;
  const std::size_t body_start = pos + open.size();
  const TagHit next = find_tag(s, body_start);
  if (next.pos == std::string_view::npos || next.tag != close) {
    throw Error(Errc::UnbalancedTags,
                std::string(open) + " at offset " + std::to_string(pos) +
                    " is not closed by " + std::string(close));
  }
  const auto points =
      CoordReader(s.substr(body_start, next.pos - body_start)).read_points();
  pos = next.pos + close.size();
  if (is_box) {
    if (points.size() != 2) {
      throw Error(Errc::MalformedRegion,
                  "box needs 2 points, got " + std::to_string(points.size()));
    }
    GridBox box{points[0].x, points[0].y, points[1].x, points[1].y};
    if (!is_valid(box)) {
      throw Error(Errc::MalformedRegion, "box corners are not ordered");
    }
    return box;
  }
  if (points.size() != 4) {
    throw Error(Errc::MalformedRegion,
                "quad needs 4 points, got " + std::to_string(points.size()));
  }
  QuadGrid quad;
  std::copy(points.begin(), points.end(), quad.points.begin());
  return quad;
}

bool starts_region(std::string_view s, std::size_t pos) {
  return s.substr(pos, tags::kBoxOpen.size()) == tags::kBoxOpen ||
         s.substr(pos, tags::kQuadOpen.size()) == tags::kQuadOpen;
}

std::vector<Region> read_region_run(std::string_view s, std::size_t& pos) {
  std::vector<Region> regions;
  while (pos < s.size() && starts_region(s, pos)) {
    Region r = read_region(s, pos);
    if (!regions.empty() && regions.front().index() != r.index()) {
      throw Error(Errc::MalformedRegion,
                  "boxes and quads cannot share one reference");
    }
    regions.push_back(std::move(r));
  }
  return regions;
}

}  // namespace

GridBox normalize_box(const PixelBox& b) {
  if (b.width <= 0 || b.height <= 0) {
    throw Error(Errc::InvalidImageExtent,
                "image extent " + std::to_string(b.width) + "x" +
                    std::to_string(b.height) + " must be positive");
  }
  const auto inside = [](double lo, double hi, int extent) {
    return lo >= 0.0 && lo <= hi && hi <= extent;  // NaN fails every test
  };
  if (!inside(b.x1, b.x2, b.width) || !inside(b.y1, b.y2, b.height)) {
    throw Error(Errc::CoordinateOutOfRange, "pixel box outside the image");
  }
  return {normalize_coord(b.x1, b.width), normalize_coord(b.y1, b.height),
          normalize_coord(b.x2, b.width), normalize_coord(b.y2, b.height)};
}

PixelBox denormalize_box(const GridBox& g, int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error(Errc::InvalidImageExtent, "image extent must be positive");
  }
  const auto center = [](int v, int extent) {
    return (v + 0.5) * extent / kGridSize;
  };
  return {center(g.x1, width), center(g.y1, height), center(g.x2, width),
          center(g.y2, height), width, height};
}

bool is_valid(const GridBox& b) noexcept {
  return in_grid(b.x1) && in_grid(b.y1) && in_grid(b.x2) && in_grid(b.y2) &&
         b.x1 <= b.x2 && b.y1 <= b.y2;
}

bool is_valid(const QuadGrid& q) noexcept {
  return std::all_of(q.points.begin(), q.points.end(), [](const GridPoint& p) {
    return in_grid(p.x) && in_grid(p.y);
  });
}

bool contains_grounding_tag(std::string_view text) noexcept {
  return find_tag(text, 0).pos != std::string_view::npos;
}

void validate_markup(const Markup& nodes) {
  for (const auto& node : nodes) {
    if (const auto* text = std::get_if<TextNode>(&node)) {
      if (contains_grounding_tag(text->content)) {
        throw Error(Errc::UnbalancedTags, "plain text contains a grounding tag");
      }
      continue;
    }
    const auto& ref = std::get<RefNode>(node);
    if (contains_grounding_tag(ref.content)) {
      throw Error(Errc::UnbalancedTags, "reference text contains a grounding tag");
    }
    if (ref.regions.empty()) {
      throw Error(Errc::UnboundRef, "<ref>" + ref.content + "</ref> has no region");
    }
    for (const auto& region : ref.regions) {
      if (region.index() != ref.regions.front().index()) {
        throw Error(Errc::MalformedRegion, "boxes and quads cannot share one reference");
      }
      if (const auto* box = std::get_if<GridBox>(&region)) {
        for (int v : {box->x1, box->y1, box->x2, box->y2}) {
          if (!in_grid(v)) {
            throw Error(Errc::CoordinateOutOfRange,
                        "coordinate " + std::to_string(v) + " outside [0, 999]");
          }
        }
        if (!is_valid(*box)) throw Error(Errc::MalformedRegion, "box corners are not ordered");
      } else if (!is_valid(std::get<QuadGrid>(region))) {
        throw Error(Errc::CoordinateOutOfRange, "quad coordinate outside [0, 999]");
      }
    }
  }
}

std::string emit_region(const Region& region) {
  std::string out;
  if (const auto* box = std::get_if<GridBox>(&region)) {
    out += tags::kBoxOpen;
    append_point(out, {box->x1, box->y1});
    out += ',';
    append_point(out, {box->x2, box->y2});
    out += tags::kBoxClose;
  } else {
    const auto& quad = std::get<QuadGrid>(region);
    out += tags::kQuadOpen;
    for (std::size_t i = 0; i < quad.points.size(); ++i) {
      if (i > 0) out += ", ";
      append_point(out, quad.points[i]);
    }
    out += tags::kQuadClose;
  }
  return out;
}

std::string emit_markup(const Markup& nodes) {
  std::string out;
  for (const auto& node : nodes) {
    if (const auto* text = std::get_if<TextNode>(&node)) {
      out += text->content;
      continue;
    }
    const auto& ref = std::get<RefNode>(node);
    out += tags::kRefOpen;
    out += ref.content;
    out += tags::kRefClose;
    for (const auto& region : ref.regions) out += emit_region(region);
  }
  return out;
}

Markup parse_markup(std::string_view s, const ParseOptions& options) {
  Markup nodes;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const TagHit hit = find_tag(s, pos);
    if (hit.pos == std::string_view::npos) {
      nodes.emplace_back(TextNode{std::string(s.substr(pos))});
      break;
    }
    if (hit.pos > pos) {
      nodes.emplace_back(TextNode{std::string(s.substr(pos, hit.pos - pos))});
    }
    pos = hit.pos;

    if (hit.tag == tags::kRefOpen) {
      const std::size_t content_start = pos + tags::kRefOpen.size();
      const TagHit close = find_tag(s, content_start);
      if (close.pos == std::string_view::npos || close.tag != tags::kRefClose) {
        throw Error(Errc::UnbalancedTags, "<ref> at offset " +
                                              std::to_string(pos) +
                                              " is not closed by </ref>");
      }
      RefNode ref{std::string(s.substr(content_start, close.pos - content_start)),
                  {}};
      pos = close.pos + tags::kRefClose.size();
      ref.regions = read_region_run(s, pos);
      if (ref.regions.empty()) {
        throw Error(Errc::UnboundRef,
                    "<ref>" + ref.content + "</ref> has no region");
      }
      nodes.emplace_back(std::move(ref));
    } else if (hit.tag == tags::kBoxOpen || hit.tag == tags::kQuadOpen) {
      if (!options.lenient_orphans) {
        throw Error(Errc::OrphanRegion, "region tag at offset " +
                                            std::to_string(pos) +
                                            " has no preceding </ref>");
      }
      nodes.emplace_back(RefNode{"", read_region_run(s, pos)});
    } else {
      throw Error(Errc::UnbalancedTags, "unexpected " + std::string(hit.tag) +
                                            " at offset " + std::to_string(pos));
    }
  }
  return nodes;
}

std::vector<Region> parse_regions(std::string_view s) {
  std::size_t pos = 0;
  auto regions = read_region_run(s, pos);
  if (pos != s.size()) {
    throw Error(Errc::MalformedRegion,
                "trailing text after regions: \"" + std::string(s.substr(pos)) + "\"");
  }
  return regions;
}

}  // namespace vlprep
