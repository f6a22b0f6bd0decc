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

// Record-level cleaning rules for web-crawled image-text pairs, academic
// caption sets, extracted PDF/HTML page text, and nested grounding captions.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vlprep/grounding_markup.hpp"

namespace vlprep {

enum class Language { en, zh, other };
enum class SourceKind { pair, pdf, html };

struct CorpusRecord {
  std::string id;
  std::string dataset;
  std::optional<int> image_width;
  std::optional<int> image_height;
  std::string text;
  Language language = Language::other;
  std::optional<double> clip_score;
  std::string image_key;
  std::optional<std::string> group_key;
  SourceKind kind = SourceKind::pair;
};

enum class RuleId {
  R1_aspect,
  R2_small,
  R3_clip,
  R4_script,
  R5_emoji,
  R6_length,
  R7_html,
  R8_pattern,
  P_charcount,
  P_latin_ext,
  P_pua,
  T_special_tag,
  D_duplicate,
};

std::string_view rule_name(RuleId rule) noexcept;
std::optional<RuleId> rule_from_name(std::string_view name) noexcept;

enum class Decision { keep, drop };

struct FilterVerdict {
  Decision decision = Decision::keep;
  std::optional<RuleId> rule;
  std::string detail;

  static FilterVerdict keep() { return {}; }
  static FilterVerdict drop(RuleId rule, std::string detail) {
    return {Decision::drop, rule, std::move(detail)};
  }
  bool kept() const noexcept { return decision == Decision::keep; }
};

struct CodePointRange {
  char32_t first;
  char32_t last;
  bool contains(char32_t cp) const noexcept { return cp >= first && cp <= last; }
};

struct FilterConfig {
  double max_aspect_ratio = 3.0;
  int min_side_px = 224;
  std::map<std::string, double> clip_thresholds;
  std::vector<CodePointRange> allowed_scripts = default_allowed_scripts();
  std::vector<CodePointRange> emoji_ranges = default_emoji_ranges();
  std::size_t min_chars = 5;
  std::size_t max_chars = 1024;
  /// Substring patterns; `*` matches any run and `?` any one code point.
  std::vector<std::string> banned_patterns;
  std::vector<std::string> special_tags = {"<PERSON>"};
  /// Datasets that get only the special-tag rule instead of R1..R8.
  std::set<std::string> academic_datasets = {"cc12m", "sbu"};
  std::set<RuleId> disabled_rules;

  static std::vector<CodePointRange> default_allowed_scripts();
  static std::vector<CodePointRange> default_emoji_ranges();

  /// Throws Errc::InvalidConfig when an invariant is violated.
  void validate() const;
  bool enabled(RuleId rule) const { return !disabled_rules.contains(rule); }
};

/// Strips angle-bracket tags, decodes the five XML entities, and collapses
/// whitespace. `malformed` is set when a tag opener is never closed.
struct HtmlCleanResult {
  std::string text;
  bool malformed = false;
};
HtmlCleanResult clean_html(std::string_view text);

/// Glob match of `pattern` anywhere inside `text`.
bool pattern_occurs(std::string_view pattern, std::string_view text);

/// Evaluates R1..R8 in order; the first failing rule is reported. On keep,
/// `cleaned_text` (if given) receives the HTML-cleaned, trimmed caption.
FilterVerdict filter_pair(const CorpusRecord& record, const FilterConfig& cfg,
                          std::string* cleaned_text = nullptr);

FilterVerdict check_special_tags(const CorpusRecord& record,
                                 const FilterConfig& cfg);

FilterVerdict filter_document_text(const CorpusRecord& record, SourceKind kind,
                                   const FilterConfig& cfg);

/// Longest caption by code points; ties go to the smallest id (numeric ids
/// compare numerically).
const CorpusRecord& select_longest_caption(const std::vector<CorpusRecord>& group);

bool id_less(std::string_view a, std::string_view b) noexcept;

// ---------------------------------------------------------------------------
// Nested grounding captions.

/// A grounded phrase inside a caption: bytes [begin, end) of the caption.
struct GroundedSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::vector<Region> regions;
};

struct GroundedCaption {
  std::string text;
  std::vector<GroundedSpan> spans;
};

bool spans_conflict(const GroundedSpan& a, const GroundedSpan& b) noexcept;

/// Indices of the spans kept by the greedy pass. Candidates are visited by
/// (region count desc, length desc, begin asc, index asc) and kept when they
/// do not intersect any span kept earlier.
std::vector<std::size_t> denest_select(const std::vector<GroundedSpan>& spans);

/// Rebuilds the caption as markup with only the kept spans as references;
/// demoted spans fall back to plain text.
Markup denest_grit(const GroundedCaption& caption);

}  // namespace vlprep
