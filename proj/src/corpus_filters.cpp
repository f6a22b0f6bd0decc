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

#include "vlprep/corpus_filters.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <sstream>

#include "vlprep/error.hpp"
#include "vlprep/utf8.hpp"

namespace vlprep {

namespace {

constexpr std::array<std::pair<RuleId, std::string_view>, 13> kRuleNames = {{
    {RuleId::R1_aspect, "R1_aspect"},
    {RuleId::R2_small, "R2_small"},
    {RuleId::R3_clip, "R3_clip"},
    {RuleId::R4_script, "R4_script"},
    {RuleId::R5_emoji, "R5_emoji"},
    {RuleId::R6_length, "R6_length"},
    {RuleId::R7_html, "R7_html"},
    {RuleId::R8_pattern, "R8_pattern"},
    {RuleId::P_charcount, "P_charcount"},
    {RuleId::P_latin_ext, "P_latin_ext"},
    {RuleId::P_pua, "P_pua"},
    {RuleId::T_special_tag, "T_special_tag"},
    {RuleId::D_duplicate, "D_duplicate"},
}};

constexpr CodePointRange kLatinExtA{0x0100, 0x017F};
constexpr CodePointRange kLatinExtB{0x0180, 0x024F};
constexpr CodePointRange kPrivateUse{0xE000, 0xF8FF};

bool in_any(const std::vector<CodePointRange>& ranges, char32_t cp) {
  return std::any_of(ranges.begin(), ranges.end(),
                     [cp](const CodePointRange& r) { return r.contains(cp); });
}

std::string hex_cp(char32_t cp) {
  std::ostringstream os;
  os << "U+" << std::uppercase << std::hex;
  os.width(4);
  os.fill('0');
  os << static_cast<std::uint32_t>(cp);
  return os.str();
}

std::string fmt_real(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_tag_start(std::string_view s, std::size_t i) {
  if (s[i] != '<' || i + 1 >= s.size()) return false;
  const char c = s[i + 1];
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '/' || c == '!';
}

std::string decode_entities(std::string_view s) {
  static constexpr std::array<std::pair<std::string_view, char>, 5> kEntities = {
      {{"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&apos;", '\''}}};
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    bool matched = false;
    if (s[i] == '&') {
      for (const auto& [name, ch] : kEntities) {
        if (s.substr(i, name.size()) == name) {
          out += ch;
          i += name.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) out += s[i++];
  }
  return out;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

bool glob_match(std::u32string_view pat, std::u32string_view text) {
  std::size_t p = 0, t = 0;
  std::size_t star = std::u32string_view::npos, resume = 0;
  while (t < text.size()) {
    if (p < pat.size() && (pat[p] == U'?' || pat[p] == text[t])) {
      ++p, ++t;
    } else if (p < pat.size() && pat[p] == U'*') {
      star = p++;
      resume = t;
    } else if (star != std::u32string_view::npos) {
      p = star + 1;
      t = ++resume;
    } else {
      return false;
    }
  }
  while (p < pat.size() && pat[p] == U'*') ++p;
  return p == pat.size();
}

}  // namespace

std::string_view rule_name(RuleId rule) noexcept {
  for (const auto& [id, name] : kRuleNames) {
    if (id == rule) return name;
  }
  return "unknown";
}

std::optional<RuleId> rule_from_name(std::string_view name) noexcept {
  for (const auto& [id, n] : kRuleNames) {
    if (n == name) return id;
  }
  return std::nullopt;
}

std::vector<CodePointRange> FilterConfig::default_allowed_scripts() {
  return {
      {0x0000, 0x007F},  // Basic Latin
      {0x2000, 0x206F},  // General Punctuation (curly quotes, dashes)
      {0x3000, 0x303F},  // CJK Symbols and Punctuation
      {0x3400, 0x4DBF},  // CJK Extension A
      {0x4E00, 0x9FFF},  // CJK Unified Ideographs
      {0xF900, 0xFAFF},  // CJK Compatibility Ideographs
      {0xFF00, 0xFFEF},  // Halfwidth and Fullwidth Forms
  };
}

std::vector<CodePointRange> FilterConfig::default_emoji_ranges() {
  return {
      {0x200D, 0x200D},    // zero-width joiner
      {0x20E3, 0x20E3},    // combining keycap
      {0x231A, 0x231B},
      {0x23E9, 0x23FA},
      {0x2600, 0x27BF},    // Misc Symbols, Dingbats
      {0x2B00, 0x2BFF},    // Misc Symbols and Arrows
      {0xFE0F, 0xFE0F},    // emoji presentation selector
      {0x1F000, 0x1FAFF},  // pictographs, emoticons, transport, flags
      {0xE0020, 0xE007F},  // tag sequences
  };
}

void FilterConfig::validate() const {
  if (!(min_chars < max_chars)) {
    throw Error(Errc::InvalidConfig, "min_chars must be < max_chars");
  }
  if (!(max_aspect_ratio > 1.0)) {
    throw Error(Errc::InvalidConfig, "max_aspect_ratio must exceed 1");
  }
  if (min_side_px < 0) {
    throw Error(Errc::InvalidConfig, "min_side_px must be non-negative");
  }
}

HtmlCleanResult clean_html(std::string_view text) {
  HtmlCleanResult result;
  std::string stripped;
  stripped.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    if (!is_tag_start(text, i)) {
      stripped += text[i++];
      continue;
    }
    const std::size_t close = text.find('>', i);
    if (close == std::string_view::npos) {
      result.malformed = true;
      stripped += text.substr(i);
      break;
    }
    stripped += ' ';
    i = close + 1;
  }
  result.text = collapse_whitespace(decode_entities(stripped));
  return result;
}

bool pattern_occurs(std::string_view pattern, std::string_view text) {
  std::u32string pat = U"*" + utf8::decode(pattern) + U"*";
  return glob_match(pat, utf8::decode(text));
}

FilterVerdict filter_pair(const CorpusRecord& r, const FilterConfig& cfg,
                          std::string* cleaned_text) {
  const bool geometry = cfg.enabled(RuleId::R1_aspect) || cfg.enabled(RuleId::R2_small);
  if (geometry && (!r.image_width || !r.image_height || *r.image_width <= 0 ||
                   *r.image_height <= 0)) {
    throw Error(Errc::IncompleteRecord,
                "record " + r.id + " lacks positive image dimensions");
  }
  if (cfg.enabled(RuleId::R1_aspect)) {
    const auto [lo, hi] = std::minmax(*r.image_width, *r.image_height);
    const double ratio = static_cast<double>(hi) / lo;
    if (ratio > cfg.max_aspect_ratio) {
      return FilterVerdict::drop(RuleId::R1_aspect,
                                 "aspect ratio " + fmt_real(ratio) + " > " +
                                     fmt_real(cfg.max_aspect_ratio));
    }
  }
  if (cfg.enabled(RuleId::R2_small)) {
    const int side = std::min(*r.image_width, *r.image_height);
    if (side < cfg.min_side_px) {
      return FilterVerdict::drop(RuleId::R2_small,
                                 "short side " + std::to_string(side) + " < " +
                                     std::to_string(cfg.min_side_px));
    }
  }
  if (cfg.enabled(RuleId::R3_clip)) {
    if (auto it = cfg.clip_thresholds.find(r.dataset);
        it != cfg.clip_thresholds.end()) {
      if (!r.clip_score) {
        throw Error(Errc::IncompleteRecord, "record " + r.id +
                                                " lacks clip_score for dataset " +
                                                r.dataset);
      }
      if (*r.clip_score < it->second) {
        return FilterVerdict::drop(RuleId::R3_clip,
                                   "clip score " + fmt_real(*r.clip_score) +
                                       " < " + fmt_real(it->second));
      }
    }
  }

  const std::u32string cps = utf8::decode(r.text);
  if (cfg.enabled(RuleId::R4_script)) {
    for (char32_t cp : cps) {
      if (!in_any(cfg.allowed_scripts, cp) && !in_any(cfg.emoji_ranges, cp)) {
        return FilterVerdict::drop(RuleId::R4_script,
                                   "disallowed character " + hex_cp(cp));
      }
    }
  }
  if (cfg.enabled(RuleId::R5_emoji)) {
    for (char32_t cp : cps) {
      if (in_any(cfg.emoji_ranges, cp)) {
        return FilterVerdict::drop(RuleId::R5_emoji, "emoji " + hex_cp(cp));
      }
    }
  }

  HtmlCleanResult cleaned{r.text, false};
  if (cfg.enabled(RuleId::R7_html)) cleaned = clean_html(r.text);

  if (cfg.enabled(RuleId::R6_length)) {
    const std::size_t n = utf8::count_code_points(cleaned.text);
    if (n < cfg.min_chars || n > cfg.max_chars) {
      return FilterVerdict::drop(RuleId::R6_length,
                                 "length " + std::to_string(n) + " outside [" +
                                     std::to_string(cfg.min_chars) + ", " +
                                     std::to_string(cfg.max_chars) + "]");
    }
  }
  if (cleaned.malformed) {
    return FilterVerdict::drop(RuleId::R7_html, "unterminated HTML tag");
  }
  if (cfg.enabled(RuleId::R8_pattern)) {
    for (const auto& pattern : cfg.banned_patterns) {
      if (pattern_occurs(pattern, cleaned.text)) {
        return FilterVerdict::drop(RuleId::R8_pattern, "matches pattern " + pattern);
      }
    }
  }
  if (cleaned_text) *cleaned_text = std::move(cleaned.text);
  return FilterVerdict::keep();
}

FilterVerdict check_special_tags(const CorpusRecord& r, const FilterConfig& cfg) {
  for (const auto& tag : cfg.special_tags) {
    if (!tag.empty() && r.text.find(tag) != std::string::npos) {
      return FilterVerdict::drop(RuleId::T_special_tag, "contains " + tag);
    }
  }
  return FilterVerdict::keep();
}

FilterVerdict filter_document_text(const CorpusRecord& r, SourceKind kind,
                                   const FilterConfig& cfg) {
  const std::u32string cps = utf8::decode(r.text);
  if (cps.size() < cfg.min_chars || cps.size() > cfg.max_chars) {
    return FilterVerdict::drop(RuleId::P_charcount,
                               "character count " + std::to_string(cps.size()));
  }
  if (kind == SourceKind::pdf) {
    for (char32_t cp : cps) {
      if (kLatinExtA.contains(cp) || kLatinExtB.contains(cp)) {
        return FilterVerdict::drop(RuleId::P_latin_ext,
                                   "Latin Extended character " + hex_cp(cp));
      }
    }
  }
  for (char32_t cp : cps) {
    if (kPrivateUse.contains(cp)) {
      return FilterVerdict::drop(RuleId::P_pua, "private-use character " + hex_cp(cp));
    }
  }
  return FilterVerdict::keep();
}

bool id_less(std::string_view a, std::string_view b) noexcept {
  const auto numeric = [](std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(),
                                     [](char c) { return c >= '0' && c <= '9'; });
  };
  if (numeric(a) && numeric(b)) {
    const auto strip = [](std::string_view s) {
      const auto nz = s.find_first_not_of('0');
      return nz == std::string_view::npos ? std::string_view{} : s.substr(nz);
    };
    const auto sa = strip(a), sb = strip(b);
    if (sa.size() != sb.size()) return sa.size() < sb.size();
    if (sa != sb) return sa < sb;
  }
  return a < b;
}

const CorpusRecord& select_longest_caption(const std::vector<CorpusRecord>& group) {
  if (group.empty()) throw Error(Errc::EmptyGroup, "caption group is empty");
  const CorpusRecord* best = &group.front();
  std::size_t best_len = utf8::count_code_points(best->text);
  for (const auto& r : group) {
    const std::size_t len = utf8::count_code_points(r.text);
    if (len > best_len || (len == best_len && id_less(r.id, best->id))) {
      best = &r;
      best_len = len;
    }
  }
  return *best;
}

bool spans_conflict(const GroundedSpan& a, const GroundedSpan& b) noexcept {
  return a.begin < b.end && b.begin < a.end;
}

std::vector<std::size_t> denest_select(const std::vector<GroundedSpan>& spans) {
  std::vector<std::size_t> order(spans.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    const auto& a = spans[i];
    const auto& b = spans[j];
    if (a.regions.size() != b.regions.size()) return a.regions.size() > b.regions.size();
    if (a.end - a.begin != b.end - b.begin) return a.end - a.begin > b.end - b.begin;
    return a.begin < b.begin;
  });
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    if (spans[i].regions.empty()) continue;
    const bool clash = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return spans_conflict(spans[i], spans[k]);
    });
    if (!clash) kept.push_back(i);
  }
  std::sort(kept.begin(), kept.end(), [&](std::size_t i, std::size_t j) {
    return spans[i].begin < spans[j].begin;
  });
  return kept;
}

Markup denest_grit(const GroundedCaption& caption) {
  for (const auto& s : caption.spans) {
    if (s.begin >= s.end || s.end > caption.text.size()) {
      throw Error(Errc::MalformedRegion,
                  "grounded span [" + std::to_string(s.begin) + ", " +
                      std::to_string(s.end) + ") outside caption");
    }
  }
  Markup out;
  std::size_t cursor = 0;
  for (std::size_t k : denest_select(caption.spans)) {
    const auto& s = caption.spans[k];
    if (s.begin > cursor) {
      out.emplace_back(TextNode{caption.text.substr(cursor, s.begin - cursor)});
    }
    out.emplace_back(RefNode{caption.text.substr(s.begin, s.end - s.begin), s.regions});
    cursor = s.end;
  }
  if (cursor < caption.text.size()) {
    out.emplace_back(TextNode{caption.text.substr(cursor)});
  }
  return out;
}

}  // namespace vlprep
