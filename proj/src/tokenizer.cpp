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

#include "vlprep/tokenizer.hpp"

#include "vlprep/error.hpp"

namespace vlprep {

namespace {

void encode_into(std::string_view text, std::size_t offset, std::vector<Token>& out) {
  for (std::size_t i = 0; i < text.size();) {
    std::int32_t id = -1;
    std::size_t len = 1;
    if (text[i] == '<') {
      for (std::size_t r = 0; r < MockTokenizer::kReserved.size(); ++r) {
        const auto lit = MockTokenizer::kReserved[r];
        if (text.substr(i, lit.size()) == lit) {
          id = MockTokenizer::kFirstReservedId + static_cast<std::int32_t>(r);
          len = lit.size();
          break;
        }
      }
    }
    if (id < 0) id = static_cast<unsigned char>(text[i]);
    out.push_back({id, offset + i, offset + i + len});
    i += len;
  }
}

}  // namespace

std::vector<Token> MockTokenizer::encode(std::string_view text) const {
  std::vector<Token> out;
  encode_into(text, 0, out);
  return out;
}

std::vector<Token> MockTokenizer::encode_annotated(const AnnotatedText& a) const {
  std::vector<Token> out;
  for (const auto& s : a.spans) {
    encode_into(std::string_view(a.text).substr(s.begin, s.end - s.begin), s.begin, out);
  }
  return out;
}

std::string MockTokenizer::decode(std::span<const std::int32_t> ids) const {
  std::string out;
  for (std::int32_t id : ids) {
    if (id >= 0 && id < kFirstReservedId) {
      out += static_cast<char>(id);
    } else if (id >= kFirstReservedId && id < vocab_size()) {
      out += kReserved[static_cast<std::size_t>(id - kFirstReservedId)];
    } else {
      throw Error(Errc::InvalidConfig, "token id " + std::to_string(id) +
                                           " outside the mock vocabulary");
    }
  }
  return out;
}

MaskedTokens project_mask(const AnnotatedText& a, const Tokenizer& tokenizer) {
  if (!a.partitions_text()) {
    throw Error(Errc::SpanAlignmentError, "spans do not partition the text");
  }
  const auto tokens = tokenizer.encode_annotated(a);
  MaskedTokens out;
  out.ids.reserve(tokens.size());
  out.mask.reserve(tokens.size());
  std::size_t span = 0;
  std::size_t cursor = 0;
  for (const auto& t : tokens) {
    if (t.begin != cursor || t.end <= t.begin) {
      throw Error(Errc::SpanAlignmentError,
                  "tokens do not tile the text at byte " + std::to_string(cursor));
    }
    while (span < a.spans.size() && a.spans[span].end <= t.begin) ++span;
    if (span == a.spans.size() || t.end > a.spans[span].end) {
      throw Error(Errc::SpanAlignmentError,
                  "token [" + std::to_string(t.begin) + ", " + std::to_string(t.end) +
                      ") crosses a span boundary");
    }
    out.ids.push_back(t.id);
    out.mask.push_back(a.spans[span].supervised);
    cursor = t.end;
  }
  if (cursor != a.text.size()) {
    throw Error(Errc::SpanAlignmentError, "tokens stop before the end of the text");
  }
  return out;
}

}  // namespace vlprep
