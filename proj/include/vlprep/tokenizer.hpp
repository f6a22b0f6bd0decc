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

// Tokenizer contract used for loss-mask projection, plus a byte-level mock.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vlprep/chat_builder.hpp"

namespace vlprep {

struct Token {
  std::int32_t id = 0;
  std::size_t begin = 0;  // byte range in the encoded text
  std::size_t end = 0;
};

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;

  virtual std::vector<Token> encode(std::string_view text) const = 0;
  virtual std::string decode(std::span<const std::int32_t> ids) const = 0;

  /// Encodes an annotated text. The default encodes the whole string and
  /// leaves alignment checking to project_mask.
  virtual std::vector<Token> encode_annotated(const AnnotatedText& a) const {
    return encode(a.text);
  }
};

/// Bytes map to ids 0..255; the reserved literals map to 256.. in order.
class MockTokenizer final : public Tokenizer {
 public:
  static constexpr std::array<std::string_view, 11> kReserved = {
      "<img>", "</img>", "<box>", "</box>", "<ref>", "</ref>",
      "<quad>", "</quad>", "<|im_start|>", "<|im_end|>", "<eos>"};
  static constexpr std::int32_t kFirstReservedId = 256;

  std::vector<Token> encode(std::string_view text) const override;
  std::string decode(std::span<const std::int32_t> ids) const override;
  /// Encodes span by span, so no token crosses a span boundary.
  std::vector<Token> encode_annotated(const AnnotatedText& a) const override;

  static std::int32_t vocab_size() noexcept {
    return kFirstReservedId + static_cast<std::int32_t>(kReserved.size());
  }
};

struct MaskedTokens {
  std::vector<std::int32_t> ids;
  std::vector<bool> mask;
};

/// Projects span supervision onto tokens. Throws SpanAlignmentError if a
/// token straddles a span boundary or the tokens do not tile the text.
MaskedTokens project_mask(const AnnotatedText& a, const Tokenizer& tokenizer);

}  // namespace vlprep
