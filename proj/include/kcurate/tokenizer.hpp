#pragma once

// Tokenizer interface with byte-offset spans, plus two local tokenizers.

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "kcurate/hashing.hpp"
#include "kcurate/utf8.hpp"

namespace kcurate {


struct TokenSpan {
  std::uint32_t id = 0;
  std::size_t begin = 0;  // byte offsets into the source text
  std::size_t end = 0;
};

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<TokenSpan> tokenize(std::string_view text) const = 0;
  virtual std::string name() const = 0;
};

/// Maximal runs of non-whitespace.
class WhitespaceTokenizer : public Tokenizer {
 public:
  std::vector<TokenSpan> tokenize(std::string_view text) const override {
    std::vector<TokenSpan> out;
    std::size_t i = 0;
    while (i < text.size()) {
      while (i < text.size() && is_space(text[i])) ++i;
      if (i >= text.size()) break;
      const std::size_t b = i;
      while (i < text.size() && !is_space(text[i])) ++i;
      out.push_back({static_cast<std::uint32_t>(hash_bytes(text.substr(b, i - b)) & 0x7FFFFFFF), b, i});
    }
    return out;
  }
  std::string name() const override { return "whitespace"; }

 private:
  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
};

/// One token per code point.
class CharTokenizer : public Tokenizer {
 public:
  std::vector<TokenSpan> tokenize(std::string_view text) const override {
    std::vector<TokenSpan> out;
    std::size_t i = 0;
    while (i < text.size()) {
      const auto lead = static_cast<unsigned char>(text[i]);
      std::size_t len = lead < 0x80 ? 1 : lead >= 0xF0 ? 4 : lead >= 0xE0 ? 3 : lead >= 0xC0 ? 2 : 1;
      len = std::min(len, text.size() - i);
      const std::u32string cp = utf8::decode(text.substr(i, len));
      out.push_back({cp.empty() ? 0u : static_cast<std::uint32_t>(cp[0]), i, i + len});
      i += len;
    }
    return out;
  }
  std::string name() const override { return "char"; }
};

}  // namespace kcurate
