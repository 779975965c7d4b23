#pragma once

// UTF-8 transcoding, canonical composition and the Hangul-specific repairs
// every stage relies on. Character counts everywhere are code points of
// NFC text, so a precomposed Hangul syllable is one character.

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "kcurate/error.hpp"

namespace kcurate::utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

/// Decodes UTF-8; every byte that does not start a well-formed sequence
/// becomes one U+FFFD.
inline std::u32string decode(std::string_view in) {
  std::u32string out;
  out.reserve(in.size());
  const auto* p = reinterpret_cast<const unsigned char*>(in.data());
  const std::size_t n = in.size();
  std::size_t i = 0;
  while (i < n) {
    unsigned char b = p[i];
    if (b < 0x80) {
      out.push_back(b);
      ++i;
      continue;
    }
    int len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((b & 0xE0) == 0xC0) {
      len = 2, cp = b & 0x1F, min = 0x80;
    } else if ((b & 0xF0) == 0xE0) {
      len = 3, cp = b & 0x0F, min = 0x800;
    } else if ((b & 0xF8) == 0xF0) {
      len = 4, cp = b & 0x07, min = 0x10000;
    } else {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    if (i + len > n) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      unsigned char c = p[i + k];
      if ((c & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (c & 0x3F);
    }
    if (!ok || cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string encode(std::u32string_view in) {
  std::string out;
  out.reserve(in.size());
  for (char32_t cp : in) append(out, cp);
  return out;
}

inline bool is_ascii(std::string_view s) {
  for (unsigned char c : s)
    if (c >= 0x80) return false;
  return true;
}

/// Canonical composition (NFC).
inline std::string nfc(std::string_view s) {
  if (is_ascii(s)) return std::string(s);
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) fail(ErrorCode::IoError, "ICU NFC normalizer unavailable");
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  if (norm->isNormalized(u, status) && U_SUCCESS(status)) {
    // fromUTF8 may have substituted malformed bytes; re-encode to be safe.
    std::string out;
    u.toUTF8String(out);
    return out;
  }
  status = U_ZERO_ERROR;
  icu::UnicodeString normalized = norm->normalize(u, status);
  if (U_FAILURE(status)) fail(ErrorCode::IoError, "NFC normalization failed");
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

/// Number of characters of the NFC form.
inline std::size_t char_count(std::string_view s) {
  if (is_ascii(s)) return s.size();
  return decode(nfc(s)).size();
}

inline bool is_whitespace(char32_t c) {
  switch (c) {
    case U' ': case U'\t': case U'\n': case U'\v': case U'\f': case U'\r':
    case 0x00A0: case 0x1680: case 0x2028: case 0x2029: case 0x202F:
    case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

inline bool is_hangul_syllable(char32_t c) { return c >= 0xAC00 && c <= 0xD7A3; }

inline bool is_compat_jamo(char32_t c) { return c >= 0x3131 && c <= 0x318E; }

inline bool is_conjoining_jamo(char32_t c) {
  return (c >= 0x1100 && c <= 0x11FF) || (c >= 0xA960 && c <= 0xA97F) ||
         (c >= 0xD7B0 && c <= 0xD7FF);
}

inline bool is_hangul(char32_t c) {
  return is_hangul_syllable(c) || is_compat_jamo(c) || is_conjoining_jamo(c);
}

inline bool is_ascii_alpha(char32_t c) { return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z'); }
inline bool is_ascii_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

/// Latin letters including the Latin-1 supplement and Latin Extended blocks.
inline bool is_latin(char32_t c) {
  return is_ascii_alpha(c) || (c >= 0xC0 && c <= 0x24F && c != 0xD7 && c != 0xF7);
}

/// Letter-like code point from some script other than Hangul or Latin.
inline bool is_other_letter(char32_t c) {
  return (c >= 0x370 && c <= 0x1FFF && !is_conjoining_jamo(c)) ||
         (c >= 0x3040 && c <= 0x30FF) || (c >= 0x4E00 && c <= 0x9FFF) ||
         (c >= 0x3400 && c <= 0x4DBF);
}

/// Punctuation or symbol: anything that is not a letter, digit or space.
inline bool is_punct_or_symbol(char32_t c) {
  if (is_whitespace(c) || is_ascii_digit(c) || is_latin(c) || is_hangul(c) || is_other_letter(c))
    return false;
  if (c >= 0x200B && c <= 0x200D) return false;
  if (c == 0xFEFF) return false;
  return true;
}

/// NFC, ASCII lowercase, whitespace runs collapsed to one space, trimmed.
/// This is the view every statistical feature (n-grams, TF-IDF, LM) is
/// computed over.
inline std::u32string normalize_for_features(std::string_view text) {
  std::u32string cps = decode(nfc(text));
  std::u32string out;
  out.reserve(cps.size());
  bool pending_space = false;
  for (char32_t c : cps) {
    if (is_whitespace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(U' ');
      pending_space = false;
    }
    if (c >= U'A' && c <= U'Z') c = c - U'A' + U'a';
    out.push_back(c);
  }
  return out;
}

/// Trims and collapses internal whitespace; used as the identity key for
/// line-level comparisons.
inline std::string collapse_whitespace(std::string_view line) {
  std::u32string cps = decode(line);
  std::u32string out;
  bool pending_space = false;
  for (char32_t c : cps) {
    if (is_whitespace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(U' ');
      pending_space = false;
    }
    out.push_back(c);
  }
  return encode(out);
}

namespace detail {

// Indexed by (code point - U+3131) over the 30 compatibility consonants:
// {choseong index or -1, jongseong index or 0}.
inline constexpr std::array<std::array<int, 2>, 30> kCompatConsonants{{
    {0, 1},   {1, 2},   {-1, 3},  {2, 4},   {-1, 5},  {-1, 6},  {3, 7},   {4, 0},
    {5, 8},   {-1, 9},  {-1, 10}, {-1, 11}, {-1, 12}, {-1, 13}, {-1, 14}, {-1, 15},
    {6, 16},  {7, 17},  {8, 0},   {-1, 18}, {9, 19},  {10, 20}, {11, 21}, {12, 22},
    {13, 0},  {14, 23}, {15, 24}, {16, 25}, {17, 26}, {18, 27},
}};

inline int choseong_index(char32_t c) {
  if (c < 0x3131 || c > 0x314E) return -1;
  return kCompatConsonants[c - 0x3131][0];
}

inline int jongseong_index(char32_t c) {
  if (c < 0x3131 || c > 0x314E) return 0;
  return kCompatConsonants[c - 0x3131][1];
}

inline int jungseong_index(char32_t c) {
  if (c < 0x314F || c > 0x3163) return -1;
  return static_cast<int>(c - 0x314F);
}

}  // namespace detail

/// Recomposes runs of compatibility jamo (ㅎㅏㄴ) into precomposed
/// syllables (한). A consonant is taken as a final only when it is not
/// followed by a vowel; jamo-only runs without vowels (ㅋㅋ) are untouched.
inline std::u32string recompose_compat_jamo(std::u32string_view in) {
  std::u32string out;
  out.reserve(in.size());
  const std::size_t n = in.size();
  std::size_t i = 0;
  while (i < n) {
    const int lead = detail::choseong_index(in[i]);
    const int vowel = i + 1 < n ? detail::jungseong_index(in[i + 1]) : -1;
    if (lead < 0 || vowel < 0) {
      out.push_back(in[i]);
      ++i;
      continue;
    }
    char32_t syllable = 0xAC00 + static_cast<char32_t>((lead * 21 + vowel) * 28);
    std::size_t j = i + 2;
    if (j < n) {
      const int tail = detail::jongseong_index(in[j]);
      const bool next_is_vowel = j + 1 < n && detail::jungseong_index(in[j + 1]) >= 0;
      if (tail > 0 && !next_is_vowel) {
        syllable += static_cast<char32_t>(tail);
        ++j;
      }
    }
    out.push_back(syllable);
    i = j;
  }
  return out;
}

}  // namespace kcurate::utf8
