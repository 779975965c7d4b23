#pragma once

#include <unicode/regex.h>
#include <unicode/unistr.h>

#include <memory>
#include <string>
#include <string_view>

#include "kcurate/error.hpp"

namespace kcurate {

/// Unicode-aware compiled pattern backed by ICU. The compiled pattern is
/// immutable and shared; each call creates its own matcher, so one Regex
/// can be used from many threads at once.
class Regex {
 public:
  Regex() = default;

  explicit Regex(std::string_view pattern, bool case_insensitive = false) : source_(pattern) {
    UParseError perr;
    UErrorCode status = U_ZERO_ERROR;
    uint32_t flags = case_insensitive ? UREGEX_CASE_INSENSITIVE : 0;
    icu::UnicodeString upat = icu::UnicodeString::fromUTF8(
        icu::StringPiece(pattern.data(), static_cast<int32_t>(pattern.size())));
    pattern_.reset(icu::RegexPattern::compile(upat, flags, perr, status));
    if (U_FAILURE(status))
      fail(ErrorCode::ConfigInvalid, "regex does not compile: " + std::string(pattern));
  }

  const std::string& source() const { return source_; }
  bool valid() const { return pattern_ != nullptr; }

  bool search(std::string_view text) const { return count(text) > 0; }

  std::size_t count(std::string_view text) const {
    if (!pattern_) return 0;
    icu::UnicodeString u = to_unicode(text);
    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<icu::RegexMatcher> m(pattern_->matcher(u, status));
    std::size_t hits = 0;
    while (m->find(status) && U_SUCCESS(status)) ++hits;
    return hits;
  }

  /// Replaces every match; returns the number of replacements through `hits`.
  std::string replace_all(std::string_view text, std::string_view replacement,
                          std::size_t* hits = nullptr) const {
    if (!pattern_) return std::string(text);
    icu::UnicodeString u = to_unicode(text);
    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<icu::RegexMatcher> m(pattern_->matcher(u, status));
    icu::UnicodeString out;
    std::size_t n = 0;
    // Literal replacement: '$' and '\' in the token are not group references.
    icu::UnicodeString rep = to_unicode(replacement);
    while (m->find(status) && U_SUCCESS(status)) {
      ++n;
      m->appendReplacement(out, icu::UnicodeString(), status);
      out.append(rep);
    }
    m->appendTail(out);
    if (hits) *hits = n;
    if (n == 0) return std::string(text);
    std::string result;
    out.toUTF8String(result);
    return result;
  }

  bool full_match(std::string_view text) const {
    if (!pattern_) return false;
    icu::UnicodeString u = to_unicode(text);
    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<icu::RegexMatcher> m(pattern_->matcher(u, status));
    return m->matches(status) && U_SUCCESS(status);
  }

  /// First capture group of the first match (whole match when group = 0).
  std::string first_group(std::string_view text, int group) const {
    if (!pattern_) return {};
    icu::UnicodeString u = to_unicode(text);
    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<icu::RegexMatcher> m(pattern_->matcher(u, status));
    if (!m->find(status) || U_FAILURE(status)) return {};
    icu::UnicodeString g = m->group(group, status);
    if (U_FAILURE(status)) return {};
    std::string out;
    g.toUTF8String(out);
    return out;
  }

 private:
  static icu::UnicodeString to_unicode(std::string_view s) {
    return icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  }

  std::string source_;
  std::shared_ptr<const icu::RegexPattern> pattern_;
};

}  // namespace kcurate
