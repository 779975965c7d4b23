#pragma once

// Tag assignment: script-histogram language detection, rule-based
// mode/tone tagging, and a one-vs-rest logistic model over hashed
// character n-grams used for domains, quality and toxicity.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "kcurate/corpus.hpp"
#include "kcurate/error.hpp"
#include "kcurate/hashing.hpp"
#include "kcurate/rng.hpp"
#include "kcurate/utf8.hpp"

namespace kcurate {

// ---------------------------------------------------------------------------
// Language

struct LanguageGuess {
  Language language = Language::Unknown;
  double confidence = 0.0;
};

struct LanguageThresholds {
  double dominant_share = 0.7;     // script share needed for a single-language tag
  double code_punct_density = 0.08;
  int code_keyword_hits = 2;
};

namespace detail {

inline bool is_math_operator(char32_t c) {
  switch (c) {
    case U'+': case U'-': case U'*': case U'/': case U'=': case U'^': case U'<': case U'>':
    case 0x00B1: case 0x00D7: case 0x00F7: case 0x2212:
      return true;
    default:
      return (c >= 0x2200 && c <= 0x22FF) || (c >= 0x2A00 && c <= 0x2AFF);
  }
}

inline bool is_greek(char32_t c) { return c >= 0x391 && c <= 0x3C9; }

inline bool is_code_punct(char32_t c) {
  switch (c) {
    case U'(': case U')': case U'{': case U'}': case U'[': case U']': case U';': case U'=':
    case U':': case U'<': case U'>':
      return true;
    default:
      return false;
  }
}

inline int count_code_keywords(std::u32string_view text) {
  static const std::vector<std::u32string> keywords{
      U"def",   U"return", U"import",  U"include", U"class",  U"function", U"public",
      U"void",  U"int",    U"const",   U"let",     U"var",    U"elif",     U"lambda",
      U"print", U"printf", U"println", U"std",     U"static", U"struct",   U"fn",
      U"self",  U"null",   U"true",    U"false",   U"while",  U"for",      U"if"};
  int hits = 0;
  std::u32string word;
  auto flush = [&] {
    if (!word.empty() && std::find(keywords.begin(), keywords.end(), word) != keywords.end())
      ++hits;
    word.clear();
  };
  for (char32_t c : text) {
    if (utf8::is_ascii_alpha(c) || c == U'_' || utf8::is_ascii_digit(c))
      word.push_back(c);
    else
      flush();
  }
  flush();
  return hits;
}

}  // namespace detail

/// Rule-based language tag from the script histogram. Code and math are
/// checked first because both are dominated by Latin letters otherwise.
inline LanguageGuess detect_language(std::string_view text,
                                     const LanguageThresholds& th = LanguageThresholds{}) {
  const std::u32string cps = utf8::decode(utf8::nfc(text));
  std::size_t nonspace = 0, hangul = 0, latin = 0, other = 0;
  std::size_t digits = 0, math_ops = 0, greek = 0, code_punct = 0, long_latin = 0;
  std::size_t run = 0;
  auto close_run = [&] {
    if (run >= 3) long_latin += run;
    run = 0;
  };
  for (char32_t c : cps) {
    if (utf8::is_whitespace(c)) {
      close_run();
      continue;
    }
    ++nonspace;
    if (utf8::is_latin(c)) {
      ++latin;
      ++run;
      continue;
    }
    close_run();
    if (utf8::is_hangul(c)) ++hangul;
    else if (detail::is_greek(c)) ++greek, ++other;
    else if (utf8::is_other_letter(c)) ++other;
    else if (utf8::is_ascii_digit(c)) ++digits;
    if (detail::is_math_operator(c)) ++math_ops;
    if (detail::is_code_punct(c)) ++code_punct;
  }
  close_run();
  if (nonspace == 0) fail(ErrorCode::EmptyText, "language detection on blank text");

  const std::size_t letters = hangul + latin + other;
  const double hangul_share = letters ? static_cast<double>(hangul) / letters : 0.0;

  if (text.find("```") != std::string_view::npos) return {Language::Code, 1.0};
  const int keyword_hits = detail::count_code_keywords(cps);
  const double punct_density = static_cast<double>(code_punct) / nonspace;
  if (keyword_hits >= th.code_keyword_hits && punct_density >= th.code_punct_density &&
      hangul_share < 0.3)
    return {Language::Code, std::min(1.0, 0.5 + punct_density)};

  const std::size_t mathy = digits + math_ops + greek;
  if (math_ops >= 1 && mathy >= long_latin + hangul + (other - greek))
    return {Language::Math, static_cast<double>(mathy) / nonspace};

  if (letters == 0) return {Language::Unknown, 0.0};
  const double latin_share = static_cast<double>(latin) / letters;
  const double other_share = static_cast<double>(other) / letters;
  if (hangul_share >= th.dominant_share) return {Language::Korean, hangul_share};
  if (latin_share >= th.dominant_share) return {Language::English, latin_share};
  return {Language::MultiLanguage, 1.0 - std::max({hangul_share, latin_share, other_share})};
}

// ---------------------------------------------------------------------------
// Expression mode and tone

struct StyleTags {
  Mode mode = Mode::Unknown;
  Tone tone = Tone::Unknown;
};

struct StyleThresholds {
  double spoken_marker_density = 0.3;  // markers per sentence
};

namespace detail {

inline bool ends_with(std::u32string_view s, std::u32string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

inline std::size_t count_spoken_markers(std::u32string_view t) {
  std::size_t markers = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const char32_t c = t[i];
    const char32_t prev = i ? t[i - 1] : 0;
    if (c == 0x2026 && prev != 0x2026) ++markers;
    if (c == U'.' && i + 2 < t.size() && t[i + 1] == U'.' && t[i + 2] == U'.' && prev != U'.')
      ++markers;
    // laughter / crying jamo runs and common emoticons
    if ((c == U'ㅋ' || c == U'ㅎ' || c == U'ㅠ' || c == U'ㅜ') && prev != c && i + 1 < t.size() &&
        t[i + 1] == c)
      ++markers;
    if (c == U'^' && i + 1 < t.size() && t[i + 1] == U'^') ++markers;
    if (c == U'~' && prev != U'~') ++markers;
  }
  return markers;
}

}  // namespace detail

/// Sentence-final ending rules: 습니다/요-style endings read as formal,
/// banmal endings as informal; ellipsis and emoticon density marks speech.
inline StyleTags tag_style(std::string_view text, const StyleThresholds& th = StyleThresholds{}) {
  static const std::vector<std::u32string> formal{U"니다", U"니까", U"시오", U"세요", U"요", U"다"};
  static const std::vector<std::u32string> informal{U"야", U"어", U"아", U"지", U"냐", U"니",
                                                    U"해", U"래", U"거든", U"잖아", U"자", U"네"};
  const std::u32string t = utf8::decode(utf8::nfc(text));
  std::size_t sentences = 0, formal_hits = 0, informal_hits = 0;
  std::u32string sentence;
  auto close = [&] {
    auto is_word_char = [](char32_t c) {
      return utf8::is_hangul_syllable(c) || utf8::is_latin(c) || utf8::is_ascii_digit(c);
    };
    std::size_t end = sentence.size();
    while (end > 0 && !is_word_char(sentence[end - 1])) --end;
    const std::u32string s = sentence.substr(0, end);
    sentence.clear();
    if (s.empty()) return;
    ++sentences;
    if (!utf8::is_hangul_syllable(s.back())) return;
    for (const auto& e : formal)
      if (detail::ends_with(s, e)) {
        ++formal_hits;
        return;
      }
    for (const auto& e : informal)
      if (detail::ends_with(s, e)) {
        ++informal_hits;
        return;
      }
  };
  for (char32_t c : t) {
    if (c == U'.' || c == U'!' || c == U'?' || c == U'\n' || c == 0x2026) {
      close();
    } else {
      sentence.push_back(c);
    }
  }
  close();

  const std::size_t markers = detail::count_spoken_markers(t);
  StyleTags tags;
  const double density = sentences ? static_cast<double>(markers) / sentences : 0.0;
  if (sentences && density >= th.spoken_marker_density)
    tags.mode = Mode::Spoken;
  else if (formal_hits + informal_hits > 0)
    tags.mode = Mode::Written;

  if (informal_hits + markers > formal_hits && informal_hits + markers > 0)
    tags.tone = Tone::Informal;
  else if (formal_hits > 0)
    tags.tone = Tone::Formal;
  return tags;
}

// ---------------------------------------------------------------------------
// Hashed n-gram features

struct FeatureSpec {
  int bits = 20;
  std::vector<int> orders{2, 3};
  std::uint64_t seed = 0;

  std::size_t dimension() const { return std::size_t{1} << bits; }
  bool operator==(const FeatureSpec&) const = default;
};

using FeatureVector = SparseVector<std::uint32_t>;

/// L2-normalized character n-gram counts over normalized text, folded into
/// 2^bits buckets. Empty when the text yields no n-grams.
inline FeatureVector extract_features(std::string_view text, const FeatureSpec& spec) {
  const std::u32string norm = utf8::normalize_for_features(text);
  std::u32string padded;
  padded.reserve(norm.size() + 2);
  padded.push_back(U' ');
  padded += norm;
  padded.push_back(U' ');
  if (norm.empty()) return {};
  const std::uint64_t mask = spec.dimension() - 1;
  std::vector<std::pair<std::uint32_t, double>> raw;
  for_each_ngram_hash(padded, spec.orders, spec.seed, [&](std::uint64_t h) {
    raw.emplace_back(static_cast<std::uint32_t>(h & mask), 1.0);
  });
  FeatureVector v = FeatureVector::from_unsorted(std::move(raw));
  double norm2 = 0.0;
  for (const auto& [i, x] : v.entries) norm2 += x * x;
  const double inv = norm2 > 0 ? 1.0 / std::sqrt(norm2) : 0.0;
  for (auto& e : v.entries) e.second *= inv;
  return v;
}

// ---------------------------------------------------------------------------
// Linear model

inline std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> out(scores.size());
  if (scores.empty()) return out;
  const double m = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) z += (out[i] = std::exp(scores[i] - m));
  for (auto& p : out) p /= z;
  return out;
}

/// One-vs-rest logistic regression over hashed features. Each class owns a
/// weight vector of exactly 2^bits entries.
class LinearTextModel {
 public:
  LinearTextModel() = default;
  LinearTextModel(FeatureSpec spec, std::vector<std::string> classes)
      : spec_(std::move(spec)), classes_(std::move(classes)) {
    weights_.assign(classes_.size(), std::vector<float>(spec_.dimension(), 0.0f));
    bias_.assign(classes_.size(), 0.0f);
  }

  const FeatureSpec& spec() const { return spec_; }
  const std::vector<std::string>& classes() const { return classes_; }
  const std::vector<std::vector<float>>& weights() const { return weights_; }
  const std::vector<float>& bias() const { return bias_; }
  std::vector<std::vector<float>>& mutable_weights() { return weights_; }
  std::vector<float>& mutable_bias() { return bias_; }

  bool trained() const { return classes_.size() >= 2 && weights_.size() == classes_.size(); }

  void check_ready() const {
    if (!trained()) fail(ErrorCode::UntrainedModel, "linear model has not been trained");
    for (const auto& w : weights_)
      if (w.size() != spec_.dimension())
        fail(ErrorCode::FeatureSpecMismatch, "weight vector length differs from 2^bits");
  }

  void check_compatible(const FeatureSpec& expected) const {
    if (!(expected == spec_))
      fail(ErrorCode::FeatureSpecMismatch, "model feature spec differs from the configured one");
  }

  std::optional<std::size_t> class_index(std::string_view label) const {
    for (std::size_t i = 0; i < classes_.size(); ++i)
      if (classes_[i] == label) return i;
    return std::nullopt;
  }

  std::vector<double> scores(const FeatureVector& x) const {
    std::vector<double> s(classes_.size());
    for (std::size_t k = 0; k < classes_.size(); ++k) {
      double acc = bias_[k];
      const auto& w = weights_[k];
      for (const auto& [i, v] : x.entries) acc += static_cast<double>(w[i]) * v;
      s[k] = acc;
    }
    return s;
  }

  /// Softmax over the per-class scores; throws EmptyText when the text has
  /// no features at all.
  std::vector<double> probabilities(std::string_view text) const {
    check_ready();
    FeatureVector x = extract_features(text, spec_);
    if (x.empty()) fail(ErrorCode::EmptyText, "no features in text");
    return softmax(scores(x));
  }

  double probability_of(std::string_view text, std::string_view label) const {
    auto idx = class_index(label);
    if (!idx) fail(ErrorCode::InvalidArgument, "model has no class '" + std::string(label) + "'");
    return probabilities(text)[*idx];
  }

  bool operator==(const LinearTextModel&) const = default;

 private:
  FeatureSpec spec_;
  std::vector<std::string> classes_;
  std::vector<std::vector<float>> weights_;
  std::vector<float> bias_;
};

struct LabeledText {
  std::string text;
  std::string label;
};

struct TrainOptions {
  int epochs = 10;
  double learning_rate = 0.5;
  std::uint64_t seed = 0;  // drives the per-epoch visiting order
};

/// Deterministic SGD on the logistic loss, one binary problem per class.
/// Classes are ordered by first appearance in the data. Training is
/// reproducible bit-for-bit given (data order, seed).
inline LinearTextModel train_linear_model(std::span<const LabeledText> data,
                                          const FeatureSpec& spec, const TrainOptions& opt = {}) {
  if (data.empty()) fail(ErrorCode::EmptyTrainingSet, "no training examples");
  if (spec.bits < 1 || spec.bits > 30) fail(ErrorCode::InvalidArgument, "bits must be in [1, 30]");
  std::vector<std::string> classes;
  std::vector<std::size_t> labels(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto it = std::find(classes.begin(), classes.end(), data[i].label);
    if (it == classes.end()) {
      classes.push_back(data[i].label);
      labels[i] = classes.size() - 1;
    } else {
      labels[i] = static_cast<std::size_t>(it - classes.begin());
    }
  }
  if (classes.size() < 2) fail(ErrorCode::SingleClass, "training data has a single label");

  std::vector<FeatureVector> xs;
  xs.reserve(data.size());
  for (const auto& ex : data) xs.push_back(extract_features(ex.text, spec));

  LinearTextModel model(spec, classes);
  auto& weights = model.mutable_weights();
  auto& bias = model.mutable_bias();
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(opt.seed);
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    shuffle(order, rng);
    const double lr = opt.learning_rate / std::sqrt(1.0 + epoch);
    for (std::size_t idx : order) {
      const FeatureVector& x = xs[idx];
      for (std::size_t k = 0; k < classes.size(); ++k) {
        double s = bias[k];
        for (const auto& [i, v] : x.entries) s += static_cast<double>(weights[k][i]) * v;
        const double p = 1.0 / (1.0 + std::exp(-s));
        const double g = p - (labels[idx] == k ? 1.0 : 0.0);
        for (const auto& [i, v] : x.entries)
          weights[k][i] = static_cast<float>(weights[k][i] - lr * g * v);
        bias[k] = static_cast<float>(bias[k] - lr * g);
      }
    }
  }
  return model;
}

inline double accuracy(const LinearTextModel& model, std::span<const LabeledText> data) {
  if (data.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& ex : data) {
    auto p = model.probabilities(ex.text);
    auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    if (model.classes()[best] == ex.label) ++hits;
  }
  return static_cast<double>(hits) / data.size();
}

/// Labels may be subdomain names (resolved to their parent domain through
/// the registry) or domain names.
inline LinearTextModel train_domain_classifier(std::span<const LabeledText> labeled,
                                               const FeatureSpec& spec,
                                               const TrainOptions& opt = {}) {
  return train_linear_model(labeled, spec, opt);
}

struct DomainPrediction {
  Domain domain = Domain::ETC;
  std::optional<std::string> subdomain;
  double probability = 0.0;
};

inline DomainPrediction classify_domain(const LinearTextModel& model, std::string_view text,
                                        const SubdomainRegistry& registry) {
  auto p = model.probabilities(text);
  auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  const std::string& label = model.classes()[best];
  DomainPrediction out;
  out.probability = p[best];
  if (auto parent = registry.parent_of(label)) {
    out.domain = *parent;
    out.subdomain = label;
  } else {
    out.domain = parse_domain(label);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binary model file: magic, version, bits, orders, seed, classes, biases,
// then little-endian float32 weights class by class.

namespace detail {

inline constexpr char kModelMagic[4] = {'K', 'C', 'L', 'M'};
inline constexpr std::uint32_t kModelVersion = 1;

template <typename T>
void put_le(std::ostream& os, T value) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i)
    os.put(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
}

inline void put_f32(std::ostream& os, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_le(os, bits);
}

inline void put_f64(std::ostream& os, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_le(os, bits);
}

template <typename T>
T get_le(std::istream& is) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    int c = is.get();
    if (c == EOF) fail(ErrorCode::FormatError, "truncated model file");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return static_cast<T>(v);
}

inline float get_f32(std::istream& is) {
  std::uint32_t bits = get_le<std::uint32_t>(is);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

inline double get_f64(std::istream& is) {
  std::uint64_t bits = get_le<std::uint64_t>(is);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

inline void put_string(std::ostream& os, std::string_view s) {
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& is) {
  auto n = get_le<std::uint32_t>(is);
  if (n > (1u << 20)) fail(ErrorCode::FormatError, "implausible string length in model file");
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) fail(ErrorCode::FormatError, "truncated model file");
  return s;
}

}  // namespace detail

inline void write_model(std::ostream& os, const LinearTextModel& m) {
  m.check_ready();
  os.write(detail::kModelMagic, 4);
  detail::put_le<std::uint32_t>(os, detail::kModelVersion);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(m.spec().bits));
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(m.spec().orders.size()));
  for (int o : m.spec().orders) detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(o));
  detail::put_le<std::uint64_t>(os, m.spec().seed);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(m.classes().size()));
  for (const auto& c : m.classes()) detail::put_string(os, c);
  for (float b : m.bias()) detail::put_f32(os, b);
  for (const auto& w : m.weights())
    for (float x : w) detail::put_f32(os, x);
}

inline LinearTextModel read_model(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, detail::kModelMagic, 4) != 0)
    fail(ErrorCode::FormatError, "not a linear model file");
  const auto version = detail::get_le<std::uint32_t>(is);
  if (version != detail::kModelVersion)
    fail(ErrorCode::FormatError, "unsupported model version " + std::to_string(version));
  FeatureSpec spec;
  spec.bits = static_cast<int>(detail::get_le<std::uint32_t>(is));
  if (spec.bits < 1 || spec.bits > 30) fail(ErrorCode::FormatError, "bad bucket bits");
  const auto n_orders = detail::get_le<std::uint32_t>(is);
  if (n_orders > 16) fail(ErrorCode::FormatError, "bad order count");
  spec.orders.clear();
  for (std::uint32_t i = 0; i < n_orders; ++i)
    spec.orders.push_back(static_cast<int>(detail::get_le<std::uint32_t>(is)));
  spec.seed = detail::get_le<std::uint64_t>(is);
  const auto n_classes = detail::get_le<std::uint32_t>(is);
  if (n_classes > 4096) fail(ErrorCode::FormatError, "bad class count");
  std::vector<std::string> classes;
  for (std::uint32_t i = 0; i < n_classes; ++i) classes.push_back(detail::get_string(is));
  LinearTextModel m(spec, classes);
  for (auto& b : m.mutable_bias()) b = detail::get_f32(is);
  for (auto& w : m.mutable_weights()) {
    std::vector<char> buf(w.size() * 4);
    is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!is) fail(ErrorCode::FormatError, "truncated model weights");
    for (std::size_t i = 0; i < w.size(); ++i) {
      std::uint32_t bits = 0;
      for (int k = 0; k < 4; ++k)
        bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[4 * i + k])) << (8 * k);
      std::memcpy(&w[i], &bits, 4);
    }
  }
  return m;
}

inline void save_model(const std::string& path, const LinearTextModel& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::IoError, "cannot write '" + path + "'");
  write_model(os, m);
  if (!os) fail(ErrorCode::IoError, "write failed for '" + path + "'");
}

inline LinearTextModel load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::IoError, "cannot open model '" + path + "'");
  return read_model(is);
}

}  // namespace kcurate
