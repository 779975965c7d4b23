#pragma once

// Character n-gram language model with Jelinek-Mercer interpolation over
// orders 1..n plus a uniform floor, and a two-sided perplexity band.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kcurate/classify.hpp"
#include "kcurate/corpus.hpp"
#include "kcurate/error.hpp"
#include "kcurate/log.hpp"
#include "kcurate/parallel.hpp"
#include "kcurate/utf8.hpp"

namespace kcurate {

inline constexpr char32_t kBos = 0x110000;  // context padding only, never predicted
inline constexpr char32_t kEos = 0x110001;
inline constexpr char32_t kUnk = 0x110002;
inline constexpr int kMaxNgramOrder = 6;

/// Symbols the model sees: normalized code points followed by EOS.
inline std::u32string lm_symbols(std::string_view text) {
  std::u32string s = utf8::normalize_for_features(text);
  s.push_back(kEos);
  return s;
}

struct NgramConfig {
  int order = 5;
  double floor = 0.01;          // weight of the uniform distribution
  std::vector<double> lambdas;  // optional explicit weights [floor, λ1..λn]

  /// Resolved weights: index 0 is the uniform floor, index k the order-k
  /// estimate.
  std::vector<double> resolved_lambdas() const {
    if (order < 1 || order > kMaxNgramOrder)
      fail(ErrorCode::ConfigInvalid, "n-gram order must be in 1.." + std::to_string(kMaxNgramOrder));
    std::vector<double> l = lambdas;
    if (l.empty()) {
      if (!(floor > 0.0 && floor < 1.0)) fail(ErrorCode::ConfigInvalid, "LM floor must be in (0,1)");
      l.assign(static_cast<std::size_t>(order) + 1, (1.0 - floor) / order);
      l[0] = floor;
    }
    if (l.size() != static_cast<std::size_t>(order) + 1)
      fail(ErrorCode::ConfigInvalid, "expected order+1 interpolation weights");
    double sum = 0.0;
    for (double x : l) {
      if (!(x >= 0.0) || !std::isfinite(x)) fail(ErrorCode::ConfigInvalid, "negative LM weight");
      sum += x;
    }
    if (l[0] <= 0.0) fail(ErrorCode::ConfigInvalid, "uniform floor weight must be positive");
    if (std::abs(sum - 1.0) > 1e-12) fail(ErrorCode::ConfigInvalid, "LM weights must sum to 1");
    return l;
  }
};

class NgramModel {
 public:
  /// Up to 5 context symbols packed 21 bits each, length in the top byte.
  struct Key {
    unsigned __int128 v = 0;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      auto lo = static_cast<std::uint64_t>(k.v);
      auto hi = static_cast<std::uint64_t>(k.v >> 64);
      std::uint64_t h = lo * 0x9E3779B97F4A7C15ULL ^ (hi + 0x632BE59BD9B4E019ULL + (lo << 6));
      h ^= h >> 29;
      return static_cast<std::size_t>(h * 0xBF58476D1CE4E5B9ULL);
    }
  };
  struct ContextCounts {
    std::uint64_t total = 0;
    std::vector<std::pair<char32_t, std::uint64_t>> next;  // sorted by symbol
  };
  using Table = std::unordered_map<Key, ContextCounts, KeyHash>;

  static Key make_key(std::u32string_view context) {
    Key k;
    for (char32_t c : context) k.v = (k.v << 21) | static_cast<unsigned __int128>(c & 0x1FFFFF);
    k.v |= static_cast<unsigned __int128>(context.size()) << 120;
    return k;
  }

  static std::u32string unpack_key(const Key& k) {
    const std::size_t n = static_cast<std::size_t>(k.v >> 120);
    std::u32string out(n, U'\0');
    for (std::size_t i = 0; i < n; ++i)
      out[n - 1 - i] = static_cast<char32_t>((k.v >> (21 * i)) & 0x1FFFFF);
    return out;
  }

  NgramModel() = default;
  NgramModel(int order, std::vector<double> lambdas, std::vector<char32_t> vocab,
             std::vector<Table> tables)
      : order_(order), lambdas_(std::move(lambdas)), vocab_(std::move(vocab)),
        tables_(std::move(tables)) {}

  int order() const { return order_; }
  const std::vector<double>& lambdas() const { return lambdas_; }
  /// Sorted training symbols (including EOS); UNK is implicit.
  const std::vector<char32_t>& vocab() const { return vocab_; }
  std::size_t vocab_size_with_unk() const { return vocab_.size() + 1; }
  bool in_vocab(char32_t c) const { return std::binary_search(vocab_.begin(), vocab_.end(), c); }
  /// Contexts of order k (context length k-1).
  const Table& table(int k) const { return tables_.at(static_cast<std::size_t>(k - 1)); }
  bool trained() const { return order_ > 0 && !vocab_.empty(); }

  std::uint64_t count(std::u32string_view context, char32_t symbol) const {
    const auto& t = table(static_cast<int>(context.size()) + 1);
    auto it = t.find(make_key(context));
    if (it == t.end()) return 0;
    auto pos = std::lower_bound(it->second.next.begin(), it->second.next.end(),
                                std::make_pair(symbol, std::uint64_t{0}));
    return pos != it->second.next.end() && pos->first == symbol ? pos->second : 0;
  }

  /// p(symbol | history) where `history` holds the preceding symbols (BOS
  /// padded); only the last order-1 are used.
  double probability(std::u32string_view history, char32_t symbol) const {
    if (!trained()) fail(ErrorCode::UntrainedModel, "n-gram model not trained");
    if (!in_vocab(symbol)) symbol = kUnk;
    double p = lambdas_[0] / static_cast<double>(vocab_size_with_unk());
    double q = 1.0 / static_cast<double>(vocab_size_with_unk());
    for (int k = 1; k <= order_; ++k) {
      const std::size_t len = static_cast<std::size_t>(k - 1);
      if (history.size() >= len) {
        const auto& t = tables_[len];
        auto it = t.find(make_key(history.substr(history.size() - len)));
        if (it != t.end()) {
          const auto& next = it->second.next;
          auto pos = std::lower_bound(next.begin(), next.end(), std::make_pair(symbol, std::uint64_t{0}));
          const std::uint64_t c = pos != next.end() && pos->first == symbol ? pos->second : 0;
          q = static_cast<double>(c) / static_cast<double>(it->second.total);
        }
      }
      p += lambdas_[static_cast<std::size_t>(k)] * q;
    }
    return p;
  }

  /// Sum of ln p over the text's symbols; `symbols` receives T.
  double log_prob(std::string_view text, std::size_t* symbols = nullptr) const {
    const std::u32string s = lm_symbols(text);
    if (s.size() <= 1) fail(ErrorCode::EmptyText, "perplexity of empty text");
    std::u32string history(static_cast<std::size_t>(std::max(order_ - 1, 0)), kBos);
    double total = 0.0;
    for (char32_t c : s) {
      total += std::log(probability(history, c));
      if (!history.empty()) {
        history.erase(history.begin());
        history.push_back(c);
      }
    }
    if (symbols) *symbols = s.size();
    return total;
  }

  double perplexity(std::string_view text) const {
    std::size_t n = 0;
    const double lp = log_prob(text, &n);
    return std::exp(-lp / static_cast<double>(n));
  }

 private:
  int order_ = 0;
  std::vector<double> lambdas_;
  std::vector<char32_t> vocab_;
  std::vector<Table> tables_;
};

/// Accumulates counts text by text.
class NgramTrainer {
 public:
  explicit NgramTrainer(NgramConfig cfg = {}) : cfg_(std::move(cfg)), lambdas_(cfg_.resolved_lambdas()) {
    raw_.resize(static_cast<std::size_t>(cfg_.order));
  }

  void add(std::string_view text) {
    const std::u32string s = lm_symbols(text);
    if (s.size() <= 1) return;
    chars_ += s.size() - 1;
    std::u32string padded(static_cast<std::size_t>(cfg_.order - 1), kBos);
    padded += s;
    const std::size_t offset = static_cast<std::size_t>(cfg_.order - 1);
    for (std::size_t i = offset; i < padded.size(); ++i) {
      const char32_t sym = padded[i];
      vocab_.push_back(sym);
      for (int k = 1; k <= cfg_.order; ++k) {
        const std::size_t len = static_cast<std::size_t>(k - 1);
        auto key = NgramModel::make_key(std::u32string_view(padded).substr(i - len, len));
        ++raw_[len][key][sym];
      }
    }
    if (vocab_.size() > (1u << 20)) compact_vocab();
  }

  std::size_t characters() const { return chars_; }

  NgramModel finish() {
    if (chars_ < static_cast<std::size_t>(cfg_.order))
      fail(ErrorCode::CorpusTooSmall, "LM training corpus has " + std::to_string(chars_) +
                                          " characters, fewer than order " + std::to_string(cfg_.order));
    compact_vocab();
    std::vector<NgramModel::Table> tables(raw_.size());
    for (std::size_t len = 0; len < raw_.size(); ++len) {
      tables[len].reserve(raw_[len].size());
      for (auto& [key, m] : raw_[len]) {
        NgramModel::ContextCounts cc;
        cc.next.assign(m.begin(), m.end());
        std::sort(cc.next.begin(), cc.next.end());
        for (const auto& [_, c] : cc.next) cc.total += c;
        tables[len].emplace(key, std::move(cc));
      }
    }
    return NgramModel(cfg_.order, lambdas_, vocab_, std::move(tables));
  }

 private:
  void compact_vocab() {
    std::sort(vocab_.begin(), vocab_.end());
    vocab_.erase(std::unique(vocab_.begin(), vocab_.end()), vocab_.end());
  }

  NgramConfig cfg_;
  std::vector<double> lambdas_;
  std::vector<std::unordered_map<NgramModel::Key, std::unordered_map<char32_t, std::uint64_t>,
                                 NgramModel::KeyHash>>
      raw_;
  std::vector<char32_t> vocab_;
  std::size_t chars_ = 0;
};

inline NgramModel train_lm(std::span<const std::string> texts, const NgramConfig& cfg = {}) {
  NgramTrainer t(cfg);
  for (const auto& s : texts) t.add(s);
  return t.finish();
}

inline NgramModel train_lm(std::span<const Document> corpus, const NgramConfig& cfg = {}) {
  NgramTrainer t(cfg);
  for (const auto& d : corpus) t.add(d.text);
  return t.finish();
}

// ---------------------------------------------------------------------------
// Band

struct PerplexityBand {
  double low = 0.0;
  double high = 0.0;
  double q_low = 0.01;
  double q_high = 0.99;
  bool widened = false;

  bool contains(double ppl) const { return ppl >= low && ppl <= high; }
};

inline json to_json(const PerplexityBand& b) {
  return json{{"low", b.low}, {"high", b.high}, {"q_low", b.q_low}, {"q_high", b.q_high},
              {"widened", b.widened}};
}

/// 1-based nearest rank ⌈q·n⌉ clamped to [1, n].
inline std::size_t nearest_rank(double q, std::size_t n) {
  auto r = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(r, 1, n);
}

inline PerplexityBand band_from_values(std::vector<double> ppl, double q_low = 0.01, double q_high = 0.99) {
  if (!(q_low >= 0.0 && q_low < q_high && q_high <= 1.0))
    fail(ErrorCode::InvalidArgument, "band quantiles must satisfy 0 <= q_low < q_high <= 1");
  if (ppl.size() < 100)
    fail(ErrorCode::SampleTooSmall, "band calibration needs at least 100 documents, got " +
                                        std::to_string(ppl.size()));
  std::sort(ppl.begin(), ppl.end());
  PerplexityBand b;
  b.q_low = q_low;
  b.q_high = q_high;
  b.low = ppl[nearest_rank(q_low, ppl.size()) - 1];
  b.high = ppl[nearest_rank(q_high, ppl.size()) - 1];
  if (b.low >= b.high) {
    log().warn("DegenerateBand: perplexity band collapsed at {}; widening by 1%", b.low);
    b.low *= 0.99;
    b.high *= 1.01;
    b.widened = true;
  }
  return b;
}

inline PerplexityBand calibrate_band(const NgramModel& model, std::span<const Document> sample,
                                     double q_low = 0.01, double q_high = 0.99, unsigned workers = 1) {
  if (sample.size() < 100)
    fail(ErrorCode::SampleTooSmall, "band calibration needs at least 100 documents, got " +
                                        std::to_string(sample.size()));
  std::vector<double> ppl(sample.size());
  parallel_for(sample.size(), workers, [&](std::size_t i) { ppl[i] = model.perplexity(sample[i].text); });
  return band_from_values(std::move(ppl), q_low, q_high);
}

inline StageOutcome perplexity_filter(Document doc, const NgramModel& model, const PerplexityBand& band) {
  if (utf8::normalize_for_features(doc.text).empty())
    return {std::move(doc), Verdict::rejected("empty_text"), std::nullopt};
  const double ppl = model.perplexity(doc.text);
  if (ppl < band.low) return {std::move(doc), Verdict::rejected("ppl_below_band"), ppl};
  if (ppl > band.high) return {std::move(doc), Verdict::rejected("ppl_above_band"), ppl};
  return {std::move(doc), Verdict::kept(), ppl};
}

// ---------------------------------------------------------------------------
// Binary format "KCNG" v1: order, lambdas (f64), vocab, then per order the
// contexts sorted by key with their (symbol, count) lists.

namespace detail {
inline constexpr char kNgramMagic[4] = {'K', 'C', 'N', 'G'};
inline constexpr std::uint32_t kNgramVersion = 1;
}  // namespace detail

inline void write_lm(std::ostream& os, const NgramModel& m) {
  if (!m.trained()) fail(ErrorCode::UntrainedModel, "cannot save an untrained n-gram model");
  os.write(detail::kNgramMagic, 4);
  detail::put_le<std::uint32_t>(os, detail::kNgramVersion);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(m.order()));
  for (double l : m.lambdas()) detail::put_f64(os, l);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(m.vocab().size()));
  for (char32_t c : m.vocab()) detail::put_le<std::uint32_t>(os, c);
  for (int k = 1; k <= m.order(); ++k) {
    const auto& t = m.table(k);
    std::vector<const std::pair<const NgramModel::Key, NgramModel::ContextCounts>*> rows;
    rows.reserve(t.size());
    for (const auto& row : t) rows.push_back(&row);
    std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->first.v < b->first.v; });
    detail::put_le<std::uint64_t>(os, rows.size());
    for (const auto* row : rows) {
      for (char32_t c : NgramModel::unpack_key(row->first)) detail::put_le<std::uint32_t>(os, c);
      detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(row->second.next.size()));
      for (const auto& [sym, c] : row->second.next) {
        detail::put_le<std::uint32_t>(os, sym);
        detail::put_le<std::uint64_t>(os, c);
      }
    }
  }
}

inline NgramModel read_lm(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, detail::kNgramMagic, 4) != 0)
    fail(ErrorCode::FormatError, "not an n-gram model file");
  if (detail::get_le<std::uint32_t>(is) != detail::kNgramVersion)
    fail(ErrorCode::FormatError, "unsupported n-gram model version");
  const int order = static_cast<int>(detail::get_le<std::uint32_t>(is));
  if (order < 1 || order > kMaxNgramOrder) fail(ErrorCode::FormatError, "bad n-gram order");
  std::vector<double> lambdas(static_cast<std::size_t>(order) + 1);
  for (auto& l : lambdas) l = detail::get_f64(is);
  NgramConfig check;
  check.order = order;
  check.lambdas = lambdas;
  try {
    check.resolved_lambdas();
  } catch (const Error& e) {
    fail(ErrorCode::FormatError, std::string("bad n-gram weights: ") + e.what());
  }
  const auto nv = detail::get_le<std::uint32_t>(is);
  std::vector<char32_t> vocab(nv);
  for (auto& c : vocab) c = detail::get_le<std::uint32_t>(is);
  std::vector<NgramModel::Table> tables(static_cast<std::size_t>(order));
  for (int k = 1; k <= order; ++k) {
    const auto rows = detail::get_le<std::uint64_t>(is);
    auto& t = tables[static_cast<std::size_t>(k - 1)];
    t.reserve(rows);
    std::u32string ctx(static_cast<std::size_t>(k - 1), U'\0');
    for (std::uint64_t r = 0; r < rows; ++r) {
      for (auto& c : ctx) c = detail::get_le<std::uint32_t>(is);
      NgramModel::ContextCounts cc;
      const auto n = detail::get_le<std::uint32_t>(is);
      cc.next.resize(n);
      for (auto& [sym, c] : cc.next) {
        sym = detail::get_le<std::uint32_t>(is);
        c = detail::get_le<std::uint64_t>(is);
        if (c == 0) fail(ErrorCode::FormatError, "zero count in n-gram model");
        cc.total += c;
      }
      t.emplace(NgramModel::make_key(ctx), std::move(cc));
    }
  }
  return NgramModel(order, std::move(lambdas), std::move(vocab), std::move(tables));
}

inline void save_lm(const std::string& path, const NgramModel& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::IoError, "cannot write '" + path + "'");
  write_lm(os, m);
  if (!os) fail(ErrorCode::IoError, "write failed for '" + path + "'");
}

inline NgramModel load_lm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::IoError, "cannot open LM '" + path + "'");
  return read_lm(is);
}

}  // namespace kcurate
