#pragma once

// Quality ensemble (general + educational binary models) and the toxicity
// taxonomy classifier. Decision rules are pure functions over probabilities
// so they can be checked without a model.

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kcurate/classify.hpp"
#include "kcurate/corpus.hpp"
#include "kcurate/error.hpp"

namespace kcurate {

enum class Combine { Both, Either };

inline Combine parse_combine(std::string_view s) {
  if (s == "both") return Combine::Both;
  if (s == "either") return Combine::Either;
  fail(ErrorCode::ConfigInvalid, "combine must be 'both' or 'either', got '" + std::string(s) + "'");
}

struct QualityThresholds {
  double general = 0.5;
  double educational = 0.5;
};

inline void check_unit_open(double t, std::string_view what) {
  if (!(t > 0.0 && t < 1.0))
    fail(ErrorCode::ConfigInvalid, std::string(what) + " threshold must lie in (0,1)");
}

inline bool quality_keep(double p_general, double p_educational, const QualityThresholds& t,
                         Combine combine) {
  const bool g = p_general >= t.general;
  const bool e = p_educational >= t.educational;
  return combine == Combine::Both ? (g && e) : (g || e);
}

struct QualityScore {
  double general = 0.0;
  double educational = 0.0;
  Verdict verdict;
};

class QualityEnsemble {
 public:
  QualityEnsemble() = default;
  QualityEnsemble(LinearTextModel general, LinearTextModel educational, QualityThresholds t = {},
                  Combine combine = Combine::Both, std::string positive_label = "1")
      : general_(std::move(general)), educational_(std::move(educational)), thresholds_(t),
        combine_(combine), positive_(std::move(positive_label)) {
    check_unit_open(t.general, "general quality");
    check_unit_open(t.educational, "educational quality");
    for (const auto* m : {&general_, &educational_}) {
      if (!m->trained()) continue;  // reported at scoring time
      if (m->classes().size() != 2)
        fail(ErrorCode::ConfigInvalid, "quality models must be binary");
      if (!m->class_index(positive_))
        fail(ErrorCode::ConfigInvalid, "quality model lacks positive label '" + positive_ + "'");
    }
  }

  const QualityThresholds& thresholds() const { return thresholds_; }
  Combine combine() const { return combine_; }

  QualityScore score(std::string_view text) const {
    general_.check_ready();
    educational_.check_ready();
    QualityScore s;
    s.general = general_.probability_of(text, positive_);
    s.educational = educational_.probability_of(text, positive_);
    if (quality_keep(s.general, s.educational, thresholds_, combine_)) {
      s.verdict = Verdict::kept();
    } else {
      const bool g = s.general >= thresholds_.general;
      const bool e = s.educational >= thresholds_.educational;
      s.verdict = Verdict::rejected(!g && !e ? "low_quality" : !g ? "low_general_quality"
                                                                   : "low_educational_quality");
    }
    return s;
  }

 private:
  LinearTextModel general_;
  LinearTextModel educational_;
  QualityThresholds thresholds_;
  Combine combine_ = Combine::Both;
  std::string positive_ = "1";
};

inline StageOutcome quality_filter(Document doc, const QualityEnsemble& ensemble) {
  if (utf8::normalize_for_features(doc.text).empty())
    return {std::move(doc), Verdict::rejected("empty_text"), std::nullopt};
  QualityScore s = ensemble.score(doc.text);
  return {std::move(doc), std::move(s.verdict), std::min(s.general, s.educational)};
}

// ---------------------------------------------------------------------------
// Toxicity

inline const std::vector<std::string>& default_toxicity_categories() {
  static const std::vector<std::string> c{"sexual",   "violations", "violence", "bias_discrimination",
                                          "politics", "disasters",  "profanity"};
  return c;
}

struct ToxicityScore {
  std::map<std::string, double> categories;
  Verdict verdict;
};

/// Rejected iff the largest category score reaches the threshold; ties go
/// to the category listed first.
inline Verdict toxicity_verdict(const std::vector<std::string>& categories,
                                const std::map<std::string, double>& scores, double threshold) {
  const std::string* best = nullptr;
  double best_score = -1.0;
  for (const auto& c : categories) {
    auto it = scores.find(c);
    const double s = it == scores.end() ? 0.0 : it->second;
    if (s > best_score) {
      best_score = s;
      best = &c;
    }
  }
  if (best && best_score >= threshold) return Verdict::rejected(*best);
  return Verdict::kept();
}

class ToxicityTaxonomy {
 public:
  static constexpr std::string_view kClean = "clean";

  ToxicityTaxonomy() = default;
  ToxicityTaxonomy(LinearTextModel model, double threshold = 0.5,
                   std::vector<std::string> categories = default_toxicity_categories())
      : categories_(std::move(categories)), model_(std::move(model)), threshold_(threshold) {
    if (categories_.empty()) fail(ErrorCode::ConfigInvalid, "toxicity taxonomy needs a category");
    check_unit_open(threshold_, "toxicity");
    if (model_.trained()) {
      for (const auto& c : model_.classes())
        if (c != kClean && std::find(categories_.begin(), categories_.end(), c) == categories_.end())
          fail(ErrorCode::ConfigInvalid, "toxicity model class '" + c + "' is not a taxonomy category");
    }
  }

  const std::vector<std::string>& categories() const { return categories_; }
  double threshold() const { return threshold_; }

  ToxicityScore score(std::string_view text) const {
    model_.check_ready();
    ToxicityScore s;
    const auto p = model_.probabilities(text);
    for (const auto& c : categories_) {
      auto idx = model_.class_index(c);
      s.categories[c] = idx ? p[*idx] : 0.0;
    }
    s.verdict = toxicity_verdict(categories_, s.categories, threshold_);
    return s;
  }

 private:
  std::vector<std::string> categories_ = default_toxicity_categories();
  LinearTextModel model_;
  double threshold_ = 0.5;
};

inline StageOutcome toxicity_filter(Document doc, const ToxicityTaxonomy& taxonomy) {
  if (utf8::normalize_for_features(doc.text).empty())
    return {std::move(doc), Verdict::rejected("empty_text"), std::nullopt};
  ToxicityScore s = taxonomy.score(doc.text);
  double top = 0.0;
  for (const auto& [_, v] : s.categories) top = std::max(top, v);
  return {std::move(doc), std::move(s.verdict), top};
}

}  // namespace kcurate
