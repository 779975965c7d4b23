#pragma once

// Which stages a document passes through. Web sources (and anything
// synthetic) run the enabled filter stages in fixed order; other sources
// run their refiner, then dedup and the final refinement only.

#include <algorithm>
#include <string>
#include <vector>

#include "kcurate/corpus.hpp"
#include "kcurate/error.hpp"

namespace kcurate {

struct Route {
  std::vector<std::string> web_sources{"cc", "web"};
  std::vector<Stage> enabled{kWebStages.begin(), kWebStages.end()};

  /// Keeps the canonical order; a list that reorders stages is rejected.
  static std::vector<Stage> parse_stage_list(const std::vector<std::string>& names) {
    std::vector<Stage> out;
    for (const auto& n : names) {
      const Stage s = parse_stage(n);
      if (std::find(kWebStages.begin(), kWebStages.end(), s) == kWebStages.end())
        fail(ErrorCode::ConfigInvalid, "'" + n + "' is not a filter stage");
      if (!out.empty() && stage_index(s) <= stage_index(out.back()))
        fail(ErrorCode::ConfigInvalid, "stage list must follow the fixed order; '" + n + "' is out of place");
      out.push_back(s);
    }
    return out;
  }

  bool is_enabled(Stage s) const { return std::find(enabled.begin(), enabled.end(), s) != enabled.end(); }

  bool is_web(const Document& d) const {
    if (d.tags.source && d.tags.source->kind == SourceKind::Synthetic) return true;
    return std::find(web_sources.begin(), web_sources.end(), d.source_name) != web_sources.end();
  }

  std::vector<Stage> stages_for(const Document& d) const {
    if (is_web(d)) return enabled;
    std::vector<Stage> out{Stage::Refine};
    for (Stage s : {Stage::Dedup, Stage::FinalRefine})
      if (is_enabled(s)) out.push_back(s);
    return out;
  }
};

}  // namespace kcurate
