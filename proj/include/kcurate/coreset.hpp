#pragma once

// Core set construction: fill a subdomain × skill matrix lowest-fill-first
// while rejecting candidates too similar to anything already accepted.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kcurate/corpus.hpp"
#include "kcurate/dedup.hpp"
#include "kcurate/error.hpp"
#include "kcurate/hashing.hpp"
#include "kcurate/parallel.hpp"

namespace kcurate {

// ---------------------------------------------------------------------------
// Skills

struct Skill {
  std::string name;
  std::string major;
  bool pairing = false;  // participates in the core-set matrix
};

class SkillRegistry {
 public:
  SkillRegistry() = default;
  SkillRegistry(std::vector<std::string> majors, std::vector<Skill> skills)
      : majors_(std::move(majors)), skills_(std::move(skills)) {
    for (std::size_t i = 0; i < skills_.size(); ++i) {
      if (std::find(majors_.begin(), majors_.end(), skills_[i].major) == majors_.end())
        fail(ErrorCode::ConfigInvalid, "skill '" + skills_[i].name + "' has unknown major '" +
                                           skills_[i].major + "'");
      for (std::size_t j = 0; j < i; ++j)
        if (skills_[i].name == skills_[j].name)
          fail(ErrorCode::ConfigInvalid, "duplicate skill '" + skills_[i].name + "'");
    }
  }

  static SkillRegistry defaults() {
    const std::vector<std::string> majors{"commonsense",           "knowledge",
                                          "comprehension",         "generation",
                                          "reasoning",             "instruction-following",
                                          "multi-turn conversation", "multi-step reasoning",
                                          "long context handling"};
    auto s = [](const char* name, const char* major, bool pairing) { return Skill{name, major, pairing}; };
    return SkillRegistry(
        majors, {
                    s("everyday_knowledge", "commonsense", true),
                    s("physical_commonsense", "commonsense", false),
                    s("social_commonsense", "commonsense", true),
                    s("factual_recall", "knowledge", true),
                    s("domain_expertise", "knowledge", true),
                    s("cultural_knowledge", "knowledge", false),
                    s("reading_comprehension", "comprehension", true),
                    s("summarization", "comprehension", true),
                    s("information_extraction", "comprehension", false),
                    s("creative_writing", "generation", true),
                    s("formal_writing", "generation", true),
                    s("translation", "generation", false),
                    s("logical_reasoning", "reasoning", true),
                    s("mathematical_reasoning", "reasoning", true),
                    s("causal_reasoning", "reasoning", false),
                    s("format_compliance", "instruction-following", true),
                    s("constraint_following", "instruction-following", false),
                    s("role_play", "instruction-following", false),
                    s("context_tracking", "multi-turn conversation", true),
                    s("dialogue_coherence", "multi-turn conversation", false),
                    s("clarification", "multi-turn conversation", false),
                    s("multi_hop_qa", "multi-step reasoning", true),
                    s("step_by_step_math", "multi-step reasoning", false),
                    s("planning", "multi-step reasoning", false),
                    s("long_document_qa", "long context handling", false),
                    s("long_summarization", "long context handling", false),
                });
  }

  /// {"majors": [...], "skills": [{"name", "major", "pairing"}]}
  static SkillRegistry from_json(const json& j) {
    std::vector<Skill> skills;
    for (const auto& s : j.at("skills"))
      skills.push_back({s.at("name").get<std::string>(), s.at("major").get<std::string>(),
                        s.value("pairing", false)});
    return SkillRegistry(j.at("majors").get<std::vector<std::string>>(), std::move(skills));
  }

  const std::vector<std::string>& majors() const { return majors_; }
  const std::vector<Skill>& skills() const { return skills_; }

  std::vector<std::string> pairing_skills() const {
    std::vector<std::string> out;
    for (const auto& s : skills_)
      if (s.pairing) out.push_back(s.name);
    return out;
  }

  bool has(std::string_view name) const {
    return std::any_of(skills_.begin(), skills_.end(), [&](const Skill& s) { return s.name == name; });
  }

 private:
  std::vector<std::string> majors_;
  std::vector<Skill> skills_;
};

// ---------------------------------------------------------------------------
// Embeddings

using Embedding = SparseVector<TermId>;
using Embedder = std::function<Embedding(std::string_view)>;

inline double norm(const Embedding& e) { return std::sqrt(e.dot(e)); }

/// Character n-gram TF-IDF with smoothed idf ln((1+N)/(1+df)) + 1, scaled
/// to unit length. Text without any n-gram maps to a single hashed axis.
class HashedTfIdfEmbedder {
 public:
  explicit HashedTfIdfEmbedder(int ngram = 3) : ngram_(ngram) {}

  void fit(std::span<const std::string> texts) {
    for (const auto& t : texts) idf_.add_document(count_terms(t, ngram_));
  }

  Embedding operator()(std::string_view text) const {
    const TermCounts counts = count_terms(text, ngram_);
    std::vector<std::pair<TermId, double>> raw;
    raw.reserve(counts.size());
    const double n = static_cast<double>(idf_.documents());
    for (const auto& [term, tf] : counts) {
      const double w = std::log((1.0 + n) / (1.0 + idf_.df(term))) + 1.0;
      raw.emplace_back(term, static_cast<double>(tf) * w);
    }
    if (raw.empty()) raw.emplace_back(hash_bytes(text, 0xE3B0C442ULL), 1.0);
    Embedding e = Embedding::from_unsorted(std::move(raw));
    const double len = norm(e);
    for (auto& [_, v] : e.entries) v /= len;
    return e;
  }

 private:
  int ngram_;
  IdfTable idf_;
};

struct CoreSetCandidate {
  std::string id;
  std::string text;
  std::optional<std::string> subdomain;
  std::optional<std::string> skill;
};

struct TaggedCandidate {
  std::string id;
  std::string subdomain;
  std::string skill;
  Embedding embedding;
};

using LabelFn = std::function<std::string(std::string_view)>;

/// Fills missing subdomain/skill tags with the supplied classifiers and
/// embeds every candidate. Without an embedder, a TF-IDF embedder is fitted
/// on the pool.
inline std::vector<TaggedCandidate> assign_metadata(const std::vector<CoreSetCandidate>& pool,
                                                    const LabelFn& subdomain_of = {},
                                                    const LabelFn& skill_of = {},
                                                    Embedder embedder = {}, unsigned workers = 1) {
  if (pool.empty()) fail(ErrorCode::EmptyCandidatePool, "core set candidate pool is empty");
  if (!embedder) {
    auto fitted = std::make_shared<HashedTfIdfEmbedder>();
    std::vector<std::string> texts;
    texts.reserve(pool.size());
    for (const auto& c : pool) texts.push_back(c.text);
    fitted->fit(texts);
    embedder = [fitted](std::string_view t) { return (*fitted)(t); };
  }
  std::vector<TaggedCandidate> out(pool.size());
  parallel_for(pool.size(), workers, [&](std::size_t i) {
    const auto& c = pool[i];
    TaggedCandidate& t = out[i];
    t.id = c.id;
    if (c.subdomain) t.subdomain = *c.subdomain;
    else if (subdomain_of) t.subdomain = subdomain_of(c.text);
    else fail(ErrorCode::ConfigInvalid, "candidate '" + c.id + "' has no subdomain and no classifier");
    if (c.skill) t.skill = *c.skill;
    else if (skill_of) t.skill = skill_of(c.text);
    else fail(ErrorCode::ConfigInvalid, "candidate '" + c.id + "' has no skill and no classifier");
    t.embedding = embedder(c.text);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Matrix construction

using CellKey = std::pair<std::string, std::string>;  // (subdomain, skill)

struct CoreSetConfig {
  std::vector<std::string> subdomains;
  std::vector<std::string> skills;
  double sim_threshold = 0.9;
  std::size_t capacity = 1;                       // default per cell
  std::map<CellKey, std::size_t> capacity_overrides;
  std::optional<std::size_t> max_accepted;

  /// Every registry subdomain against the pairing skills, each cell sized
  /// ⌈target_size / cells⌉.
  static CoreSetConfig full(const SubdomainRegistry& subdomains, const SkillRegistry& skills,
                            std::size_t target_size) {
    CoreSetConfig c;
    c.subdomains = subdomains.names();
    c.skills = skills.pairing_skills();
    const std::size_t cells = c.subdomains.size() * c.skills.size();
    c.capacity = cells ? (target_size + cells - 1) / cells : 0;
    return c;
  }

  std::size_t capacity_of(const CellKey& k) const {
    auto it = capacity_overrides.find(k);
    return it == capacity_overrides.end() ? capacity : it->second;
  }
};

struct CoreSetCell {
  std::size_t capacity = 0;
  std::vector<std::string> members;
};

struct CoreSetRejection {
  std::string id;
  std::string reason;  // "duplicate" | "unknown_cell"
  std::optional<std::string> similar_to;
  double similarity = 0.0;
};

struct CoreSetResult {
  std::map<CellKey, CoreSetCell> cells;
  std::vector<CoreSetRejection> rejected;
  std::vector<std::string> accepted;  // acceptance order
  std::size_t unvisited = 0;          // candidates never reached

  double fill_ratio(const CellKey& k) const {
    const auto& c = cells.at(k);
    return c.capacity ? static_cast<double>(c.members.size()) / static_cast<double>(c.capacity) : 0.0;
  }
};

/// Greedy loop: pick the open cell with the lowest fill ratio (ties by
/// lexicographic cell key), take its next candidate in input order, reject
/// it when its cosine with any accepted item anywhere reaches the
/// threshold. A cell is open while below capacity with candidates left.
inline CoreSetResult build_core_set(const std::vector<TaggedCandidate>& candidates, const CoreSetConfig& cfg) {
  if (!(cfg.sim_threshold > 0.0 && cfg.sim_threshold < 1.0))
    fail(ErrorCode::ConfigInvalid, "sim_threshold must lie in (0,1)");
  CoreSetResult r;
  for (const auto& s : cfg.subdomains)
    for (const auto& k : cfg.skills) r.cells[{s, k}].capacity = cfg.capacity_of({s, k});

  std::map<CellKey, std::deque<std::size_t>> queues;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    CellKey key{candidates[i].subdomain, candidates[i].skill};
    if (!r.cells.count(key)) {
      r.rejected.push_back({candidates[i].id, "unknown_cell", std::nullopt, 0.0});
      continue;
    }
    queues[key].push_back(i);
  }

  std::vector<std::size_t> accepted_idx;
  for (;;) {
    if (cfg.max_accepted && accepted_idx.size() >= *cfg.max_accepted) break;
    const CellKey* best = nullptr;
    std::size_t best_n = 0, best_cap = 1;
    for (const auto& [key, cell] : r.cells) {  // map order is the tie-break order
      if (cell.members.size() >= cell.capacity) continue;
      auto q = queues.find(key);
      if (q == queues.end() || q->second.empty()) continue;
      // n/cap < best_n/best_cap, compared exactly
      if (!best || cell.members.size() * best_cap < best_n * cell.capacity) {
        best = &key;
        best_n = cell.members.size();
        best_cap = cell.capacity;
      }
    }
    if (!best) break;
    auto& queue = queues[*best];
    const std::size_t idx = queue.front();
    queue.pop_front();
    const auto& cand = candidates[idx];
    std::optional<std::size_t> clash;
    double clash_sim = 0.0;
    for (std::size_t a : accepted_idx) {
      const double sim = cand.embedding.dot(candidates[a].embedding);
      if (sim >= cfg.sim_threshold) {
        clash = a;
        clash_sim = sim;
        break;
      }
    }
    if (clash) {
      r.rejected.push_back({cand.id, "duplicate", candidates[*clash].id, clash_sim});
      continue;
    }
    accepted_idx.push_back(idx);
    r.cells[*best].members.push_back(cand.id);
    r.accepted.push_back(cand.id);
  }
  for (const auto& [_, q] : queues) r.unvisited += q.size();
  return r;
}

inline json to_json(const CoreSetResult& r, double sim_threshold) {
  json cells = json::array();
  for (const auto& [key, cell] : r.cells)
    cells.push_back({{"subdomain", key.first}, {"skill", key.second}, {"capacity", cell.capacity},
                     {"members", cell.members}});
  json rejected = json::array();
  for (const auto& x : r.rejected) {
    json j{{"id", x.id}, {"reason", x.reason}};
    if (x.similar_to) {
      j["similar_to"] = *x.similar_to;
      j["similarity"] = x.similarity;
    }
    rejected.push_back(std::move(j));
  }
  return json{{"sim_threshold", sim_threshold},
              {"accepted", r.accepted.size()},
              {"unvisited", r.unvisited},
              {"cells", std::move(cells)},
              {"rejected", std::move(rejected)}};
}

/// Fill ratios as a subdomain × skill table.
inline std::string fill_ratio_csv(const CoreSetResult& r, const CoreSetConfig& cfg) {
  std::string out = "subdomain";
  for (const auto& k : cfg.skills) out += "," + k;
  out += "\n";
  char buf[32];
  for (const auto& s : cfg.subdomains) {
    out += s;
    for (const auto& k : cfg.skills) {
      std::snprintf(buf, sizeof(buf), ",%.6f", r.fill_ratio({s, k}));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace kcurate
