#pragma once

// Rewrite orchestration for rejected documents: topic analysis through a
// pluggable generator, multi-article splitting, focused rewriting, and
// deficit-driven work orders for domain balancing.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "kcurate/classify.hpp"
#include "kcurate/corpus.hpp"
#include "kcurate/error.hpp"
#include "kcurate/log.hpp"
#include "kcurate/parallel.hpp"
#include "kcurate/text.hpp"

namespace kcurate {

// ---------------------------------------------------------------------------
// Templates

/// Prompt templates with {{name}} placeholders.
class TemplateStore {
 public:
  void add(std::string id, std::string body) {
    if (!templates_.emplace(id, std::move(body)).second)
      fail(ErrorCode::DuplicateName, "template '" + id + "' defined twice");
  }

  bool has(const std::string& id) const { return templates_.count(id) > 0; }

  const std::string& body(const std::string& id) const { return get(id); }

  /// Loads every *.txt file in `dir`; the file stem is the template id.
  static TemplateStore load_directory(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) fail(ErrorCode::ConfigInvalid, "template directory '" + dir + "' not found");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    TemplateStore store;
    for (const auto& f : files) {
      std::ifstream in(f);
      std::stringstream ss;
      ss << in.rdbuf();
      store.add(f.stem().string(), ss.str());
    }
    return store;
  }

  /// Built-in minimal templates for topic analysis and rewriting.
  static TemplateStore defaults() {
    TemplateStore s;
    s.add("topic_analysis",
          "Identify the central topic of the document below, the indices of the paragraphs relevant "
          "to it, and the paragraph indices where an unrelated article begins.\n"
          "Reply with a ```json block holding central_topic, relevant_paragraphs, split_points.\n\n"
          "Paragraphs: {{paragraph_count}}\n\n{{document}}\n");
    s.add("rewrite",
          "Rewrite the following material about \"{{topic}}\" as a clear, self-contained document.\n\n"
          "{{content}}\n");
    return s;
  }

  std::vector<std::string> placeholders(const std::string& id) const {
    const std::string& body = get(id);
    std::vector<std::string> out;
    std::size_t pos = 0;
    while ((pos = body.find("{{", pos)) != std::string::npos) {
      const std::size_t end = body.find("}}", pos + 2);
      if (end == std::string::npos) break;
      out.push_back(detail::trim(std::string_view(body).substr(pos + 2, end - pos - 2)));
      pos = end + 2;
    }
    return out;
  }

  std::string render(const std::string& id, const std::map<std::string, std::string>& vars) const {
    const std::string& body = get(id);
    std::string out;
    std::size_t pos = 0;
    for (;;) {
      const std::size_t open = body.find("{{", pos);
      const std::size_t close = open == std::string::npos ? open : body.find("}}", open + 2);
      if (close == std::string::npos) {
        out.append(body, pos, std::string::npos);
        return out;
      }
      out.append(body, pos, open - pos);
      const std::string name = detail::trim(std::string_view(body).substr(open + 2, close - open - 2));
      auto it = vars.find(name);
      if (it == vars.end())
        fail(ErrorCode::UnboundVariable, "template '" + id + "' needs variable '" + name + "'");
      out += it->second;
      pos = close + 2;
    }
  }

 private:
  const std::string& get(const std::string& id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) fail(ErrorCode::ConfigInvalid, "unknown template '" + id + "'");
    return it->second;
  }

  std::map<std::string, std::string> templates_;
};

// ---------------------------------------------------------------------------
// Generators

struct GeneratorRequest {
  std::string template_id;
  std::map<std::string, std::string> variables;
  std::uint64_t seed = 0;
  std::string prompt;  // rendered template
};

struct GeneratorResponse {
  std::string text;
  std::string generator_id;
};

class Generator {
 public:
  virtual ~Generator() = default;
  virtual GeneratorResponse generate(const GeneratorRequest& req) = 0;
};

/// Returns the "content" variable unchanged, or the prompt without one.
class EchoGenerator : public Generator {
 public:
  GeneratorResponse generate(const GeneratorRequest& req) override {
    auto it = req.variables.find("content");
    return {it != req.variables.end() ? it->second : req.prompt, "echo"};
  }
};

class FunctionGenerator : public Generator {
 public:
  using Fn = std::function<std::string(const GeneratorRequest&)>;
  explicit FunctionGenerator(Fn fn, std::string id = "function") : fn_(std::move(fn)), id_(std::move(id)) {}
  GeneratorResponse generate(const GeneratorRequest& req) override { return {fn_(req), id_}; }

 private:
  Fn fn_;
  std::string id_;
};

/// Renders and dispatches requests with at most `concurrency` in flight;
/// responses come back in request order.
inline std::vector<GeneratorResponse> run_requests(std::vector<GeneratorRequest> requests, Generator& gen,
                                                   const TemplateStore& templates, unsigned concurrency = 1) {
  for (auto& r : requests) r.prompt = templates.render(r.template_id, r.variables);
  std::vector<GeneratorResponse> out(requests.size());
  parallel_for(requests.size(), concurrency, [&](std::size_t i) { out[i] = gen.generate(requests[i]); });
  return out;
}

// ---------------------------------------------------------------------------
// Topic analysis

/// Paragraphs are separated by one or more blank lines.
inline std::vector<std::string> paragraphs(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (const auto& line : detail::split_lines(text)) {
    if (detail::is_blank(line)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
      continue;
    }
    if (!cur.empty()) cur.push_back('\n');
    cur += line;
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

struct TopicAnalysis {
  std::string central_topic;
  std::vector<std::size_t> relevant_paragraphs;
  std::vector<std::size_t> split_points;

  bool operator==(const TopicAnalysis&) const = default;
};

/// Extracts the first fenced block (```json or ```) from a reply and
/// validates it against the paragraph count. Returns nullopt on any defect.
inline std::optional<TopicAnalysis> parse_topic_reply(std::string_view reply, std::size_t n_paragraphs) {
  const std::size_t open = reply.find("```");
  if (open == std::string_view::npos) return std::nullopt;
  std::size_t body = reply.find('\n', open);
  if (body == std::string_view::npos) return std::nullopt;
  const std::size_t close = reply.find("```", body);
  if (close == std::string_view::npos) return std::nullopt;
  const json j = json::parse(reply.substr(body + 1, close - body - 1), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  try {
    TopicAnalysis a;
    a.central_topic = j.at("central_topic").get<std::string>();
    for (const auto& x : j.at("relevant_paragraphs")) {
      const auto v = x.get<std::int64_t>();
      if (v < 0 || static_cast<std::size_t>(v) >= n_paragraphs) return std::nullopt;
      a.relevant_paragraphs.push_back(static_cast<std::size_t>(v));
    }
    for (const auto& x : j.value("split_points", json::array())) {
      const auto v = x.get<std::int64_t>();
      if (v <= 0 || static_cast<std::size_t>(v) >= n_paragraphs) return std::nullopt;
      if (!a.split_points.empty() && static_cast<std::size_t>(v) <= a.split_points.back()) return std::nullopt;
      a.split_points.push_back(static_cast<std::size_t>(v));
    }
    if (detail::trim(a.central_topic).empty()) return std::nullopt;
    std::sort(a.relevant_paragraphs.begin(), a.relevant_paragraphs.end());
    a.relevant_paragraphs.erase(std::unique(a.relevant_paragraphs.begin(), a.relevant_paragraphs.end()),
                                a.relevant_paragraphs.end());
    return a;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

inline void require_rewritable(const Document& doc) {
  if (doc.tags.source && doc.tags.source->kind == SourceKind::Synthetic)
    fail(ErrorCode::AlreadySynthetic, "'" + doc.id + "' is synthetic and cannot be rewritten again");
}

struct SynthOptions {
  int retries = 2;
  std::uint64_t seed = 0;
};

inline TopicAnalysis analyze_topic(const Document& doc, Generator& gen, const TemplateStore& templates,
                                   const SynthOptions& opt = {}) {
  require_rewritable(doc);
  if (!doc.rejected())
    fail(ErrorCode::InvalidArgument, "'" + doc.id + "' is not from the rejected pool");
  const auto paras = paragraphs(doc.text);
  if (paras.empty()) fail(ErrorCode::AnalysisFailed, "'" + doc.id + "' has no paragraphs");
  std::string numbered;
  for (std::size_t i = 0; i < paras.size(); ++i) numbered += "[" + std::to_string(i) + "] " + paras[i] + "\n\n";
  GeneratorRequest req{"topic_analysis",
                       {{"document", numbered}, {"paragraph_count", std::to_string(paras.size())}},
                       opt.seed,
                       {}};
  req.prompt = templates.render(req.template_id, req.variables);
  for (int attempt = 0; attempt <= opt.retries; ++attempt) {
    req.seed = opt.seed + static_cast<std::uint64_t>(attempt);
    const GeneratorResponse resp = gen.generate(req);
    if (auto a = parse_topic_reply(resp.text, paras.size())) return *a;
    log().warn("topic analysis for '{}' unparseable (attempt {})", doc.id, attempt + 1);
  }
  fail(ErrorCode::AnalysisFailed, "topic analysis failed for '" + doc.id + "'");
}

struct SplitPart {
  Document doc;
  TopicAnalysis analysis;  // indices relative to the part
};

/// Cuts a multi-article document at the split points. Children get ids
/// "<parent>#<k>" (k from 1), copy the parent's tags and point back to it.
inline std::vector<SplitPart> split_document(const Document& doc, const TopicAnalysis& a) {
  const auto paras = paragraphs(doc.text);
  if (a.split_points.empty()) return {{doc, a}};
  std::vector<std::size_t> bounds{0};
  bounds.insert(bounds.end(), a.split_points.begin(), a.split_points.end());
  bounds.push_back(paras.size());
  std::vector<SplitPart> out;
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
    std::string text;
    for (std::size_t p = bounds[k]; p < bounds[k + 1]; ++p) text += (p > bounds[k] ? "\n\n" : "") + paras[p];
    Document child = Document::make(doc.id + "#" + std::to_string(k + 1), text, doc.source_name);
    child.tags = doc.tags;
    child.parent_id = doc.id;
    TopicAnalysis ca{a.central_topic, {}, {}};
    for (std::size_t r : a.relevant_paragraphs)
      if (r >= bounds[k] && r < bounds[k + 1]) ca.relevant_paragraphs.push_back(r - bounds[k]);
    out.push_back({std::move(child), std::move(ca)});
  }
  return out;
}

struct RewriteContext {
  const LinearTextModel* domain_model = nullptr;
  const SubdomainRegistry* registry = nullptr;
  std::string source_name = "synthetic";
};

/// Prompts the generator with only the relevant paragraphs and returns a
/// Synthetic document linked to its parent, with language and (when a
/// model is given) domain re-derived from the new text.
inline Document rewrite(const Document& doc, const TopicAnalysis& a, Generator& gen,
                        const TemplateStore& templates, const RewriteContext& ctx = {}, std::uint64_t seed = 0) {
  require_rewritable(doc);
  const auto paras = paragraphs(doc.text);
  if (a.relevant_paragraphs.empty())
    fail(ErrorCode::GenerationFailed, "no relevant paragraphs for '" + doc.id + "'");
  std::string content;
  for (std::size_t i = 0; i < a.relevant_paragraphs.size(); ++i) {
    const std::size_t p = a.relevant_paragraphs[i];
    if (p >= paras.size()) fail(ErrorCode::GenerationFailed, "relevant paragraph out of range");
    content += (i ? "\n\n" : "") + paras[p];
  }
  GeneratorRequest req{"rewrite", {{"topic", a.central_topic}, {"content", content}}, seed, {}};
  req.prompt = templates.render(req.template_id, req.variables);
  const GeneratorResponse resp = gen.generate(req);
  if (detail::is_blank(resp.text) || utf8::normalize_for_features(resp.text).empty())
    fail(ErrorCode::GenerationFailed, "generator returned no text for '" + doc.id + "'");

  Document out = Document::make(doc.id + "~syn", resp.text, ctx.source_name);
  out.parent_id = doc.id;
  out.tags.source = Source{SourceKind::Synthetic, std::nullopt};
  out.tags.language = detect_language(out.text).language;
  if (ctx.domain_model && ctx.registry) {
    const auto pred = classify_domain(*ctx.domain_model, out.text, *ctx.registry);
    out.tags.domain = pred.domain;
    out.tags.subdomain = pred.subdomain;
  }
  out.extra["generator_id"] = resp.generator_id;
  return out;
}

// ---------------------------------------------------------------------------
// Balance feedback

struct WorkOrder {
  std::string label;
  std::string template_id;
  std::size_t count = 0;
  double deficit = 0.0;

  bool operator==(const WorkOrder&) const = default;
};

/// Splits `budget` documents across labels whose share is below target,
/// proportionally to the deficit (largest-remainder rounding; ties go to
/// the larger deficit, then label order). Labels absent from `shares`
/// count as share 0.
inline std::vector<WorkOrder> balance_feedback(const std::map<std::string, double>& shares,
                                               const std::map<std::string, double>& targets,
                                               const std::map<std::string, std::string>& templates,
                                               std::size_t budget, const std::string& default_template = "textbook") {
  std::vector<WorkOrder> orders;
  double total = 0.0;
  for (const auto& [label, target] : targets) {
    auto it = shares.find(label);
    const double share = it == shares.end() ? 0.0 : it->second;
    const double d = target - share;
    if (d <= 0.0) continue;
    auto t = templates.find(label);
    orders.push_back({label, t == templates.end() ? default_template : t->second, 0, d});
    total += d;
  }
  if (orders.empty() || budget == 0) return {};
  std::vector<std::pair<double, std::size_t>> rema;
  std::size_t given = 0;
  for (std::size_t i = 0; i < orders.size(); ++i) {
    const double exact = static_cast<double>(budget) * orders[i].deficit / total;
    orders[i].count = static_cast<std::size_t>(std::floor(exact));
    given += orders[i].count;
    rema.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(rema.begin(), rema.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return orders[a.second].deficit > orders[b.second].deficit;
  });
  for (std::size_t k = 0; given < budget && k < rema.size(); ++k, ++given) ++orders[rema[k].second].count;
  std::vector<WorkOrder> out;
  for (auto& o : orders)
    if (o.count > 0) out.push_back(std::move(o));
  std::stable_sort(out.begin(), out.end(), [](const WorkOrder& a, const WorkOrder& b) { return a.count > b.count; });
  return out;
}

inline json to_json(const WorkOrder& o) {
  return json{{"label", o.label}, {"template", o.template_id}, {"count", o.count}, {"deficit", o.deficit}};
}

}  // namespace kcurate
