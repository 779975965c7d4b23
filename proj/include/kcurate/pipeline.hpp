#pragma once

// Pipeline configuration and orchestration. Stages run in the fixed order
// dedup → heuristic → perplexity → broken_fix → quality → toxicity →
// line_dedup → final_refine; non-web sources are refined first and take
// only dedup and the final refinement.

#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kcurate/classify.hpp"
#include "kcurate/corpus.hpp"
#include "kcurate/corpus_io.hpp"
#include "kcurate/dedup.hpp"
#include "kcurate/digest.hpp"
#include "kcurate/error.hpp"
#include "kcurate/heuristics.hpp"
#include "kcurate/log.hpp"
#include "kcurate/ngram.hpp"
#include "kcurate/parallel.hpp"
#include "kcurate/quality.hpp"
#include "kcurate/refiners.hpp"
#include "kcurate/route.hpp"
#include "kcurate/stats.hpp"

namespace kcurate {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

/// Replaces "${NAME}" in every string value with the environment variable
/// NAME; unset variables are a config error.
inline json expand_env(const json& j) {
  if (j.is_object()) {
    json out = json::object();
    for (auto& [k, v] : j.items()) out[k] = expand_env(v);
    return out;
  }
  if (j.is_array()) {
    json out = json::array();
    for (const auto& v : j) out.push_back(expand_env(v));
    return out;
  }
  if (!j.is_string()) return j;
  std::string s = j.get<std::string>();
  std::size_t pos = 0;
  while ((pos = s.find("${", pos)) != std::string::npos) {
    const std::size_t end = s.find('}', pos);
    if (end == std::string::npos) break;
    const std::string name = s.substr(pos + 2, end - pos - 2);
    const char* val = std::getenv(name.c_str());
    if (!val) fail(ErrorCode::ConfigInvalid, "environment variable '" + name + "' is not set");
    s.replace(pos, end - pos + 1, val);
    pos += std::strlen(val);
  }
  return s;
}

/// A classifier given either as a saved model or as labeled training data
/// ({"text", "label"} per line) trained at startup.
struct ModelSource {
  std::optional<std::string> model;
  std::optional<std::string> train;
  FeatureSpec spec;
  TrainOptions options;

  bool configured() const { return model || train; }

  static ModelSource from_json(const json& j, const fs::path& base) {
    ModelSource m;
    auto resolve = [&](const std::string& key) -> std::optional<std::string> {
      if (!j.contains(key) || j[key].is_null()) return std::nullopt;
      fs::path p = j[key].get<std::string>();
      if (p.is_relative()) p = base / p;
      if (!fs::exists(p)) fail(ErrorCode::ConfigInvalid, key + " file '" + p.string() + "' does not exist");
      return p.string();
    };
    m.model = resolve("model");
    m.train = resolve("train");
    if (j.contains("bits")) m.spec.bits = j["bits"].get<int>();
    if (j.contains("orders")) m.spec.orders = j["orders"].get<std::vector<int>>();
    m.options.epochs = j.value("epochs", m.options.epochs);
    m.options.learning_rate = j.value("learning_rate", m.options.learning_rate);
    return m;
  }

  LinearTextModel load(std::uint64_t seed) const {
    if (model) return load_model(*model);
    if (!train) fail(ErrorCode::ConfigInvalid, "classifier has neither model nor training data");
    const auto data = read_labeled(*train);
    TrainOptions opt = options;
    opt.seed = seed;
    FeatureSpec spec = this->spec;
    spec.seed = seed;
    return train_linear_model(data, spec, opt);
  }

  static std::vector<LabeledText> read_labeled(const std::string& path) {
    std::vector<LabeledText> out;
    LineReader r(path);
    std::size_t line_no = 0;
    while (auto line = r.next()) {
      ++line_no;
      if (detail::is_blank(*line)) continue;
      const json j = json::parse(*line, nullptr, false);
      if (j.is_discarded() || !j.contains("text") || !j.contains("label"))
        fail(ErrorCode::FormatError, path + ":" + std::to_string(line_no) + ": expected {text, label}");
      out.push_back({j["text"].get<std::string>(), j["label"].is_string() ? j["label"].get<std::string>()
                                                                          : j["label"].dump()});
    }
    return out;
  }
};

struct PipelineConfig {
  json raw = json::object();  // as read, before env expansion
  fs::path base_dir = ".";
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::size_t batch_size = 512;
  Route route;
  DedupConfig dedup;
  HeuristicRuleSet heuristics = HeuristicRuleSet::defaults();
  BrokenTextConfig broken;
  FinalRefineConfig final_refine;
  RefinerRegistry refiners = RefinerRegistry::defaults();
  SubdomainRegistry subdomains = SubdomainRegistry::defaults();

  // perplexity
  std::optional<std::string> lm_model;
  std::optional<std::string> lm_train;
  NgramConfig lm;
  std::optional<PerplexityBand> band;
  std::optional<std::string> calibration_corpus;
  std::size_t calibration_size = 2000;
  double q_low = 0.01;
  double q_high = 0.99;

  // quality / toxicity
  ModelSource general;
  ModelSource educational;
  QualityThresholds quality_thresholds;
  Combine combine = Combine::Both;
  std::string positive_label = "1";
  ModelSource toxicity;
  double toxicity_threshold = 0.5;
  std::vector<std::string> toxicity_categories = default_toxicity_categories();

  // tags written on surviving documents
  bool tag_survivors = true;
  ModelSource domain;

  std::optional<std::string> rejected_output;

  static PipelineConfig from_json(const json& raw, const fs::path& base_dir) {
    PipelineConfig c;
    c.raw = raw;
    c.base_dir = base_dir;
    const json j = expand_env(raw);
    auto path_of = [&](const json& obj, const std::string& key) -> std::optional<std::string> {
      if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
      fs::path p = obj[key].get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      if (!fs::exists(p)) fail(ErrorCode::ConfigInvalid, key + " file '" + p.string() + "' does not exist");
      return p.string();
    };
    try {
      c.seed = j.value("seed", std::uint64_t{0});
      c.workers = j.value("workers", 1u);
      c.batch_size = j.value("batch_size", c.batch_size);
      if (c.batch_size == 0) fail(ErrorCode::ConfigInvalid, "batch_size must be positive");
      if (j.contains("stages")) c.route.enabled = Route::parse_stage_list(j["stages"].get<std::vector<std::string>>());
      if (j.contains("web_sources")) c.route.web_sources = j["web_sources"].get<std::vector<std::string>>();
      if (j.contains("subdomains")) c.subdomains = SubdomainRegistry::from_json(j["subdomains"]);
      if (j.contains("dedup")) {
        const auto& d = j["dedup"];
        c.dedup.tau = d.value("tau", c.dedup.tau);
        c.dedup.ngram = d.value("ngram", c.dedup.ngram);
        c.dedup.exact_pairwise_limit = d.value("exact_pairwise_limit", c.dedup.exact_pairwise_limit);
        c.dedup.candidate_terms = d.value("candidate_terms", c.dedup.candidate_terms);
      }
      c.dedup.check();
      if (j.contains("heuristics")) c.heuristics = HeuristicRuleSet::from_json(j["heuristics"]);
      if (j.contains("broken_fix")) {
        const auto& b = j["broken_fix"];
        c.broken.max_replacement_density = b.value("max_replacement_density", c.broken.max_replacement_density);
        c.broken.max_conjoining_jamo_run = b.value("max_conjoining_jamo_run", c.broken.max_conjoining_jamo_run);
        c.broken.max_mojibake_residue = b.value("max_mojibake_residue", c.broken.max_mojibake_residue);
      }
      if (j.contains("final_refine")) {
        const auto& f = j["final_refine"];
        c.final_refine.fullwidth_to_halfwidth = f.value("fullwidth_to_halfwidth", true);
        if (f.contains("pii")) c.final_refine.pii = PiiPatternSet::from_json(f["pii"]);
      }
      if (j.contains("refiners")) c.refiners = RefinerRegistry::from_json(j["refiners"]);
      if (j.contains("perplexity")) {
        const auto& p = j["perplexity"];
        c.lm_model = path_of(p, "model");
        c.lm_train = path_of(p, "train");
        c.lm.order = p.value("order", c.lm.order);
        c.lm.floor = p.value("floor", c.lm.floor);
        if (p.contains("lambdas")) c.lm.lambdas = p["lambdas"].get<std::vector<double>>();
        c.lm.resolved_lambdas();
        if (p.contains("band")) {
          PerplexityBand b;
          b.low = p["band"].at("low").get<double>();
          b.high = p["band"].at("high").get<double>();
          if (!(b.low > 0.0 && b.low < b.high)) fail(ErrorCode::ConfigInvalid, "band needs 0 < low < high");
          c.band = b;
        }
        c.calibration_corpus = path_of(p, "calibration");
        c.calibration_size = p.value("calibration_size", c.calibration_size);
        c.q_low = p.value("q_low", c.q_low);
        c.q_high = p.value("q_high", c.q_high);
      }
      if (j.contains("quality")) {
        const auto& q = j["quality"];
        if (q.contains("general")) c.general = ModelSource::from_json(q["general"], base_dir);
        if (q.contains("educational")) c.educational = ModelSource::from_json(q["educational"], base_dir);
        c.quality_thresholds.general = q.value("threshold_general", c.quality_thresholds.general);
        c.quality_thresholds.educational = q.value("threshold_educational", c.quality_thresholds.educational);
        if (q.contains("combine")) c.combine = parse_combine(q["combine"].get<std::string>());
        c.positive_label = q.value("positive_label", c.positive_label);
      }
      if (j.contains("toxicity")) {
        const auto& t = j["toxicity"];
        c.toxicity = ModelSource::from_json(t, base_dir);
        c.toxicity_threshold = t.value("threshold", c.toxicity_threshold);
        if (t.contains("categories")) c.toxicity_categories = t["categories"].get<std::vector<std::string>>();
      }
      if (j.contains("tagging")) {
        const auto& t = j["tagging"];
        c.tag_survivors = t.value("enabled", true);
        if (t.contains("domain")) c.domain = ModelSource::from_json(t["domain"], base_dir);
      }
      if (j.contains("rejected_output") && !j["rejected_output"].is_null())
        c.rejected_output = j["rejected_output"].get<std::string>();
    } catch (const json::exception& e) {
      fail(ErrorCode::ConfigInvalid, std::string("malformed pipeline config: ") + e.what());
    }
    return c;
  }

  static PipelineConfig load(const std::string& path) {
    LineReader r(path);
    std::string text;
    while (auto line = r.next()) text += *line + "\n";
    const json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      fail(ErrorCode::ConfigInvalid, "config '" + path + "' is not a JSON object");
    return from_json(j, fs::absolute(path).parent_path());
  }

  /// Hash of the configuration as written, without the worker count.
  std::string hash() const {
    json h = raw;
    h.erase("workers");
    return sha256_hex(h.dump());
  }
};

// ---------------------------------------------------------------------------
// Pipeline

struct RunOptions {
  std::optional<unsigned> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<std::string>> stages;
  std::optional<std::string> rejected_output;
  std::optional<std::string> manifest_output;
};

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg)) { init(); }

  const PipelineConfig& config() const { return cfg_; }
  const Route& route() const { return cfg_.route; }
  const std::optional<PerplexityBand>& band() const { return band_; }
  unsigned workers() const { return std::max(1u, cfg_.workers); }
  void set_workers(unsigned w) { cfg_.workers = w; }
  /// Yield of the most recent run().
  const YieldReport& last_report() const { return last_report_; }

  /// In-memory run. Every returned document carries its audit; order is
  /// the input order. `prior_kept` documents are treated as already kept
  /// by dedup (they are not returned).
  std::vector<Document> process(std::vector<Document> docs, std::span<const Document> prior_kept = {}) const {
    Validator v(cfg_.subdomains);
    for (auto& d : docs) admit(d, v);
    parallel_for(docs.size(), workers(), [&](std::size_t i) { run_head(docs[i]); });
    IdfTable idf;
    std::size_t at_dedup = 0;
    std::vector<TermCounts> counts(docs.size());
    parallel_for(docs.size(), workers(), [&](std::size_t i) {
      if (reaches_dedup(docs[i])) counts[i] = count_terms(docs[i].text, cfg_.dedup.ngram);
    });
    for (std::size_t i = 0; i < docs.size(); ++i)
      if (reaches_dedup(docs[i])) {
        idf.add_document(counts[i]);
        ++at_dedup;
      }
    for (const auto& p : prior_kept) idf.add_document(count_terms(p.text, cfg_.dedup.ngram));
    DedupScanner scanner(cfg_.dedup, at_dedup + prior_kept.size() <= cfg_.dedup.exact_pairwise_limit);
    for (const auto& p : prior_kept)
      scanner.force_keep(p.id, p.text, weigh(count_terms(p.text, cfg_.dedup.ngram), idf));
    std::map<std::string, std::size_t> redactions;
    run_dedup_and_tail(docs, scanner, idf, &counts, redactions);
    return docs;
  }

  /// Streams `input` to `output` (kept documents) and the rejected file;
  /// returns the run manifest, also written next to the output.
  json run(const std::string& input, const std::string& output, const RunOptions& opt = {}) {
    if (opt.workers) cfg_.workers = *opt.workers;
    if (opt.seed && *opt.seed != cfg_.seed) {
      cfg_.seed = *opt.seed;
      init();
    }
    if (opt.stages) cfg_.route.enabled = Route::parse_stage_list(*opt.stages);
    if (!fs::exists(input)) fail(ErrorCode::IoError, "input '" + input + "' does not exist");
    const std::string rejected_path =
        opt.rejected_output ? *opt.rejected_output
        : cfg_.rejected_output ? *cfg_.rejected_output
                               : default_sidecar(output, ".rejected");
    const std::string manifest_path = opt.manifest_output ? *opt.manifest_output : output + ".manifest.json";

    // Pass 1: validate, refine, collect document frequencies.
    IdfTable idf;
    std::size_t n_in = 0, at_dedup = 0;
    {
      Validator validator(cfg_.subdomains);
      CorpusReader reader(input);
      for (;;) {
        std::vector<Document> batch = reader.batch(cfg_.batch_size);
        if (batch.empty()) break;
        for (auto& d : batch) admit(d, validator);
        std::vector<TermCounts> counts(batch.size());
        parallel_for(batch.size(), workers(), [&](std::size_t i) {
          run_head(batch[i]);
          if (reaches_dedup(batch[i])) counts[i] = count_terms(batch[i].text, cfg_.dedup.ngram);
        });
        for (std::size_t i = 0; i < batch.size(); ++i)
          if (reaches_dedup(batch[i])) {
            idf.add_document(counts[i]);
            ++at_dedup;
          }
        n_in += batch.size();
      }
    }
    const bool exact = at_dedup <= cfg_.dedup.exact_pairwise_limit;
    log().info("pass 1: {} documents, {} reach dedup ({} mode)", n_in, at_dedup, exact ? "exact" : "approximate");

    // Pass 2: all stages, written in input order.
    DedupScanner scanner(cfg_.dedup, exact);
    YieldAccumulator yield(cfg_.route);
    std::map<std::string, std::size_t> redactions;
    std::size_t n_kept = 0, n_rejected = 0;
    {
      CorpusReader reader(input);
      CorpusWriter kept(output);
      CorpusWriter rejected(rejected_path);
      for (;;) {
        std::vector<Document> batch = reader.batch(cfg_.batch_size);
        if (batch.empty()) break;
        parallel_for(batch.size(), workers(), [&](std::size_t i) { run_head(batch[i]); });
        run_dedup_and_tail(batch, scanner, idf, nullptr, redactions);
        for (const auto& d : batch) {
          yield.add(d);
          if (d.rejected()) {
            rejected.write(d);
            ++n_rejected;
          } else {
            kept.write(d);
            ++n_kept;
          }
        }
      }
      kept.close();
      rejected.close();
    }

    json stages = json::array();
    for (Stage s : cfg_.route.enabled) stages.push_back(std::string(to_string(s)));
    json manifest{
        {"format", "kcurate-run/1"},
        {"config_sha256", cfg_.hash()},
        {"seed", cfg_.seed},
        {"stages", stages},
        {"web_sources", cfg_.route.web_sources},
        {"dedup", {{"mode", exact ? "exact" : "approximate"}, {"tau", cfg_.dedup.tau}, {"documents", at_dedup}}},
        {"perplexity_band", band_ ? to_json(*band_) : json(nullptr)},
        {"documents", {{"in", n_in}, {"kept", n_kept}, {"rejected", n_rejected}}},
        {"report", to_json(last_report_ = yield.report())},
        {"redactions", redactions},
        {"input_sha256", file_sha256(input)},
        {"output_sha256", file_sha256(output)},
        {"rejected_sha256", file_sha256(rejected_path)},
    };
    LineWriter mw(manifest_path);
    mw.write_line(manifest.dump(2));
    mw.close();
    return manifest;
  }

  static std::string default_sidecar(const std::string& output, const std::string& tag) {
    std::string base = output, ext;
    for (const char* e : {".jsonl.gz", ".jsonl", ".gz"}) {
      const std::string se(e);
      if (base.size() > se.size() && base.compare(base.size() - se.size(), se.size(), se) == 0) {
        ext = se;
        base.resize(base.size() - se.size());
        break;
      }
    }
    return base + tag + (ext.empty() ? ".jsonl" : ext);
  }

 private:
  void init() {
    const auto& r = cfg_.route;
    if (r.is_enabled(Stage::Perplexity)) {
      if (cfg_.lm_model) lm_ = std::make_shared<NgramModel>(load_lm(*cfg_.lm_model));
      else if (cfg_.lm_train) lm_ = std::make_shared<NgramModel>(train_lm(read_corpus(*cfg_.lm_train), cfg_.lm));
      else fail(ErrorCode::ConfigInvalid, "perplexity stage enabled without perplexity.model or perplexity.train");
      if (cfg_.band) {
        band_ = cfg_.band;
      } else if (cfg_.calibration_corpus) {
        std::vector<Document> sample;
        CorpusReader reader(*cfg_.calibration_corpus);
        sample = reader.batch(cfg_.calibration_size);
        band_ = calibrate_band(*lm_, sample, cfg_.q_low, cfg_.q_high, workers());
      } else {
        fail(ErrorCode::ConfigInvalid, "perplexity stage needs perplexity.band or perplexity.calibration");
      }
    }
    if (r.is_enabled(Stage::Quality)) {
      if (!cfg_.general.configured() || !cfg_.educational.configured())
        fail(ErrorCode::ConfigInvalid, "quality stage needs quality.general and quality.educational");
      quality_ = std::make_shared<QualityEnsemble>(cfg_.general.load(cfg_.seed), cfg_.educational.load(cfg_.seed + 1),
                                                   cfg_.quality_thresholds, cfg_.combine, cfg_.positive_label);
    }
    if (r.is_enabled(Stage::Toxicity)) {
      if (!cfg_.toxicity.configured()) fail(ErrorCode::ConfigInvalid, "toxicity stage needs toxicity.model or .train");
      toxicity_ = std::make_shared<ToxicityTaxonomy>(cfg_.toxicity.load(cfg_.seed + 2), cfg_.toxicity_threshold,
                                                     cfg_.toxicity_categories);
    }
    if (cfg_.domain.configured()) domain_ = std::make_shared<LinearTextModel>(cfg_.domain.load(cfg_.seed + 3));
  }

  void admit(const Document& d, Validator& v) const {
    v.validate(d);
    for (const auto& e : d.audit)
      if (e.stage != Stage::Rewrite)
        fail(ErrorCode::InvalidDocument, "'" + d.id + "' already carries stage events");
  }

  bool reaches_dedup(const Document& d) const { return !d.rejected() && cfg_.route.is_enabled(Stage::Dedup); }

  void run_head(Document& d) const {
    if (cfg_.route.is_web(d)) return;
    StageOutcome o = cfg_.refiners.refine(std::move(d));
    d = std::move(o.doc);
    d.record(Stage::Refine, std::move(o.verdict), o.score);
  }

  /// Sequential dedup over the batch, then the per-document tail stages in
  /// parallel. `counts` may carry precomputed term counts.
  void run_dedup_and_tail(std::vector<Document>& batch, DedupScanner& scanner, const IdfTable& idf,
                          const std::vector<TermCounts>* counts,
                          std::map<std::string, std::size_t>& redactions) const {
    if (cfg_.route.is_enabled(Stage::Dedup)) {
      std::vector<TfIdfVector> vecs(batch.size());
      parallel_for(batch.size(), workers(), [&](std::size_t i) {
        if (!batch[i].rejected())
          vecs[i] = weigh(counts ? (*counts)[i] : count_terms(batch[i].text, cfg_.dedup.ngram), idf);
      });
      for (std::size_t i = 0; i < batch.size(); ++i) {
        Document& d = batch[i];
        if (d.rejected()) continue;
        if (auto dup = scanner.offer(d.id, d.text, std::move(vecs[i])))
          d.record(Stage::Dedup, Verdict::rejected("duplicate_of:" + dup->duplicate_of), dup->similarity);
        else
          d.record(Stage::Dedup, Verdict::kept());
      }
    }
    std::vector<std::map<std::string, std::size_t>> pii(batch.size());
    parallel_for(batch.size(), workers(), [&](std::size_t i) { run_tail(batch[i], pii[i]); });
    for (const auto& m : pii)
      for (const auto& [k, n] : m) redactions[k] += n;
  }

  void run_tail(Document& d, std::map<std::string, std::size_t>& pii) const {
    for (Stage s : cfg_.route.stages_for(d)) {
      if (d.rejected()) return;
      if (s == Stage::Refine || s == Stage::Dedup) continue;
      StageOutcome o = apply(s, std::move(d), pii);
      d = std::move(o.doc);
      d.record(s, std::move(o.verdict), o.score);
    }
    if (!d.rejected() && cfg_.tag_survivors) tag(d);
  }

  StageOutcome apply(Stage s, Document d, std::map<std::string, std::size_t>& pii) const {
    switch (s) {
      case Stage::Heuristic: return heuristic_filter(std::move(d), cfg_.heuristics);
      case Stage::Perplexity: return perplexity_filter(std::move(d), *lm_, *band_);
      case Stage::BrokenFix: return fix_broken(std::move(d), cfg_.broken);
      case Stage::Quality: return quality_filter(std::move(d), *quality_);
      case Stage::Toxicity: return toxicity_filter(std::move(d), *toxicity_);
      case Stage::LineDedup: return dedup_lines(std::move(d));
      case Stage::FinalRefine: {
        FinalRefineResult r = final_refine_text(d.text, cfg_.final_refine);
        for (const auto& [k, n] : r.redactions) pii[k] += n;
        if (r.text == d.text) return {std::move(d), Verdict::kept(), std::nullopt};
        std::size_t total = 0;
        for (const auto& [_, n] : r.redactions) total += n;
        d.set_text(std::move(r.text));
        return {std::move(d), Verdict::modified("redactions=" + std::to_string(total)), std::nullopt};
      }
      default:
        fail(ErrorCode::ConfigInvalid, "stage '" + std::string(to_string(s)) + "' cannot run here");
    }
  }

  void tag(Document& d) const {
    if (d.tags.language == Language::Unknown) d.tags.language = detect_language(d.text).language;
    if (d.tags.mode == Mode::Unknown || d.tags.tone == Tone::Unknown) {
      const StyleTags st = tag_style(d.text);
      if (d.tags.mode == Mode::Unknown) d.tags.mode = st.mode;
      if (d.tags.tone == Tone::Unknown) d.tags.tone = st.tone;
    }
    if (domain_ && !d.tags.domain) {
      const DomainPrediction p = classify_domain(*domain_, d.text, cfg_.subdomains);
      d.tags.domain = p.domain;
      if (!d.tags.subdomain) d.tags.subdomain = p.subdomain;
    }
  }

  PipelineConfig cfg_;
  std::shared_ptr<const NgramModel> lm_;
  std::optional<PerplexityBand> band_;
  std::shared_ptr<const QualityEnsemble> quality_;
  std::shared_ptr<const ToxicityTaxonomy> toxicity_;
  std::shared_ptr<const LinearTextModel> domain_;
  YieldReport last_report_;
};

/// Runs synthetic documents through the full filter route, treating the
/// existing kept corpus as already seen by dedup. Returns the survivors.
inline std::vector<Document> refilter(std::vector<Document> synthetic, const Pipeline& pipeline,
                                      std::span<const Document> prior_kept = {}) {
  for (const auto& d : synthetic)
    if (!d.tags.source || d.tags.source->kind != SourceKind::Synthetic)
      fail(ErrorCode::InvalidArgument, "refilter expects synthetic documents, got '" + d.id + "'");
  std::vector<Document> all = pipeline.process(std::move(synthetic), prior_kept);
  std::vector<Document> kept;
  for (auto& d : all)
    if (!d.rejected()) kept.push_back(std::move(d));
  return kept;
}

}  // namespace kcurate
