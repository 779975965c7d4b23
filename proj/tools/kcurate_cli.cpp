// kcurate command-line front end.
//
// Exit codes: 0 ok, 1 usage, 2 configuration, 3 data.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "kcurate/kcurate.hpp"

namespace {

using namespace kcurate;

constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::ConfigInvalid:
    case ErrorCode::DuplicateName:
    case ErrorCode::UnboundVariable:
    case ErrorCode::FeatureSpecMismatch:
      return kExitConfig;
    case ErrorCode::InvalidArgument: return kExitUsage;
    default: return kExitData;
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigInvalid, "cannot open '" + path + "'");
  const json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::ConfigInvalid, "'" + path + "' is not valid JSON");
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  LineWriter w(path);
  if (!text.empty()) w.write_line(text.back() == '\n' ? text.substr(0, text.size() - 1) : text);
  w.close();
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!detail::trim(item).empty()) out.push_back(detail::trim(item));
  return out;
}

std::unique_ptr<Tokenizer> make_tokenizer(const json& j) {
  const std::string kind = j.value("kind", std::string("whitespace"));
  if (kind == "whitespace") return std::make_unique<WhitespaceTokenizer>();
  if (kind == "char") return std::make_unique<CharTokenizer>();
  if (kind == "http") return std::make_unique<HttpTokenizer>(HttpEndpointConfig::from_json(j, "KCURATE_TOKENIZER_TOKEN"));
  fail(ErrorCode::ConfigInvalid, "unknown tokenizer kind '" + kind + "'");
}

/// Offline generator: the topic is the first line, every paragraph is
/// relevant, nothing is split; rewrites echo their content.
std::unique_ptr<Generator> passthrough_generator() {
  return std::make_unique<FunctionGenerator>(
      [](const GeneratorRequest& req) {
        if (req.template_id == "topic_analysis") {
          const std::string& doc = req.variables.at("document");
          const std::size_t n = std::stoul(req.variables.at("paragraph_count"));
          std::string first = doc.substr(0, doc.find('\n'));
          if (const auto close = first.find("] "); close != std::string::npos) first = first.substr(close + 2);
          json rel = json::array();
          for (std::size_t i = 0; i < n; ++i) rel.push_back(i);
          std::u32string topic = utf8::decode(first);
          if (topic.size() > 80) topic.resize(80);
          const json reply{{"central_topic", utf8::encode(topic)}, {"relevant_paragraphs", rel}, {"split_points", json::array()}};
          return "```json\n" + reply.dump() + "\n```";
        }
        auto it = req.variables.find("content");
        return it == req.variables.end() ? req.prompt : it->second;
      },
      "passthrough");
}

std::unique_ptr<Generator> make_generator(const json& j) {
  const std::string kind = j.value("kind", std::string("passthrough"));
  if (kind == "passthrough") return passthrough_generator();
  if (kind == "echo") return std::make_unique<EchoGenerator>();
  if (kind == "http") return std::make_unique<HttpGenerator>(HttpEndpointConfig::from_json(j, "KCURATE_GENERATOR_TOKEN"));
  fail(ErrorCode::ConfigInvalid, "unknown generator kind '" + kind + "'");
}

// ---------------------------------------------------------------------------

struct RunArgs {
  std::string config, input, output, stages, rejected, manifest;
  unsigned workers = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool dry_run = false;
};

int cmd_run(const RunArgs& a) {
  PipelineConfig cfg = PipelineConfig::load(a.config);
  if (a.dry_run) {
    // Validate stage selection without loading models or touching files.
    Route r = cfg.route;
    if (!a.stages.empty()) r.enabled = Route::parse_stage_list(split_csv(a.stages));
    json stages = json::array();
    for (Stage s : r.enabled) stages.push_back(std::string(to_string(s)));
    std::cout << json{{"config_sha256", cfg.hash()}, {"seed", a.seed_set ? a.seed : cfg.seed}, {"stages", stages},
                      {"web_sources", r.web_sources}}
                     .dump(2)
              << "\n";
    return 0;
  }
  if (a.input.empty() || a.output.empty()) fail(ErrorCode::InvalidArgument, "run needs --input and --output");
  RunOptions opt;
  if (!a.stages.empty()) {
    cfg.route.enabled = Route::parse_stage_list(split_csv(a.stages));
    cfg.raw["stages"] = split_csv(a.stages);
  }
  if (a.seed_set) {
    cfg.seed = a.seed;
    cfg.raw["seed"] = a.seed;
  }
  if (a.workers) cfg.workers = a.workers;
  if (!a.rejected.empty()) opt.rejected_output = a.rejected;
  if (!a.manifest.empty()) opt.manifest_output = a.manifest;
  Pipeline p(std::move(cfg));
  p.run(a.input, a.output, opt);
  std::cout << to_csv(p.last_report());
  return 0;
}

struct TrainArgs {
  std::string kind, input, output;
  int bits = 20, epochs = 10, order = 5;
  double floor = 0.01;
  std::uint64_t seed = 0;
};

int cmd_train(const TrainArgs& a) {
  if (a.kind == "classifier") {
    const auto data = ModelSource::read_labeled(a.input);
    FeatureSpec spec;
    spec.bits = a.bits;
    spec.seed = a.seed;
    TrainOptions opt;
    opt.epochs = a.epochs;
    opt.seed = a.seed;
    const LinearTextModel m = train_linear_model(data, spec, opt);
    save_model(a.output, m);
    std::cout << json{{"classes", m.classes()}, {"train_accuracy", accuracy(m, data)}}.dump() << "\n";
    return 0;
  }
  if (a.kind == "lm") {
    NgramConfig cfg;
    cfg.order = a.order;
    cfg.floor = a.floor;
    const NgramModel m = train_lm(read_corpus(a.input), cfg);
    save_lm(a.output, m);
    std::cout << json{{"order", m.order()}, {"vocab", m.vocab().size()}}.dump() << "\n";
    return 0;
  }
  fail(ErrorCode::InvalidArgument, "train kind must be 'classifier' or 'lm'");
}

struct StatsArgs {
  std::string input, axis = "source", output, format = "csv", tokenizer = "whitespace";
  bool yield = false;
  unsigned workers = 1;
};

int cmd_stats(const StatsArgs& a) {
  const auto corpus = read_corpus(a.input);
  if (a.yield) {
    const YieldReport r = yield_report(corpus);
    write_text(a.output, a.format == "json" ? to_json(r).dump(2) + "\n" : to_csv(r));
    return 0;
  }
  const auto tok = make_tokenizer(json{{"kind", a.tokenizer}});
  std::vector<Axis> axes;
  if (a.axis == "all") axes.assign(kAxes.begin(), kAxes.end());
  else axes.push_back(parse_axis(a.axis));
  std::string out;
  json series = json::array();
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const Distribution d = distribution(corpus, axes[i], *tok, a.workers);
    out += to_csv(d, i == 0);
    series.push_back(to_json(d));
  }
  write_text(a.output, a.format == "json" ? (axes.size() == 1 ? series[0] : series).dump(2) + "\n" : out);
  return 0;
}

struct CoresetArgs {
  std::string input, config, output, fill_csv;
  unsigned workers = 1;
};

int cmd_coreset(const CoresetArgs& a) {
  const json cj = a.config.empty() ? json::object() : read_json_file(a.config);
  const SubdomainRegistry subs =
      cj.contains("subdomains") ? SubdomainRegistry::from_json(cj["subdomains"]) : SubdomainRegistry::defaults();
  const SkillRegistry skills = cj.contains("skills") ? SkillRegistry::from_json(cj["skills"]) : SkillRegistry::defaults();
  std::vector<CoreSetCandidate> pool;
  LineReader r(a.input);
  while (auto line = r.next()) {
    if (detail::is_blank(*line)) continue;
    const json j = json::parse(*line, nullptr, false);
    if (j.is_discarded() || !j.contains("id") || !j.contains("text"))
      fail(ErrorCode::FormatError, "candidate lines need id and text");
    CoreSetCandidate c{j["id"].get<std::string>(), j["text"].get<std::string>(), std::nullopt, std::nullopt};
    if (j.contains("subdomain")) c.subdomain = j["subdomain"].get<std::string>();
    if (j.contains("skill")) c.skill = j["skill"].get<std::string>();
    pool.push_back(std::move(c));
  }
  CoreSetConfig cfg = CoreSetConfig::full(subs, skills, cj.value("target_size", pool.size()));
  cfg.sim_threshold = cj.value("sim_threshold", cfg.sim_threshold);
  if (cj.contains("capacity")) cfg.capacity = cj["capacity"].get<std::size_t>();
  if (cj.contains("max_accepted")) cfg.max_accepted = cj["max_accepted"].get<std::size_t>();
  const auto tagged = assign_metadata(pool, {}, {}, {}, a.workers);
  const CoreSetResult res = build_core_set(tagged, cfg);
  write_text(a.output, to_json(res, cfg.sim_threshold).dump(2) + "\n");
  if (!a.fill_csv.empty()) write_text(a.fill_csv, fill_ratio_csv(res, cfg));
  return 0;
}

struct LongctxArgs {
  std::string input, config, output, qa;
  unsigned workers = 1;
  bool dry_run = false;
};

int cmd_longctx(const LongctxArgs& a) {
  const json cj = a.config.empty() ? json::object() : read_json_file(a.config);
  BucketPlan plan;
  plan.unit = cj.value("unit", plan.unit);
  plan.min_units = cj.value("min_units", plan.min_units);
  plan.max_units = cj.value("max_units", plan.max_units);
  plan.quota = cj.value("quota", plan.quota);
  if (cj.contains("languages")) {
    plan.languages.clear();
    for (const auto& l : cj["languages"]) plan.languages.push_back(parse_language(l.get<std::string>()));
  }
  plan.check();
  const std::size_t window = cj.value("window", std::size_t{400});
  if (a.dry_run) {
    json j = plan.to_json();
    j["window"] = window;
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  if (a.input.empty() || a.output.empty()) fail(ErrorCode::InvalidArgument, "longctx needs --input and --output");
  const auto tok = make_tokenizer(cj.value("tokenizer", json::object()));
  const auto corpus = read_corpus(a.input);
  const BucketizeResult res = bucketize(corpus, plan, *tok, a.workers);

  fs::create_directories(a.output);
  std::map<std::string, std::string> contexts;
  {
    LineWriter buckets((fs::path(a.output) / "buckets.jsonl").string());
    LineWriter minis((fs::path(a.output) / "mini_contexts.jsonl").string());
    for (const auto& [len, docs] : res.buckets)
      for (const auto& d : docs) {
        buckets.write_line(json{{"id", d.id}, {"bucket", len}, {"language", to_string(d.language)}, {"text", d.text}}.dump());
        Document parent = Document::make(d.id, d.text, "");
        for (const auto& mc : extract_mini_context_texts(parent, *tok, window)) {
          const std::string ref = d.id + "@" + std::to_string(mc.context.start_token);
          contexts[ref] = mc.text;
          minis.write_line(json{{"ref", ref}, {"parent_id", d.id}, {"bucket", len}, {"anchors", mc.context.anchors},
                                {"start_token", mc.context.start_token}, {"text", mc.text}}
                               .dump());
        }
      }
    buckets.close();
    minis.close();
  }
  json summary{{"plan", plan.to_json()}, {"skipped", res.skipped.size()}};
  json counts = json::object();
  for (const auto& [len, docs] : res.buckets) counts[std::to_string(len)] = docs.size();
  summary["buckets"] = counts;

  if (!a.qa.empty()) {
    std::vector<QaCandidate> cands;
    LineReader r(a.qa);
    while (auto line = r.next()) {
      if (detail::is_blank(*line)) continue;
      const json j = json::parse(*line);
      cands.push_back({j.at("context_ref").get<std::string>(), j.at("question").get<std::string>(),
                       j.at("answer").get<std::string>()});
    }
    std::unique_ptr<Judge> judge;
    if (cj.contains("judge")) judge = std::make_unique<HttpJudge>(HttpEndpointConfig::from_json(cj["judge"], "KCURATE_JUDGE_TOKEN"));
    else judge = std::make_unique<SubstringJudge>(contexts);
    const QaGateResult g = gate_qa(cands, *judge, a.workers);
    LineWriter w((fs::path(a.output) / "qa_retained.jsonl").string());
    for (const auto& c : g.retained)
      w.write_line(json{{"context_ref", c.context_ref}, {"question", c.question}, {"answer", c.answer}}.dump());
    w.close();
    summary["qa"] = {{"candidates", cands.size()}, {"retained", g.retained.size()}, {"histogram", g.histogram}};
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

struct SynthArgs {
  std::string input, config, output, pipeline, kept;
  unsigned workers = 1;
  std::uint64_t seed = 0;
};

int cmd_synth(const SynthArgs& a) {
  const json cj = a.config.empty() ? json::object() : read_json_file(a.config);
  const fs::path base = a.config.empty() ? fs::current_path() : fs::absolute(a.config).parent_path();
  TemplateStore templates = TemplateStore::defaults();
  if (cj.contains("templates")) {
    fs::path dir = cj["templates"].get<std::string>();
    if (dir.is_relative()) dir = base / dir;
    TemplateStore loaded = TemplateStore::load_directory(dir.string());
    for (const char* id : {"topic_analysis", "rewrite"})
      if (!loaded.has(id)) loaded.add(id, TemplateStore::defaults().body(id));
    templates = std::move(loaded);
  }
  const auto gen = make_generator(cj.value("generator", json::object()));
  SynthOptions opt;
  opt.retries = cj.value("retries", opt.retries);
  opt.seed = a.seed;

  std::vector<Document> produced;
  std::size_t failed = 0;
  for (const auto& doc : read_corpus(a.input)) {
    if (!doc.rejected()) continue;
    try {
      const TopicAnalysis an = analyze_topic(doc, *gen, templates, opt);
      for (auto& part : split_document(doc, an)) {
        Document syn = rewrite(part.doc, part.analysis, *gen, templates, {}, a.seed);
        syn.record(Stage::Rewrite, Verdict::modified("from:" + doc.id));
        produced.push_back(std::move(syn));
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AnalysisFailed && e.code() != ErrorCode::GenerationFailed &&
          e.code() != ErrorCode::AlreadySynthetic)
        throw;
      log().warn("synth: {}", e.what());
      ++failed;
    }
  }
  std::size_t n_produced = produced.size();
  if (!a.pipeline.empty()) {
    PipelineConfig pc = PipelineConfig::load(a.pipeline);
    if (a.workers) pc.workers = a.workers;
    Pipeline p(std::move(pc));
    const std::vector<Document> prior = a.kept.empty() ? std::vector<Document>{} : read_corpus(a.kept);
    produced = refilter(std::move(produced), p, prior);
  }
  write_corpus(a.output, produced);
  std::cout << json{{"produced", n_produced}, {"failed", failed}, {"accepted", produced.size()}}.dump() << "\n";
  return 0;
}

struct FeedbackArgs {
  std::string input, targets, axis = "domain", output, tokenizer = "whitespace";
  std::optional<std::size_t> budget;  // overrides the targets file
};

int cmd_feedback(const FeedbackArgs& a) {
  const json tj = read_json_file(a.targets);
  const auto corpus = read_corpus(a.input);
  const auto tok = make_tokenizer(json{{"kind", a.tokenizer}});
  const Distribution d = distribution(corpus, parse_axis(a.axis), *tok);
  std::map<std::string, double> shares, targets;
  std::map<std::string, std::string> tmpl;
  for (const auto& r : d.rows) shares[r.label] = r.token_share;
  for (auto& [k, v] : tj.at("targets").items()) targets[k] = v.get<double>();
  if (tj.contains("templates"))
    for (auto& [k, v] : tj["templates"].items()) tmpl[k] = v.get<std::string>();
  json out = json::array();
  for (const auto& o : balance_feedback(shares, targets, tmpl, a.budget ? *a.budget : tj.value("budget", std::size_t{1000}))) out.push_back(to_json(o));
  write_text(a.output, out.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kcurate: corpus curation pipeline"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error");

  RunArgs run;
  auto* c_run = app.add_subcommand("run", "run the filtering pipeline");
  c_run->add_option("--config", run.config, "pipeline config (JSON)")->required();
  c_run->add_option("--input", run.input, "input corpus (.jsonl or .jsonl.gz)");
  c_run->add_option("--output", run.output, "kept documents");
  c_run->add_option("--rejected", run.rejected, "rejected documents (default <output>.rejected.jsonl)");
  c_run->add_option("--manifest", run.manifest, "manifest path (default <output>.manifest.json)");
  c_run->add_option("--workers", run.workers, "worker threads");
  c_run->add_option("--seed", run.seed, "override the config seed")->each([&](const std::string&) { run.seed_set = true; });
  c_run->add_option("--stages", run.stages, "comma-separated subset of stages, in pipeline order");
  c_run->add_flag("--dry-run", run.dry_run, "print the resolved stage list and exit");

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "train a classifier or character LM");
  c_train->add_option("kind", train.kind, "classifier | lm")->required()->check(CLI::IsMember({"classifier", "lm"}));
  c_train->add_option("--input", train.input, "labeled JSONL (classifier) or corpus (lm)")->required();
  c_train->add_option("--output", train.output, "model file")->required();
  c_train->add_option("--bits", train.bits, "hashed feature bits");
  c_train->add_option("--epochs", train.epochs, "SGD epochs");
  c_train->add_option("--order", train.order, "n-gram order");
  c_train->add_option("--floor", train.floor, "uniform interpolation weight");
  c_train->add_option("--seed", train.seed, "training seed");

  StatsArgs stats;
  auto* c_stats = app.add_subcommand("stats", "distribution and yield reports");
  c_stats->add_option("--input", stats.input, "corpus")->required();
  c_stats->add_option("--axis", stats.axis, "axis name or 'all'");
  c_stats->add_option("--output", stats.output, "output file (default stdout)");
  c_stats->add_option("--format", stats.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  c_stats->add_option("--tokenizer", stats.tokenizer, "whitespace | char")->check(CLI::IsMember({"whitespace", "char"}));
  c_stats->add_flag("--yield", stats.yield, "per-stage yield from audit trails");
  c_stats->add_option("--workers", stats.workers, "worker threads");

  CoresetArgs coreset;
  auto* c_core = app.add_subcommand("coreset", "build a domain x skill core set");
  c_core->add_option("--input", coreset.input, "candidates JSONL {id, text, subdomain, skill}")->required();
  c_core->add_option("--config", coreset.config, "core-set config (JSON)");
  c_core->add_option("--output", coreset.output, "result JSON (default stdout)");
  c_core->add_option("--fill-csv", coreset.fill_csv, "fill-ratio heatmap CSV");
  c_core->add_option("--workers", coreset.workers, "worker threads");

  LongctxArgs longctx;
  auto* c_long = app.add_subcommand("longctx", "length buckets, mini-contexts and the QA gate");
  c_long->add_option("--input", longctx.input, "corpus");
  c_long->add_option("--config", longctx.config, "bucket plan config (JSON)");
  c_long->add_option("--output", longctx.output, "output directory");
  c_long->add_option("--qa", longctx.qa, "QA candidates JSONL to gate");
  c_long->add_option("--workers", longctx.workers, "worker threads");
  c_long->add_flag("--dry-run", longctx.dry_run, "print the bucket plan and exit");

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "rewrite rejected documents");
  c_synth->require_subcommand(0, 1);
  c_synth->add_option("--input", synth.input, "rejected corpus");
  c_synth->add_option("--config", synth.config, "synth config (JSON)");
  c_synth->add_option("--output", synth.output, "synthetic documents");
  c_synth->add_option("--pipeline", synth.pipeline, "pipeline config for re-filtering");
  c_synth->add_option("--kept", synth.kept, "existing kept corpus seen by dedup");
  c_synth->add_option("--workers", synth.workers, "worker threads");
  c_synth->add_option("--seed", synth.seed, "generation seed");

  FeedbackArgs fb;
  auto* c_fb = c_synth->add_subcommand("feedback", "work orders for under-represented labels");
  c_fb->add_option("--input", fb.input, "current corpus")->required();
  c_fb->add_option("--targets", fb.targets, "JSON {targets: {label: share}, templates, budget}")->required();
  c_fb->add_option("--axis", fb.axis, "axis to balance");
  c_fb->add_option("--budget", fb.budget, "documents to request");
  c_fb->add_option("--output", fb.output, "work orders JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitUsage;
  }

  log().set_level(spdlog::level::from_str(log_level));
  try {
    if (*c_run) return cmd_run(run);
    if (*c_train) return cmd_train(train);
    if (*c_stats) return cmd_stats(stats);
    if (*c_core) return cmd_coreset(coreset);
    if (*c_long) return cmd_longctx(longctx);
    if (*c_fb) return cmd_feedback(fb);
    if (*c_synth) {
      if (synth.input.empty() || synth.output.empty()) fail(ErrorCode::InvalidArgument, "synth needs --input and --output");
      return cmd_synth(synth);
    }
  } catch (const Error& e) {
    log().error("{}", e.what());
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    log().error("malformed JSON: {}", e.what());
    return kExitData;
  }
  return kExitUsage;
}
