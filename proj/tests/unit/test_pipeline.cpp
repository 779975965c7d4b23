#include <gtest/gtest.h>
#include <sys/wait.h>

#include <atomic>
#include <thread>

#include "kcurate/corpus_io.hpp"
#include "kcurate/http_clients.hpp"
#include "kcurate/pipeline.hpp"
#include "support.hpp"

using namespace kcurate;
using kctest::error_of;

namespace {

PipelineConfig config_of(const std::string& text) {
  return PipelineConfig::from_json(json::parse(text), kctest::data_dir());
}

// exit status of a shell command run against the CLI binary
int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + KCURATE_CLI_PATH + "\" --log-level error " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

int cli_capture(const std::string& args, const std::string& out_file) {
  const std::string cmd =
      std::string("\"") + KCURATE_CLI_PATH + "\" --log-level error " + args + " >\"" + out_file + "\" 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

/// Local JSON endpoint; `handler` sees the request body and sets the reply.
class MockServer {
 public:
  explicit MockServer(std::function<void(const json&, httplib::Response&)> handler) {
    server_.Post("/v1", [this, handler](const httplib::Request& req, httplib::Response& res) {
      ++hits;
      handler(json::parse(req.body), res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockServer() {
    server_.stop();
    thread_.join();
  }
  HttpEndpointConfig endpoint(int retries = 2) const {
    HttpEndpointConfig c;
    c.endpoint = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    c.model = "mock";
    c.token_env = "";
    c.timeout_seconds = 5;
    c.retries = retries;
    return c;
  }
  std::atomic<int> hits{0};

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST(PipelineConfig, ErrorsAreConfigInvalid) {
  EXPECT_EQ(error_of([] { config_of(R"({"stages": ["heuristic", "dedup"]})"); }), ErrorCode::ConfigInvalid);
  EXPECT_EQ(error_of([] { config_of(R"({"stages": ["rewrite"]})"); }), ErrorCode::ConfigInvalid);
  EXPECT_EQ(error_of([] { config_of(R"({"dedup": {"tau": 1.5}})"); }), ErrorCode::ConfigInvalid);
  EXPECT_EQ(error_of([] { config_of(R"({"batch_size": 0})"); }), ErrorCode::ConfigInvalid);
  EXPECT_EQ(error_of([] { config_of(R"({"perplexity": {"model": "no_such_model.kcng"}})"); }),
            ErrorCode::ConfigInvalid);
  EXPECT_EQ(error_of([] { config_of(R"({"perplexity": {"band": {"low": 5, "high": 2}}})"); }),
            ErrorCode::ConfigInvalid);
  EXPECT_EQ(error_of([] { config_of(R"({"seed": "seven"})"); }), ErrorCode::ConfigInvalid);
  // stage enabled without its model
  EXPECT_EQ(error_of([] { Pipeline p(config_of(R"({"stages": ["perplexity"]})")); }), ErrorCode::ConfigInvalid);
  EXPECT_EQ(error_of([] { Pipeline p(config_of(R"({"stages": ["quality"]})")); }), ErrorCode::ConfigInvalid);
  EXPECT_EQ(error_of([] { Pipeline p(config_of(R"({"stages": ["toxicity"]})")); }), ErrorCode::ConfigInvalid);
}

TEST(PipelineConfig, EnvironmentExpansion) {
  ::setenv("KC_TEST_TAU", "0.9", 1);
  EXPECT_EQ(expand_env(json::parse(R"({"a": "${KC_TEST_TAU}"})"))["a"], "0.9");
  EXPECT_EQ(error_of([] { expand_env(json::parse(R"({"a": "${KC_TEST_SURELY_UNSET}"})")); }),
            ErrorCode::ConfigInvalid);
}

TEST(PipelineConfig, HashIgnoresWorkers) {
  EXPECT_EQ(config_of(R"({"workers": 1, "seed": 3})").hash(), config_of(R"({"workers": 8, "seed": 3})").hash());
  EXPECT_NE(config_of(R"({"seed": 3})").hash(), config_of(R"({"seed": 4})").hash());
}

TEST(Pipeline, ProcessRoutesWebAndCuratedSources) {
  const Pipeline p(config_of(R"({"stages": ["dedup", "heuristic", "line_dedup", "final_refine"]})"));
  std::vector<Document> docs{
      Document::make("w1", "오늘은 날씨가 맑았다. 연락처 010-1234-5678.", "cc"),
      Document::make("w2", "#가 #나 #다 #라 #마 #바 #사", "cc"),
      Document::make("n1", "[속보] 금리 동결\n한국은행이 금리를 동결했다.", "news"),
      Document::make("w3", "오늘은 날씨가 맑았다. 연락처 010-1234-5678.", "web"),
  };
  const auto out = p.process(docs);
  ASSERT_EQ(out.size(), 4u);
  EXPECT_FALSE(out[0].rejected());
  EXPECT_NE(out[0].text.find("⟨PHONE⟩"), std::string::npos);
  EXPECT_TRUE(out[1].rejected());
  EXPECT_EQ(out[1].audit.back().stage, Stage::Heuristic);
  EXPECT_EQ(out[2].audit.front().stage, Stage::Refine);
  EXPECT_EQ(out[2].text, "금리 동결\n한국은행이 금리를 동결했다.");
  EXPECT_TRUE(out[3].rejected());
  EXPECT_EQ(out[3].audit.back().verdict.detail, "duplicate_of:w1");
  for (const auto& d : out) EXPECT_FALSE(error_of([&] { check_audit(d, p.route()); })) << d.id;
}

TEST(Pipeline, DocumentsWithStageEventsAreRefused) {
  const Pipeline p(config_of(R"({"stages": ["dedup"]})"));
  Document d = Document::make("x", "본문", "cc");
  d.record(Stage::Dedup, Verdict::kept());
  EXPECT_EQ(error_of([&] { p.process({d}); }), ErrorCode::InvalidDocument);
  EXPECT_EQ(error_of([&] { p.process({Document::make("a", "가", "cc"), Document::make("a", "나", "cc")}); }),
            ErrorCode::DuplicateId);
}

TEST(Pipeline, RunWritesManifestAndIsWorkerInvariant) {
  kctest::TempDir dir;
  auto cfg = PipelineConfig::load(kctest::data("pipeline.json"));
  std::string outputs[2], manifests[2];
  const unsigned workers[2] = {1, 4};
  for (int k = 0; k < 2; ++k) {
    Pipeline p(cfg);
    const std::string out = dir.file("out" + std::to_string(k) + ".jsonl");
    RunOptions opt;
    opt.workers = workers[k];
    opt.manifest_output = dir.file("m" + std::to_string(k) + ".json");
    const json m = p.run(kctest::data("cc_fixture.jsonl"), out, opt);
    EXPECT_EQ(m["stages"], json::parse(R"(["dedup","heuristic","perplexity","broken_fix","quality","toxicity","line_dedup","final_refine"])"));
    const auto& docs = m["documents"];
    EXPECT_EQ(docs["in"].get<std::size_t>(), docs["kept"].get<std::size_t>() + docs["rejected"].get<std::size_t>());
    outputs[k] = kctest::slurp(out) + kctest::slurp(dir.file("out" + std::to_string(k) + ".rejected.jsonl"));
    manifests[k] = kctest::slurp(*opt.manifest_output);
    // the report is rebuilt from the written files' audits
    auto written = read_corpus(out);
    for (auto& d : read_corpus(dir.file("out" + std::to_string(k) + ".rejected.jsonl"))) written.push_back(d);
    EXPECT_EQ(to_json(yield_report(written, p.route())), m["report"]);
  }
  EXPECT_EQ(outputs[0], outputs[1]);
  // the manifest records content hashes, not paths
  EXPECT_EQ(manifests[0], manifests[1]);
}

TEST(Pipeline, RefilterRejectsOrganicDocuments) {
  const Pipeline p(config_of(R"({"stages": ["dedup", "final_refine"]})"));
  Document d = Document::make("o", "본문", "cc");
  d.tags.source = Source::organic(Subsource::Web);
  EXPECT_EQ(error_of([&] { refilter({d}, p); }), ErrorCode::InvalidArgument);
}

TEST(HttpClients, GeneratorRetriesServerErrors) {
  int calls = 0;
  MockServer srv([&](const json& body, httplib::Response& res) {
    if (++calls == 1) {
      res.status = 503;
      return;
    }
    EXPECT_EQ(body["model"], "mock");
    EXPECT_EQ(body["template_id"], "rewrite");
    res.set_content(json{{"text", "생성: " + body["prompt"].get<std::string>()}}.dump(), "application/json");
  });
  HttpGenerator gen(srv.endpoint());
  const auto r = gen.generate({"rewrite", {}, 3, "프롬프트"});
  EXPECT_EQ(r.text, "생성: 프롬프트");
  EXPECT_EQ(r.generator_id, "mock");
  EXPECT_EQ(srv.hits.load(), 2);
}

TEST(HttpClients, PersistentFailuresAndClientErrors) {
  MockServer down([](const json&, httplib::Response& res) { res.status = 500; });
  HttpGenerator gen(down.endpoint(1));
  EXPECT_EQ(error_of([&] { gen.generate({"rewrite", {}, 0, "p"}); }), ErrorCode::GenerationFailed);
  EXPECT_EQ(down.hits.load(), 2);

  MockServer bad([](const json&, httplib::Response& res) { res.status = 400; });
  HttpGenerator g2(bad.endpoint(3));
  EXPECT_EQ(error_of([&] { g2.generate({"rewrite", {}, 0, "p"}); }), ErrorCode::GenerationFailed);
  EXPECT_EQ(bad.hits.load(), 1);
}

TEST(HttpClients, JudgeAndTokenizer) {
  MockServer judge([](const json& body, httplib::Response& res) {
    const int score = body["answer"] == "정답" ? 10 : 3;
    res.set_content(json{{"score", score}}.dump(), "application/json");
  });
  HttpJudge j(judge.endpoint());
  EXPECT_EQ(j.score({"d@0", "질문", "정답"}), 10);
  EXPECT_EQ(j.score({"d@0", "질문", "오답"}), 3);

  MockServer tok([](const json& body, httplib::Response& res) {
    // one token per space-separated word
    const std::string t = body["text"];
    json ids = json::array(), offs = json::array();
    std::size_t b = 0;
    while (b < t.size()) {
      std::size_t e = t.find(' ', b);
      if (e == std::string::npos) e = t.size();
      ids.push_back(ids.size());
      offs.push_back({b, e});
      b = e + 1;
    }
    res.set_content(json{{"ids", ids}, {"offsets", offs}}.dump(), "application/json");
  });
  HttpTokenizer t(tok.endpoint());
  const auto spans = t.tokenize("가나 다 라마바");
  ASSERT_EQ(spans.size(), 3u);
  EXPECT_EQ(spans[2].begin, std::string("가나 다 ").size());
  EXPECT_EQ(spans[2].end, std::string("가나 다 라마바").size());

  MockServer broken([](const json&, httplib::Response& res) {
    res.set_content(R"({"ids": [1, 2], "offsets": [[0, 3]]})", "application/json");
  });
  HttpTokenizer bt(broken.endpoint());
  EXPECT_EQ(error_of([&] { bt.tokenize("abc"); }), ErrorCode::FormatError);
}

TEST(HttpClients, EndpointConfigValidation) {
  EXPECT_EQ(error_of([] { HttpEndpointConfig::from_json(json{{"endpoint", "x"}, {"retries", -1}}, ""); }),
            ErrorCode::ConfigInvalid);
  HttpEndpointConfig c;
  c.endpoint = "localhost:80/x";
  EXPECT_EQ(error_of([&] { HttpGenerator g(c); }), ErrorCode::ConfigInvalid);
}

TEST(Cli, StatsSourceAxisMatchesReferenceCsv) {
  kctest::TempDir dir;
  ASSERT_EQ(cli("stats --input \"" + kctest::data("stats_fixture.jsonl") + "\" --axis source --output \"" +
                dir.file("s.csv") + "\""),
            0);
  EXPECT_EQ(kctest::slurp(dir.file("s.csv")), kctest::slurp(kctest::data("stats_fixture_source.csv")));
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli("frobnicate"), 1);
  EXPECT_EQ(cli(""), 1);
  EXPECT_EQ(cli("stats"), 1);
  kctest::TempDir dir;
  kctest::spit(dir.file("bad.json"), R"({"stages": ["toxicity", "dedup"]})");
  EXPECT_EQ(cli("run --config \"" + dir.file("bad.json") + "\" --dry-run"), 2);
}

TEST(Cli, LongctxDryRunWritesNothing) {
  kctest::TempDir dir;
  const std::string out = dir.file("plan.json");
  ASSERT_EQ(cli_capture("longctx --dry-run --output \"" + dir.file("long") + "\"", out), 0);
  const json plan = json::parse(kctest::slurp(out));
  EXPECT_EQ(plan["window"], 400);
  EXPECT_FALSE(fs::exists(dir.file("long")));
}

TEST(Cli, RunDryRunPrintsStages) {
  kctest::TempDir dir;
  const std::string out = dir.file("dry.json");
  ASSERT_EQ(cli_capture("run --config \"" + kctest::data("pipeline.json") + "\" --dry-run --stages dedup,final_refine", out),
            0);
  EXPECT_EQ(json::parse(kctest::slurp(out))["stages"], json::parse(R"(["dedup", "final_refine"])"));
}

TEST(Cli, RunOnSmallCorpus) {
  kctest::TempDir dir;
  write_corpus(dir.file("in.jsonl"), {Document::make("a", "첫 문서 본문입니다. 메일 a.b@c.kr", "cc"),
                                      Document::make("b", "[속보] 제목\n본문", "news")});
  kctest::spit(dir.file("cfg.json"), R"({"stages": ["dedup", "final_refine"]})");
  ASSERT_EQ(cli("run --config \"" + dir.file("cfg.json") + "\" --input \"" + dir.file("in.jsonl") + "\" --output \"" +
                dir.file("out.jsonl") + "\""),
            0);
  const auto kept = read_corpus(dir.file("out.jsonl"));
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_NE(kept[0].text.find("⟨EMAIL⟩"), std::string::npos);
  EXPECT_EQ(kept[1].text, "제목\n본문");
  EXPECT_TRUE(fs::exists(dir.file("out.jsonl.manifest.json")));
  EXPECT_EQ(cli("run --config \"" + dir.file("cfg.json") + "\" --input \"" + dir.file("missing.jsonl") + "\" --output \"" +
                dir.file("o2.jsonl") + "\""),
            3);
}

TEST(Cli, SynthPassthroughHandlesLongMultibyteTopics) {
  kctest::TempDir dir;
  std::string first;
  for (int i = 0; i < 70; ++i) first += "한";  // 210 bytes on one line
  Document d = Document::make("r", first + "\n\n둘째 문단입니다.", "cc");
  d.record(Stage::Heuristic, Verdict::rejected("hashtag_density"));
  write_corpus(dir.file("rej.jsonl"), {d});
  ASSERT_EQ(cli("synth --input \"" + dir.file("rej.jsonl") + "\" --output \"" + dir.file("syn.jsonl") + "\""), 0);
  const auto syn = read_corpus(dir.file("syn.jsonl"));
  ASSERT_EQ(syn.size(), 1u);
  EXPECT_EQ(syn[0].parent_id, std::optional<std::string>("r"));
  EXPECT_EQ(syn[0].tags.source->kind, SourceKind::Synthetic);
}

TEST(Cli, FeedbackBudgetFlagOverridesTargetsFile) {
  kctest::TempDir dir;
  kctest::spit(dir.file("t.json"), R"({"targets": {"Organic": 0.5, "Synthetic": 0.5}, "budget": 1000})");
  const std::string out = dir.file("orders.json");
  ASSERT_EQ(cli("synth feedback --axis source --input \"" + kctest::data("stats_fixture.jsonl") + "\" --targets \"" +
                dir.file("t.json") + "\" --budget 40 --output \"" + out + "\""),
            0);
  std::size_t total = 0;
  for (const auto& o : json::parse(kctest::slurp(out))) total += o["count"].get<std::size_t>();
  EXPECT_EQ(total, 40u);
  ASSERT_EQ(cli("synth feedback --axis source --input \"" + kctest::data("stats_fixture.jsonl") + "\" --targets \"" +
                dir.file("t.json") + "\" --output \"" + out + "\""),
            0);
  total = 0;
  for (const auto& o : json::parse(kctest::slurp(out))) total += o["count"].get<std::size_t>();
  EXPECT_EQ(total, 1000u);
}
