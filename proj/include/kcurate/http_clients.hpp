#pragma once

// HTTP adapters for the external generator, judge and tokenizer. Each posts
// one JSON object per call and retries transport failures and 5xx replies.
//
//   generator: {"model","template_id","prompt","seed"} -> {"text"}
//   judge:     {"model","context_ref","question","answer"} -> {"score"}
//   tokenizer: {"model","text"} -> {"ids":[...], "offsets":[[b,e],...]}

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>

#include "kcurate/error.hpp"
#include "kcurate/log.hpp"
#include "kcurate/longctx.hpp"
#include "kcurate/synth.hpp"
#include "kcurate/tokenizer.hpp"

namespace kcurate {

struct HttpEndpointConfig {
  std::string endpoint;  // http://host:port/path
  std::string model;
  std::string token_env;  // bearer token variable; unset means no header
  int timeout_seconds = 60;
  int retries = 2;

  static HttpEndpointConfig from_json(const json& j, std::string default_token_env) {
    HttpEndpointConfig c;
    c.endpoint = j.at("endpoint").get<std::string>();
    c.model = j.value("model", std::string{});
    c.token_env = j.value("token_env", std::move(default_token_env));
    c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
    c.retries = j.value("retries", c.retries);
    if (c.timeout_seconds <= 0 || c.retries < 0) fail(ErrorCode::ConfigInvalid, "bad timeout or retry count");
    return c;
  }
};

namespace detail {

class JsonPoster {
 public:
  explicit JsonPoster(HttpEndpointConfig cfg) : cfg_(std::move(cfg)) {
    const auto scheme = cfg_.endpoint.find("://");
    if (scheme == std::string::npos) fail(ErrorCode::ConfigInvalid, "endpoint '" + cfg_.endpoint + "' lacks a scheme");
    const auto slash = cfg_.endpoint.find('/', scheme + 3);
    host_ = cfg_.endpoint.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : cfg_.endpoint.substr(slash);
    if (!cfg_.token_env.empty())
      if (const char* t = std::getenv(cfg_.token_env.c_str())) token_ = t;
  }

  json post(json body) const {
    if (!cfg_.model.empty()) body["model"] = cfg_.model;
    const std::string payload = body.dump();
    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
      if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(100 << std::min(attempt, 6)));
      httplib::Client cli(host_);
      cli.set_connection_timeout(cfg_.timeout_seconds);
      cli.set_read_timeout(cfg_.timeout_seconds);
      if (!token_.empty()) cli.set_bearer_token_auth(token_);
      auto res = cli.Post(path_, payload, "application/json");
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200)
        fail(ErrorCode::GenerationFailed, cfg_.endpoint + " answered HTTP " + std::to_string(res->status));
      json out = json::parse(res->body, nullptr, false);
      if (out.is_discarded()) fail(ErrorCode::GenerationFailed, cfg_.endpoint + " returned non-JSON");
      return out;
    }
    fail(ErrorCode::GenerationFailed, cfg_.endpoint + " unreachable: " + last_error);
  }

  const HttpEndpointConfig& config() const { return cfg_; }

 private:
  HttpEndpointConfig cfg_;
  std::string host_;
  std::string path_;
  std::string token_;
};

}  // namespace detail

class HttpGenerator : public Generator {
 public:
  explicit HttpGenerator(HttpEndpointConfig cfg) : poster_(std::move(cfg)) {}

  GeneratorResponse generate(const GeneratorRequest& req) override {
    const json r = poster_.post({{"template_id", req.template_id}, {"prompt", req.prompt}, {"seed", req.seed}});
    if (!r.contains("text") || !r["text"].is_string())
      fail(ErrorCode::GenerationFailed, "generator reply has no text");
    const std::string id = poster_.config().model.empty() ? poster_.config().endpoint : poster_.config().model;
    return {r["text"].get<std::string>(), id};
  }

 private:
  detail::JsonPoster poster_;
};

class HttpJudge : public Judge {
 public:
  explicit HttpJudge(HttpEndpointConfig cfg) : poster_(std::move(cfg)) {}

  int score(const QaCandidate& qa) const override {
    const json r = poster_.post({{"context_ref", qa.context_ref}, {"question", qa.question}, {"answer", qa.answer}});
    if (!r.contains("score") || !r["score"].is_number_integer())
      fail(ErrorCode::JudgeOutOfRange, "judge reply has no integer score");
    return r["score"].get<int>();
  }

 private:
  detail::JsonPoster poster_;
};

class HttpTokenizer : public Tokenizer {
 public:
  explicit HttpTokenizer(HttpEndpointConfig cfg) : poster_(std::move(cfg)) {}

  std::vector<TokenSpan> tokenize(std::string_view text) const override {
    const json r = poster_.post({{"text", std::string(text)}});
    if (!r.contains("ids") || !r.contains("offsets") || r["ids"].size() != r["offsets"].size())
      fail(ErrorCode::FormatError, "tokenizer reply needs ids and offsets of equal length");
    std::vector<TokenSpan> out;
    out.reserve(r["ids"].size());
    std::size_t prev_end = 0;
    for (std::size_t i = 0; i < r["ids"].size(); ++i) {
      const auto b = r["offsets"][i].at(0).get<std::size_t>();
      const auto e = r["offsets"][i].at(1).get<std::size_t>();
      if (b > e || e > text.size() || b < prev_end) fail(ErrorCode::FormatError, "tokenizer offsets out of order");
      prev_end = e;
      out.push_back({r["ids"][i].get<std::uint32_t>(), b, e});
    }
    return out;
  }

  std::string name() const override { return "http:" + poster_.config().model; }

 private:
  detail::JsonPoster poster_;
};

}  // namespace kcurate
