#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <set>

#include <json.hpp>

#include "core/digest.hpp"
#include "core/errors.hpp"
#include "genclient/backend.hpp"
#include "genclient/cache.hpp"
#include "genclient/client.hpp"
#include "genclient/generate.hpp"
#include "genclient/prompts.hpp"
#include "store/fs.hpp"
#include "store/records.hpp"
#include "http_server.hpp"
#include "support.hpp"

using namespace vp;
using nlohmann::json;
using vp::test::LocalServer;
using vp::test::TempDir;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kInvalidInput;
}

// Answers with scripted responses: a non-200 status, or a completion body.
struct ScriptedBackend final : TextBackend {
  std::vector<std::string> script;  // "" = empty completion, "!500" = retryable, "!400" = fatal
  std::atomic<int> calls{0};
  std::string complete(const CompletionRequest&) override {
    const auto i = static_cast<std::size_t>(calls++);
    const std::string s = script[std::min(i, script.size() - 1)];
    if (s == "!500") throw BackendError("HTTP 500", true, 500);
    if (s == "!400") throw BackendError("HTTP 400", false, 400);
    return s;
  }
  BackendKind kind() const override { return BackendKind::kMock; }
  std::string model_name() const override { return "scripted"; }
  bool accepts_video() const override { return false; }
};

std::unique_ptr<GenClient> scripted_client(std::shared_ptr<ScriptedBackend> b, int max_retries = 3,
                                           std::shared_ptr<DiskCache> cache = nullptr) {
  BackendConfig cfg;
  cfg.max_retries = max_retries;
  auto c = std::make_unique<GenClient>(std::move(b), cfg, std::move(cache));
  c->set_sleeper([](std::chrono::milliseconds) {});
  return c;
}

json chat_reply(const std::string& content) {
  return {{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}};
}

BackendConfig http_config(const std::string& url) {
  BackendConfig cfg;
  cfg.kind = BackendKind::kChatHttp;
  cfg.endpoint_url = url;
  cfg.model_name = "gpt-3.5-turbo";
  cfg.retry_base_delay_ms = 1;
  cfg.timeout_ms = 5000;
  return cfg;
}

}  // namespace

TEST_CASE("prompt templates render with their placeholders") {
  CHECK(render_prompt(TemplateId::kAttributes, {{"class-name", "hopscotch"}}) ==
        "What are the distinct visual characteristics to identify a hopscotch video action?");
  CHECK(render_prompt(TemplateId::kDescription, {{"class-name", "hopscotch"}}) ==
        "How hopscotch action is performed visually?");
  CHECK(render_prompt(TemplateId::kBasePrompt, {{"class-name", "Yo Yo"}}) == "a photo of a Yo Yo");
  CHECK(render_prompt(TemplateId::kContextPrompt, {{"class-name", "golf swing"}, {"parent", "playing sports"}}) ==
        "a photo of a playing sports i.e., golf swing");
  CHECK(render_prompt(TemplateId::kCaptionAugment, {{"input caption", "a man cooks"}}) ==
        "Given a caption: a man cooks, generate a visually similar captions.");
  CHECK(code_of([] { render_prompt(TemplateId::kAttributes, {}); }) == ErrorCode::kUnboundPlaceholder);
  CHECK(placeholders(prompt_template(TemplateId::kContextPrompt).text) ==
        std::vector<std::string>{"parent", "class-name"});
  for (auto id : all_templates()) CHECK(template_from_name(template_name(id)) == id);
}

TEST_CASE("mock backend is a pure function of its request") {
  MockBackend m;
  CompletionRequest r;
  r.template_id = TemplateId::kAttributes;
  r.bindings = {{"class-name", "archery"}};
  CHECK(m.complete(r) == m.complete(r));
  CHECK(m.complete(r) == "mock-attr-1:archery");
}

TEST_CASE("retryable failures are retried up to the attempt budget") {
  auto b = std::make_shared<ScriptedBackend>();
  b->script = {"!500", "!500", "ok"};
  auto c = scripted_client(b);
  CHECK(c->complete(TemplateId::kAttributes, {{"class-name", "x"}}) == "ok");
  CHECK(b->calls == 3);

  auto b2 = std::make_shared<ScriptedBackend>();
  b2->script = {"!500"};
  auto c2 = scripted_client(b2);
  CHECK(code_of([&] { c2->complete(TemplateId::kAttributes, {{"class-name", "x"}}); }) ==
        ErrorCode::kBackendUnavailable);
  CHECK(b2->calls == 3);
}

TEST_CASE("non-retryable failures stop immediately") {
  auto b = std::make_shared<ScriptedBackend>();
  b->script = {"!400", "ok"};
  auto c = scripted_client(b);
  CHECK(code_of([&] { c->complete(TemplateId::kAttributes, {{"class-name", "x"}}); }) ==
        ErrorCode::kBackendUnavailable);
  CHECK(b->calls == 1);
}

TEST_CASE("empty responses are retried, then reported as EmptyResponse") {
  auto b = std::make_shared<ScriptedBackend>();
  b->script = {"", "  \n"};
  auto c = scripted_client(b);
  CHECK(code_of([&] { c->complete(TemplateId::kAttributes, {{"class-name", "x"}}); }) == ErrorCode::kEmptyResponse);
  CHECK(b->calls == 3);
}

TEST_CASE("backoff delays grow geometrically within the jitter band") {
  auto b = std::make_shared<ScriptedBackend>();
  b->script = {"!500"};
  BackendConfig cfg;
  cfg.max_retries = 4;
  cfg.retry_base_delay_ms = 100;
  GenClient c(b, cfg);
  std::vector<long long> delays;
  c.set_sleeper([&](std::chrono::milliseconds d) { delays.push_back(d.count()); });
  CHECK_THROWS(c.complete(TemplateId::kAttributes, {{"class-name", "x"}}));
  REQUIRE(delays.size() == 3);
  for (std::size_t i = 0; i < delays.size(); ++i) {
    const double base = 100.0 * (1 << i);
    CHECK(delays[i] >= static_cast<long long>(0.5 * base) - 1);
    CHECK(delays[i] <= static_cast<long long>(1.5 * base) + 1);
  }
}

TEST_CASE("cache hits bypass the backend") {
  TempDir tmp;
  auto cache = std::make_shared<DiskCache>(tmp.path());
  auto b = std::make_shared<ScriptedBackend>();
  b->script = {"first", "second"};
  auto c = scripted_client(b, 3, cache);
  CHECK(c->complete(TemplateId::kDescription, {{"class-name", "x"}}) == "first");
  CHECK(c->complete(TemplateId::kDescription, {{"class-name", "x"}}) == "first");
  CHECK(b->calls == 1);
  CHECK(c->cache_hits() == 1);
  CHECK(c->complete(TemplateId::kDescription, {{"class-name", "x"}}, 1) == "second");
  CHECK(b->calls == 2);

  auto b2 = std::make_shared<ScriptedBackend>();
  b2->script = {"never"};
  auto c2 = scripted_client(b2, 3, cache);
  CHECK(c2->complete(TemplateId::kDescription, {{"class-name", "x"}}) == "first");
  CHECK(b2->calls == 0);
}

TEST_CASE("concurrent requests for one key reach the backend once") {
  TempDir tmp;
  auto cache = std::make_shared<DiskCache>(tmp.path());
  auto b = std::make_shared<ScriptedBackend>();
  b->script = {"same"};
  auto c = scripted_client(b, 3, cache);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] { CHECK(c->complete(TemplateId::kDescription, {{"class-name", "k"}}) == "same"); });
  }
  for (auto& t : threads) t.join();
  CHECK(b->calls == 1);
}

TEST_CASE("cache keys separate every identifying field") {
  CacheKey k{"chat_http", "gpt-3.5-turbo", "attributes", 1, "prompt", 0.2, 0};
  std::set<std::string> digests{k.digest()};
  auto vary = [&](auto&& mutate) {
    CacheKey v = k;
    mutate(v);
    digests.insert(v.digest());
  };
  vary([](CacheKey& v) { v.backend_kind = "mock"; });
  vary([](CacheKey& v) { v.model_name = "other"; });
  vary([](CacheKey& v) { v.template_id = "description"; });
  vary([](CacheKey& v) { v.template_version = 2; });
  vary([](CacheKey& v) { v.prompt = "prompt2"; });
  vary([](CacheKey& v) { v.temperature = 0.5; });
  vary([](CacheKey& v) { v.sample_index = 1; });
  CHECK(digests.size() == 8);
  CHECK(k.digest() == CacheKey(k).digest());
}

TEST_CASE("video prompts are cached per video") {
  TempDir tmp;
  auto cache = std::make_shared<DiskCache>(tmp.path());
  GenClient c(std::make_shared<MockBackend>(), BackendConfig{}, cache);
  const auto a = generate_video_descriptions("v1", c, 2, 0.5);
  const auto b = generate_video_descriptions("v2", c, 2, 0.5);
  CHECK(a != b);
  CHECK(a[0] == "mock-vdesc-0:v1");
  CHECK(generate_video_descriptions("v1", c, 2, 0.5) == a);
  CHECK(c.cache_hits() == 2);
}

TEST_CASE("chat HTTP backend speaks the completions contract") {
  LocalServer srv;
  std::atomic<int> calls{0};
  json last_body;
  std::string last_auth;
  srv.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    ++calls;
    last_body = json::parse(req.body);
    last_auth = req.get_header_value("Authorization");
    res.set_content(chat_reply(" baby, crawling, hand, knees ").dump(), "application/json");
  });
  srv.start();
  ::setenv("VP_TEST_KEY", "secret", 1);
  BackendConfig cfg = http_config(srv.url());
  cfg.api_key_env = "VP_TEST_KEY";
  GenClient c(make_backend(cfg), cfg);
  const auto reply = c.complete(TemplateId::kAttributes, {{"class-name", "crawling baby"}});
  CHECK(reply == "baby, crawling, hand, knees");
  CHECK(parse_attributes(reply) == std::vector<std::string>{"baby", "crawling", "hand", "knees"});
  CHECK(calls == 1);
  CHECK(last_auth == "Bearer secret");
  CHECK(last_body["model"] == "gpt-3.5-turbo");
  CHECK(last_body["temperature"] == doctest::Approx(0.2));
  CHECK(last_body["messages"][0]["role"] == "user");
  CHECK(last_body["messages"][0]["content"] ==
        "What are the distinct visual characteristics to identify a crawling baby video action?");
}

TEST_CASE("chat HTTP retries 500 and 429 but not 400") {
  LocalServer srv;
  std::atomic<int> calls{0};
  std::atomic<int> status{500};
  srv.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    const int n = ++calls;
    if (n < 3) {
      res.status = status;
      return;
    }
    res.set_content(chat_reply("fine").dump(), "application/json");
  });
  srv.start();
  const BackendConfig cfg = http_config(srv.url());

  for (int s : {500, 429}) {
    calls = 0;
    status = s;
    GenClient c(make_backend(cfg), cfg);
    CHECK(c.complete(TemplateId::kDescription, {{"class-name", "x"}}) == "fine");
    CHECK(calls == 3);
  }
  calls = 0;
  status = 400;
  GenClient c(make_backend(cfg), cfg);
  CHECK(code_of([&] { c.complete(TemplateId::kDescription, {{"class-name", "x"}}); }) ==
        ErrorCode::kBackendUnavailable);
  CHECK(calls == 1);
}

TEST_CASE("unreachable chat endpoint is BackendUnavailable after the retry budget") {
  LocalServer probe;  // bound but never listening: connections are refused
  const std::string url = probe.url();
  BackendConfig cfg = http_config(url);
  cfg.timeout_ms = 500;
  GenClient c(make_backend(cfg), cfg);
  int sleeps = 0;
  c.set_sleeper([&](std::chrono::milliseconds) { ++sleeps; });
  CHECK(code_of([&] { c.complete(TemplateId::kDescription, {{"class-name", "x"}}); }) ==
        ErrorCode::kBackendUnavailable);
  CHECK(c.backend_calls() == 3);
  CHECK(sleeps == 2);
}

TEST_CASE("multimodal requests carry the video reference") {
  BackendConfig cfg = http_config("http://127.0.0.1:1");
  cfg.multimodal = true;
  cfg.video_url_template = "file:///videos/{video-id}.mp4";
  ChatHttpBackend b(cfg);
  CompletionRequest r;
  r.template_id = TemplateId::kVideoDescription;
  r.bindings = {{kVideoIdBinding, "v7"}};
  r.prompt = "describe the activity in the video";
  const json body = b.request_body(r);
  const json& content = body["messages"][0]["content"];
  REQUIRE(content.is_array());
  CHECK(content[0]["text"] == "describe the activity in the video");
  CHECK(content[1]["video_url"]["url"] == "file:///videos/v7.mp4");
}

TEST_CASE("fixture backend replays recorded responses") {
  TempDir tmp;
  const std::string prompt = render_prompt(TemplateId::kCaptionAugment, {{"input caption", "a man plays golf"}});
  write_jsonl({json{{"prompt", prompt}, {"responses", {"a golfer swings", "a person hits a golf ball"}}},
               json{{"prompt_digest", sha256_hex(render_prompt(TemplateId::kDescription, {{"class-name", "x"}}))},
                    {"response", "step by step"}},
               json{{"video_id", "v1"}, {"descriptions", {"d0", "d1"}}}},
              tmp / "fx.jsonl");
  BackendConfig cfg;
  cfg.kind = BackendKind::kFixtureFile;
  cfg.fixture_path = tmp / "fx.jsonl";
  GenClient c(make_backend(cfg), cfg);
  const auto aug = augment_caption("a man plays golf", c, 2);
  CHECK(aug.captions == std::vector<std::string>{"a golfer swings", "a person hits a golf ball"});
  CHECK_FALSE(aug.padded);
  CHECK(c.complete(TemplateId::kDescription, {{"class-name", "x"}}) == "step by step");
  CHECK(generate_video_descriptions("v1", c, 2, 0.5) == std::vector<std::string>{"d0", "d1"});
  CHECK(code_of([&] { generate_video_descriptions("v1", c, 3, 0.5); }) == ErrorCode::kMissingFixture);
  CHECK(code_of([&] { c.complete(TemplateId::kDescription, {{"class-name", "y"}}); }) == ErrorCode::kMissingFixture);
}

TEST_CASE("caption augmentation pads when outputs repeat") {
  auto b = std::make_shared<ScriptedBackend>();
  b->script = {"1. the ball is hit by a player in a baseball game"};
  auto c = scripted_client(b);
  const auto aug = augment_caption("a baseball player hits the ball", *c, 2);
  CHECK(aug.padded);
  CHECK(aug.captions == std::vector<std::string>(2, "the ball is hit by a player in a baseball game"));
}

TEST_CASE("attribute parsing") {
  CHECK(parse_attributes("Visual characteristics:\n- baby\n- crawling.\n- hand, knees\n- baby") ==
        std::vector<std::string>{"baby", "crawling", "hand", "knees"});
  CHECK(parse_attributes("").empty());
}

TEST_CASE("descriptor generation leaves failed components absent") {
  auto b = std::make_shared<ScriptedBackend>();
  b->script = {"hand, knees", ""};
  auto c = scripted_client(b, 1);
  HierarchyMap h;
  h.parents = {{"playing sports", {"crawling"}}, {"other", {}}};
  const auto set = generate_descriptor_set("crawling", *c, &h);
  CHECK(set.attributes == std::vector<std::string>{"hand", "knees"});
  CHECK_FALSE(set.description.has_value());
  CHECK(set.parent_context == "playing sports");
  CHECK(set.provenance.template_version == 1);
}

TEST_CASE("hierarchy parsing assigns every class exactly once") {
  const std::vector<std::string> classes{"golf swing", "archery", "Yo Yo", "knitting"};
  HierarchyDiagnostics diag;
  const auto h = parse_hierarchy("Playing sports: Golf Swing, archery, curling\nOthers: yo_yo\n", classes, &diag);
  CHECK(h.parent_of("golf swing") == "Playing sports");
  CHECK(h.parent_of("Yo Yo") == "other");
  CHECK(h.parent_of("knitting") == "other");
  CHECK(diag.unmatched == std::vector<std::string>{"curling"});
  CHECK(diag.defaulted == std::vector<std::string>{"knitting"});
  CHECK_NOTHROW(check_hierarchy(h, classes));
  CHECK(code_of([&] { parse_hierarchy("a: archery\nb: archery", classes); }) == ErrorCode::kDuplicateAssignment);
  CHECK(code_of([] { check_hierarchy(HierarchyMap{}, {"x"}); }) == ErrorCode::kSchema);
  GenClient mock(std::make_shared<MockBackend>(), BackendConfig{});
  CHECK(code_of([&] { generate_hierarchy({}, mock); }) == ErrorCode::kInvalidInput);
}

TEST_CASE("backend config validation names the field") {
  BackendConfig cfg;
  cfg.kind = BackendKind::kChatHttp;
  cfg.endpoint_url.reset();
  try {
    cfg.validate("text_llm");
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfig);
    CHECK(e.field().starts_with("text_llm"));
  }
  const auto round = backend_config_from_json(backend_config_to_json(http_config("http://h:1")), BackendConfig{});
  CHECK(*round.endpoint_url == "http://h:1");
  CHECK(round.kind == BackendKind::kChatHttp);
}

namespace {

GenClient recorded_client() {
  BackendConfig cfg;
  cfg.kind = BackendKind::kFixtureFile;
  cfg.fixture_path = std::filesystem::path(VP_DATA_DIR) / "fixtures" / "text_llm.jsonl";
  return GenClient(make_backend(cfg), cfg);
}

}  // namespace

TEST_CASE("recorded responses parse into the published descriptor lists") {
  GenClient c = recorded_client();
  const auto baby = generate_descriptor_set("baby crawling", c);
  CHECK(*baby.attributes == std::vector<std::string>{"baby", "crawling", "hand", "knees"});
  CHECK(baby.description.has_value());
  const auto hop = generate_descriptor_set("hopscotch", c);
  CHECK(*hop.attributes == std::vector<std::string>{"grid markings", "hopping", "throwing an object", "jumping"});
}

TEST_CASE("recorded caption paraphrases") {
  GenClient c = recorded_client();
  const auto review = augment_caption("man is giving a review on a vehicle", c, 2);
  CHECK(std::ranges::count(review.captions, "a person provides feedback on a car") == 1);
  const auto baseball = augment_caption("baseball player hits ball", c, 2);
  CHECK(std::ranges::count(baseball.captions, "the ball is hit by a player in a baseball game") == 1);
  CHECK_FALSE(baseball.padded);
  CHECK(render_prompt(TemplateId::kCaptionAugment, {{"input caption", "baseball player hits ball"}}) ==
        "Given a caption: baseball player hits ball, generate a visually similar captions.");
}

TEST_CASE("recorded hierarchy response groups the UCF classes under eight contexts") {
  GenClient c = recorded_client();
  const auto classes = read_lines(std::filesystem::path(VP_DATA_DIR) / "classes" / "ucf101.txt");
  REQUIRE(classes.size() == 101);
  const std::string raw = generate_hierarchy(classes, c);
  const auto h = parse_hierarchy(raw, classes);
  CHECK_NOTHROW(check_hierarchy(h, classes));
  std::set<std::string> parents;
  for (const auto& [p, members] : h.parents) parents.insert(p);
  CHECK(parents == std::set<std::string>{"self-grooming", "playing music", "playing sports", "exercise and fitness",
                                         "water activities", "household chores", "creative activities", "other"});
  CHECK(h.parent_of("Drumming") == "playing music");
}

TEST_CASE("mock generation outputs") {
  GenClient c(std::make_shared<MockBackend>(), BackendConfig{});
  const auto set = generate_descriptor_set("baby crawling", c);
  CHECK(*set.attributes == std::vector<std::string>{"mock-attr-1:baby crawling"});
  CHECK(*set.description == "mock-desc:baby crawling");
  CHECK(augment_caption("a dog runs", c, 2).captions ==
        std::vector<std::string>{"mock-cap-0:a dog runs", "mock-cap-1:a dog runs"});
  CHECK(generate_video_descriptions("v1", c, 3, 0.5) ==
        std::vector<std::string>{"mock-vdesc-0:v1", "mock-vdesc-1:v1", "mock-vdesc-2:v1"});
  const std::vector<std::string> classes{"drumming", "archery", "zzz"};
  const auto h = parse_hierarchy(generate_hierarchy(classes, c), classes);
  CHECK(h.parents.at("mock-parent") == classes);
  CHECK(h.parents.at("other").empty());
}

TEST_CASE("hierarchy fallbacks") {
  const std::vector<std::string> classes{"drumming", "archery", "zzz"};
  const auto h = parse_hierarchy("playing music: Drumming\nplaying sports: archery", classes);
  CHECK(h.parents.at("playing music") == std::vector<std::string>{"drumming"});
  CHECK(h.parent_of("zzz") == "other");
  CHECK(code_of([&] { parse_hierarchy("a: drumming\nb: drumming", classes); }) == ErrorCode::kDuplicateAssignment);
}

TEST_CASE("fixture lacking a video is MissingFixture") {
  GenClient c = recorded_client();
  CHECK(code_of([&] { generate_video_descriptions("v7", c, 1, 0.5); }) == ErrorCode::kMissingFixture);
  CHECK(generate_video_descriptions("v1", c, 3, 0.5).size() == 3);
}
