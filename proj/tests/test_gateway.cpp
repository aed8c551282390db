#include <gtest/gtest.h>

#include <thread>

#include "longwrite/backends.hpp"
#include "longwrite/error.hpp"
#include "longwrite/gateway.hpp"
#include "longwrite/templates.hpp"
#include "longwrite/text.hpp"
#include "support.hpp"

using namespace longwrite;
using namespace longwrite::llm;

namespace {

std::string planner_prompt() {
  return templates::render_template(templates::kPlanner, {{"instruction", "Total word count should be about 1500 words."}});
}

}  // namespace

TEST(ChatRequest, ValidatesAndSerialises) {
  auto request = ChatRequest::user("hi", 0.3);
  request.model_name = "m";
  EXPECT_NO_THROW(request.validate());
  const auto body = request.to_json();
  EXPECT_EQ(body["model"], "m");
  EXPECT_EQ(body["messages"][0]["role"], "user");
  EXPECT_EQ(body["messages"][0]["content"], "hi");
  EXPECT_DOUBLE_EQ(body["temperature"].get<double>(), 0.3);
  ChatRequest empty;
  EXPECT_THROW(empty.validate(), InvalidInput);
  request.temperature = -1;
  EXPECT_THROW(request.validate(), InvalidInput);
}

TEST(MockChat, PlannerReplyIsWellFormedAndDeterministic) {
  auto gateway = lwtest::mock_gateway();
  const std::string first = gateway->chat(planner_prompt(), kWritingTemperature);
  const std::string second = gateway->chat(planner_prompt(), kWritingTemperature);
  EXPECT_EQ(first, second);
  EXPECT_EQ(first.rfind("Paragraph 1 - Main Point: ", 0), 0u);
  EXPECT_NE(first.find("- Word Count: "), std::string::npos);
}

TEST(MockChat, RulesOverrideInSequence) {
  MockOptions options;
  options.rules.push_back({"MARKER", {"one", "two"}});
  auto gateway = lwtest::mock_gateway(options);
  EXPECT_EQ(gateway->chat("has MARKER", 0.0), "one");
  EXPECT_EQ(gateway->chat("has MARKER", 0.0), "two");
  EXPECT_EQ(gateway->chat("has MARKER", 0.0), "two");
}

TEST(MockEmbed, DeterministicOrderedAndUniform) {
  auto gateway = lwtest::mock_gateway();
  const auto a = gateway->embed({"alpha", "beta", "alpha"});
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a[0].values, a[2].values);
  EXPECT_NE(a[0].values, a[1].values);
  for (const auto& v : a) EXPECT_EQ(v.dim(), a[0].dim());
  EXPECT_THROW(gateway->embed({""}), InvalidInput);
  EXPECT_THROW(gateway->embed({"ok", ""}), InvalidInput);
}

TEST(MockEmbed, BatchingPreservesOrderAndCardinality) {
  auto gateway = lwtest::mock_gateway();
  std::vector<std::string> a;
  std::vector<std::string> b;
  for (int i = 0; i < 37; ++i) a.push_back("text a " + std::to_string(i));
  for (int i = 0; i < 21; ++i) b.push_back("text b " + std::to_string(i));
  std::vector<std::string> all = a;
  all.insert(all.end(), b.begin(), b.end());
  const auto joined = gateway->embed(all);
  auto separate = gateway->embed(a);
  const auto tail = gateway->embed(b);
  separate.insert(separate.end(), tail.begin(), tail.end());
  ASSERT_EQ(joined.size(), separate.size());
  for (std::size_t i = 0; i < joined.size(); ++i) EXPECT_EQ(joined[i].values, separate[i].values);
  EXPECT_GT(gateway->stats().embed_batches, 3u);  // the mock caps batches at 16
}

TEST(Gateway, RetriesTransientFailures) {
  auto chat = std::make_shared<lwtest::ScriptedChat>([](const ChatRequest&, std::size_t call) -> std::string {
    if (call < 2) throw BackendError("flaky", true);
    return "done";
  });
  Gateway gateway(chat, nullptr, lwtest::fast_options());
  EXPECT_EQ(gateway.chat("p", 0.0), "done");
  EXPECT_EQ(gateway.stats().retries, 2u);
  EXPECT_EQ(chat->prompts().size(), 3u);
}

TEST(Gateway, GivesUpAfterConfiguredRetries) {
  auto chat = std::make_shared<lwtest::ScriptedChat>(
      [](const ChatRequest&, std::size_t) -> std::string { throw BackendError("down", true); });
  auto options = lwtest::fast_options();
  options.retry.max_retries = 2;
  Gateway gateway(chat, nullptr, options);
  EXPECT_THROW(gateway.chat("p", 0.0), BackendError);
  EXPECT_EQ(chat->prompts().size(), 3u);
}

TEST(Gateway, NonTransientFailuresAreNotRetried) {
  auto chat = std::make_shared<lwtest::ScriptedChat>(
      [](const ChatRequest&, std::size_t) -> std::string { throw BackendError("bad request", false); });
  Gateway gateway(chat, nullptr, lwtest::fast_options());
  EXPECT_THROW(gateway.chat("p", 0.0), BackendError);
  EXPECT_EQ(chat->prompts().size(), 1u);
}

TEST(Gateway, EmptyCompletionIsAnError) {
  auto chat = std::make_shared<lwtest::ScriptedChat>([](const ChatRequest&, std::size_t) { return std::string("  \n"); });
  Gateway gateway(chat, nullptr, lwtest::fast_options());
  EXPECT_THROW(gateway.chat("p", 0.0), EmptyCompletion);
}

TEST(Gateway, BudgetErrorNamesOverage) {
  auto chat = std::make_shared<lwtest::ScriptedChat>([](const ChatRequest&, std::size_t) { return std::string("x"); });
  auto options = lwtest::fast_options();
  options.context_budget_tokens = 10;
  Gateway gateway(chat, nullptr, options);
  try {
    gateway.chat(std::string(80, 'a'), 0.0);  // 20 tokens at four bytes each
    FAIL() << "expected BudgetError";
  } catch (const BudgetError& e) {
    EXPECT_NE(std::string(e.what()).find("by 10"), std::string::npos) << e.what();
  }
  EXPECT_TRUE(chat->prompts().empty());
}

TEST(Gateway, FillsModelName) {
  auto chat = std::make_shared<lwtest::ScriptedChat>(
      [](const ChatRequest& r, std::size_t) { return r.model_name; });
  auto options = lwtest::fast_options();
  options.model_name = "writer-model";
  Gateway gateway(chat, nullptr, options);
  EXPECT_EQ(gateway.chat("p", 0.3), "writer-model");
}

TEST(Gateway, RespectsMaxInFlight) {
  std::atomic<int> active{0};
  std::atomic<int> peak{0};
  auto chat = std::make_shared<lwtest::ScriptedChat>([&](const ChatRequest&, std::size_t) {
    const int now = ++active;
    int seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    --active;
    return std::string("ok");
  });
  auto options = lwtest::fast_options();
  options.max_in_flight = 2;
  Gateway gateway(chat, nullptr, options);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) threads.emplace_back([&] { gateway.chat("p", 0.0); });
  for (auto& t : threads) t.join();
  EXPECT_LE(peak.load(), 2);
  EXPECT_EQ(gateway.stats().chat_calls, 8u);
}

TEST(Transcript, ReplayReproducesCalls) {
  lwtest::TempDir dir;
  const auto path = dir / "transcript.jsonl";
  std::string reply;
  std::vector<retrieval::Embedding> vectors;
  {
    auto recorder = std::make_shared<TranscriptRecorder>(path);
    Gateway gateway(std::make_shared<MockChatBackend>(), std::make_shared<MockEmbeddingBackend>(), lwtest::fast_options(),
                    recorder);
    reply = gateway.chat(planner_prompt(), kWritingTemperature);
    vectors = gateway.embed({"one", "two"});
  }
  const std::string text = read_file(path);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  const auto first = nlohmann::json::parse(text.substr(0, text.find('\n')));
  EXPECT_EQ(first["endpoint"], "chat");
  EXPECT_TRUE(first.contains("request_hash"));
  EXPECT_TRUE(first.contains("latency_ms"));

  auto replay = std::make_shared<ReplayBackend>(path);
  Gateway replayed(replay, replay, lwtest::fast_options());
  EXPECT_EQ(replayed.chat(planner_prompt(), kWritingTemperature), reply);
  const auto again = replayed.embed({"two", "one"});
  EXPECT_EQ(again[0].values, vectors[1].values);
  EXPECT_EQ(again[1].values, vectors[0].values);
  EXPECT_THROW(replayed.chat("never recorded", 0.0), BackendError);
}

TEST(MockProse, ExactWordCount) {
  for (std::size_t n : {1u, 7u, 300u}) EXPECT_EQ(count_words(mock_prose(5, n)), n);
  EXPECT_EQ(mock_prose(5, 50), mock_prose(5, 50));
}
