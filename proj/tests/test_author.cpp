#include <gtest/gtest.h>

#include <map>

#include "longwrite/author.hpp"
#include "longwrite/corpus.hpp"
#include "longwrite/error.hpp"
#include "longwrite/templates.hpp"
#include "longwrite/text.hpp"
#include "support.hpp"

using namespace longwrite;
using namespace longwrite::author;

namespace {

std::string plan_text(const std::vector<int>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    out += "Paragraph " + std::to_string(i + 1) + " - Main Point: Point " + std::to_string(i + 1) +
           " - Word Count: " + std::to_string(words[i]) + " words\n";
  }
  return out;
}

std::string block(const std::string& text, std::string_view tag) {
  const auto b = templates::find_tag_block(text, tag);
  EXPECT_TRUE(b.found) << tag;
  return text.substr(b.begin, b.end - b.begin);
}

std::string blank_block(std::string text, std::string_view tag) {
  const auto b = templates::find_tag_block(text, tag);
  text.erase(b.begin, b.end - b.begin);
  return text;
}

PipelineOptions small_options(Mode mode) {
  PipelineOptions options;
  options.requested_total_words = 1500;
  options.chunking.target_size = 60;
  options.chunking.overlap = 10;
  options.retrieval.k = 4;
  options.mode = mode;
  return options;
}

struct Harness {
  std::shared_ptr<lwtest::ScriptedEmbedder> embed_backend =
      std::make_shared<lwtest::ScriptedEmbedder>([](const std::string& text) {
        return llm::MockEmbeddingBackend::vector_for(text, 3, 16);
      });
  std::unique_ptr<llm::Gateway> writer = lwtest::mock_gateway();
  llm::Gateway embedder{nullptr, embed_backend, lwtest::fast_options()};
};

}  // namespace

TEST(ParsePlan, CanonicalLines) {
  const auto steps = parse_plan(
      "Paragraph 1 - Main Point: Introduce the three papers and their shared goal of long-context modelling. - Word "
      "Count: 400 words\n\n"
      "Paragraph 2 - Main Point: Compare the evaluation settings - Word Count: 1000 words.\n");
  ASSERT_EQ(steps.size(), 2u);
  EXPECT_EQ(steps[0].index, 1);
  EXPECT_EQ(steps[0].main_point, "Introduce the three papers and their shared goal of long-context modelling.");
  EXPECT_EQ(steps[0].target_words, 400);
  EXPECT_EQ(steps[1].target_words, 1000);
  EXPECT_EQ(steps[1].line(), "Paragraph 2 - Main Point: Compare the evaluation settings - Word Count: 1000 words");
}

TEST(ParsePlan, ToleratesMarkdownAndChatter) {
  const auto steps = parse_plan(
      "Here is the plan:\n"
      "1. **Paragraph 1** - Main Point: [Background] - Word Count: 1,200 words\n"
      "- Paragraph 3 – Main Point: Results – Word Count: about 300 words\n");
  ASSERT_EQ(steps.size(), 2u);
  EXPECT_EQ(steps[0].main_point, "Background");
  EXPECT_EQ(steps[0].target_words, 1200);
  EXPECT_TRUE(steps[0].outside_requested_range());
  EXPECT_EQ(steps[1].index, 2);
  EXPECT_EQ(steps[1].target_words, 300);
}

TEST(ParsePlan, RejectsMalformedPlans) {
  EXPECT_THROW(parse_plan("Paragraph 1 - Main Point: no count here"), PlanError);
  EXPECT_THROW(parse_plan(plan_text({300}) + "Paragraph 1 - Main Point: again - Word Count: 300 words"), PlanError);
  EXPECT_THROW(parse_plan("I cannot help with that."), PlanError);
  EXPECT_THROW(parse_plan(""), PlanError);
}

TEST(Plan, ReplansOnceWhenTotalDeviates) {
  auto chat = std::make_shared<lwtest::ScriptedChat>([](const llm::ChatRequest&, std::size_t call) {
    return call == 0 ? plan_text({200, 200}) : plan_text({500, 500, 500});
  });
  llm::Gateway gateway(chat, nullptr, lwtest::fast_options());
  const auto result = plan(gateway, "instruction", 1500);
  EXPECT_EQ(result.raw_outputs.size(), 2u);
  EXPECT_EQ(result.steps.size(), 3u);
  EXPECT_EQ(result.planned_total_words, 1500);
  EXPECT_TRUE(result.warnings.empty());
  for (double t : chat->temperatures()) EXPECT_EQ(t, llm::kWritingTemperature);
}

TEST(Plan, AcceptsWithinTwentyPercentWithoutReplanning) {
  auto chat = std::make_shared<lwtest::ScriptedChat>(
      [](const llm::ChatRequest&, std::size_t) { return plan_text({600, 600}); });
  llm::Gateway gateway(chat, nullptr, lwtest::fast_options());
  const auto result = plan(gateway, "instruction", 1000);  // 20% over, on the boundary
  EXPECT_EQ(result.raw_outputs.size(), 1u);
}

TEST(Plan, KeepsClosestPlanAndWarnsAfterSecondDeviation) {
  auto chat = std::make_shared<lwtest::ScriptedChat>([](const llm::ChatRequest&, std::size_t call) {
    return call == 0 ? plan_text({300}) : plan_text({400, 400});
  });
  llm::Gateway gateway(chat, nullptr, lwtest::fast_options());
  const auto result = plan(gateway, "instruction", 2000);
  EXPECT_EQ(result.raw_outputs.size(), 2u);
  EXPECT_EQ(result.planned_total_words, 800);
  EXPECT_FALSE(result.warnings.empty());
}

TEST(Plan, RetriesUnparseableOutputOnceThenFails) {
  auto chat = std::make_shared<lwtest::ScriptedChat>([](const llm::ChatRequest&, std::size_t call) {
    return call == 0 ? std::string("nonsense") : plan_text({500, 500});
  });
  llm::Gateway gateway(chat, nullptr, lwtest::fast_options());
  EXPECT_EQ(plan(gateway, "instruction", 1000).steps.size(), 2u);

  auto never = std::make_shared<lwtest::ScriptedChat>(
      [](const llm::ChatRequest&, std::size_t) { return std::string("nonsense"); });
  llm::Gateway broken(never, nullptr, lwtest::fast_options());
  EXPECT_THROW(plan(broken, "instruction", 1000), PlanError);
  EXPECT_EQ(never->prompts().size(), 2u);
}

TEST(Restatement, MostImportantChunkLast) {
  std::vector<retrieval::RetrievedChunk> items(3);
  const double importance[] = {0.9, 0.1, 0.5};
  for (std::size_t i = 0; i < 3; ++i) {
    items[i].chunk.index = i;
    items[i].chunk.text = "chunk" + std::to_string(i);
    items[i].importance = importance[i];
  }
  EXPECT_EQ(render_restatement(retrieval::order_for_restatement(items)), "chunk1\n\nchunk2\n\nchunk0");
  EXPECT_EQ(render_restatement({}), "");
}

TEST(WriterPrompt, SlotsAppearInOrder) {
  WritingPlan p;
  p.steps = parse_plan(plan_text({300, 300}));
  const std::string prompt = assemble_writer_prompt("INSTR", p, "WRITTEN", "RESTATED", p.steps[1]);
  EXPECT_EQ(block(prompt, "instruction"), "INSTR");
  EXPECT_EQ(block(prompt, "steps"), p.steps[0].line() + "\n" + p.steps[1].line());
  EXPECT_EQ(block(prompt, "written"), "WRITTEN");
  EXPECT_EQ(block(prompt, "restatement"), "RESTATED");
  EXPECT_EQ(block(prompt, "step"), p.steps[1].line());
  std::size_t last = 0;
  for (const char* tag : {"<instruction>", "<steps>", "<written>", "<restatement>", "<step>"}) {
    const auto at = prompt.find(tag);
    ASSERT_NE(at, std::string::npos);
    EXPECT_GT(at, last);
    last = at;
  }
  // Nothing but the lead-in sentence sits between the restatement and the step.
  const auto between = prompt.substr(prompt.find("</restatement>"), prompt.find("<step>") - prompt.find("</restatement>"));
  EXPECT_EQ(between.find("<"), 0u);
  EXPECT_EQ(between.find("<", 1), std::string::npos);
}

TEST(RunPipeline, RetrieveAndRestateEndToEnd) {
  const auto sample = corpus::load_sample(lwtest::demo_sample());
  Harness h;
  const auto options = small_options(Mode::Ral);
  const auto artifact = run_pipeline(sample, options, *h.writer, h.embedder);

  const std::size_t steps = artifact.plan.steps.size();
  ASSERT_EQ(steps, 3u);  // the mock plans one step per 500 requested words
  EXPECT_EQ(artifact.step_texts.size(), steps);
  EXPECT_EQ(artifact.prompt_archive.size(), steps);
  EXPECT_EQ(artifact.retrieval_trace.size(), steps);
  ASSERT_GT(artifact.chunks.size(), 4u);

  // Each chunk is embedded exactly once, then one query per step.
  const auto seen = h.embed_backend->seen();
  EXPECT_EQ(seen.size(), artifact.chunks.size() + steps);
  std::map<std::string, int> counts;
  for (const auto& text : seen) ++counts[text];
  for (const auto& chunk : artifact.chunks) EXPECT_EQ(counts[chunk.text], 1);
  for (std::size_t i = 0; i < steps; ++i) EXPECT_EQ(seen[artifact.chunks.size() + i], artifact.plan.steps[i].main_point);

  std::string written;
  for (std::size_t i = 0; i < steps; ++i) {
    const auto& prompt = artifact.prompt_archive[i];
    EXPECT_EQ(block(prompt, "written"), written) << "step " << i + 1;
    const auto& trace = artifact.retrieval_trace[i];
    EXPECT_EQ(trace.scored.size(), artifact.chunks.size());
    EXPECT_EQ(trace.restated.size(), options.retrieval.k);
    EXPECT_EQ(block(prompt, "restatement"), render_restatement(trace.restated));
    if (!written.empty()) written += kStepJoint;
    written += artifact.step_texts[i];
  }
  EXPECT_EQ(artifact.full_text, written);
  EXPECT_EQ(artifact.word_count, lwtest::split_words(written).size());
  EXPECT_EQ(artifact.word_count, 1500u);
}

TEST(RunPipeline, BaselineDiffersOnlyInRestatementSlot) {
  const auto sample = corpus::load_sample(lwtest::demo_sample());
  Harness ral_harness;
  Harness base_harness;
  const auto ral = run_pipeline(sample, small_options(Mode::Ral), *ral_harness.writer, ral_harness.embedder);
  const auto base =
      run_pipeline(sample, small_options(Mode::AgentWrite), *base_harness.writer, base_harness.embedder);
  EXPECT_TRUE(base_harness.embed_backend->seen().empty());
  EXPECT_TRUE(base.retrieval_trace.empty());
  EXPECT_TRUE(base.chunks.empty());
  ASSERT_EQ(ral.prompt_archive.size(), base.prompt_archive.size());
  for (std::size_t i = 0; i < ral.prompt_archive.size(); ++i) {
    EXPECT_EQ(block(base.prompt_archive[i], "restatement"), "");
    EXPECT_NE(ral.prompt_archive[i], base.prompt_archive[i]);
    EXPECT_EQ(blank_block(ral.prompt_archive[i], "restatement"), base.prompt_archive[i]);
  }
}

TEST(RunPipeline, EmptyPlanIsPlanError) {
  const auto sample = corpus::load_sample(lwtest::demo_sample());
  llm::MockOptions mock;
  mock.rules.push_back({std::string(templates::kPlannerMarker), {"Sure, here is nothing useful."}});
  auto writer = lwtest::mock_gateway(mock);
  Harness h;
  EXPECT_THROW(run_pipeline(sample, small_options(Mode::Ral), *writer, h.embedder), PlanError);
  EXPECT_TRUE(h.embed_backend->seen().empty());
}

TEST(RunPipeline, StepFailureNamesTheStep) {
  const auto sample = corpus::load_sample(lwtest::demo_sample());
  auto chat = std::make_shared<lwtest::ScriptedChat>([](const llm::ChatRequest& r, std::size_t call) -> std::string {
    if (r.prompt_text().find(templates::kPlannerMarker) != std::string::npos) return plan_text({500, 500, 500});
    return call == 2 ? "" : "Some paragraph text.";
  });
  llm::Gateway writer(chat, nullptr, lwtest::fast_options());
  Harness h;
  try {
    run_pipeline(sample, small_options(Mode::Ral), writer, h.embedder);
    FAIL() << "expected EmptyCompletion";
  } catch (const EmptyCompletion& e) {
    EXPECT_EQ(std::string(e.what()).rfind("step 2: ", 0), 0u) << e.what();
  }
}

TEST(RunDirectory, WritesArtifacts) {
  const auto sample = corpus::load_sample(lwtest::demo_sample());
  Harness h;
  const auto options = small_options(Mode::Ral);
  const auto artifact = run_pipeline(sample, options, *h.writer, h.embedder);
  lwtest::TempDir dir;
  write_run_directory(artifact, options, {"w", "e", 1, "now"}, dir.path());
  for (const char* name : {"plan.txt", "summary.md", "run_meta.json", "chunks.csv", "steps/01.txt", "prompts/03.txt",
                           "retrieval/02.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
  }
  const auto meta = nlohmann::json::parse(read_file(dir / "run_meta.json"));
  EXPECT_EQ(meta["mode"], "ral");
  EXPECT_EQ(meta["step_count"], 3);
  EXPECT_EQ(meta["retrieval"]["k"], 4);
  EXPECT_EQ(read_file(dir / "summary.md"), artifact.full_text + "\n");
  EXPECT_EQ(step_file_stem(7), "07");
  EXPECT_EQ(step_file_stem(12), "12");
}

TEST(Mode, RoundTrip) {
  EXPECT_EQ(mode_from_string("ral"), Mode::Ral);
  EXPECT_EQ(to_string(Mode::AgentWrite), "agentwrite");
  EXPECT_THROW(mode_from_string("other"), ConfigError);
}
