#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Prompt templates. Slots use the `{{ name }}` form; render_template fills them
// in a single pass so slot values are never re-expanded.
namespace longwrite::templates {

inline constexpr std::string_view kSummaryInstruction =
    R"TPL(You are an experienced researcher, I will give you some scientific research papers in the same field. Please read them carefully and write a summary about them.

Here are the papers:

{{ papers }}

Your summary should follow these steps:

- Title: Clearly state the main subject or topic of the summary.

- Introduction: Describe the field and briefly introduce its history. Then introduce current progress and challenges.

- Introduce the main content of each paper separately. Then summarize their commonalities and innovations.

- Compare the results of the papers and discuss differences in the results.

- Conclusion: Summarize the main findings and suggest future research directions.

The following are the key points to note:

- If there are important data or main equations in the given papers, remember to mention them in your summary using Markdown.

- Use of tables to compare different approaches is encouraged.

- The first appearance of a professional term must be marked with the full English name and abbreviation.

- Don't directly copy the papers, write the summary in your own words.

- Do not include the titles of reference papers directly in your paper.

Total word count should be about {{ length }} words.)TPL";

/// One tagged paper block; three of these joined by blank lines fill `{{ papers }}`.
inline constexpr std::string_view kPaperBlock = R"TPL(<paper {{ n }}>
{{ paper }}
</paper {{ n }}>)TPL";

inline constexpr std::string_view kQaGeneration =
    R"TPL(You are a research assistant specializing in paper detail analysis. Please carefully read the provided papers and formulate questions with corresponding answers based on the numerical details, statistical findings, and empirical results presented.

**Requirements For Questions And Answers:**

- Questions must explicitly specify the paper/method/dataset being discussed. Do not use vague references such as "the first paper" or "the second paper".

- Your Questions should focus on different numeric-related details in the paper content.

- For papers proposing new methods, you can focus on their specific performance in benchmark tests, detailed performance comparisons with existing methods, or any numerical details in the paper content.

- For papers introducing new benchmarks or datasets, you can focus on the dataset composition, component proportions, and experimental result comparisons in detail.

- If multiple papers are provided, you must compare and analyze the differences in numerical details, statistical findings, and empirical results across papers.

- Your Answers should be clear and precise.

{{ papers }})TPL";

/// Appended to the QA generation prompt so replies can be parsed and classified.
inline constexpr std::string_view kQaOutputFormat = R"TPL(

**Output Format**
Return a JSON list containing {{ single_count }} Single-Context questions (answerable from one paper) and {{ cross_count }} Cross-Context questions (requiring several papers). Each element must be an object of the form:
{"question": "...", "answer": "...", "papers": [1]}
where "papers" lists the numbers (1, 2 or 3) of every paper needed to answer the question. Do not output anything besides the JSON list.)TPL";

inline constexpr std::string_view kQuestionAnswering =
    R"TPL(You will be provided with a reference paper and a question to answer. Your task is to carefully analyze the given content and produce an accurate, well-supported response based strictly on the information in the provided paper.

**Reference Paper:**

<paper>
{{ paper }}
</paper>

**Question:**

<question>
{{ question }}
</question>

**Prohibitions**
- External knowledge beyond the provided paper

- Unsupported assumptions or personal opinions

- Repetition of content without meaningful analysis

Your response should be a minimum of 50 characters and a maximum of 200 characters. If You can't find the answer, please respond with "I don't know".)TPL";

inline constexpr std::string_view kQualityEvaluation =
    R"TPL(Your core task is to evaluate the checklists based on the user's instruction and LLM's response, with each checklist item being a yes or no question indicating a specific aspect that the LLM's response should meet. You need to judge the checklist item based on the instruction and response. The evaluation results are scored from 0 to 1, with 5 scores in total, which are:

**0:** The response fails to meet the checklist requirements, demonstrating the substantial need for improvement across multiple areas.

**0.25:** The response partially meets some checklist requirements, but significant elements remain unaddressed.

**0.5:** The response meets several checklist requirements, yet the overall evaluation appears ambiguous or unclear.

**0.75:** The response aligns with most checklist requirements, though there are still minor areas that could be refined or enhanced.

**1:** The response fully satisfies all checklist requirements, with no identifiable issues or areas for improvement. It means this response is already perfect; you can't find any significant flaws in it.

Here are the rules of the survey generated:

<rules>

Your summary should follow these steps:

- Title: Clearly state the main subject or topic of the summary.

- Introduction: Describe the field and briefly introduce its history. Then introduce current progress and challenges.

- Introduce the main content of each paper separately. Then summarize their commonalities and innovations.

- Compare the results of the papers and discuss differences in the results.

- Conclusion: Summarize the main findings and suggest future research directions.

The following are the key points to note:

- If there are important data or major equations in the given papers, remember to mention them in your summary using Markdown.

- Use of tables to compare different approaches is encouraged.

- The first appearance of a professional term must be marked with the full English name and abbreviation.

- Don't directly copy the papers, write the summary in your own words.

- Do not include the titles of reference papers directly in your paper.

- Do not use citation command (like \cite{xxx} )

</rules>

Here is the survey given by LLM:

{{ response }}

Since the response may be rather long, I am specifically reminding you here that the response has ended.

Here are checklists of this instruction:

{{ checklists }}

To further remind you, I will repeat my requirements:

Your core task is to evaluate the checklists based on the user's instruction and LLM's response, with each checklist item being a yes or no question indicating a specific aspect that the LLM's response should meet. You need to judge the checklist item based on the instruction and response. The evaluation results are scored from 0 to 1, with 5 scores in total, which are:

**0:** The response fails to meet the checklist requirements, demonstrating the substantial need for improvement across multiple areas.

**0.25:** The response partially meets some checklist requirements, but significant elements remain unaddressed.

**0.5:** The response meets several checklist requirements, yet the overall evaluation appears ambiguous or unclear.

**0.75:** The response aligns with most checklist requirements, though there are still minor areas that could be refined or enhanced.

**1:** The response fully satisfies all checklist requirements, with no identifiable issues or areas for improvement. It means this response is already perfect; you can't find any significant flaws in it.

Always provide the reason for your evaluation results. You should be strict but fair in your evaluation. A score of 1 means that the response perfectly meets all the checklist requirements and you think there is no room for improvement. When giving a score of 1, you need to carefully consider whether this checklist has been perfectly satisfied.

Evaluate all the checklists and return the evaluation results of the checklists. Output a Python List consisting of the Python Dictionary formatted as follows:

[{"checklist_id": "the id of the checklist", "reason": "The reason for your evaluation results", "evaluation_score": "Your evaluation score for this checklist"},{"checklist_id": "the id of the checklist", "reason": "The reason for your evaluation results", "evaluation_score": "Your evaluation score for this checklist"}]

There are total {{ num_checklist }} checklists that you need to evaluate. The length of the output list is equal to the number of checklists and you should give an evaluation score for each checklist. You should be strict with the evaluation to further compare the responses from different models. Your response must be a valid Python List and should contain nothing else, as it will be directly executed in Python.)TPL";

inline constexpr std::string_view kAnswerScoring =
    R"TPL(Analyze how well the predicted answer addresses the question based on the standard answer.

<question>
{{ question }}
</question>

<gold>
{{ answer }}
</gold>

<predict>
{{ predict }}
</predict>

**Scoring Criteria**

- **1.0**: Perfect match - All key points from the standard answer covered with accurate evidence

- **0.75**: Mostly correct - Minor omissions/errors but maintains core understanding

- **0.5**: Partially correct - Addresses > 50 % key elements but misses critical aspects

- **0.25**: Marginally relevant - Only surface-level connection to the question

- **0**: Irrelevant/Incorrect - Contradicts or fails to address the question

**Evaluation Steps**

1. Cross-check key elements between the standard answer and the predicted answer

2. Verify evidence alignment with reference paper sections

3. Identify:

   - Matching components

   - Missing critical points

   - Additional irrelevant content

   - Evidence misinterpretations

**Output Format**
{
  "reason": "Concise analysis comparing predicted vs standard answer",
  "score": "Quantized score (0, 0.25, 0.5, 0.75, 1)"
}

**Constraints**

- Score MUST reflect discrete tiers (no intermediate values)

- Never reference external knowledge beyond provided inputs

- Maintain strict objectivity in analysis

- Do not output information beyond the specified JSON format

**Example Output**

{
  "reason": "Predicted answer correctly identified the methodology but missed two key limitations mentioned in Conclusion. Added unsupported speculation about applications.",
  "score": "0.5"
})TPL";

inline constexpr std::string_view kPlanner =
    R"TPL(I need you to help me break down the following long-form writing instructions into multiple subtasks. Each subtask will guide the writing of one paragraph in the essay and should include the main points and word count requirements for that paragraph.

The writing instruction is as follows:

<instruction>
{{ instruction }}
</instruction>

Please break it down in the following format, with each subtask taking up one line:

Paragraph 1 - Main Point: [Describe the main point of the paragraph, in detail] - Word Count: [Word count requirement, e.g., 400 words]

Paragraph 2 - Main Point: [Describe the main point of the paragraph, in detail] - Word Count: [word count requirement, e.g. 1000 words].

...

Make sure that each subtask is clear and specific, and that all subtasks cover the entire content of the writing instruction. Do not split the subtasks too finely; each subtask's paragraph should be no less than 200 words and no more than 1000 words. Do not output any other content.)TPL";

inline constexpr std::string_view kWriter =
    R"TPL(You are an excellent writing assistant. I will give you an original writing instruction and my planned writing steps. I will also provide you with the text I have already written. Please help me continue writing the next paragraph based on the writing instructions, writing steps, and the already written text.

Writing instruction:

<instruction>
{{ instruction }}
</instruction>

Writing steps:

<steps>
{{ steps }}
</steps>

Already written text:

<written>
{{ written }}
</written>

I'll restate some parts of the instruction that may need to be used:

<restatement>
{{ restatement }}
</restatement>

Please integrate the original writing instruction, writing steps, and the already written text, and now continue writing:

<step>
{{ step }}
</step>

Remember to only output the paragraph you write, without repeating the already written text. As this is an ongoing work, omit open-ended conclusions or other rhetorical hooks.)TPL";

// Phrases unique to each template. The mock backend dispatches on these.
inline constexpr std::string_view kPlannerMarker =
    "break down the following long-form writing instructions";
inline constexpr std::string_view kWriterMarker = "You are an excellent writing assistant.";
inline constexpr std::string_view kQaGenerationMarker =
    "formulate questions with corresponding answers";
inline constexpr std::string_view kQuestionAnsweringMarker =
    "You will be provided with a reference paper and a question to answer.";
inline constexpr std::string_view kQualityMarker =
    "Your core task is to evaluate the checklists";
inline constexpr std::string_view kAnswerScoringMarker =
    "Analyze how well the predicted answer addresses the question";
inline constexpr std::string_view kSummaryMarker = "write a summary about them";

inline constexpr std::string_view kAbstentionPhrase = "I don't know";

using SlotValues = std::vector<std::pair<std::string_view, std::string_view>>;

/// Fills every `{{ name }}` slot. Throws InvalidInput for a slot without a value.
std::string render_template(std::string_view tmpl, const SlotValues& values);

/// Text between `<tag>\n` and `\n</tag>` (first occurrence after `from`), or
/// nullopt-like empty view with found=false.
struct TagBlock {
  bool found = false;
  std::size_t begin = 0;  // offset of the content
  std::size_t end = 0;    // offset one past the content
};
TagBlock find_tag_block(std::string_view text, std::string_view tag, std::size_t from = 0);

}  // namespace longwrite::templates
