#include <gtest/gtest.h>

#include <random>

#include "longwrite/corpus.hpp"
#include "longwrite/error.hpp"
#include "longwrite/text.hpp"
#include "support.hpp"

using namespace longwrite;
using namespace longwrite::corpus;

namespace {

// Independent oracle: the text between the two document markers.
std::string document_body(const std::string& tex) {
  const std::string begin = "\\begin{document}";
  const auto b = tex.find(begin);
  const auto e = tex.find("\\end{document}");
  return tex.substr(b + begin.size(), e - b - begin.size());
}

// Independent oracle: everything before the appendix marker.
std::string before_appendix(const std::string& tex) { return tex.substr(0, tex.find("\\appendix")); }

}  // namespace

TEST(CountWords, Examples) {
  EXPECT_EQ(count_words("a b c"), 3u);
  EXPECT_EQ(count_words(""), 0u);
  const std::string text = "hello,  world\n";
  EXPECT_EQ(count_words(text), lwtest::split_words(text).size());
  EXPECT_EQ(count_words(text), 2u);
}

TEST(CountWords, AdditiveAcrossSpaceJoin) {
  std::mt19937_64 rng(7);
  const std::string alphabet = "ab \n\t.,x";
  for (int trial = 0; trial < 500; ++trial) {
    auto random_text = [&] {
      std::string s;
      const int len = 1 + static_cast<int>(rng() % 30);
      for (int i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
      return s;
    };
    const std::string a = random_text();
    const std::string b = random_text();
    EXPECT_EQ(count_words(a + " " + b), count_words(a) + count_words(b));
    EXPECT_EQ(count_words(a), lwtest::split_words(a).size());
  }
}

TEST(CleanTex, StripsSingleCommentLine) { EXPECT_EQ(clean_tex("% note\nHello"), "Hello"); }

TEST(CleanTex, ExtractsDocumentBody) {
  const std::string tex = "\\documentclass{article}\n\\usepackage{x}\n\\begin{document}Body\\end{document}";
  EXPECT_EQ(clean_tex(tex), document_body(tex));
  EXPECT_EQ(clean_tex(tex), "Body");
}

TEST(CleanTex, TruncatesAtAppendix) {
  const std::string tex = "Body\n\\appendix\nExtra";
  EXPECT_EQ(clean_tex(tex), before_appendix(tex));
  EXPECT_EQ(clean_tex(tex), "Body\n");
}

TEST(CleanTex, EscapedPercentIsKept) {
  EXPECT_EQ(clean_tex("Accuracy 71.4\\% overall % remark\nNext"), "Accuracy 71.4\\% overall \nNext");
  // An escaped backslash before % leaves the % unescaped.
  EXPECT_EQ(clean_tex("a \\\\% comment\nb"), "a \\\\\nb");
}

TEST(CleanTex, RemovesBibliography) {
  const std::string tex =
      "\\begin{document}\nText.\n\\begin{thebibliography}{9}\n\\bibitem{a} A.\n\\end{thebibliography}\n"
      "\\end{document}\n";
  EXPECT_EQ(clean_tex(tex), "\nText.\n");
  EXPECT_EQ(clean_tex("\\begin{document}X\n\\bibliography{refs}\n\\end{document}"), "X\n");
}

TEST(CleanTex, AppendixControlWordNeedsWordBreak) {
  EXPECT_EQ(clean_tex("A \\appendixname B"), "A \\appendixname B");
}

TEST(CleanTex, MissingBeginDocumentIsMalformed) {
  try {
    clean_tex("\\documentclass{article}\nNo begin here", "broken.tex");
    FAIL() << "expected MalformedSource";
  } catch (const MalformedSource& e) {
    EXPECT_NE(std::string(e.what()).find("broken.tex"), std::string::npos);
  }
}

TEST(CleanTex, NoLineStartsWithComment) {
  const std::string tex = "\\begin{document}\n  % indented comment\nText % trailing\n%last\n\\end{document}";
  const std::string cleaned = clean_tex(tex);
  std::size_t pos = 0;
  while (pos <= cleaned.size()) {
    auto end = cleaned.find('\n', pos);
    if (end == std::string::npos) end = cleaned.size();
    const auto line = trim(std::string_view(cleaned).substr(pos, end - pos));
    EXPECT_FALSE(line.starts_with("%")) << line;
    pos = end + 1;
  }
}

TEST(CleanTex, IdempotentOnRandomDocuments) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> parts = {"Text ", "\\% ", "% c\n", "\n", "\\section{A}", "word. ",
                                          "\\appendix\n", "\\\\", "  ", "\\begin{thebibliography}"};
  for (int trial = 0; trial < 300; ++trial) {
    std::string body;
    const int n = 1 + static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) body += parts[rng() % parts.size()];
    const std::string tex = trial % 2 == 0 ? body : "\\documentclass{x}\n\\begin{document}" + body;
    const std::string once = clean_tex(tex);
    EXPECT_EQ(clean_tex(once), once) << tex;
  }
}

TEST(CleanTex, ReportCoversRemovedSpans) {
  const std::string tex = "\\documentclass{a}\n\\begin{document}\nBody % x\n\\appendix\nMore\n\\end{document}\n";
  const auto result = clean_tex_report(tex);
  ASSERT_GE(result.removed.size(), 3u);
  EXPECT_EQ(result.removed.front().kind, RegionKind::Preamble);
  EXPECT_EQ(result.removed.front().begin, 0u);
  EXPECT_EQ(tex.substr(result.removed.front().end).rfind("\nBody", 0), 0u);
  EXPECT_EQ(result.removed.back().kind, RegionKind::Appendix);
  EXPECT_EQ(result.removed.back().end, tex.size());
  const auto csv = cleaning_report_csv("p.tex", result.removed, true);
  EXPECT_EQ(csv.rfind("file,kind,begin,end\n", 0), 0u);
}

TEST(LoadSample, HappyPath) {
  const auto sample = load_sample(lwtest::demo_sample());
  EXPECT_EQ(sample.sample_id, "demo");
  EXPECT_EQ(sample.papers[0].id, "paper1.tex");
  EXPECT_EQ(sample.papers[2].id, "paper3.tex");
  for (const auto& paper : sample.papers) {
    EXPECT_EQ(paper.word_count, lwtest::split_words(paper.cleaned_text).size());
    EXPECT_EQ(paper.cleaned_text.find("\\documentclass"), std::string::npos);
  }
  EXPECT_EQ(sample.qa_pairs.size(), 12u);
}

TEST(LoadSample, WrongPaperCountIsLayoutError) {
  lwtest::TempDir dir;
  write_file(dir / "paper1.tex", "A");
  write_file(dir / "paper2.tex", "B");
  EXPECT_THROW(load_sample(dir.path()), LayoutError);
}

TEST(LoadSample, MissingDirectoryIsIoError) {
  EXPECT_THROW(load_sample("/nonexistent/sample/dir"), IoError);
}

TEST(BuildInstruction, SubstitutesLengthAndPapers) {
  const auto sample = load_sample(lwtest::demo_sample());
  const std::string instruction = build_instruction(sample, 8000);
  EXPECT_NE(instruction.find("about 8000 words"), std::string::npos);
  std::size_t total = 0;
  for (int i = 0; i < 3; ++i) {
    const std::string n = std::to_string(i + 1);
    const std::string block = "<paper " + n + ">\n" + sample.papers[i].cleaned_text + "\n</paper " + n + ">";
    EXPECT_NE(instruction.find(block), std::string::npos);
    total += sample.papers[i].cleaned_text.size();
  }
  EXPECT_GE(instruction.size(), total);
  EXPECT_EQ(instruction, build_instruction(sample, 8000));
  EXPECT_THROW(build_instruction(sample, 0), DomainError);
}
