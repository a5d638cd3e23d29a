#include <gtest/gtest.h>

#include "lkg/text.hpp"

namespace text = lkg::text;

TEST(Text, Utf8Validation) {
  EXPECT_TRUE(text::is_valid_utf8("plain"));
  EXPECT_TRUE(text::is_valid_utf8("第二条"));
  EXPECT_FALSE(text::is_valid_utf8("\xff\xfe"));
  EXPECT_FALSE(text::is_valid_utf8("\xe7\xac"));
  EXPECT_EQ(text::codepoint_count("第二条 a"), 5u);
}

TEST(Text, WhitespaceAndCase) {
  EXPECT_EQ(text::normalize_whitespace("  a \n\t b  "), "a b");
  EXPECT_EQ(text::trim("  x "), "x");
  EXPECT_EQ(text::to_lower_ascii("AbC第"), "abc第");
  EXPECT_EQ(text::fold_width("ＡＢ１　x"), "AB1 x");
  EXPECT_TRUE(text::contains_ci("The Local Autonomy Act", "autonomy act"));
  EXPECT_TRUE(text::starts_with_ci("Case Overview", "case"));
}

TEST(Text, TokensAndOverlap) {
  EXPECT_EQ(text::tokens("The plaintiff, a Resident."), (std::vector<std::string>{"the", "plaintiff", "a", "resident"}));
  EXPECT_DOUBLE_EQ(text::token_overlap("resident filed request", "the resident filed a request today"), 1.0);
  EXPECT_DOUBLE_EQ(text::token_overlap("", "anything"), 0.0);
  EXPECT_DOUBLE_EQ(text::token_overlap("alpha beta", "beta gamma"), 0.5);
}

TEST(Text, SentenceSplit) {
  auto s = text::split_sentences("First one. Second one! Third? 第四。終わり");
  ASSERT_EQ(s.size(), 5u);
  EXPECT_EQ(s[0], "First one.");
  EXPECT_EQ(s[3], "第四。");
  // Abbreviation-free decimal numbers stay intact.
  EXPECT_EQ(text::split_sentences("Pay 1.5 units now.").size(), 1u);
}

TEST(Text, Fnv) {
  // Reference values of 64-bit FNV-1a.
  EXPECT_EQ(text::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(text::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(text::hex64(0xabcULL), "0000000000000abc");
}
