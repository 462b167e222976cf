#include <gtest/gtest.h>

#include <random>
#include <string>

#include "matan/corpus.hpp"
#include "matan/error.hpp"
#include "support/tempdir.hpp"

namespace matan {
namespace {

using testing::TempDir;
using Tokens = std::vector<std::string>;

std::vector<std::string> strings_of(const Corpus& c, NodeId n) {
  std::vector<std::string> out;
  for (TokenId t : c.docs[n]) out.push_back(c.vocab.string_of(t));
  return out;
}

TEST(Tokenize, Examples) {
  EXPECT_EQ(tokenize("Graph-based Learning."), (Tokens{"graph", "based", "learning"}));
  EXPECT_EQ(tokenize(""), Tokens{});
  EXPECT_EQ(tokenize("Word2vec 2013"), (Tokens{"word2vec", "2013"}));
  EXPECT_EQ(tokenize("  --  "), Tokens{});
}

TEST(Tokenize, IdempotentOnRejoinedOutput) {
  std::mt19937_64 rng(3);
  const std::string alphabet = "aZ9 .-_\t\xc3\xa9Qx,;";
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    const int len = std::uniform_int_distribution<int>(0, 40)(rng);
    for (int i = 0; i < len; ++i) text += alphabet[rng() % alphabet.size()];
    const auto once = tokenize(text);
    std::string joined;
    for (const auto& t : once) joined += (joined.empty() ? "" : " ") + t;
    EXPECT_EQ(tokenize(joined), once) << text;
  }
}

TEST(LoadDocuments, MinCountOne) {
  TempDir dir;
  const auto p = dir.write("docs.tsv", "p1\tGraph Learning.\np2\tgraph graph\n");
  const Corpus c = load_documents(p, 1);
  ASSERT_EQ(c.n_nodes(), 2u);
  EXPECT_EQ(c.vocab.size(), 3u);
  EXPECT_EQ(c.vocab.string_of(kEmptyToken), kEmptyTokenString);
  EXPECT_EQ(strings_of(c, c.node("p1")), (Tokens{"graph", "learning"}));
  EXPECT_EQ(strings_of(c, c.node("p2")), (Tokens{"graph", "graph"}));
  EXPECT_EQ(c.vocab.count(*c.vocab.find("graph")), 3u);
}

TEST(LoadDocuments, MinCountTwoDropsRareWord) {
  TempDir dir;
  const auto p = dir.write("docs.tsv", "p1\tGraph Learning.\np2\tgraph graph\n");
  const Corpus c = load_documents(p, 2);
  EXPECT_EQ(strings_of(c, c.node("p1")), Tokens{"graph"});
  EXPECT_EQ(c.vocab.find("learning"), nullptr);
}

TEST(LoadDocuments, AllOovBecomesEmptyToken) {
  TempDir dir;
  const auto p = dir.write("docs.tsv", "a\tcommon common\nb\trare\nc\t\n");
  const Corpus c = load_documents(p, 2);
  EXPECT_EQ(c.docs[c.node("b")], std::vector<TokenId>{kEmptyToken});
  EXPECT_EQ(c.docs[c.node("c")], std::vector<TokenId>{kEmptyToken});
}

TEST(LoadDocuments, MalformedLineReportsLineNumber) {
  TempDir dir;
  const auto p = dir.write("docs.tsv", "a\tok\n\nno tab here\n");
  try {
    load_documents(p, 1);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("docs.tsv"), std::string::npos);
  }
}

TEST(LoadDocuments, DuplicateIdRejected) {
  TempDir dir;
  const auto p = dir.write("docs.tsv", "a\tx\nb\ty\na\tz\n");
  EXPECT_THROW(load_documents(p, 1), ParseError);
  EXPECT_THROW(load_documents(dir.path() / "missing.tsv", 1), InputError);
}

TEST(LoadDocuments, HeadTruncation) {
  TempDir dir;
  const auto p = dir.write("docs.tsv", "a\tone two three four five\n");
  const Corpus c = load_documents(p, 1, 3);
  EXPECT_EQ(strings_of(c, 0), (Tokens{"one", "two", "three"}));
  EXPECT_EQ(c.vocab.find("four"), nullptr);
}

TEST(LoadDocuments, InvariantsAndRoundTrip) {
  std::mt19937_64 rng(17);
  std::vector<DocumentRecord> records;
  for (int i = 0; i < 60; ++i) {
    std::string text;
    const int len = std::uniform_int_distribution<int>(0, 30)(rng);
    for (int j = 0; j < len; ++j) text += "w" + std::to_string(rng() % 25) + (j % 3 ? " " : ", ");
    records.push_back({"id" + std::to_string(i), text});
  }
  const Corpus c = build_corpus(records, 3, 12);
  for (std::size_t n = 0; n < c.n_nodes(); ++n) {
    ASSERT_FALSE(c.docs[n].empty());
    ASSERT_LE(c.docs[n].size(), 12u);
    for (TokenId t : c.docs[n]) {
      ASSERT_LT(t, c.vocab.size());
      if (t != kEmptyToken) {
        ASSERT_GE(c.vocab.count(t), 3u);
        ASSERT_EQ(*c.vocab.find(c.vocab.string_of(t)), t);
      }
    }
  }
  TempDir dir;
  save_documents(c, dir.path() / "docs.tsv");
  EXPECT_EQ(load_documents(dir.path() / "docs.tsv", 3, 12), c);
}

}  // namespace
}  // namespace matan
