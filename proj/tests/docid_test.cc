#include "genret/docid.h"

#include <gtest/gtest.h>

#include "genret/rng.h"
#include "genret/synthetic.h"
#include "test_util.h"

namespace genret {
namespace {

using testing::doc;

TEST(KeywordDocid, ShortTitleUsesReversedUrl) {
  auto d = doc("x", "body", "https://en.wikipedia.org/wiki/Albert_Einstein", "Albert Einstein");
  EXPECT_EQ(build_keyword_docid(d, {}),
            (RawDocid{"albert", "einstein", "wiki", "en", "wikipedia", "org"}));
}

TEST(KeywordDocid, LongTitleUsesTitleAndDomain) {
  auto d = doc("x", "body", "https://site.com/a/b", "A Very Long Descriptive Title");
  EXPECT_EQ(build_keyword_docid(d, {}),
            (RawDocid{"a", "very", "long", "descriptive", "title", "site", "com"}));
}

TEST(KeywordDocid, EmptyIsError) {
  EXPECT_THROW(build_keyword_docid(doc("x", "body"), {}), Error);
}

TEST(KeywordDocid, ThresholdIsConfigurable) {
  auto d = doc("x", "body", "http://h.org/p", "one two three");
  EXPECT_EQ(build_keyword_docid(d, {3}), (RawDocid{"p", "h", "org"}));
  EXPECT_EQ(build_keyword_docid(d, {2}), (RawDocid{"one", "two", "three", "h", "org"}));
}

TEST(UrlSegments, StripsSchemeQueryFragment) {
  EXPECT_EQ(url_segments("https://a.com//x/y/?q=1#frag"),
            (std::vector<std::string>{"a.com", "x", "y"}));
  EXPECT_EQ(url_segments("a.com/x#f"), (std::vector<std::string>{"a.com", "x"}));
  EXPECT_TRUE(url_segments("").empty());
}

TEST(KeywordDocid, PureFunction) {
  auto d = doc("x", "body", "https://s.org/k/l", "t");
  EXPECT_EQ(build_keyword_docid(d, {}), build_keyword_docid(d, {}));
}

TEST(KeywordDocid, SharedReversedPathSharesPrefix) {
  // Reversal puts the deepest segments first, so URLs sharing their trailing
  // path share a docid prefix.
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    std::string tail = "/s" + std::to_string(rng.below(5)) + "/leaf" + std::to_string(trial);
    auto a = doc("a", "b", "https://d" + std::to_string(rng.below(100)) + ".com/x" + tail, "t");
    auto b = doc("b", "b", "https://e" + std::to_string(rng.below(100)) + ".net" + tail, "u");
    auto da = build_keyword_docid(a, {});
    auto db = build_keyword_docid(b, {});
    ASSERT_GE(da.size(), 2u);
    EXPECT_TRUE(std::equal(da.begin(), da.begin() + 2, db.begin()));
  }
}

TEST(MakeUnique, Examples) {
  EXPECT_EQ(make_unique({{"a", "b"}, {"a", "b"}, {"c"}}),
            (std::vector<RawDocid>{{"a", "b"}, {"a", "b", "#2"}, {"c"}}));
  std::vector<RawDocid> distinct{{"a"}, {"b"}, {"a", "b"}};
  EXPECT_EQ(make_unique(distinct), distinct);
  EXPECT_EQ(make_unique({{"x"}, {"x"}, {"x"}}),
            (std::vector<RawDocid>{{"x"}, {"x", "#2"}, {"x", "#3"}}));
}

TEST(MakeUnique, AdversarialCollisions) {
  SyntheticConfig config;
  config.docs = 300;
  config.duplicate_fraction = 0.5;
  auto synth = make_synthetic_corpus(config);
  auto corpus = make_corpus(synth.documents);
  std::vector<RawDocid> raw;
  for (const auto& d : corpus.documents) raw.push_back(build_keyword_docid(d, {}));
  EXPECT_LT(count_distinct(raw), raw.size());
  EXPECT_EQ(count_distinct(make_unique(raw)), raw.size());
  auto index = build_keyword_index(corpus, {});
  EXPECT_EQ(count_distinct(index.docids), corpus.size());
}

TEST(Vocabulary, Bijection) {
  DocidVocabulary vocab(DocidKind::kKeyword, {"b", "a", "c"});
  ASSERT_EQ(vocab.size(), 4u);
  EXPECT_EQ(vocab.sentinel(), 3u);
  EXPECT_EQ(vocab.token(vocab.sentinel()), "</d>");
  for (TokenId t = 0; t < vocab.size(); ++t) EXPECT_EQ(vocab.id(vocab.token(t)), t);
  EXPECT_FALSE(vocab.id("zz").has_value());
  EXPECT_EQ(vocab.decode(vocab.encode({"c", "a"})), (RawDocid{"c", "a"}));
  EXPECT_THROW(vocab.encode({"zz"}), Error);
  EXPECT_THROW(DocidVocabulary(DocidKind::kKeyword, {"a", "a"}), Error);
  EXPECT_THROW(DocidVocabulary(DocidKind::kKeyword, {"</d>"}), Error);
}

TEST(Atomic, Examples) {
  auto corpus = make_corpus({doc("p", "x"), doc("q", "y"), doc("r", "z")});
  auto index = assign_atomic(corpus);
  ASSERT_EQ(index.docids.size(), 3u);
  EXPECT_EQ(index.vocab.size(), 4u);  // three tokens plus the sentinel
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(index.docids[i].tokens, std::vector<TokenId>{TokenId(i)});
    EXPECT_EQ(index.docids[i].doc_key, corpus.documents[i].doc_key);
  }
  auto again = assign_atomic(corpus);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(again.docids[i].tokens, index.docids[i].tokens);
}

TEST(KeywordIndex, FallsBackToAtomicWithDiagnostic) {
  auto corpus = make_corpus({doc("p", "x", "http://a.org/u", "t"), doc("q", "y")});
  auto index = build_keyword_index(corpus, {});
  EXPECT_EQ(index.diagnostics.size(), 1u);
  EXPECT_EQ(index.vocab.decode(index.docids[1].tokens), (RawDocid{"atomic_1"}));
}

TEST(DocidFiles, RoundTrip) {
  auto dir = testing::temp_dir("docid_files");
  auto corpus = make_corpus({doc("p", "x", "http://a.org/u", "t"),
                             doc("q", "y", "http://a.org/u", "t"),
                             doc("r", "z", "http://b.org/v/w", "t")});
  auto index = build_keyword_index(corpus, {});
  write_docids_tsv((dir / "d.tsv").string(), index);
  write_vocabulary((dir / "v.json").string(), index.vocab);
  auto back = read_docid_index((dir / "d.tsv").string(), (dir / "v.json").string());
  EXPECT_EQ(back.vocab.kind(), DocidKind::kKeyword);
  EXPECT_EQ(back.vocab.content_tokens(), index.vocab.content_tokens());
  ASSERT_EQ(back.docids.size(), index.docids.size());
  for (std::size_t i = 0; i < index.docids.size(); ++i) {
    EXPECT_EQ(back.docids[i].tokens, index.docids[i].tokens);
    EXPECT_EQ(back.docids[i].doc_key, index.docids[i].doc_key);
  }
  testing::write_file(dir / "bad.json", "{oops");
  EXPECT_THROW(read_vocabulary((dir / "bad.json").string()), Error);
}

TEST(DocidKindNames, Parse) {
  EXPECT_EQ(parse_docid_kind("pq"), DocidKind::kPq);
  EXPECT_EQ(parse_docid_kind("keyword"), DocidKind::kKeyword);
  EXPECT_EQ(parse_docid_kind("atomic"), DocidKind::kAtomic);
  EXPECT_THROW(parse_docid_kind("bogus"), Error);
}

}  // namespace
}  // namespace genret
