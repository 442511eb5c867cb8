#include <gtest/gtest.h>

#include <cctype>
#include <cmath>
#include <map>

#include "skillops/retrieval.hpp"
#include "test_util.hpp"

using namespace skillops;
using skillops::testing::skill;

namespace {

std::vector<std::string> split_words(const std::string& text)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        if (std::isalnum(static_cast<unsigned char>(ch))) {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) {
        out.push_back(cur);
    }
    return out;
}

std::vector<double> bm25_oracle(const std::vector<std::string>& docs, const std::vector<std::string>& query)
{
    std::vector<std::vector<std::string>> toks;
    double total = 0;
    for (const auto& d : docs) {
        toks.push_back(split_words(d));
        total += static_cast<double>(toks.back().size());
    }
    const double n = static_cast<double>(docs.size());
    const double avgdl = total / n;
    std::set<std::string> terms(query.begin(), query.end());
    std::vector<double> out(docs.size(), 0.0);
    for (const auto& term : terms) {
        double df = 0;
        for (const auto& t : toks) {
            df += std::count(t.begin(), t.end(), term) > 0 ? 1 : 0;
        }
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        for (std::size_t d = 0; d < docs.size(); ++d) {
            const double tf = static_cast<double>(std::count(toks[d].begin(), toks[d].end(), term));
            const double len = static_cast<double>(toks[d].size());
            out[d] += idf * tf * 2.2 / (tf + 1.2 * (0.25 + 0.75 * len / avgdl));
        }
    }
    return out;
}

}  // namespace

TEST(Retrieval, Tokenize)
{
    EXPECT_EQ(tokenize("Parse-HTML, to JSON!"), (std::vector<std::string>{"parse", "html", "to", "json"}));
    EXPECT_TRUE(tokenize("  --  ").empty());
}

TEST(Retrieval, Bm25HandComputed)
{
    // two docs: "goal x\nfoo" and "goal y\nbar bar"; query "foo"
    auto a = skill("a", {}, {}, "foo", true, "goal x");
    auto b = skill("b", {}, {}, "bar bar", true, "goal y");
    std::vector<SkillContract> docs = {a, b};
    Bm25Index idx(docs);
    auto s = idx.scores({"foo"});
    // df=1, N=2: idf = ln(1 + 1.5/1.5) = ln 2; |d1|=3, avgdl=3.5
    const double expected = std::log(2.0) * 2.2 / (1.0 + 1.2 * (0.25 + 0.75 * 3.0 / 3.5));
    EXPECT_NEAR(s[0], expected, 1e-12);
    EXPECT_DOUBLE_EQ(s[1], 0.0);
    // repeated query terms count once
    EXPECT_EQ(idx.scores({"foo", "foo"}), s);
}

TEST(Retrieval, Bm25MatchesOracle)
{
    Rng rng(17);
    const char* vocab[] = {"parse", "table", "json", "html", "extract", "merge", "clean", "rows"};
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<SkillContract> docs;
        std::vector<std::string> texts;
        for (std::size_t d = 0, n = 1 + rng.bounded(12); d < n; ++d) {
            std::string body;
            for (std::size_t w = 0, m = 1 + rng.bounded(10); w < m; ++w) {
                body += std::string(vocab[rng.bounded(8)]) + " ";
            }
            docs.push_back(skill("d" + std::to_string(d), {}, {}, body, true, vocab[rng.bounded(8)]));
            texts.push_back(retrieval_text(docs.back()));
        }
        std::vector<std::string> query;
        for (std::size_t q = 0, m = 1 + rng.bounded(4); q < m; ++q) {
            query.push_back(vocab[rng.bounded(8)]);
        }
        auto got = Bm25Index(docs).scores(query);
        auto want = bm25_oracle(texts, query);
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t d = 0; d < got.size(); ++d) {
            EXPECT_NEAR(got[d], want[d], 1e-12);
        }
    }
}

TEST(Retrieval, HashingVectorizer)
{
    // FNV-1a 64 of "a" is 0xaf63dc4c8601ec8c
    EXPECT_EQ(HashingVectorizer::bucket("a"), 0xec8cU);
    auto v = HashingVectorizer::transform({"x", "y", "x"});
    EXPECT_NEAR(HashingVectorizer::cosine(v, v), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(HashingVectorizer::cosine(v, HashingVectorizer::transform({"zzz"})), 0.0);
    EXPECT_DOUBLE_EQ(HashingVectorizer::cosine(v, HashingVectorizer::transform({})), 0.0);
    // (2,1) . (1,1) / (sqrt 5 * sqrt 2)
    EXPECT_NEAR(HashingVectorizer::cosine(v, HashingVectorizer::transform({"x", "y"})), 3.0 / std::sqrt(10.0), 1e-12);
}
