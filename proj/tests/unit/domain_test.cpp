#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "common/error.hpp"
#include "common/text.hpp"
#include "domain/context.hpp"
#include "domain/types.hpp"

using namespace part;

namespace {

std::string words(std::size_t n, const std::string& w = "tok")
{
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) s += ' ';
        s += w;
    }
    return s;
}

// Greedy from the newest message: keep while the rendered total fits.
std::size_t oracle_kept(const std::vector<std::size_t>& costs, std::size_t budget)
{
    std::size_t used = 0, kept = 0;
    for (auto it = costs.rbegin(); it != costs.rend(); ++it) {
        if (used + *it > budget) break;
        used += *it;
        ++kept;
    }
    return kept;
}

}  // namespace

TEST(EstimateTokens, Basics)
{
    EXPECT_EQ(estimate_tokens(""), 0u);
    EXPECT_EQ(estimate_tokens("a b c"), 3u);
    EXPECT_EQ(estimate_tokens("  spaced   out\n\ttext  "), 3u);
    EXPECT_EQ(estimate_tokens("don't-stop"), 1u);
}

TEST(EstimateTokens, CjkCodePointsCountSingly)
{
    EXPECT_EQ(estimate_tokens("你好世界"), 4u);
    EXPECT_EQ(estimate_tokens("Dune2是好电影"), 5u);
    EXPECT_EQ(estimate_tokens("こんにちは world"), 6u);
}

TEST(EstimateTokens, DoublingIsAdditive)
{
    std::mt19937_64 rng(1234);
    const std::vector<std::string> pieces = {"a", "tea", "Dune", "2", "你", "好", "x-y", "!!", "é", "ok"};
    for (int round = 0; round < 100; ++round) {
        std::string s;
        const std::size_t n = 1 + rng() % 12;
        for (std::size_t i = 0; i < n; ++i) {
            if (i) s += ' ';
            s += pieces[rng() % pieces.size()];
        }
        EXPECT_EQ(estimate_tokens(s + " " + s), 2 * estimate_tokens(s)) << s;
    }
}

TEST(EstimateTokens, MonotoneUnderAppend)
{
    std::mt19937_64 rng(99);
    std::string s;
    std::size_t prev = 0;
    for (int i = 0; i < 300; ++i) {
        const std::size_t pick = rng() % 6;
        s += pick == 3 ? std::string("你") : std::string(1, "ab \n.x"[pick]);
        const std::size_t now = estimate_tokens(s);
        EXPECT_GE(now, prev);
        prev = now;
    }
}

TEST(RenderContext, CostsOnePerRoleLabel)
{
    std::vector<Message> msgs = {make_message(Role::user, "hello there", 1),
                                 make_message(Role::assistant, "hi", 2)};
    EXPECT_EQ(render_context(msgs), "user: hello there\nassistant: hi");
    EXPECT_EQ(context_tokens(msgs), estimate_tokens(render_context(msgs)));
    EXPECT_EQ(context_tokens(msgs), 5u);
}

TEST(TruncateContext, UnderBudgetIsIdentity)
{
    DialogueContext ctx{"s", "u", {make_message(Role::user, "short", 1)}, 2048};
    EXPECT_EQ(truncate_context(ctx), ctx);
}

TEST(TruncateContext, TenMessagesOfThreeHundredKeepsNewestSix)
{
    DialogueContext ctx;
    ctx.token_budget = 2048;
    for (int i = 0; i < 10; ++i)
        ctx.messages.push_back(make_message(i % 2 ? Role::assistant : Role::user, words(300, "w" + std::to_string(i)), i));
    const auto out = truncate_context(ctx);
    ASSERT_EQ(out.messages.size(), 6u);
    EXPECT_EQ(out.messages.front(), ctx.messages[4]);
    EXPECT_EQ(out.messages.back(), ctx.messages[9]);
    EXPECT_LE(context_tokens(out.messages), 2048u);
}

TEST(TruncateContext, MatchesGreedyOracle)
{
    std::mt19937_64 rng(7);
    for (int round = 0; round < 200; ++round) {
        DialogueContext ctx;
        ctx.token_budget = 50 + rng() % 400;
        const std::size_t n = 1 + rng() % 15;
        std::vector<std::size_t> costs;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t len = 1 + rng() % 60;
            const Role role = (i + 1 == n || rng() % 2) ? Role::user : Role::assistant;
            ctx.messages.push_back(make_message(role, words(len), static_cast<Timestamp>(i)));
            costs.push_back(len + 1);
        }
        if (costs.back() > ctx.token_budget) {
            EXPECT_THROW(truncate_context(ctx), Error);
            continue;
        }
        const auto out = truncate_context(ctx);
        EXPECT_EQ(out.messages.size(), oracle_kept(costs, ctx.token_budget)) << "round " << round;
        EXPECT_TRUE(std::equal(out.messages.rbegin(), out.messages.rend(), ctx.messages.rbegin()));
    }
}

TEST(TruncateContext, OversizedNewestMessageThrows)
{
    DialogueContext ctx;
    ctx.messages.push_back(make_message(Role::user, words(5000), 1));
    try {
        truncate_context(ctx);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::most_recent_message_too_large);
    }
}

TEST(NormalizeTopic, FoldsAndCollapses)
{
    EXPECT_EQ(normalize_topic("  Hiking \t Trails "), "hiking trails");
    EXPECT_EQ(normalize_topic("ÉTÉ"), "été");
    EXPECT_EQ(normalize_topic("Фильмы"), "фильмы");
    EXPECT_EQ(normalize_topic(normalize_topic("Sci-Fi  Films")), normalize_topic("Sci-Fi  Films"));
}

TEST(RefinedQuery, Invariants)
{
    EXPECT_THROW(RefinedQuery("   ", QueryOrigin::rewritten), Error);
    EXPECT_THROW(RefinedQuery(std::string(513, 'a'), QueryOrigin::rewritten), Error);
    const RefinedQuery q("  Dune 2 reviews ", QueryOrigin::rewritten);
    EXPECT_EQ(q.text(), "Dune 2 reviews");
    EXPECT_NO_THROW(RefinedQuery(std::string(512, 'a'), QueryOrigin::greeting_seed));
}

TEST(Message, BlankTextRejected)
{
    EXPECT_THROW(make_message(Role::user, " \n ", 0), Error);
}

TEST(Text, Utf8RoundTrip)
{
    const std::string s = "héllo 你好 \xF0\x9F\x98\x80";
    EXPECT_EQ(text::encode(text::decode(s)), s);
    EXPECT_EQ(text::length(s), 10u);
    EXPECT_EQ(text::truncate(s, 2), "hé");
}
