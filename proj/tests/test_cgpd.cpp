#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "skillops/cgpd.hpp"
#include "skillops/error.hpp"
#include "test_util.hpp"

using namespace skillops;
using skillops::testing::library;
using skillops::testing::skill;
using skillops::testing::types;

namespace {

std::vector<SkillContract> chain3()
{
    return {skill("s0", types({"in"}), types({"a"})), skill("s1", types({"a"}), types({"b"})),
            skill("s2", types({"b"}), types({"c"}))};
}

std::vector<SkillContract> diamond()
{
    return {skill("s0", types({"in"}), types({"a"})), skill("s1", types({"a", "p1"}), types({"b"})),
            skill("s2", types({"a", "p2"}), types({"c"})), skill("s3", types({"b", "c"}), types({"out"}))};
}

RiskValues values(const std::vector<SkillContract>& skills, std::initializer_list<double> v)
{
    RiskValues out;
    auto it = v.begin();
    for (const auto& s : skills) {
        out[s.id] = *it++;
    }
    return out;
}

// Plain re-statement of the update rule, iterated a fixed number of times.
std::vector<double> brute_force(const Hseg& g, const std::vector<double>& loc, double alpha, int sweeps)
{
    std::vector<double> cur = loc;
    for (int t = 0; t < sweeps; ++t) {
        std::vector<double> next(cur.size());
        for (Hseg::Index s = 0; s < g.size(); ++s) {
            double in = loc[s];
            bool any = false;
            for (Hseg::Index p = 0; p < g.size(); ++p) {
                if (g.has_edge(p, s, EdgeType::dep)) {
                    in = any ? std::max(in, cur[p]) : cur[p];
                    any = true;
                }
            }
            next[s] = (1 - alpha) * loc[s] + alpha * in;
        }
        cur = next;
    }
    return cur;
}

CgpdConfig tight(double alpha)
{
    CgpdConfig cfg;
    cfg.alpha = alpha;
    cfg.tolerance = 1e-12;
    cfg.max_iters = 10000;
    return cfg;
}

}  // namespace

TEST(Cgpd, ChainClosedForm)
{
    auto skills = chain3();
    auto g = build_hseg(skills);
    auto r = propagate(g, values(skills, {1, 0, 0}), tight(0.5));
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.at(SkillId("s0")), 1.0, 1e-12);
    EXPECT_NEAR(r.at(SkillId("s1")), 0.5, 1e-12);
    EXPECT_NEAR(r.at(SkillId("s2")), 0.25, 1e-12);
}

TEST(Cgpd, IsolatedNodeKeepsLocalRisk)
{
    std::vector<SkillContract> skills = {skill("x", types({"a"}), types({"b"}))};
    auto r = propagate(build_hseg(skills), values(skills, {0.7}), CgpdConfig{});
    EXPECT_DOUBLE_EQ(r.at(SkillId("x")), 0.7);
    EXPECT_TRUE(r.converged);
}

TEST(Cgpd, Diamond)
{
    auto skills = diamond();
    auto g = build_hseg(skills);
    auto r = propagate(g, values(skills, {0.8, 0, 0.4, 0}), tight(0.5));
    EXPECT_NEAR(r.at(SkillId("s0")), 0.8, 1e-12);
    EXPECT_NEAR(r.at(SkillId("s1")), 0.4, 1e-12);
    EXPECT_NEAR(r.at(SkillId("s2")), 0.6, 1e-12);
    EXPECT_NEAR(r.at(SkillId("s3")), 0.3, 1e-12);
    auto exact = propagate_acyclic(g, values(skills, {0.8, 0, 0.4, 0}), 0.5);
    ASSERT_TRUE(exact.has_value());
    EXPECT_DOUBLE_EQ(exact->at(SkillId("s3")), 0.3);
}

TEST(Cgpd, Errors)
{
    auto skills = chain3();
    auto g = build_hseg(skills);
    RiskValues partial = {{SkillId("s0"), 0.1}};
    try {
        (void)propagate(g, partial, CgpdConfig{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingRiskEntry);
    }
    EXPECT_THROW((void)propagate(g, values(skills, {0.1, 2.0, 0.0}), CgpdConfig{}), Error);
    CgpdConfig bad;
    bad.alpha = 1.0;
    EXPECT_THROW(bad.validate(), Error);
    EXPECT_THROW((void)propagate(g, values(skills, {0, 0, 0}), bad), Error);
}

TEST(Cgpd, IterationCapReportsNotConverged)
{
    auto skills = chain3();
    CgpdConfig cfg;
    cfg.max_iters = 1;
    cfg.tolerance = 1e-15;
    auto r = propagate(build_hseg(skills), values(skills, {1, 0, 0}), cfg);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.iterations_used, 1U);
}

TEST(Cgpd, RandomGraphsMatchBruteForce)
{
    Rng rng(4);
    for (int trial = 0; trial < 60; ++trial) {
        auto skills = skillops::testing::random_skills(rng, 1 + rng.bounded(30), 4);
        auto g = build_hseg(skills);
        std::vector<double> loc(g.size());
        RiskValues local;
        for (Hseg::Index i = 0; i < g.size(); ++i) {
            loc[i] = rng.uniform();
            local[g.nodes()[i]] = loc[i];
        }
        const double alpha = std::array<double, 3>{0.3, 0.5, 0.9}[trial % 3];
        auto r = propagate(g, local, tight(alpha));
        ASSERT_TRUE(r.converged);
        auto oracle = brute_force(g, loc, alpha, 400);
        for (Hseg::Index i = 0; i < g.size(); ++i) {
            EXPECT_NEAR(r.at(g.nodes()[i]), oracle[i], 1e-9);
            EXPECT_GE(r.at(g.nodes()[i]), 0.0);
            EXPECT_LE(r.at(g.nodes()[i]), 1.0);
        }
        // residuals shrink by at least alpha each sweep
        for (std::size_t t = 1; t < r.residuals.size(); ++t) {
            EXPECT_LE(r.residuals[t], alpha * r.residuals[t - 1] + 1e-15);
        }
        // the topological sweep, when defined, lands on the same point
        if (auto exact = propagate_acyclic(g, local, alpha)) {
            for (const auto& [id, v] : *exact) {
                EXPECT_NEAR(v, r.at(id), 1e-9);
            }
        }
    }
}

TEST(Cgpd, AcyclicSweepReturnsNulloptOnCycle)
{
    std::vector<SkillContract> skills = {skill("a", types({"x"}), types({"y"})), skill("b", types({"y"}), types({"x"}))};
    auto g = build_hseg(skills);
    EXPECT_FALSE(propagate_acyclic(g, values(skills, {0.2, 0.9}), 0.5).has_value());
    // iteration still handles the cycle: a = 0.1 + 0.5 b, b = 0.45 + 0.5 a
    auto r = propagate(g, values(skills, {0.2, 0.9}), tight(0.5));
    EXPECT_NEAR(r.at(SkillId("a")), (0.1 + 0.225) / 0.75, 1e-10);
    EXPECT_NEAR(r.at(SkillId("b")), 0.45 + 0.5 * (0.1 + 0.225) / 0.75, 1e-10);
}

TEST(Cgpd, InitializationDoesNotMatter)
{
    Rng rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        auto skills = skillops::testing::random_skills(rng, 2 + rng.bounded(25), 4);
        auto g = build_hseg(skills);
        RiskValues local;
        RiskValues init;
        for (const auto& id : g.nodes()) {
            local[id] = rng.uniform();
            init[id] = rng.uniform();
        }
        CgpdConfig cfg;
        cfg.max_iters = 1000;
        auto a = propagate(g, local, cfg);
        auto b = propagate_from(g, local, init, cfg);
        ASSERT_TRUE(a.converged && b.converged);
        for (const auto& id : g.nodes()) {
            EXPECT_LE(std::abs(a.at(id) - b.at(id)), 2 * cfg.tolerance);
        }
    }
}

TEST(Cgpd, TriggerRule)
{
    auto lib = library({skill("gap", types({"a"}), types({"b"}), "", false), skill("ok", types({"c"}), types({"d"})),
                        skill("low", types({"e"}), types({"f"}), "", false)});
    auto g = build_hseg(lib);
    RiskMap risk;
    risk.values = {{SkillId("gap"), 0.8}, {SkillId("ok"), 0.8}, {SkillId("low"), 0.4}};
    auto t = trigger_set(g, risk, lib, 0.5);
    ASSERT_EQ(t.size(), 1U);
    EXPECT_EQ(t[0], (ValidatorTrigger{SkillId("gap"), 0.8}));
}

TEST(Cgpd, StopsWithinToleranceOfFixedPoint)
{
    Rng rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        auto skills = skillops::testing::random_skills(rng, 2 + rng.bounded(60), 4);
        auto g = build_hseg(skills);
        RiskValues local;
        RiskValues init;
        for (const auto& id : g.nodes()) {
            local[id] = rng.uniform();
            init[id] = rng.uniform();
        }
        CgpdConfig cfg;
        cfg.alpha = 0.9;
        cfg.tolerance = 1e-8;
        cfg.max_iters = 5000;
        auto exact = propagate(g, local, tight(0.9));
        for (const auto& start : {local, init}) {
            auto r = propagate_from(g, local, start, cfg);
            ASSERT_TRUE(r.converged);
            for (const auto& id : g.nodes()) {
                EXPECT_LE(std::abs(r.at(id) - exact.at(id)), cfg.tolerance);
            }
        }
    }
}
