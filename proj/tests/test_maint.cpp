#include <gtest/gtest.h>

#include <algorithm>

#include "skillops/error.hpp"
#include "skillops/maint.hpp"
#include "test_util.hpp"

using namespace skillops;
using skillops::testing::add_calls;
using skillops::testing::library;
using skillops::testing::skill;
using skillops::testing::types;

namespace {

std::vector<ActionKind> kinds(const std::vector<MaintenanceAction>& actions)
{
    std::vector<ActionKind> out;
    for (const auto& a : actions) {
        out.push_back(a.kind());
    }
    return out;
}

ExecutionTrace random_trace(Rng& rng, const Library& lib, std::size_t calls)
{
    ExecutionTrace trace;
    std::size_t step = 0;
    for (std::size_t i = 0; i < calls; ++i) {
        const auto& s = lib.skills[rng.bounded(lib.size())];
        trace.entries.push_back({"task", s.id, step++, rng.bounded(2) == 0 ? Outcome::failure : Outcome::success,
                                 std::string("e")});
    }
    return trace;
}

Library random_library(Rng& rng, std::size_t n)
{
    auto skills = skillops::testing::random_skills(rng, n, 5);
    // a few exact clones and emptied artifact dirs
    for (std::size_t i = 0, k = rng.bounded(4); i < k && !skills.empty(); ++i) {
        auto c = skills[rng.bounded(skills.size())];
        c.id = SkillId(c.id.str() + "-dup" + std::to_string(i));
        if (rng.bounded(2) == 0) {
            c.artifact_dirs = {};
        }
        if (std::none_of(skills.begin(), skills.end(), [&](const auto& s) { return s.id == c.id; })) {
            skills.push_back(c);
        }
    }
    return library(skills);
}

}  // namespace

TEST(Maint, CleanLibraryIsUntouched)
{
    auto lib = library({skill("a", types({"html"}), types({"json"})), skill("b", types({"json"}), types({"csv"})),
                        skill("c", types({"pdf"}), types({"text"}))});
    auto result = run_maintenance(lib, ExecutionTrace{});
    EXPECT_TRUE(result.report.actions.empty());
    EXPECT_EQ(result.library, lib);
    EXPECT_EQ(library_digest(result.library), library_digest(lib));
    EXPECT_EQ(result.report.external_model_calls, 0U);
}

TEST(Maint, HashClonesMergeIntoHighestUtility)
{
    auto lib = library({skill("a", types({"p1"}), types({"q1"}), "shared body"),
                        skill("b", types({"p2"}), types({"q2"}), "shared body"),
                        skill("c", types({"p3"}), types({"q3"}), "shared body")});
    ExecutionTrace trace;
    add_calls(trace, "a", 2, 8);
    add_calls(trace, "b", 5, 5);
    add_calls(trace, "c", 9, 1);
    auto result = run_maintenance(lib, trace);
    ASSERT_EQ(result.report.count(ActionKind::merge), 2U);
    for (const auto& a : result.report.actions) {
        if (a.kind() == ActionKind::merge) {
            EXPECT_EQ(std::get<action::Merge>(a.op).keep, SkillId("c"));
            EXPECT_EQ(a.reason, "body-hash-collision");
        }
    }
    EXPECT_EQ(result.report.size_before, 3U);
    EXPECT_EQ(result.report.size_after, 1U);
    EXPECT_EQ(result.library.skills[0].id, SkillId("c"));
}

TEST(Maint, LowJaccardDepGetsAdapter)
{
    auto lib = library({skill("i", types({"src"}), types({"a"})), skill("j", types({"a", "b", "c", "d"}), types({"z"}))});
    ASSERT_EQ(uncovered_dep_edges(lib).size(), 1U);
    auto result = run_maintenance(lib, ExecutionTrace{});
    ASSERT_EQ(result.report.actions.size(), 1U);
    EXPECT_EQ(result.report.actions[0].op, ActionOp(action::AddAdapter{SkillId("i"), SkillId("j")}));
    EXPECT_EQ(result.report.actions[0].outcome, "applied");
    ASSERT_EQ(result.library.adapters.size(), 1U);
    const auto& ad = result.library.adapters[0];
    EXPECT_EQ(ad.preconditions, types({"a"}));
    EXPECT_TRUE(std::includes(lib.skills[1].preconditions.begin(), lib.skills[1].preconditions.end(),
                              ad.artifact_types.begin(), ad.artifact_types.end()));
    EXPECT_TRUE(uncovered_dep_edges(result.library).empty());
    EXPECT_EQ(result.library.size(), 2U);
    EXPECT_GT(result.report.H_after, result.report.H_before);

    // the adapter's own contract is a validated skill with the documented goal
    auto c = adapter_contract(ad);
    EXPECT_EQ(c.goal, "adapt:i:j");
    EXPECT_TRUE(c.has_validator());
}

TEST(Maint, RepairRestoresScripts)
{
    auto broken = skill("broken", types({"x"}), types({"y"}), "same body");
    broken.artifact_dirs.scripts.clear();
    auto sibling = skill("sibling", types({"u"}), types({"v"}), "same body");
    sibling.artifact_dirs.scripts = {{"run.txt", "echo run\n"}};
    auto lib = library({broken, sibling});

    auto fixed = apply_action(lib, {action::Repair{SkillId("broken"), SkillId("sibling")}, "test", {}});
    ASSERT_EQ(fixed.find(SkillId("broken"))->artifact_dirs.scripts.size(), 1U);
    EXPECT_EQ(fixed.find(SkillId("broken"))->artifact_dirs.scripts[0].name, "run.txt");
    EXPECT_EQ(fixed.find(SkillId("broken"))->artifact_dirs.scripts[0].content, "echo run\n");

    // without a named sibling the hash sibling is found by search
    auto searched = apply_action(lib, {action::Repair{SkillId("broken"), std::nullopt}, "test", {}});
    EXPECT_EQ(searched, fixed);

    auto lonely = library({broken});
    EXPECT_EQ(apply_action_in_place(lonely, {action::Repair{SkillId("broken"), std::nullopt}, "test", {}}),
              "no-op:no-sibling");
    EXPECT_TRUE(lonely.skills[0].artifact_dirs.scripts.empty());
}

TEST(Maint, AddValidatorInheritsChecklist)
{
    auto gap = skill("gap", types({"x"}), types({"y"}), "same body", false);
    auto donor = skill("donor", types({"x"}), types({"y"}), "same body");
    donor.checklist = {"rows add up", "header present"};
    auto lib = library({gap, donor});
    auto out = apply_action(lib, {action::AddValidator{SkillId("gap"), std::nullopt}, "test", {}});
    const auto* s = out.find(SkillId("gap"));
    EXPECT_EQ(s->validator_kind, ValidatorKind::checklist);
    EXPECT_EQ(s->checklist, donor.checklist);

    auto alone = library({gap});
    EXPECT_EQ(apply_action_in_place(alone, {action::AddValidator{SkillId("gap"), std::nullopt}, "test", {}}),
              "applied:canonical");
    EXPECT_EQ(alone.skills[0].checklist, std::vector<std::string>{std::string(kCanonicalChecklistItem)});
}

TEST(Maint, RetireNeedsDuplicate)
{
    auto lib = library({skill("solo", types({"x"}), types({"y"})), skill("other", types({"p"}), types({"q"}))});
    try {
        (void)apply_action(lib, {action::Retire{SkillId("solo")}, "test", {}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::RetireRequiresDuplicate);
    }
    auto dup = library({skill("a", types({"x"}), types({"y"})), skill("b", types({"x"}), types({"y"}))});
    auto out = apply_action(dup, {action::Retire{SkillId("a")}, "test", {}});
    EXPECT_EQ(out.size(), 1U);
}

TEST(Maint, MergeMustBeJustified)
{
    auto lib = library({skill("a", types({"x"}), types({"y"})), skill("b", types({"p"}), types({"q"}))});
    EXPECT_THROW((void)apply_action(lib, {action::Merge{SkillId("a"), SkillId("a")}, "t", {}}), Error);
    try {
        (void)apply_action(lib, {action::Merge{SkillId("a"), SkillId("b")}, "t", {}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IllegalMerge);
    }
    EXPECT_THROW((void)apply_action(lib, {action::Retire{SkillId("nope")}, "t", {}}), Error);
}

TEST(Maint, MergeRemapsAdapters)
{
    auto lib = library({skill("src", types({"s"}), types({"a"})), skill("dst", types({"a", "b", "c", "d"}), types({"z"})),
                        skill("dst-copy", types({"a", "b", "c", "d"}), types({"z"}))});
    lib.adapters.push_back(make_adapter(lib.skills[0], lib.skills[2]));
    auto out = apply_action(lib, {action::Merge{SkillId("dst"), SkillId("dst-copy")}, "t", {}});
    ASSERT_EQ(out.adapters.size(), 1U);
    EXPECT_EQ(out.adapters[0].dst, SkillId("dst"));
}

TEST(Maint, PlanActionsRules)
{
    auto lib = library({skill("gap", types({"a"}), types({"b"}), "", false), skill("flaky", types({"c"}), types({"d"})),
                        skill("both", types({"e"}), types({"f"}), "", false)});
    ExecutionTrace trace;
    add_calls(trace, "flaky", 2, 8);
    add_calls(trace, "both", 2, 8);
    auto g = build_hseg(lib);
    auto health = library_health(lib, g, trace);
    RiskMap risk;
    risk.values = {{SkillId("gap"), 0.9}, {SkillId("flaky"), 0.1}, {SkillId("both"), 0.1}};
    MaintenanceConfig cfg;
    cfg.theta_u = 0.0;
    auto actions = plan_actions(lib, g, health, risk, cfg);
    // gap's risk also exceeds theta_risk, so it is repaired as well as validated
    ASSERT_EQ(actions.size(), 5U);
    EXPECT_EQ(kinds(actions), (std::vector<ActionKind>{ActionKind::repair, ActionKind::repair, ActionKind::repair,
                                                        ActionKind::add_validator, ActionKind::add_validator}));
    EXPECT_EQ(actions[0].subject(), SkillId("both"));
    EXPECT_EQ(actions[1].subject(), SkillId("flaky"));
    EXPECT_EQ(actions[1].reason, "failure-rate");
    EXPECT_EQ(actions[2].subject(), SkillId("gap"));
    EXPECT_EQ(actions[2].reason, "cgpd-risk");
    EXPECT_EQ(actions[3].subject(), SkillId("both"));
    EXPECT_EQ(actions[4].subject(), SkillId("gap"));
    EXPECT_EQ(actions[4].reason, "validation-gap+cgpd-risk");
}

TEST(Maint, RiskDrivenRepair)
{
    auto lib = library({skill("a", types({"x"}), types({"y"}))});
    auto g = build_hseg(lib);
    auto health = library_health(lib, g, ExecutionTrace{});
    RiskMap risk;
    risk.values = {{SkillId("a"), 0.7}};
    auto actions = plan_actions(lib, g, health, risk, MaintenanceConfig{});
    ASSERT_EQ(actions.size(), 1U);
    EXPECT_EQ(actions[0].kind(), ActionKind::repair);
    EXPECT_EQ(actions[0].reason, "cgpd-risk");
}

TEST(Maint, LowUtilityDuplicateRetired)
{
    auto lib = library({skill("a", types({"x"}), types({"y"}), "body one"), skill("b", types({"x"}), types({"y"}), "body two"),
                        skill("c", types({"p"}), types({"q"})), skill("d", types({"r"}), types({"s"})),
                        skill("e", types({"t"}), types({"u"}))});
    ExecutionTrace trace;
    add_calls(trace, "a", 1, 1);
    add_calls(trace, "b", 9, 1);
    add_calls(trace, "a", 0, 0);
    MaintenanceConfig cfg;
    cfg.theta_f = 1.0;
    cfg.theta_u = 0.6;
    auto result = run_maintenance(lib, trace, cfg);
    // R = 1/4 stays under theta_r, so the pair is not merged but the weaker one retires
    EXPECT_EQ(result.report.count(ActionKind::merge), 0U);
    ASSERT_EQ(result.report.count(ActionKind::retire), 1U);
    EXPECT_EQ(result.report.size_after, 4U);
    EXPECT_EQ(result.library.find(SkillId("a")), nullptr);
    EXPECT_NE(result.library.find(SkillId("b")), nullptr);
}

TEST(Maint, GateSkipsHealthyLibraries)
{
    auto lib = library({skill("gap", types({"a"}), types({"b"}), "", false), skill("ok", types({"c"}), types({"d"}))});
    MaintenanceConfig cfg;
    cfg.force = false;
    auto skipped = run_maintenance(lib, ExecutionTrace{}, cfg);
    EXPECT_TRUE(skipped.report.skipped);
    EXPECT_TRUE(skipped.report.actions.empty());
    EXPECT_EQ(skipped.library, lib);

    cfg.gate = 0.0;
    auto forced = run_maintenance(lib, ExecutionTrace{}, cfg);
    EXPECT_FALSE(forced.report.skipped);
    EXPECT_EQ(forced.report.count(ActionKind::add_validator), 1U);

    MaintenanceConfig bad;
    bad.theta_f = 1.5;
    EXPECT_THROW((void)run_maintenance(lib, ExecutionTrace{}, bad), Error);
}

TEST(Maint, CorruptLibraryRejected)
{
    auto lib = library({skill("a", types({"x"}), types({"y"})), skill("a", types({"x"}), types({"y"}))});
    try {
        (void)run_maintenance(lib, ExecutionTrace{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::CorruptLibrary);
    }
}

TEST(Maint, RandomLibraryProperties)
{
    Rng rng(1234);
    for (int trial = 0; trial < 150; ++trial) {
        const auto lib = random_library(rng, 1 + rng.bounded(40));
        const auto trace = random_trace(rng, lib, rng.bounded(200));
        MaintenanceConfig cfg;
        if (trial % 2 == 0) {
            cfg.cgpd = CgpdConfig{};
        }
        const auto snapshot = lib;
        auto result = run_maintenance(lib, trace, cfg);
        const auto& r = result.report;
        SCOPED_TRACE("trial " + std::to_string(trial));

        EXPECT_EQ(lib, snapshot);
        EXPECT_EQ(r.size_after, r.size_before - r.count(ActionKind::merge) - r.count(ActionKind::retire));
        EXPECT_EQ(result.library.size(), r.size_after);
        EXPECT_EQ(r.external_model_calls, 0U);
        EXPECT_EQ(body_hash_collisions(result.library), 0U);
        EXPECT_TRUE(uncovered_dep_edges(result.library).empty());
        for (const auto& s : result.library.skills) {
            EXPECT_TRUE(s.has_validator()) << s.id.str();
        }
        EXPECT_GE(r.H_after, r.H_before - 1e-12);

        // canonical ordering
        auto ks = kinds(r.actions);
        EXPECT_TRUE(std::is_sorted(ks.begin(), ks.end()));

        auto again = run_maintenance(lib, trace, cfg);
        EXPECT_EQ(again.library, result.library);
        EXPECT_EQ(again.report.actions, r.actions);

        auto second = run_maintenance(result.library, trace, cfg);
        EXPECT_EQ(second.report.count(ActionKind::merge), 0U);
        EXPECT_EQ(second.report.count(ActionKind::retire), 0U);
        EXPECT_EQ(library_digest(second.library), library_digest(result.library));
    }
}
