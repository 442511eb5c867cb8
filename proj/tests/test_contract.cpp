#include <gtest/gtest.h>

#include <filesystem>

#include "skillops/contract.hpp"
#include "skillops/error.hpp"
#include "skillops/library_io.hpp"
#include "skillops/rng.hpp"
#include "test_util.hpp"

using namespace skillops;
using skillops::testing::types;

namespace {

std::string golden(const char* name)
{
    return read_file(std::filesystem::path(SKILLOPS_GOLDEN_DIR) / name);
}

ErrorCode parse_error(const std::string& text)
{
    try {
        (void)parse_skill_file(text);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected a parse error";
    return ErrorCode::Io;
}

const std::string kHead = "---\nid: a\ngoal: g\npreconditions: [html]\nartifact.type: [json]\n---\n";

}  // namespace

TEST(Contract, MinimalFile)
{
    auto c = parse_skill_file(golden("minimal.SKILL.md"));
    EXPECT_EQ(c.id.str(), "a");
    EXPECT_EQ(c.preconditions, types({"html"}));
    EXPECT_EQ(c.artifact_types, types({"json"}));
    EXPECT_EQ(c.body, "parse");
    EXPECT_EQ(c.validator_kind, ValidatorKind::none);
    EXPECT_TRUE(c.checklist.empty());
    EXPECT_FALSE(c.has_validator());
}

TEST(Contract, ChecklistSection)
{
    auto c = parse_skill_file(kHead + "## Operation\nparse\n## Checklist\n- [ ] output parses\n");
    EXPECT_EQ(c.validator_kind, ValidatorKind::checklist);
    ASSERT_EQ(c.checklist.size(), 1U);
    EXPECT_EQ(c.checklist[0], "output parses");
}

TEST(Contract, ParseErrors)
{
    EXPECT_EQ(parse_error(kHead + "## Checklist\n- [ ] x\n"), ErrorCode::MissingOperationSection);
    EXPECT_EQ(parse_error("id: a\n## Operation\nx\n"), ErrorCode::MalformedFrontMatter);
    EXPECT_EQ(parse_error("---\nid: a\ngoal: g\npreconditions: [x]\n## Operation\nx\n"),
              ErrorCode::MalformedFrontMatter);
    EXPECT_EQ(parse_error("---\nid: a\ngoal: g\nartifact.type: [x]\n---\n## Operation\nx\n"),
              ErrorCode::MalformedFrontMatter);
    EXPECT_EQ(parse_error(kHead + "## Operation\nx\n## Operation\ny\n"), ErrorCode::DuplicateSection);
    EXPECT_EQ(parse_error("---\nid: a\nid: b\ngoal: g\npreconditions: []\nartifact.type: []\n---\n## Operation\nx\n"),
              ErrorCode::MalformedFrontMatter);
    EXPECT_EQ(parse_error("---\nid: Bad Id\ngoal: g\npreconditions: []\nartifact.type: []\n---\n## Operation\nx\n"),
              ErrorCode::MalformedFrontMatter);
    EXPECT_EQ(parse_error("---\nid: a\ngoal: g\npreconditions: [a b]\nartifact.type: []\n---\n## Operation\nx\n"),
              ErrorCode::MalformedFrontMatter);
    EXPECT_EQ(parse_error(
                  "---\nid: a\ngoal: g\npreconditions: []\nartifact.type: []\nvalidator.kind: maybe\n---\n## Operation\nx\n"),
              ErrorCode::MalformedFrontMatter);
}

TEST(Contract, IdentifierRules)
{
    EXPECT_TRUE(SkillId::is_valid("a-b_c9"));
    EXPECT_FALSE(SkillId::is_valid(""));
    EXPECT_FALSE(SkillId::is_valid("A"));
    EXPECT_FALSE(SkillId::is_valid("a.b"));
    EXPECT_THROW(SkillId("x y"), Error);
    EXPECT_THROW(TypeTag("has space"), Error);
    EXPECT_THROW(TypeTag(""), Error);
}

TEST(Contract, GoldenCanonicalIsAFixedPoint)
{
    const auto text = golden("canonical.SKILL.md");
    EXPECT_EQ(serialize_skill_file(parse_skill_file(text)), text);
}

TEST(Contract, GoldenMessyCanonicalizes)
{
    // CRLF, reordered keys, a bare list value, blank lines, a Failure Modes
    // section and a stale validator.kind all canonicalize to the same file.
    auto c = parse_skill_file(golden("messy.SKILL.md"));
    EXPECT_EQ(c.failure_modes, (std::set<std::string>{"encrypted_pdf", "scanned_image"}));
    EXPECT_EQ(c.validator_kind, ValidatorKind::checklist);
    EXPECT_EQ(c.extras.at("owner"), "data-team");
    EXPECT_EQ(serialize_skill_file(c), golden("canonical.SKILL.md"));
}

TEST(Contract, EmptyFailureModesOmitted)
{
    auto c = parse_skill_file(golden("minimal.SKILL.md"));
    const auto text = serialize_skill_file(c);
    EXPECT_EQ(text.find("failure_modes"), std::string::npos);
    EXPECT_TRUE(parse_skill_file(text).failure_modes.empty());
    EXPECT_EQ(serialize_skill_file(c), text);
}

TEST(Contract, RoundTripProperty)
{
    Rng rng(2024);
    auto word = [&] {
        static const char* words[] = {"alpha", "beta", "gamma", "delta", "json", "table", "run", "42", "x_y"};
        return std::string(words[rng.bounded(9)]);
    };
    for (int trial = 0; trial < 300; ++trial) {
        SkillContract c;
        c.id = SkillId("s" + std::to_string(trial) + "-" + word());
        c.goal = word() + " " + word();
        for (std::size_t i = 0, n = rng.bounded(4); i < n; ++i) {
            c.preconditions.insert(TypeTag(word()));
        }
        for (std::size_t i = 0, n = rng.bounded(3); i < n; ++i) {
            c.artifact_types.insert(TypeTag(word()));
        }
        std::string body;
        for (std::size_t i = 0, n = rng.bounded(5); i < n; ++i) {
            body += word() + " " + word() + std::string(rng.bounded(3), ' ') + "\n" +
                    std::string(rng.bounded(3), '\n');
        }
        c.body = normalize_body(body);
        for (std::size_t i = 0, n = rng.bounded(3); i < n; ++i) {
            c.checklist.push_back("check " + word() + ", " + word());
        }
        c.validator_kind = c.checklist.empty() ? ValidatorKind::none : ValidatorKind::checklist;
        for (std::size_t i = 0, n = rng.bounded(3); i < n; ++i) {
            c.failure_modes.insert(word());
            c.tags.insert(word() + "-tag");
        }
        if (rng.bounded(2) == 0) {
            c.extras["x-" + word()] = word() + " value";
        }
        const auto text = serialize_skill_file(c);
        EXPECT_EQ(parse_skill_file(text), c) << text;
        EXPECT_EQ(serialize_skill_file(c), text);
    }
}

TEST(Contract, NormalizeBody)
{
    EXPECT_EQ(normalize_body("a \n\n\nb\n"), "a\nb");
    EXPECT_EQ(normalize_body(""), "");
    EXPECT_EQ(normalize_body("a\r\nb\r\n"), "a\nb");
    EXPECT_EQ(normalize_body("a\rb"), "a\nb");
    EXPECT_EQ(normalize_body("x\t \ny"), "x\ny");
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        std::string s;
        for (std::size_t k = 0, n = rng.bounded(30); k < n; ++k) {
            s += "ab \n\r\t"[rng.bounded(6)];
        }
        const auto once = normalize_body(s);
        EXPECT_EQ(normalize_body(once), once);
        EXPECT_EQ(once.find(" \n"), std::string::npos);
        EXPECT_EQ(once.find("\n\n"), std::string::npos);
    }
}

TEST(Contract, Sha256KnownVectors)
{
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Contract, BodyHash)
{
    auto a = skillops::testing::skill("a", {}, {}, "same body");
    auto b = skillops::testing::skill("a-clone", types({"x"}), types({"y"}), "same body", false, "other goal");
    b.tags = {"narrow"};
    EXPECT_EQ(body_hash(a), body_hash(b));
    EXPECT_EQ(body_hash(a).hex, sha256_hex("same body"));

    auto c = a;
    c.body = "same body   \n\n";
    EXPECT_EQ(body_hash(a), body_hash(c));

    auto x = skillops::testing::skill("x", {}, {}, "x");
    auto y = skillops::testing::skill("y", {}, {}, "y");
    EXPECT_NE(body_hash(x), body_hash(y));
}

TEST(Contract, InvariantCheck)
{
    auto c = skillops::testing::skill("a", {}, {}, "x");
    EXPECT_NO_THROW(check_invariants(c));
    c.validator_kind = ValidatorKind::none;
    EXPECT_THROW(check_invariants(c), Error);
}
