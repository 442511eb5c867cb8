#pragma once

#include <compare>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace skillops {

/// Library-unique skill identifier, restricted to `[a-z0-9_-]+`.
class SkillId {
  public:
    SkillId() = default;
    explicit SkillId(std::string value);

    [[nodiscard]] const std::string& str() const noexcept { return m_value; }
    [[nodiscard]] bool empty() const noexcept { return m_value.empty(); }

    static bool is_valid(std::string_view value) noexcept;

    auto operator<=>(const SkillId&) const = default;

  private:
    std::string m_value;
};

/// Lowercase, whitespace-free artifact/precondition type token ("json", "html").
class TypeTag {
  public:
    TypeTag() = default;
    explicit TypeTag(std::string value);

    [[nodiscard]] const std::string& str() const noexcept { return m_value; }

    static bool is_valid(std::string_view value) noexcept;

    auto operator<=>(const TypeTag&) const = default;

  private:
    std::string m_value;
};

using TypeSet = std::set<TypeTag>;

enum class ValidatorKind { none, checklist };

std::string_view to_string(ValidatorKind kind);

struct ArtifactFile {
    std::string name;
    std::string content;

    auto operator<=>(const ArtifactFile&) const = default;
};

/// The three sibling directories of a skill. Entries are kept sorted by name.
struct ArtifactDirs {
    std::vector<ArtifactFile> scripts;
    std::vector<ArtifactFile> references;
    std::vector<ArtifactFile> assets;

    [[nodiscard]] bool empty() const noexcept
    {
        return scripts.empty() && references.empty() && assets.empty();
    }
    void canonicalize();

    bool operator==(const ArtifactDirs&) const = default;
};

/// One skill as (P, O, A, V, F) plus identity and retrieval metadata.
struct SkillContract {
    SkillId id;
    std::string goal;
    TypeSet preconditions;           // P
    std::string body;                // O, stored normalized
    TypeSet artifact_types;          // A
    ValidatorKind validator_kind = ValidatorKind::none;
    std::vector<std::string> checklist;  // V
    std::set<std::string> failure_modes; // F
    std::set<std::string> tags;
    ArtifactDirs artifact_dirs;
    std::map<std::string, std::string> extras;  // unknown front-matter keys

    [[nodiscard]] bool has_validator() const noexcept
    {
        return validator_kind == ValidatorKind::checklist;
    }

    bool operator==(const SkillContract&) const = default;
};

/// Hex-encoded SHA-256 of the normalized body.
struct BodyHash {
    std::string hex;

    auto operator<=>(const BodyHash&) const = default;
};

/// Throws Error(CorruptLibrary) naming the first broken invariant.
void check_invariants(const SkillContract& contract);

[[nodiscard]] SkillContract parse_skill_file(std::string_view text);
[[nodiscard]] std::string serialize_skill_file(const SkillContract& contract);

[[nodiscard]] std::string normalize_body(std::string_view text);
[[nodiscard]] BodyHash body_hash(const SkillContract& contract);
[[nodiscard]] std::string sha256_hex(std::string_view data);

}  // namespace skillops
