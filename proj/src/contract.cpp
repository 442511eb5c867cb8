#include "skillops/contract.hpp"

#include <algorithm>
#include <array>
#include <optional>

#include <openssl/evp.h>

#include "skillops/error.hpp"

namespace skillops {

namespace {

constexpr std::string_view kFence = "---";
constexpr std::string_view kOperation = "## Operation";
constexpr std::string_view kChecklist = "## Checklist";
constexpr std::string_view kFailureModes = "## Failure Modes";

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s)
{
    while (!s.empty() && is_space(s.front())) {
        s.remove_prefix(1);
    }
    while (!s.empty() && is_space(s.back())) {
        s.remove_suffix(1);
    }
    return s;
}

std::string_view rtrim(std::string_view s)
{
    while (!s.empty() && is_space(s.back())) {
        s.remove_suffix(1);
    }
    return s;
}

std::string to_lf(std::string_view text)
{
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\r') {
            out.push_back('\n');
            if (i + 1 < text.size() && text[i + 1] == '\n') {
                ++i;
            }
        } else {
            out.push_back(text[i]);
        }
    }
    return out;
}

std::vector<std::string_view> split_lines(std::string_view text)
{
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto pos = text.find('\n', start);
        if (pos == std::string_view::npos) {
            if (start < text.size()) {
                lines.push_back(text.substr(start));
            }
            break;
        }
        lines.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    return lines;
}

[[noreturn]] void front_matter_error(const std::string& what)
{
    throw Error(ErrorCode::MalformedFrontMatter, what);
}

std::vector<std::string> parse_list(std::string_view key, std::string_view value)
{
    std::vector<std::string> items;
    if (value.empty()) {
        return items;
    }
    if (value.front() == '[') {
        if (value.back() != ']') {
            front_matter_error("unterminated list for key '" + std::string(key) + "'");
        }
        value = value.substr(1, value.size() - 2);
    }
    std::size_t start = 0;
    while (start <= value.size()) {
        auto pos = value.find(',', start);
        auto item = trim(value.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (!item.empty()) {
            items.emplace_back(item);
        }
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return items;
}

TypeSet parse_types(std::string_view key, std::string_view value)
{
    TypeSet out;
    for (auto& item : parse_list(key, value)) {
        if (!TypeTag::is_valid(item)) {
            front_matter_error("invalid type tag '" + item + "' in '" + std::string(key) + "'");
        }
        out.insert(TypeTag(item));
    }
    return out;
}

std::set<std::string> parse_tokens(std::string_view key, std::string_view value)
{
    std::set<std::string> out;
    for (auto& item : parse_list(key, value)) {
        if (std::any_of(item.begin(), item.end(), is_space)) {
            front_matter_error("token with whitespace in '" + std::string(key) + "'");
        }
        out.insert(std::move(item));
    }
    return out;
}

template <typename Range, typename Proj>
std::string format_list(const Range& items, Proj proj)
{
    std::string out = "[";
    bool first = true;
    for (const auto& item : items) {
        if (!first) {
            out += ", ";
        }
        out += proj(item);
        first = false;
    }
    out += "]";
    return out;
}

bool is_known_key(std::string_view key)
{
    return key == "id" || key == "goal" || key == "preconditions" || key == "artifact.type" ||
           key == "validator.kind" || key == "failure_modes" || key == "tags";
}

void sort_files(std::vector<ArtifactFile>& files)
{
    std::sort(files.begin(), files.end(),
              [](const ArtifactFile& a, const ArtifactFile& b) { return a.name < b.name; });
}

}  // namespace

SkillId::SkillId(std::string value) : m_value(std::move(value))
{
    if (!is_valid(m_value)) {
        throw Error(ErrorCode::InvalidIdentifier, "skill id '" + m_value + "' must match [a-z0-9_-]+");
    }
}

bool SkillId::is_valid(std::string_view value) noexcept
{
    return !value.empty() && std::all_of(value.begin(), value.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    });
}

TypeTag::TypeTag(std::string value) : m_value(std::move(value))
{
    if (!is_valid(m_value)) {
        throw Error(ErrorCode::InvalidIdentifier, "type tag '" + m_value + "' must be a lowercase token");
    }
}

bool TypeTag::is_valid(std::string_view value) noexcept
{
    return !value.empty() && std::none_of(value.begin(), value.end(), [](char c) {
        return is_space(c) || (c >= 'A' && c <= 'Z') || c == ',' || c == '[' || c == ']';
    });
}

std::string_view to_string(ValidatorKind kind)
{
    return kind == ValidatorKind::checklist ? "checklist" : "none";
}

void ArtifactDirs::canonicalize()
{
    sort_files(scripts);
    sort_files(references);
    sort_files(assets);
}

void check_invariants(const SkillContract& c)
{
    auto fail = [&](const std::string& what) {
        throw Error(ErrorCode::CorruptLibrary, "skill '" + c.id.str() + "': " + what);
    };
    if (!SkillId::is_valid(c.id.str())) {
        fail("invalid id");
    }
    if ((c.validator_kind == ValidatorKind::none) != c.checklist.empty()) {
        fail("validator kind disagrees with checklist items");
    }
    if (c.goal.empty() || c.goal.find('\n') != std::string::npos) {
        fail("goal must be a single non-empty line");
    }
}

std::string normalize_body(std::string_view text)
{
    const std::string lf = to_lf(text);
    std::string out;
    out.reserve(lf.size());
    std::size_t start = 0;
    while (start <= lf.size()) {
        auto pos = lf.find('\n', start);
        auto line = rtrim(std::string_view(lf).substr(start, pos == std::string::npos ? std::string::npos : pos - start));
        out.append(line);
        if (pos == std::string::npos) {
            break;
        }
        out.push_back('\n');
        start = pos + 1;
    }
    // Collapse every run of newlines into one, which drops blank lines.
    std::string collapsed;
    collapsed.reserve(out.size());
    for (char c : out) {
        if (c == '\n' && !collapsed.empty() && collapsed.back() == '\n') {
            continue;
        }
        collapsed.push_back(c);
    }
    if (!collapsed.empty() && collapsed.back() == '\n') {
        collapsed.pop_back();
    }
    return collapsed;
}

std::string sha256_hex(std::string_view data)
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::Io, "sha256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    hex.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        hex.push_back(kHex[digest[i] >> 4]);
        hex.push_back(kHex[digest[i] & 0xF]);
    }
    return hex;
}

BodyHash body_hash(const SkillContract& contract)
{
    return BodyHash{sha256_hex(normalize_body(contract.body))};
}

SkillContract parse_skill_file(std::string_view raw)
{
    const std::string text = to_lf(raw);
    const auto lines = split_lines(text);

    std::size_t i = 0;
    while (i < lines.size() && trim(lines[i]).empty()) {
        ++i;
    }
    if (i >= lines.size() || rtrim(lines[i]) != kFence) {
        front_matter_error("missing opening '---' fence");
    }
    ++i;

    std::map<std::string, std::string> keys;
    bool closed = false;
    for (; i < lines.size(); ++i) {
        auto line = rtrim(lines[i]);
        if (line == kFence) {
            closed = true;
            ++i;
            break;
        }
        if (trim(line).empty()) {
            continue;
        }
        auto colon = line.find(':');
        if (colon == std::string_view::npos) {
            front_matter_error("expected 'key: value', got '" + std::string(line) + "'");
        }
        std::string key(trim(line.substr(0, colon)));
        std::string value(trim(line.substr(colon + 1)));
        if (key.empty()) {
            front_matter_error("empty key");
        }
        if (!keys.emplace(key, value).second) {
            front_matter_error("duplicate key '" + key + "'");
        }
    }
    if (!closed) {
        front_matter_error("missing closing '---' fence");
    }
    for (const char* required : {"id", "goal", "preconditions", "artifact.type"}) {
        if (keys.find(required) == keys.end()) {
            front_matter_error(std::string("missing required key '") + required + "'");
        }
    }

    SkillContract c;
    if (!SkillId::is_valid(keys["id"])) {
        front_matter_error("invalid id '" + keys["id"] + "'");
    }
    c.id = SkillId(keys["id"]);
    c.goal = keys["goal"];
    if (c.goal.empty()) {
        front_matter_error("empty goal");
    }
    c.preconditions = parse_types("preconditions", keys["preconditions"]);
    c.artifact_types = parse_types("artifact.type", keys["artifact.type"]);
    if (auto it = keys.find("validator.kind"); it != keys.end() && it->second != "none" && it->second != "checklist") {
        front_matter_error("validator.kind must be 'checklist' or 'none'");
    }
    if (auto it = keys.find("failure_modes"); it != keys.end()) {
        c.failure_modes = parse_tokens("failure_modes", it->second);
    }
    if (auto it = keys.find("tags"); it != keys.end()) {
        c.tags = parse_tokens("tags", it->second);
    }
    for (auto& [key, value] : keys) {
        if (!is_known_key(key)) {
            c.extras.emplace(key, value);
        }
    }

    enum class Section { preamble, operation, checklist, failure_modes };
    Section current = Section::preamble;
    std::set<Section> seen;
    std::string body;
    for (; i < lines.size(); ++i) {
        auto line = rtrim(lines[i]);
        std::optional<Section> header;
        if (line == kOperation) {
            header = Section::operation;
        } else if (line == kChecklist) {
            header = Section::checklist;
        } else if (line == kFailureModes) {
            header = Section::failure_modes;
        }
        if (header) {
            if (!seen.insert(*header).second) {
                throw Error(ErrorCode::DuplicateSection, "section '" + std::string(line) + "' appears twice");
            }
            current = *header;
            continue;
        }
        switch (current) {
        case Section::preamble:
            break;
        case Section::operation:
            body.append(lines[i]);
            body.push_back('\n');
            break;
        case Section::checklist: {
            auto item = trim(line);
            if (item.starts_with("- [ ]") || item.starts_with("- [x]") || item.starts_with("- [X]")) {
                item = trim(item.substr(5));
            } else if (item.starts_with("-")) {
                item = trim(item.substr(1));
            } else {
                item = {};
            }
            if (!item.empty()) {
                c.checklist.emplace_back(item);
            }
            break;
        }
        case Section::failure_modes: {
            auto item = trim(line);
            if (item.starts_with("-")) {
                item = trim(item.substr(1));
                if (!item.empty()) {
                    c.failure_modes.emplace(item);
                }
            }
            break;
        }
        }
    }
    if (!seen.contains(Section::operation)) {
        throw Error(ErrorCode::MissingOperationSection, "skill '" + c.id.str() + "' has no '## Operation' section");
    }
    c.body = normalize_body(body);
    c.validator_kind = c.checklist.empty() ? ValidatorKind::none : ValidatorKind::checklist;
    return c;
}

std::string serialize_skill_file(const SkillContract& c)
{
    auto tag_str = [](const TypeTag& t) { return t.str(); };
    auto str = [](const std::string& s) { return s; };

    std::string out;
    out += "---\n";
    out += "id: " + c.id.str() + "\n";
    out += "goal: " + c.goal + "\n";
    out += "preconditions: " + format_list(c.preconditions, tag_str) + "\n";
    out += "artifact.type: " + format_list(c.artifact_types, tag_str) + "\n";
    out += "validator.kind: " + std::string(to_string(c.validator_kind)) + "\n";
    if (!c.failure_modes.empty()) {
        out += "failure_modes: " + format_list(c.failure_modes, str) + "\n";
    }
    if (!c.tags.empty()) {
        out += "tags: " + format_list(c.tags, str) + "\n";
    }
    for (const auto& [key, value] : c.extras) {
        out += key + ": " + value + "\n";
    }
    out += "---\n";
    out += std::string(kOperation) + "\n";
    if (!c.body.empty()) {
        out += c.body + "\n";
    }
    if (!c.checklist.empty()) {
        out += std::string(kChecklist) + "\n";
        for (const auto& item : c.checklist) {
            out += "- [ ] " + item + "\n";
        }
    }
    return out;
}

}  // namespace skillops
