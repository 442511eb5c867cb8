#include "skillops/debtgen.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>

#include "skillops/error.hpp"
#include "skillops/rng.hpp"

namespace skillops {

namespace {

// 8 x 10 goals over ~229 skills, so most goals are shared by a few skills.
constexpr std::array<std::string_view, 8> kVerbs = {"extract", "convert", "summarize", "validate",
                                                    "merge",   "render",  "classify",  "annotate"};
constexpr std::array<std::string_view, 10> kObjects = {"invoices", "reports", "contracts", "emails",  "receipts",
                                                       "logs",     "slides",  "datasets",  "tickets", "surveys"};
constexpr std::array<std::string_view, 8> kDomains = {"finance", "legal",    "health",   "retail",
                                                      "research", "travel", "education", "logistics"};
constexpr std::array<std::string_view, 3> kNarrowTags = {"pdf-only", "client-acme-only", "en-us-only"};

constexpr std::array<std::string_view, 6> kIdTags = {"clone", "stale", "noval", "noart", "wrongif", "narrow"};

std::string hex4(Rng& rng)
{
    static constexpr char digits[] = "0123456789abcdef";
    auto v = rng.next();
    std::string out(4, '0');
    for (int i = 0; i < 4; ++i) {
        out[static_cast<std::size_t>(i)] = digits[(v >> (4 * i)) & 0xF];
    }
    return out;
}

std::string join(const TypeSet& s)
{
    std::string out;
    for (const auto& t : s) {
        if (!out.empty()) {
            out += ", ";
        }
        out += t.str();
    }
    return out;
}

TypeSet draw_tags(Rng& rng, std::size_t lo, std::size_t hi)
{
    const std::size_t k = lo + rng.bounded(hi - lo + 1);
    TypeSet out;
    while (out.size() < k) {
        out.insert(TypeTag(std::string(kRegularTags[rng.bounded(kRegularTags.size())])));
    }
    return out;
}

void replace_all(std::string& s, const std::string& from, const std::string& to)
{
    if (from.empty()) {
        return;
    }
    for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
        s.replace(pos, from.size(), to);
    }
}

std::string deprecated_name(const std::string& name)
{
    const std::string ext = ".md";
    if (name.size() >= ext.size() && name.compare(name.size() - ext.size(), ext.size(), ext) == 0) {
        return name.substr(0, name.size() - ext.size()) + "_deprecated.md";
    }
    return name + "_deprecated.md";
}

}  // namespace

std::string_view to_string(DegradationType t)
{
    switch (t) {
        case DegradationType::redundant_clone: return "redundant_clone";
        case DegradationType::stale_clone: return "stale_clone";
        case DegradationType::missing_validator: return "missing_validator";
        case DegradationType::missing_artifact: return "missing_artifact";
        case DegradationType::wrong_interface: return "wrong_interface";
        case DegradationType::over_specialized: return "over_specialized";
    }
    return "unknown";
}

DegradationType degradation_from_string(std::string_view name)
{
    for (auto t : kDegradationTypes) {
        if (to_string(t) == name) {
            return t;
        }
    }
    throw Error(ErrorCode::ConfigInvalid, "unknown degradation type '" + std::string(name) + "'");
}

SkillContract inject(const SkillContract& contract, DegradationType dtype, std::uint64_t seed)
{
    Rng rng(seed);
    SkillContract out = contract;
    out.id = SkillId(contract.id.str() + "-" + std::string(kIdTags[static_cast<std::size_t>(dtype)]) + "-" +
                     hex4(rng));
    switch (dtype) {
        case DegradationType::redundant_clone:
            break;
        case DegradationType::stale_clone: {
            std::string body = out.body;
            for (auto& f : out.artifact_dirs.references) {
                auto renamed = deprecated_name(f.name);
                replace_all(body, "references/" + f.name, "references/" + renamed);
                f.name = std::move(renamed);
            }
            out.artifact_dirs.canonicalize();
            static const std::regex version(R"(\bv[0-9]+\.[0-9]+\b)");
            const std::string old_version = "v0." + std::to_string(1 + rng.bounded(9));
            body = std::regex_replace(body, version, old_version);
            if (body == out.body) {
                body += "\nPinned to release " + old_version + ".";
            }
            out.body = normalize_body(body);
            break;
        }
        case DegradationType::missing_validator:
            out.checklist.clear();
            out.validator_kind = ValidatorKind::none;
            break;
        case DegradationType::missing_artifact:
            // The body keeps its links; they now point at nothing.
            out.artifact_dirs = ArtifactDirs{};
            break;
        case DegradationType::wrong_interface: {
            std::vector<std::string_view> spare;
            for (auto t : kLegacyTags) {
                if (!contract.artifact_types.contains(TypeTag(std::string(t)))) {
                    spare.push_back(t);
                }
            }
            TypeSet wrong;
            if (!spare.empty()) {
                wrong.insert(TypeTag(std::string(spare[rng.bounded(spare.size())])));
            } else {
                wrong.insert(TypeTag("legacy-" + hex4(rng)));
            }
            out.artifact_types = std::move(wrong);
            break;
        }
        case DegradationType::over_specialized:
            out.tags.insert("q3-2025-only");
            out.tags.insert(std::string(kNarrowTags[rng.bounded(kNarrowTags.size())]));
            break;
    }
    return out;
}

std::size_t degraded_count(std::size_t n, double rate)
{
    return static_cast<std::size_t>(std::ceil(rate * static_cast<double>(n) - 1e-9));
}

std::optional<double> noise_schedule(std::size_t n)
{
    static const std::map<std::size_t, double> table = {
        {200, 0.15}, {250, 0.28}, {500, 0.60}, {750, 0.73}, {1000, 0.80},
        {1250, 0.84}, {1500, 0.87}, {1750, 0.89}, {2000, 0.90},
    };
    auto it = table.find(n);
    if (it == table.end()) {
        return std::nullopt;
    }
    return it->second;
}

Library synth_source(std::size_t n, std::uint64_t seed)
{
    if (n < 1) {
        throw Error(ErrorCode::ConfigInvalid, "synth_source needs n >= 1");
    }
    Rng rng(seed);
    Library lib;
    std::set<std::pair<TypeSet, TypeSet>> interfaces;
    for (std::size_t i = 0; i < n; ++i) {
        SkillContract s;
        const auto verb = kVerbs[rng.bounded(kVerbs.size())];
        const auto object = kObjects[rng.bounded(kObjects.size())];
        const auto domain = kDomains[rng.bounded(kDomains.size())];
        s.goal = std::string(verb) + " " + std::string(object);
        auto num = std::to_string(i);
        num.insert(0, num.size() < 3 ? 3 - num.size() : 0, '0');
        s.id = SkillId(std::string(verb) + "-" + std::string(object) + "-" + num);

        const bool hub = i % 10 == 9;
        for (std::size_t tries = 0;; ++tries) {
            if (tries > 10000) {
                throw Error(ErrorCode::ConfigInvalid, "ran out of distinct interfaces at n = " + std::to_string(n));
            }
            if (hub) {
                s.preconditions.clear();
                for (auto t : kLegacyTags) {
                    s.preconditions.insert(TypeTag(std::string(t)));
                }
            } else {
                s.preconditions = draw_tags(rng, 1, 3);
            }
            s.artifact_types = draw_tags(rng, 1, 2);
            if (interfaces.emplace(s.preconditions, s.artifact_types).second) {
                break;
            }
        }

        const std::string version = "v" + std::to_string(2 + rng.bounded(4)) + "." + std::to_string(rng.bounded(10));
        const std::string script = "run_" + s.id.str() + ".py";
        const std::string guide = s.id.str() + "_guide.md";
        s.body = normalize_body("Use this skill to " + s.goal + " in " + std::string(domain) + " workflows.\n" +
                                "Requires tool " + version + " or later.\n" +
                                "1. Read the " + join(s.preconditions) + " inputs.\n" +
                                "2. Run `scripts/" + script + "` on each input.\n" +
                                "3. Consult [the guide](references/" + guide + ") for edge cases.\n" +
                                "4. Emit " + join(s.artifact_types) + " artifacts.\n");
        s.checklist = {"inputs match the declared preconditions", "every output is " + join(s.artifact_types),
                       "no input was skipped"};
        s.validator_kind = ValidatorKind::checklist;
        s.failure_modes = {"malformed_input", "tool_timeout"};
        s.tags = {std::string(domain)};
        s.artifact_dirs.scripts.push_back({script, "print(\"" + s.goal + "\")\n"});
        s.artifact_dirs.references.push_back({guide, "# " + s.goal + "\n\nEdge cases for " + s.goal + ".\n"});
        if (rng.bounded(2) == 0) {
            s.artifact_dirs.assets.push_back({"template.txt", s.goal + "\n"});
        }
        lib.provenance.emplace(s.id, "clean");
        lib.skills.push_back(std::move(s));
    }
    return lib;
}

Library build_library(const GenConfig& cfg)
{
    if (cfg.source.skills.empty()) {
        throw Error(ErrorCode::ConfigInvalid, "build_library needs a non-empty source");
    }
    if (!(cfg.noise_rate >= 0.0 && cfg.noise_rate <= 1.0)) {
        throw Error(ErrorCode::ConfigInvalid, "noise_rate must lie in [0, 1]");
    }
    std::array<double, 6> weights{};
    weights.fill(1.0);
    if (cfg.type_weights) {
        weights = *cfg.type_weights;
        double total = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0) || !std::isfinite(w)) {
                throw Error(ErrorCode::ConfigInvalid, "degradation weights must be finite and non-negative");
            }
            total += w;
        }
        if (total <= 0.0) {
            throw Error(ErrorCode::ConfigInvalid, "degradation weights must not all be zero");
        }
    }

    const std::size_t n = cfg.target_size;
    const std::size_t degraded = degraded_count(n, cfg.noise_rate);
    const std::size_t clean = n - degraded;
    const auto& src = cfg.source.skills;

    Library lib;
    std::set<SkillId> used;
    for (std::size_t i = 0; i < clean; ++i) {
        SkillContract s = src[i % src.size()];
        if (const std::size_t pass = i / src.size(); pass > 0) {
            s.id = SkillId(s.id.str() + "-copy" + std::to_string(pass));
        }
        if (!used.insert(s.id).second) {
            throw Error(ErrorCode::ConfigInvalid, "source ids collide with generated copy ids at '" + s.id.str() + "'");
        }
        lib.provenance.emplace(s.id, "clean");
        lib.skills.push_back(std::move(s));
    }

    double total = 0.0;
    for (double w : weights) {
        total += w;
    }
    Rng rng(cfg.seed);
    for (std::size_t j = 0; j < degraded; ++j) {
        const SkillContract& base = clean > 0 ? lib.skills[rng.bounded(clean)] : src[rng.bounded(src.size())];
        double pick = rng.uniform() * total;
        std::size_t t = weights.size();
        for (std::size_t k = 0; k < weights.size(); ++k) {
            if (weights[k] > 0.0) {
                t = k;  // float slack falls back on the last positive weight
                if (pick < weights[k]) {
                    break;
                }
                pick -= weights[k];
            }
        }
        const auto dtype = kDegradationTypes[t];
        SkillContract v = inject(base, dtype, cfg.seed ^ static_cast<std::uint64_t>(j));
        for (std::uint64_t salt = 1; used.contains(v.id); ++salt) {
            v = inject(base, dtype, (cfg.seed ^ static_cast<std::uint64_t>(j)) + (salt << 32));
        }
        used.insert(v.id);
        lib.provenance.emplace(v.id, "degraded:" + std::string(to_string(dtype)) + ":" + base.id.str());
        lib.skills.push_back(std::move(v));
    }
    return lib;
}

Composition composition(const Library& lib)
{
    Composition c;
    for (const auto& s : lib.skills) {
        auto it = lib.provenance.find(s.id);
        if (it == lib.provenance.end() || it->second.rfind("degraded:", 0) != 0) {
            ++c.clean;
            continue;
        }
        ++c.degraded;
        const auto rest = std::string_view(it->second).substr(9);
        c.by_type[degradation_from_string(rest.substr(0, rest.find(':')))]++;
    }
    return c;
}

}  // namespace skillops
