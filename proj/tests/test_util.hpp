#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "skillops/contract.hpp"
#include "skillops/library.hpp"
#include "skillops/rng.hpp"
#include "skillops/trace.hpp"

namespace skillops::testing {

inline TypeSet types(std::initializer_list<const char*> tags)
{
    TypeSet out;
    for (const char* t : tags) {
        out.insert(TypeTag(t));
    }
    return out;
}

inline SkillContract skill(const std::string& id, TypeSet pre, TypeSet art, const std::string& body = "",
                           bool validated = true, const std::string& goal = "")
{
    SkillContract s;
    s.id = SkillId(id);
    s.goal = goal.empty() ? "goal of " + id : goal;
    s.preconditions = std::move(pre);
    s.artifact_types = std::move(art);
    s.body = body.empty() ? "run " + id : body;
    if (validated) {
        s.checklist = {"output of " + id + " is well formed"};
        s.validator_kind = ValidatorKind::checklist;
    }
    s.artifact_dirs.scripts.push_back({"run.txt", "run " + id + "\n"});
    return s;
}

inline Library library(std::vector<SkillContract> skills)
{
    Library lib;
    for (auto& s : skills) {
        lib.provenance[s.id] = "clean";
    }
    lib.skills = std::move(skills);
    return lib;
}

/// `ok` successes then `bad` failures for one skill, in its own task.
inline void add_calls(ExecutionTrace& trace, const std::string& id, std::size_t ok, std::size_t bad)
{
    std::size_t step = 0;
    for (std::size_t i = 0; i < ok; ++i) {
        trace.entries.push_back({"t-" + id, SkillId(id), step++, Outcome::success, std::nullopt});
    }
    for (std::size_t i = 0; i < bad; ++i) {
        trace.entries.push_back({"t-" + id, SkillId(id), step++, Outcome::failure, std::string("boom")});
    }
}

/// Random skills over a small tag alphabet so that every edge kind shows up.
inline std::vector<SkillContract> random_skills(Rng& rng, std::size_t n, std::size_t alphabet = 5)
{
    std::vector<SkillContract> out;
    auto draw = [&](std::size_t lo, std::size_t hi) {
        TypeSet s;
        const auto k = lo + rng.bounded(hi - lo + 1);
        while (s.size() < k) {
            s.insert(TypeTag("t" + std::to_string(rng.bounded(alphabet))));
        }
        return s;
    };
    for (std::size_t i = 0; i < n; ++i) {
        auto s = skill("s" + std::to_string(100 + i), draw(0, 3), draw(0, 2),
                       "body " + std::to_string(rng.bounded(n)), rng.bounded(3) != 0,
                       "goal " + std::to_string(rng.bounded(4)));
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace skillops::testing
