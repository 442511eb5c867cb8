#include "skillops/hseg.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <queue>

#include "skillops/error.hpp"

namespace skillops {

namespace {

/// Interned type sets as fixed-width bitsets, one row per skill.
class TypeBits {
  public:
    TypeBits(std::span<const SkillContract> skills)
    {
        std::map<std::string, std::size_t> vocab;
        for (const auto& s : skills) {
            for (const auto& t : s.preconditions) {
                vocab.emplace(t.str(), 0);
            }
            for (const auto& t : s.artifact_types) {
                vocab.emplace(t.str(), 0);
            }
        }
        std::size_t next = 0;
        for (auto& [_, idx] : vocab) {
            idx = next++;
        }
        m_vocab_size = next;
        m_words = std::max<std::size_t>(1, (next + 63) / 64);
        m_pre.assign(skills.size() * m_words, 0);
        m_art.assign(skills.size() * m_words, 0);
        m_pre_tags.resize(skills.size());
        m_art_tags.resize(skills.size());
        for (std::size_t i = 0; i < skills.size(); ++i) {
            for (const auto& t : skills[i].preconditions) {
                auto b = vocab[t.str()];
                m_pre[i * m_words + b / 64] |= 1ULL << (b % 64);
                m_pre_tags[i].push_back(b);
            }
            for (const auto& t : skills[i].artifact_types) {
                auto b = vocab[t.str()];
                m_art[i * m_words + b / 64] |= 1ULL << (b % 64);
                m_art_tags[i].push_back(b);
            }
        }
    }

    [[nodiscard]] std::size_t vocab_size() const { return m_vocab_size; }
    [[nodiscard]] const std::vector<std::size_t>& pre_tags(std::size_t i) const { return m_pre_tags[i]; }
    [[nodiscard]] const std::vector<std::size_t>& art_tags(std::size_t i) const { return m_art_tags[i]; }

    [[nodiscard]] bool art_subset_of_pre(std::size_t i, std::size_t j) const
    {
        for (std::size_t w = 0; w < m_words; ++w) {
            if ((m_art[i * m_words + w] & ~m_pre[j * m_words + w]) != 0) {
                return false;
            }
        }
        return true;
    }

    [[nodiscard]] std::size_t inter(std::size_t i, std::size_t j) const
    {
        std::size_t n = 0;
        for (std::size_t w = 0; w < m_words; ++w) {
            n += std::popcount(m_art[i * m_words + w] & m_pre[j * m_words + w]);
        }
        return n;
    }

    [[nodiscard]] std::size_t uni(std::size_t i, std::size_t j) const
    {
        std::size_t n = 0;
        for (std::size_t w = 0; w < m_words; ++w) {
            n += std::popcount(m_art[i * m_words + w] | m_pre[j * m_words + w]);
        }
        return n;
    }

  private:
    std::size_t m_vocab_size = 0;
    std::size_t m_words = 1;
    std::vector<std::uint64_t> m_pre;
    std::vector<std::uint64_t> m_art;
    std::vector<std::vector<std::size_t>> m_pre_tags;
    std::vector<std::vector<std::size_t>> m_art_tags;
};

std::string interface_key(const SkillContract& s)
{
    std::string key;
    for (const auto& t : s.preconditions) {
        key += t.str();
        key.push_back(',');
    }
    key.push_back('|');
    for (const auto& t : s.artifact_types) {
        key += t.str();
        key.push_back(',');
    }
    return key;
}

}  // namespace

std::string_view to_string(EdgeType kind)
{
    switch (kind) {
    case EdgeType::dep: return "dep";
    case EdgeType::comp: return "comp";
    case EdgeType::red: return "red";
    case EdgeType::alt: return "alt";
    }
    return "?";
}

double jaccard(const TypeSet& a, const TypeSet& b)
{
    std::size_t inter = 0;
    for (const auto& t : a) {
        inter += b.contains(t) ? 1 : 0;
    }
    const std::size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::optional<Hseg::Index> Hseg::index_of(const SkillId& id) const
{
    auto it = m_index.find(id.str());
    if (it == m_index.end()) {
        return std::nullopt;
    }
    return it->second;
}

Hseg::Index Hseg::require(const SkillId& id) const
{
    auto idx = index_of(id);
    if (!idx) {
        throw Error(ErrorCode::UnknownSkillId, "skill '" + id.str() + "' is not in the graph");
    }
    return *idx;
}

bool Hseg::has_edge(Index src, Index dst, EdgeType kind) const
{
    const auto& adj = m_out[static_cast<std::size_t>(kind)][src];
    return std::binary_search(adj.begin(), adj.end(), dst);
}

bool Hseg::edge_exists(const SkillId& src, const SkillId& dst, EdgeType kind) const
{
    return has_edge(require(src), require(dst), kind);
}

std::set<SkillId> Hseg::parents(const SkillId& id) const
{
    std::set<SkillId> out;
    for (Index p : in(require(id), EdgeType::dep)) {
        out.insert(m_nodes[p]);
    }
    return out;
}

std::size_t Hseg::edge_count(EdgeType kind) const
{
    std::size_t n = 0;
    for (const auto& adj : m_out[static_cast<std::size_t>(kind)]) {
        n += adj.size();
    }
    return n;
}

std::vector<Edge> Hseg::edges() const
{
    std::vector<Edge> out;
    for (EdgeType kind : kEdgeTypes) {
        const auto& adj = m_out[static_cast<std::size_t>(kind)];
        for (Index i = 0; i < adj.size(); ++i) {
            for (Index j : adj[i]) {
                out.push_back(Edge{m_nodes[i], m_nodes[j], kind});
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool Hseg::adapter_bridges(Index src, Index dst) const
{
    return m_bridged.contains({src, dst});
}

Hseg build_hseg(std::span<const SkillContract> skills, const HsegConfig& config,
                std::span<const AdapterRecord> adapters)
{
    if (!(config.comp_threshold > 0.0 && config.comp_threshold <= 1.0)) {
        throw Error(ErrorCode::ConfigInvalid, "comp_threshold must lie in (0, 1]");
    }
    Hseg g;
    g.m_config = config;
    const std::size_t n = skills.size();
    g.m_nodes.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!g.m_index.emplace(skills[i].id.str(), static_cast<Hseg::Index>(i)).second) {
            throw Error(ErrorCode::DuplicateSkillId, "skill id '" + skills[i].id.str() + "' appears twice");
        }
        g.m_nodes.push_back(skills[i].id);
    }
    for (auto& adj : g.m_out) {
        adj.assign(n, {});
    }
    for (auto& adj : g.m_in) {
        adj.assign(n, {});
    }
    auto add = [&](std::size_t i, std::size_t j, EdgeType kind) {
        g.m_out[static_cast<std::size_t>(kind)][i].push_back(static_cast<Hseg::Index>(j));
        g.m_in[static_cast<std::size_t>(kind)][j].push_back(static_cast<Hseg::Index>(i));
    };

    // dep and comp: only pairs sharing a type can qualify (comp_threshold > 0),
    // so candidates come from the precondition inverted index.
    TypeBits bits(skills);
    std::vector<std::vector<std::size_t>> consumers(bits.vocab_size());
    for (std::size_t j = 0; j < n; ++j) {
        for (auto t : bits.pre_tags(j)) {
            consumers[t].push_back(j);
        }
    }
    std::vector<std::size_t> mark(n, SIZE_MAX);
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < n; ++i) {
        if (bits.art_tags(i).empty()) {
            continue;
        }
        candidates.clear();
        for (auto t : bits.art_tags(i)) {
            for (auto j : consumers[t]) {
                if (mark[j] != i) {
                    mark[j] = i;
                    candidates.push_back(j);
                }
            }
        }
        std::sort(candidates.begin(), candidates.end());
        for (auto j : candidates) {
            if (j == i) {
                continue;
            }
            const bool dep = config.dep_mode == DepMode::subset ? bits.art_subset_of_pre(i, j) : true;
            if (dep) {
                add(i, j, EdgeType::dep);
            }
            const double jac = static_cast<double>(bits.inter(i, j)) / static_cast<double>(bits.uni(i, j));
            if (jac >= config.comp_threshold) {
                add(i, j, EdgeType::comp);
            }
        }
    }

    // red: equal (P, A) interface keys form cliques.
    std::map<std::string, std::vector<std::size_t>> by_interface;
    for (std::size_t i = 0; i < n; ++i) {
        by_interface[interface_key(skills[i])].push_back(i);
    }
    g.m_cluster.assign(n, 0);
    for (const auto& [_, members] : by_interface) {
        const auto cluster = static_cast<Hseg::Index>(g.m_cluster_size.size());
        g.m_cluster_size.push_back(members.size());
        for (auto a : members) {
            g.m_cluster[a] = cluster;
            for (auto b : members) {
                if (a != b) {
                    add(a, b, EdgeType::red);
                }
            }
        }
    }

    // alt: same goal, different operation.
    std::vector<BodyHash> hashes;
    hashes.reserve(n);
    for (const auto& s : skills) {
        hashes.push_back(body_hash(s));
    }
    std::map<std::string, std::vector<std::size_t>> by_goal;
    for (std::size_t i = 0; i < n; ++i) {
        by_goal[skills[i].goal].push_back(i);
    }
    for (const auto& [_, members] : by_goal) {
        for (auto a : members) {
            for (auto b : members) {
                if (a != b && hashes[a] != hashes[b]) {
                    add(a, b, EdgeType::alt);
                }
            }
        }
    }

    for (auto& per_kind : g.m_out) {
        for (auto& adj : per_kind) {
            std::sort(adj.begin(), adj.end());
        }
    }
    for (auto& per_kind : g.m_in) {
        for (auto& adj : per_kind) {
            std::sort(adj.begin(), adj.end());
        }
    }

    g.m_adapters.assign(adapters.begin(), adapters.end());
    sort_adapters(g.m_adapters);
    for (const auto& a : g.m_adapters) {
        g.m_bridged.emplace(g.require(a.src), g.require(a.dst));
    }
    return g;
}

Hseg build_hseg(const Library& lib, const HsegConfig& config)
{
    return build_hseg(lib.skills, config, lib.adapters);
}

std::vector<std::vector<SkillId>> red_clusters(const Hseg& g)
{
    std::vector<std::vector<SkillId>> clusters;
    std::vector<bool> seen(g.size(), false);
    for (Hseg::Index start = 0; start < g.size(); ++start) {
        if (seen[start]) {
            continue;
        }
        std::vector<SkillId> members;
        std::queue<Hseg::Index> frontier;
        frontier.push(start);
        seen[start] = true;
        while (!frontier.empty()) {
            auto v = frontier.front();
            frontier.pop();
            members.push_back(g.nodes()[v]);
            for (auto u : g.out(v, EdgeType::red)) {
                if (!seen[u]) {
                    seen[u] = true;
                    frontier.push(u);
                }
            }
        }
        std::sort(members.begin(), members.end());
        clusters.push_back(std::move(members));
    }
    std::sort(clusters.begin(), clusters.end());
    return clusters;
}

}  // namespace skillops
