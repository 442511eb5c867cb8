#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "skillops/contract.hpp"
#include "skillops/library.hpp"

namespace skillops {

enum class EdgeType : std::uint8_t { dep = 0, comp = 1, red = 2, alt = 3 };

inline constexpr std::array<EdgeType, 4> kEdgeTypes = {EdgeType::dep, EdgeType::comp, EdgeType::red,
                                                       EdgeType::alt};

std::string_view to_string(EdgeType kind);

/// `subset` is the formal A_i ⊆ P_j rule; `overlap` only needs A_i ∩ P_j ≠ ∅.
enum class DepMode { subset, overlap };

struct HsegConfig {
    double comp_threshold = 0.3;
    DepMode dep_mode = DepMode::subset;
};

struct Edge {
    SkillId src;
    SkillId dst;
    EdgeType kind;

    auto operator<=>(const Edge&) const = default;
};

/// Immutable snapshot of the skill ecosystem graph. Nodes keep the order of
/// the library they were built from; adjacency lists hold node indices.
class Hseg {
  public:
    using Index = std::uint32_t;

    [[nodiscard]] const std::vector<SkillId>& nodes() const noexcept { return m_nodes; }
    [[nodiscard]] std::size_t size() const noexcept { return m_nodes.size(); }
    [[nodiscard]] std::optional<Index> index_of(const SkillId& id) const;
    /// Like index_of but throws Error(UnknownSkillId).
    [[nodiscard]] Index require(const SkillId& id) const;

    [[nodiscard]] bool edge_exists(const SkillId& src, const SkillId& dst, EdgeType kind) const;
    [[nodiscard]] bool has_edge(Index src, Index dst, EdgeType kind) const;

    [[nodiscard]] std::span<const Index> out(Index node, EdgeType kind) const
    {
        return m_out[static_cast<std::size_t>(kind)][node];
    }
    [[nodiscard]] std::span<const Index> in(Index node, EdgeType kind) const
    {
        return m_in[static_cast<std::size_t>(kind)][node];
    }

    [[nodiscard]] std::set<SkillId> parents(const SkillId& id) const;

    /// Size of the red cluster containing the node (1 for a singleton).
    [[nodiscard]] std::size_t red_cluster_size(Index node) const { return m_cluster_size[m_cluster[node]]; }
    [[nodiscard]] Index red_cluster_of(Index node) const { return m_cluster[node]; }

    [[nodiscard]] std::size_t edge_count(EdgeType kind) const;
    /// All edges sorted by (src, dst, kind).
    [[nodiscard]] std::vector<Edge> edges() const;

    [[nodiscard]] const std::vector<AdapterRecord>& adapters() const noexcept { return m_adapters; }
    [[nodiscard]] bool adapter_bridges(Index src, Index dst) const;

    [[nodiscard]] const HsegConfig& config() const noexcept { return m_config; }

  private:
    friend Hseg build_hseg(std::span<const SkillContract>, const HsegConfig&, std::span<const AdapterRecord>);

    using Adjacency = std::vector<std::vector<Index>>;

    HsegConfig m_config;
    std::vector<SkillId> m_nodes;
    std::unordered_map<std::string, Index> m_index;
    std::array<Adjacency, 4> m_out;
    std::array<Adjacency, 4> m_in;
    std::vector<Index> m_cluster;
    std::vector<std::size_t> m_cluster_size;
    std::vector<AdapterRecord> m_adapters;
    std::set<std::pair<Index, Index>> m_bridged;
};

/// Pairwise edge construction with hash-grouped fast paths for red and alt.
/// Throws DuplicateSkillId, ConfigInvalid, or UnknownSkillId (adapter endpoint).
[[nodiscard]] Hseg build_hseg(std::span<const SkillContract> skills, const HsegConfig& config = {},
                              std::span<const AdapterRecord> adapters = {});
[[nodiscard]] Hseg build_hseg(const Library& lib, const HsegConfig& config = {});

/// Connected components of the red subgraph; ids ascending inside each
/// cluster, clusters ordered by their smallest id.
[[nodiscard]] std::vector<std::vector<SkillId>> red_clusters(const Hseg& g);

[[nodiscard]] double jaccard(const TypeSet& a, const TypeSet& b);

}  // namespace skillops
