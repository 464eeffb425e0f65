#pragma once

// Full per-node SIS recursion on explicit graphs, plus star and multilevel
// star builders. This is the reference the reduced maps are checked against.

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "starsis/params.hpp"

namespace starsis {

/// Undirected simple graph stored as per-node neighbor lists.
class GraphTopology {
public:
    explicit GraphTopology(std::vector<std::vector<int>> neighbors) : neighbors_(std::move(neighbors)) {
        const auto count = static_cast<int>(neighbors_.size());
        if (count == 0) {
            throw std::invalid_argument("GraphTopology: need at least one node");
        }
        for (int i = 0; i < count; ++i) {
            auto sorted = neighbors_[i];
            std::sort(sorted.begin(), sorted.end());
            if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
                throw std::invalid_argument("GraphTopology: duplicate edge at node " + std::to_string(i));
            }
            for (int j : neighbors_[i]) {
                if (j < 0 || j >= count) {
                    throw std::invalid_argument("GraphTopology: neighbor index out of range");
                }
                if (j == i) {
                    throw std::invalid_argument("GraphTopology: self-loop at node " + std::to_string(i));
                }
                const auto& back = neighbors_[j];
                if (std::find(back.begin(), back.end(), i) == back.end()) {
                    throw std::invalid_argument("GraphTopology: adjacency is not symmetric");
                }
            }
        }
    }

    [[nodiscard]] int node_count() const noexcept { return static_cast<int>(neighbors_.size()); }
    [[nodiscard]] std::span<const int> neighbors(int i) const { return neighbors_.at(i); }
    [[nodiscard]] int degree(int i) const { return static_cast<int>(neighbors_.at(i).size()); }

    [[nodiscard]] std::size_t edge_count() const noexcept {
        std::size_t total = 0;
        for (const auto& adj : neighbors_) {
            total += adj.size();
        }
        return total / 2;
    }

    /// True when node 0 is adjacent to every other node and every other node
    /// has degree one.
    [[nodiscard]] bool is_star() const noexcept {
        const int count = node_count();
        if (count < 2 || degree(0) != count - 1) {
            return false;
        }
        for (int i = 1; i < count; ++i) {
            if (degree(i) != 1) {
                return false;
            }
        }
        return true;
    }

private:
    std::vector<std::vector<int>> neighbors_;
};

/// Per-node infection probabilities.
class FullState {
public:
    explicit FullState(std::vector<double> p) : p_(std::move(p)) {
        for (double v : p_) {
            detail::require_unit(v, "FullState entry");
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return p_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return p_[i]; }
    [[nodiscard]] std::span<const double> values() const noexcept { return p_; }

private:
    std::vector<double> p_;
};

/// Star with hub 0 and spokes 1..n.
inline GraphTopology build_star(int n) {
    if (n < 1) {
        throw std::invalid_argument("build_star: need at least one spoke");
    }
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n) + 1);
    for (int i = 1; i <= n; ++i) {
        adj[0].push_back(i);
        adj[i].push_back(0);
    }
    return GraphTopology{std::move(adj)};
}

/// Number of nodes on each level of a multilevel star with the given spoke
/// counts; level 0 is the hub.
inline std::vector<std::size_t> level_sizes(std::span<const int> counts) {
    if (counts.empty()) {
        throw std::invalid_argument("level_sizes: counts must be non-empty");
    }
    std::vector<std::size_t> sizes{1};
    for (int c : counts) {
        if (c < 1) {
            throw std::invalid_argument("level_sizes: every count must be >= 1");
        }
        sizes.push_back(sizes.back() * static_cast<std::size_t>(c));
    }
    return sizes;
}

/// Index of the first node on each level (nodes are numbered level by level),
/// with a trailing entry equal to the total node count.
inline std::vector<std::size_t> level_offsets(std::span<const int> counts) {
    const auto sizes = level_sizes(counts);
    std::vector<std::size_t> offsets{0};
    for (auto s : sizes) {
        offsets.push_back(offsets.back() + s);
    }
    return offsets;
}

/// Tree in which every level-k node has counts[k] children. Nodes are numbered
/// breadth first so each level occupies a contiguous index range.
inline GraphTopology build_multilevel_star(std::span<const int> counts) {
    const auto offsets = level_offsets(counts);
    std::vector<std::vector<int>> adj(offsets.back());
    for (std::size_t level = 0; level < counts.size(); ++level) {
        const auto per_parent = static_cast<std::size_t>(counts[level]);
        for (std::size_t parent = offsets[level]; parent < offsets[level + 1]; ++parent) {
            const std::size_t first_child = offsets[level + 1] + (parent - offsets[level]) * per_parent;
            for (std::size_t c = 0; c < per_parent; ++c) {
                const auto child = static_cast<int>(first_child + c);
                adj[parent].push_back(child);
                adj[child].push_back(static_cast<int>(parent));
            }
        }
    }
    return GraphTopology{std::move(adj)};
}

inline GraphTopology build_multilevel_star(std::initializer_list<int> counts) {
    return build_multilevel_star(std::span<const int>(counts.begin(), counts.size()));
}

/// One synchronous step: p'[i] = 1 - (1 - a p[i]) * prod_{j ~ i} (1 - b p[j]).
inline FullState step_full(const GraphTopology& topology, const Params& params, const FullState& state) {
    if (state.size() != static_cast<std::size_t>(topology.node_count())) {
        throw std::invalid_argument("step_full: state length does not match node count");
    }
    const double a = params.a();
    const double b = params.b();
    std::vector<double> next(state.size());
    for (int i = 0; i < topology.node_count(); ++i) {
        double survive = 1.0 - a * state[i];
        for (int j : topology.neighbors(i)) {
            survive *= 1.0 - b * state[j];
        }
        next[i] = 1.0 - survive;
    }
    return FullState{std::move(next)};
}

/// Largest pairwise gap between spoke probabilities of a star.
inline double spoke_spread(const GraphTopology& topology, const FullState& state) {
    if (!topology.is_star()) {
        throw std::invalid_argument("spoke_spread: topology is not a star");
    }
    if (state.size() != static_cast<std::size_t>(topology.node_count())) {
        throw std::invalid_argument("spoke_spread: state length does not match node count");
    }
    const auto spokes = state.values().subspan(1);
    const auto [lo, hi] = std::minmax_element(spokes.begin(), spokes.end());
    return *hi - *lo;
}

/// Exact one-step ratio of the spoke spread under step_full: every spoke sees
/// the same hub, so p'_i - p'_j = a (1 - b p_hub) (p_i - p_j).
inline double spoke_spread_factor(const Params& params, double hub) {
    detail::require_unit(hub, "hub probability");
    return params.a() * (1.0 - params.b() * hub);
}

/// Largest spread within any level of a multilevel star.
inline double level_spread(std::span<const int> counts, const FullState& state) {
    const auto offsets = level_offsets(counts);
    if (state.size() != offsets.back()) {
        throw std::invalid_argument("level_spread: state length does not match node count");
    }
    double spread = 0.0;
    const auto values = state.values();
    for (std::size_t level = 0; level + 1 < offsets.size(); ++level) {
        const auto slice = values.subspan(offsets[level], offsets[level + 1] - offsets[level]);
        const auto [lo, hi] = std::minmax_element(slice.begin(), slice.end());
        spread = std::max(spread, *hi - *lo);
    }
    return spread;
}

}  // namespace starsis
