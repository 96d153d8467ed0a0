#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "lexgraph/common.hpp"

namespace lexgraph {

// Undirected weighted graph over dense node indices 0..n-1. Self-loops are
// rejected at the public surface; they only appear on internal aggregates.
class WeightedGraph {
public:
    WeightedGraph() = default;
    explicit WeightedGraph(std::size_t node_count)
        : adj_(node_count), self_weight_(node_count, 0.0) {}

    std::size_t node_count() const { return adj_.size(); }

    void add_edge(std::size_t u, std::size_t v, double weight = 1.0) {
        if (u >= node_count() || v >= node_count())
            throw ValidationError("edge endpoint out of range");
        if (u == v) throw ValidationError("self-loops are not allowed");
        if (weight < 0.0) throw ValidationError("edge weights must be non-negative");
        adj_[u].push_back({v, weight});
        adj_[v].push_back({u, weight});
    }

    const std::vector<std::pair<std::size_t, double>>& neighbors(std::size_t v) const {
        return adj_[v];
    }

    double self_weight(std::size_t v) const { return self_weight_[v]; }

    // Weighted degree; self-loop weight counts twice, per convention.
    double degree(std::size_t v) const {
        double d = 2.0 * self_weight_[v];
        for (const auto& [_, w] : adj_[v]) d += w;
        return d;
    }

    // Total edge weight m (each undirected edge once, self-loops once).
    double total_weight() const {
        double m = 0.0;
        for (std::size_t v = 0; v < node_count(); ++v) {
            m += 2.0 * self_weight_[v];
            for (const auto& [_, w] : adj_[v]) m += w;
        }
        return m / 2.0;
    }

    std::size_t edge_count() const {
        std::size_t e = 0;
        for (const auto& nbrs : adj_) e += nbrs.size();
        return e / 2;
    }

    void set_self_weight(std::size_t v, double w) { self_weight_[v] = w; }

private:
    std::vector<std::vector<std::pair<std::size_t, double>>> adj_;
    std::vector<double> self_weight_;
};

struct LeidenConfig {
    double resolution = 1.0;         // gamma in the quality function
    int max_passes = 10;
    std::uint64_t rng_seed = 0;
    std::size_t min_community_size = 1;
};

struct Partition {
    // Dense community indices 0..(m-1), one entry per node.
    std::vector<int> assignment;
    double modularity = 0.0;

    int community_count() const {
        int m = 0;
        for (int c : assignment) m = std::max(m, c + 1);
        return m;
    }
};

struct LeidenTrace {
    // Flat-partition modularity after each local-moving pass; non-decreasing.
    std::vector<double> pass_modularity;
};

// Newman-Girvan modularity with resolution gamma:
//   Q = (1/2m) * sum_ij [A_ij - gamma * k_i k_j / 2m] * delta(c_i, c_j)
// Computed per community as sum_c [L_c/m - gamma * (K_c/2m)^2]. Defined as 0
// for the edgeless graph.
inline double modularity(const WeightedGraph& graph, const std::vector<int>& assignment,
                         double resolution = 1.0) {
    if (assignment.size() != graph.node_count())
        throw ValidationError("assignment must cover every node");
    const double m = graph.total_weight();
    if (m <= 0.0) return 0.0;
    int communities = 0;
    for (int c : assignment) {
        if (c < 0) throw ValidationError("assignment must cover every node");
        communities = std::max(communities, c + 1);
    }
    std::vector<double> intra(static_cast<std::size_t>(communities), 0.0);
    std::vector<double> total_degree(static_cast<std::size_t>(communities), 0.0);
    for (std::size_t v = 0; v < graph.node_count(); ++v) {
        const auto c = static_cast<std::size_t>(assignment[v]);
        total_degree[c] += graph.degree(v);
        intra[c] += graph.self_weight(v);
        for (const auto& [u, w] : graph.neighbors(v))
            if (assignment[u] == assignment[v] && u > v) intra[c] += w;
    }
    double q = 0.0;
    for (std::size_t c = 0; c < static_cast<std::size_t>(communities); ++c) {
        const double frac = total_degree[c] / (2.0 * m);
        q += intra[c] / m - resolution * frac * frac;
    }
    return q;
}

namespace detail {

// Uniform double in [0, 1) built from raw engine output; std distributions
// are implementation-defined and would break cross-platform reproducibility.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename T>
void shuffle_indices(std::vector<T>& values, std::mt19937_64& rng) {
    for (std::size_t i = values.size(); i > 1; --i)
        std::swap(values[i - 1], values[rng() % i]);
}

// Queue-based greedy local moving. Moves a node to the neighboring (or empty)
// community with the largest positive modularity gain; ties resolved to the
// lowest community index. Mutates `comm` in place.
inline bool local_move(const WeightedGraph& g, std::vector<int>& comm, double resolution,
                       std::mt19937_64& rng) {
    const std::size_t n = g.node_count();
    const double m = g.total_weight();
    if (n == 0 || m <= 0.0) return false;
    const double two_m = 2.0 * m;

    int comm_count = 0;
    for (int c : comm) comm_count = std::max(comm_count, c + 1);
    std::vector<double> comm_degree(static_cast<std::size_t>(comm_count), 0.0);
    std::vector<std::size_t> comm_size(static_cast<std::size_t>(comm_count), 0);
    for (std::size_t v = 0; v < n; ++v) {
        comm_degree[static_cast<std::size_t>(comm[v])] += g.degree(v);
        comm_size[static_cast<std::size_t>(comm[v])] += 1;
    }
    std::vector<int> free_ids;
    for (int c = 0; c < comm_count; ++c)
        if (comm_size[static_cast<std::size_t>(c)] == 0) free_ids.push_back(c);

    std::vector<std::size_t> queue(n);
    std::iota(queue.begin(), queue.end(), 0);
    shuffle_indices(queue, rng);
    std::vector<bool> queued(n, true);
    std::size_t head = 0;

    std::vector<double> weight_to(static_cast<std::size_t>(comm_count) + n + 1, 0.0);
    bool moved_any = false;

    while (head < queue.size()) {
        const std::size_t v = queue[head++];
        queued[v] = false;
        const int cur = comm[v];
        const double k_v = g.degree(v);

        std::vector<int> touched;
        for (const auto& [u, w] : g.neighbors(v)) {
            const int c = comm[u];
            if (weight_to[static_cast<std::size_t>(c)] == 0.0) touched.push_back(c);
            weight_to[static_cast<std::size_t>(c)] += w;
        }

        // Gain of moving v from `cur` into c, relative to staying put:
        //   [w(v->c) - w(v->cur\v)] - gamma * k_v * (K_c - K_cur + k_v) / 2m
        const double w_cur = weight_to[static_cast<std::size_t>(cur)];
        const double k_cur_rest = comm_degree[static_cast<std::size_t>(cur)] - k_v;
        auto gain_to = [&](int c, double w_c) {
            const double k_c = (c == cur) ? k_cur_rest : comm_degree[static_cast<std::size_t>(c)];
            return (w_c - w_cur) - resolution * k_v * (k_c - k_cur_rest) / two_m;
        };

        int best = cur;
        double best_gain = 0.0;
        for (int c : touched) {
            if (c == cur) continue;
            const double gain = gain_to(c, weight_to[static_cast<std::size_t>(c)]);
            if (gain > best_gain + 1e-12 ||
                (gain > best_gain - 1e-12 && best != cur && c < best)) {
                best = c;
                best_gain = std::max(gain, best_gain);
            }
        }
        // Splitting into a fresh (empty) community is a candidate move too.
        if (comm_size[static_cast<std::size_t>(cur)] > 1) {
            const double fresh_gain = -w_cur + resolution * k_v * k_cur_rest / two_m;
            if (fresh_gain > best_gain + 1e-12) {
                best = free_ids.empty() ? comm_count : free_ids.back();
                best_gain = fresh_gain;
            }
        }

        for (int c : touched) weight_to[static_cast<std::size_t>(c)] = 0.0;

        if (best != cur && best_gain > 1e-12) {
            if (best == comm_count) {
                comm_degree.push_back(0.0);
                comm_size.push_back(0);
                weight_to.push_back(0.0);
                ++comm_count;
            } else if (!free_ids.empty() && best == free_ids.back() &&
                       comm_size[static_cast<std::size_t>(best)] == 0) {
                free_ids.pop_back();
            }
            comm_degree[static_cast<std::size_t>(cur)] -= k_v;
            comm_size[static_cast<std::size_t>(cur)] -= 1;
            comm_degree[static_cast<std::size_t>(best)] += k_v;
            comm_size[static_cast<std::size_t>(best)] += 1;
            if (comm_size[static_cast<std::size_t>(cur)] == 0) free_ids.push_back(cur);
            comm[v] = best;
            moved_any = true;
            for (const auto& [u, w] : g.neighbors(v)) {
                (void)w;
                if (!queued[u] && comm[u] != best) {
                    queue.push_back(u);
                    queued[u] = true;
                }
            }
        }
    }
    return moved_any;
}

// Renumber community labels densely, ordered by smallest member node index.
inline int renumber(std::vector<int>& comm) {
    std::map<int, int> remap;
    for (int c : comm)
        if (!remap.count(c)) remap.emplace(c, static_cast<int>(remap.size()));
    for (int& c : comm) c = remap[c];
    return static_cast<int>(remap.size());
}

// Refinement: starting from singletons, each still-singleton node merges into
// a sub-community *within its own local-moving community*, chosen randomly
// among non-negative-gain neighbors with probability proportional to
// exp(gain / theta). The randomness diversifies aggregation across restarts;
// merges only happen across positive edge weight, so every refined
// sub-community is internally connected.
inline std::vector<int> refine(const WeightedGraph& g, const std::vector<int>& comm,
                               double resolution, std::mt19937_64& rng) {
    constexpr double kTheta = 0.01;
    const std::size_t n = g.node_count();
    std::vector<int> refined(n);
    std::iota(refined.begin(), refined.end(), 0);
    const double m = g.total_weight();
    if (m <= 0.0) return refined;
    const double two_m = 2.0 * m;

    std::vector<double> sub_degree(n);
    std::vector<std::size_t> sub_size(n, 1);
    for (std::size_t v = 0; v < n; ++v) sub_degree[v] = g.degree(v);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    shuffle_indices(order, rng);

    std::vector<double> weight_to(n, 0.0);
    for (std::size_t v : order) {
        if (sub_size[static_cast<std::size_t>(refined[v])] != 1) continue;
        std::vector<int> touched;
        for (const auto& [u, w] : g.neighbors(v)) {
            if (comm[u] != comm[v]) continue;  // only merge inside the community
            if (w <= 0.0) continue;
            const int s = refined[u];
            if (s == refined[v]) continue;
            if (weight_to[static_cast<std::size_t>(s)] == 0.0) touched.push_back(s);
            weight_to[static_cast<std::size_t>(s)] += w;
        }
        const double k_v = g.degree(v);
        std::vector<std::pair<int, double>> candidates;  // (sub, gain), gain >= 0
        double max_gain = 0.0;
        for (int s : touched) {
            const double gain = weight_to[static_cast<std::size_t>(s)] -
                                resolution * k_v * sub_degree[static_cast<std::size_t>(s)] / two_m;
            if (gain >= 0.0) {
                candidates.push_back({s, gain});
                max_gain = std::max(max_gain, gain);
            }
        }
        for (int s : touched) weight_to[static_cast<std::size_t>(s)] = 0.0;
        if (candidates.empty()) continue;
        std::sort(candidates.begin(), candidates.end());
        double total = 0.0;
        for (auto& [s, gain] : candidates) {
            gain = std::exp((gain - max_gain) / kTheta);
            total += gain;
        }
        const double draw = uniform01(rng) * total;
        double cumulative = 0.0;
        int chosen = candidates.back().first;
        for (const auto& [s, weight] : candidates) {
            cumulative += weight;
            if (draw < cumulative) {
                chosen = s;
                break;
            }
        }
        sub_degree[static_cast<std::size_t>(chosen)] += k_v;
        sub_size[static_cast<std::size_t>(chosen)] += 1;
        sub_size[static_cast<std::size_t>(refined[v])] -= 1;
        refined[v] = chosen;
    }
    return refined;
}

// Collapse refined sub-communities into aggregate nodes. `agg_comm` receives
// the local-moving community of each aggregate node.
inline WeightedGraph aggregate(const WeightedGraph& g, const std::vector<int>& refined,
                               const std::vector<int>& comm, std::vector<int>& node_to_agg,
                               std::vector<int>& agg_comm) {
    std::vector<int> labels = refined;
    const int agg_n = renumber(labels);
    node_to_agg = labels;

    agg_comm.assign(static_cast<std::size_t>(agg_n), 0);
    for (std::size_t v = 0; v < g.node_count(); ++v)
        agg_comm[static_cast<std::size_t>(labels[v])] = comm[v];

    WeightedGraph out(static_cast<std::size_t>(agg_n));
    std::map<std::pair<int, int>, double> edge_weight;
    std::vector<double> self(static_cast<std::size_t>(agg_n), 0.0);
    for (std::size_t v = 0; v < g.node_count(); ++v) {
        self[static_cast<std::size_t>(labels[v])] += g.self_weight(v);
        for (const auto& [u, w] : g.neighbors(v)) {
            if (u < v) continue;
            const int a = labels[v], b = labels[u];
            if (a == b)
                self[static_cast<std::size_t>(a)] += w;
            else
                edge_weight[{std::min(a, b), std::max(a, b)}] += w;
        }
    }
    for (std::size_t a = 0; a < static_cast<std::size_t>(agg_n); ++a)
        out.set_self_weight(a, self[a]);
    for (const auto& [key, w] : edge_weight)
        out.add_edge(static_cast<std::size_t>(key.first), static_cast<std::size_t>(key.second), w);
    return out;
}

// Split any community that is not internally connected into its connected
// components. Never decreases modularity for non-negative resolution.
inline void split_disconnected(const WeightedGraph& g, std::vector<int>& comm) {
    const std::size_t n = g.node_count();
    std::vector<int> component(n, -1);
    int next = 0;
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < n; ++start) {
        if (component[start] != -1) continue;
        component[start] = next;
        stack.push_back(start);
        while (!stack.empty()) {
            const std::size_t v = stack.back();
            stack.pop_back();
            for (const auto& [u, w] : g.neighbors(v)) {
                if (w <= 0.0) continue;
                if (component[u] == -1 && comm[u] == comm[v]) {
                    component[u] = component[v];
                    stack.push_back(u);
                }
            }
        }
        ++next;
    }
    comm = component;
    renumber(comm);
}

// Merge communities below the configured minimum size into the neighboring
// community with the strongest connection; isolated small communities stay.
inline void enforce_min_size(const WeightedGraph& g, std::vector<int>& comm,
                             std::size_t min_size) {
    if (min_size <= 1) return;
    bool changed = true;
    while (changed) {
        changed = false;
        const int count = renumber(comm);
        std::vector<std::size_t> sizes(static_cast<std::size_t>(count), 0);
        for (int c : comm) sizes[static_cast<std::size_t>(c)]++;
        std::map<int, std::map<int, double>> links;
        for (std::size_t v = 0; v < g.node_count(); ++v)
            for (const auto& [u, w] : g.neighbors(v))
                if (comm[u] != comm[v]) links[comm[v]][comm[u]] += w;
        for (int c = 0; c < count && !changed; ++c) {
            if (sizes[static_cast<std::size_t>(c)] >= min_size) continue;
            const auto it = links.find(c);
            if (it == links.end() || it->second.empty()) continue;
            int target = -1;
            double best = -1.0;
            for (const auto& [other, w] : it->second)
                if (w > best) best = w, target = other;
            for (int& x : comm)
                if (x == c) x = target;
            changed = true;
        }
    }
    renumber(comm);
}

}  // namespace detail

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline int count_communities(const std::vector<int>& comm) {
    std::vector<int> copy = comm;
    return renumber(copy);
}

// Greedy pairwise community merging: repeatedly merge the community pair with
// the largest positive modularity gain
//   dQ(c, d) = W_cd / m - gamma * K_c * K_d / (2 m^2)
// until no merge improves. Complements node moves, which cannot unsplit
// over-fragmented partitions.
inline bool merge_polish(const WeightedGraph& g, std::vector<int>& comm, double resolution) {
    const double m = g.total_weight();
    if (m <= 0.0) return false;
    bool merged_any = false;
    for (;;) {
        const int count = renumber(comm);
        if (count <= 1) break;
        std::vector<double> degree(static_cast<std::size_t>(count), 0.0);
        std::map<std::pair<int, int>, double> between;
        for (std::size_t v = 0; v < g.node_count(); ++v) {
            degree[static_cast<std::size_t>(comm[v])] += g.degree(v);
            for (const auto& [u, w] : g.neighbors(v)) {
                if (u <= v || comm[u] == comm[v]) continue;
                between[{std::min(comm[v], comm[u]), std::max(comm[v], comm[u])}] += w;
            }
        }
        double best_gain = 1e-12;
        std::pair<int, int> best_pair{-1, -1};
        for (const auto& [pair, w] : between) {
            const double gain =
                w / m - resolution * degree[static_cast<std::size_t>(pair.first)] *
                            degree[static_cast<std::size_t>(pair.second)] / (2.0 * m * m);
            if (gain > best_gain) {
                best_gain = gain;
                best_pair = pair;
            }
        }
        if (best_pair.first < 0) break;
        for (int& c : comm)
            if (c == best_pair.second) c = best_pair.first;
        merged_any = true;
    }
    return merged_any;
}

// One full Leiden run. Each outer pass restarts from the current flat
// partition at original-node granularity (so single-node improvements are
// never locked inside aggregates), then runs the local-move / refine /
// aggregate level loop to collapse. Outer passes stop when a full pass
// yields modularity gain < 1e-7 or max_passes is reached.
inline Partition leiden_single(const WeightedGraph& graph, const LeidenConfig& config,
                               LeidenTrace* trace, std::uint64_t seed,
                               const std::vector<int>* initial = nullptr) {
    const std::size_t n = graph.node_count();
    Partition result;
    if (n == 0) return result;

    std::mt19937_64 rng(seed);

    std::vector<int> flat(n);
    if (initial) {
        flat = *initial;
        renumber(flat);
    } else {
        std::iota(flat.begin(), flat.end(), 0);
    }
    double prev_q = modularity(graph, flat, config.resolution);

    for (int pass = 0; pass < config.max_passes; ++pass) {
        WeightedGraph agg = graph;
        std::vector<int> node_to_agg(n);
        std::iota(node_to_agg.begin(), node_to_agg.end(), 0);
        std::vector<int> agg_comm = flat;

        for (;;) {
            local_move(agg, agg_comm, config.resolution, rng);
            if (static_cast<std::size_t>(count_communities(agg_comm)) == agg.node_count())
                break;  // every community is a single aggregate node
            const std::vector<int> refined = refine(agg, agg_comm, config.resolution, rng);
            if (static_cast<std::size_t>(count_communities(refined)) == agg.node_count())
                break;  // refinement kept all singletons; aggregation is identity
            std::vector<int> agg_map;
            std::vector<int> next_comm;
            agg = aggregate(agg, refined, agg_comm, agg_map, next_comm);
            for (std::size_t v = 0; v < n; ++v)
                node_to_agg[v] = agg_map[static_cast<std::size_t>(node_to_agg[v])];
            agg_comm = std::move(next_comm);
        }

        std::vector<int> next_flat(n);
        for (std::size_t v = 0; v < n; ++v)
            next_flat[v] = agg_comm[static_cast<std::size_t>(node_to_agg[v])];
        renumber(next_flat);
        const double q = modularity(graph, next_flat, config.resolution);
        if (trace) trace->pass_modularity.push_back(std::max(q, prev_q));
        if (q > prev_q) {
            flat = std::move(next_flat);
        }
        if (q < prev_q + 1e-7) break;
        prev_q = q;
    }

    // Polish to a combined fixpoint: no community merge and no single-node
    // move improves. Both steps are gain-guarded, so modularity only rises.
    for (int round = 0; round < 2 * static_cast<int>(n) + 2; ++round) {
        const bool merged = merge_polish(graph, flat, config.resolution);
        const bool moved = local_move(graph, flat, config.resolution, rng);
        if (!merged && !moved) break;
    }
    if (trace) trace->pass_modularity.push_back(modularity(graph, flat, config.resolution));

    split_disconnected(graph, flat);
    enforce_min_size(graph, flat, config.min_community_size);
    renumber(flat);
    result.assignment = std::move(flat);
    result.modularity = modularity(graph, result.assignment, config.resolution);
    return result;
}

}  // namespace detail

// Leiden community detection. Greedy local moving lands in seed-dependent
// local optima, so several runs race: the first starts from singletons, the
// rest from random coarse partitions with varying group counts (small
// community counts are where greedy over-fragments). The best partition wins,
// ties to the lexicographically smaller assignment. Deterministic for a
// fixed rng_seed.
inline Partition leiden(const WeightedGraph& graph, const LeidenConfig& config = {},
                        LeidenTrace* trace = nullptr) {
    const std::size_t n = graph.node_count();
    if (n == 0) return {};
    const int restarts = n <= 64 ? 16 : (n <= 512 ? 8 : 3);
    Partition best;
    LeidenTrace best_trace;
    bool have_best = false;
    for (int r = 0; r < restarts; ++r) {
        const std::uint64_t seed =
            r == 0 ? config.rng_seed
                   : detail::splitmix64(config.rng_seed + static_cast<std::uint64_t>(r));
        std::vector<int> init;
        const std::vector<int>* init_ptr = nullptr;
        if (r > 0) {
            std::mt19937_64 init_rng(detail::splitmix64(seed));
            const std::size_t groups = 1 + (r - 1) % std::max<std::size_t>(n, 1);
            init.resize(n);
            for (std::size_t v = 0; v < n; ++v)
                init[v] = static_cast<int>(init_rng() % (groups + 1));
            init_ptr = &init;
        }
        LeidenTrace run_trace;
        Partition candidate = detail::leiden_single(graph, config, &run_trace, seed, init_ptr);
        const bool better =
            !have_best || candidate.modularity > best.modularity + 1e-12 ||
            (candidate.modularity > best.modularity - 1e-12 &&
             candidate.assignment < best.assignment);
        if (better) {
            best = std::move(candidate);
            best_trace = std::move(run_trace);
            have_best = true;
        }
    }
    if (trace) *trace = best_trace;
    return best;
}

}  // namespace lexgraph
