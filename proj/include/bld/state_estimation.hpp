// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License. You may
// obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "bld/core.hpp"
#include "bld/delaunay.hpp"
#include "bld/maxflow.hpp"
#include "bld/superpixels.hpp"

namespace bld {

/// Undirected edge set over SP indices; canonical (min,max) pairs, sorted,
/// no self-loops or duplicates.
struct NeighborhoodSystem {
    int n = 0;
    std::vector<std::pair<int, int>> edges;

    std::vector<std::vector<std::pair<int, int>>> adjacency() const {
        std::vector<std::vector<std::pair<int, int>>> adj(n);
        for (size_t e = 0; e < edges.size(); ++e) {
            adj[edges[e].first].push_back({edges[e].second, static_cast<int>(e)});
            adj[edges[e].second].push_back({edges[e].first, static_cast<int>(e)});
        }
        return adj;
    }
};

struct InterlineLabel {
    double value;  // d / k in pixels
    int diameter;
    int harmonic;
};

/// The fixed list of admissible interline distances, sorted descending,
/// with each label's (diameter, harmonic) provenance.
class InterlineLabelSet {
public:
    static InterlineLabelSet make(const PipelineConfig& cfg) {
        InterlineLabelSet set;
        for (int d : cfg.diameters)
            for (int k : cfg.harmonics)
                set.labels_.push_back({static_cast<double>(d) / k, d, k});
        std::sort(set.labels_.begin(), set.labels_.end(),
                  [](const InterlineLabel& a, const InterlineLabel& b) {
                      return a.value > b.value;
                  });
        for (size_t i = 1; i < set.labels_.size(); ++i)
            if (std::abs(set.labels_[i].value - set.labels_[i - 1].value) < 1e-9)
                throw std::invalid_argument("InterlineLabelSet: duplicate label value");
        return set;
    }

    const std::vector<InterlineLabel>& labels() const { return labels_; }
    int size() const { return static_cast<int>(labels_.size()); }
    double value(int i) const { return labels_[i].value; }

    int index_of(double value, double tol = 1e-6) const {
        for (size_t i = 0; i < labels_.size(); ++i)
            if (std::abs(labels_[i].value - value) <= tol) return static_cast<int>(i);
        throw std::invalid_argument("unknown interline label: " + std::to_string(value));
    }

    int index_of_dk(int d, int k) const {
        for (size_t i = 0; i < labels_.size(); ++i)
            if (labels_[i].diameter == d && labels_[i].harmonic == k)
                return static_cast<int>(i);
        throw std::invalid_argument("unknown (diameter, harmonic) pair");
    }

private:
    std::vector<InterlineLabel> labels_;
};

/// State of an SP: local text orientation in (-pi/2, pi/2] and interline
/// distance (one of the label-set values).
struct SpState {
    double theta = 0.0;
    double interline = 0.0;
    int label_index = -1;
    bool isolated = false;
};

/// Delaunay neighborhood over SP positions. Fewer than 3 distinct positions
/// or a fully collinear set yields the path along the dominant axis;
/// duplicate positions attach to their representative.
inline NeighborhoodSystem build_neighborhood(const std::vector<Point>& positions) {
    if (positions.empty())
        throw std::invalid_argument("build_neighborhood: needs at least one SP");
    NeighborhoodSystem ns;
    ns.n = static_cast<int>(positions.size());

    std::map<std::pair<double, double>, int> rep_of;
    std::vector<int> unique_idx;
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < ns.n; ++i) {
        auto [it, fresh] = rep_of.try_emplace({positions[i].x, positions[i].y}, i);
        if (fresh)
            unique_idx.push_back(i);
        else
            edges.emplace_back(it->second, i);
    }

    const int m = static_cast<int>(unique_idx.size());
    bool collinear = true;
    if (m >= 3) {
        Point p0 = positions[unique_idx[0]], p1 = positions[unique_idx[1]];
        for (int j = 2; j < m && collinear; ++j)
            if (detail::orient2d(p0, p1, positions[unique_idx[j]]) != 0) collinear = false;
    }

    if (m <= 2 || collinear) {
        double ext_x = 0.0, ext_y = 0.0;
        for (int a : unique_idx)
            for (int b : unique_idx) {
                ext_x = std::max(ext_x, std::abs(positions[a].x - positions[b].x));
                ext_y = std::max(ext_y, std::abs(positions[a].y - positions[b].y));
            }
        std::vector<int> order = unique_idx;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (ext_x >= ext_y)
                return positions[a].x != positions[b].x ? positions[a].x < positions[b].x
                                                        : positions[a].y < positions[b].y;
            return positions[a].y != positions[b].y ? positions[a].y < positions[b].y
                                                    : positions[a].x < positions[b].x;
        });
        for (size_t j = 0; j + 1 < order.size(); ++j) edges.emplace_back(order[j], order[j + 1]);
    } else {
        std::vector<Point> pts(m);
        for (int j = 0; j < m; ++j) pts[j] = positions[unique_idx[j]];
        for (auto [u, v] : detail::delaunay_edges(pts))
            edges.emplace_back(unique_idx[u], unique_idx[v]);
    }

    for (auto& [u, v] : edges)
        if (u > v) std::swap(u, v);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    ns.edges = std::move(edges);
    return ns;
}

inline NeighborhoodSystem build_neighborhood(const std::vector<SuperPixel>& sps) {
    std::vector<Point> pos(sps.size());
    for (size_t i = 0; i < sps.size(); ++i) pos[i] = sps[i].pos;
    return build_neighborhood(pos);
}

/// Average map intensity along the segment, sampled at unit arc-length
/// spacing with both endpoints included. With `literal` the mean is divided
/// by the segment length.
inline double connectivity(Point a, Point b, const GrayImage& img, bool literal = false) {
    const double len = norm2(b - a);
    if (len < 1e-12) return interp_intensity(img, a);
    const int m = static_cast<int>(std::ceil(len)) + 1;
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
        double t = static_cast<double>(i) / (m - 1);
        acc += interp_intensity(img, a + t * (b - a));
    }
    const double mean = acc / m;
    return literal ? mean / len : mean;
}

struct OrientationEstimate {
    double theta = 0.0;
    bool isolated = false;
};

/// Local text orientation: take the one or two incident edges with the
/// strongest baseline connectivity and use the slope through their far
/// endpoints (or through the single edge itself). Vertical gives pi/2.
inline OrientationEstimate local_text_orientation(
    int p, const std::vector<std::vector<std::pair<int, int>>>& adjacency,
    const GrayImage& baseline_map, const std::vector<Point>& positions,
    bool literal_connectivity = false) {
    const auto& inc = adjacency[p];
    if (inc.empty()) return {0.0, true};

    std::vector<std::pair<double, int>> ranked; // (gamma, neighbor)
    ranked.reserve(inc.size());
    for (auto [q, _] : inc)
        ranked.push_back(
            {connectivity(positions[p], positions[q], baseline_map, literal_connectivity), q});
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    // The two-edge rule presumes both edges ride the baseline. At line ends
    // only one incident edge does; mixing in a weak cross-line edge would
    // yield an arbitrary orientation, so fall back to the single-edge rule
    // when the runner-up carries less than half the strongest support.
    const bool single = ranked.size() == 1 || ranked[1].first < 0.5 * ranked[0].first;

    Point q, r;
    if (single) {
        q = positions[p];
        r = positions[ranked[0].second];
    } else {
        q = positions[ranked[0].second];
        r = positions[ranked[1].second];
    }
    const double dx = r.x - q.x, dy = r.y - q.y;
    if (std::abs(dx) < 1e-12) return {kPi / 2.0, false};
    return {std::atan(dy / dx), false};
}

/// Projection profile around `center`: every point strictly closer than d/2
/// (center included, provided the caller passed it) falls into the bin of its
/// signed perpendicular offset, shifted by d/2 and clamped to [0, d-1].
inline std::vector<int> projection_profile(Point center, int diameter, double theta,
                                           std::span<const Point> points) {
    std::vector<int> hist(diameter, 0);
    const double ox = std::cos(theta), oy = std::sin(theta);
    const double r2 = (diameter / 2.0) * (diameter / 2.0);
    for (const Point& q : points) {
        const double dx = q.x - center.x, dy = q.y - center.y;
        if (dx * dx + dy * dy >= r2) continue;
        const double off = ox * dy - oy * dx;
        int bin = static_cast<int>(std::floor(off + diameter / 2.0));
        bin = std::clamp(bin, 0, diameter - 1);
        ++hist[bin];
    }
    return hist;
}

namespace detail {

// Per-(diameter, harmonic) trig tables for the single-bin DFT.
struct BinTable {
    std::vector<double> cos_t, sin_t;
};

inline const BinTable& bin_table(int d, int k) {
    static std::map<std::pair<int, int>, BinTable> cache;
    auto it = cache.find({d, k});
    if (it == cache.end()) {
        BinTable t;
        t.cos_t.resize(d);
        t.sin_t.resize(d);
        for (int n = 0; n < d; ++n) {
            double ang = 2.0 * kPi * k * n / d;
            t.cos_t[n] = std::cos(ang);
            t.sin_t[n] = std::sin(ang);
        }
        it = cache.emplace(std::pair{d, k}, std::move(t)).first;
    }
    return it->second;
}

// |H_k|^2 of the mean-subtracted profile, single bin.
inline double bin_energy(const std::vector<int>& hist, double mean, int k) {
    const auto& t = bin_table(static_cast<int>(hist.size()), k);
    double re = 0.0, im = 0.0;
    for (size_t n = 0; n < hist.size(); ++n) {
        const double x = hist[n] - mean;
        re += x * t.cos_t[n];
        im -= x * t.sin_t[n];
    }
    return re * re + im * im;
}

} // namespace detail

/// Energy fraction of frequency k in a profile: |H_k|^2 plus its conjugate
/// bin |H_{d-k}|^2 over the total non-DC spectrum of the mean-subtracted
/// signal (the denominator comes from Parseval). A pure cosine of k periods
/// scores exactly 1; fractions over k = 1..d/2 sum to 1.
inline double profile_energy_fraction(const std::vector<int>& hist, int k) {
    const int d = static_cast<int>(hist.size());
    double mean = 0.0;
    for (int h : hist) mean += h;
    mean /= d;
    double sq = 0.0;
    for (int h : hist) sq += (h - mean) * (h - mean);
    const double denom = d * sq;
    if (denom < 1e-12) return 0.0;
    double num = detail::bin_energy(hist, mean, k);
    if (k != 0 && k != d - k) num += detail::bin_energy(hist, mean, d - k);
    return num / denom;
}

/// Data costs for every interline label: the profile around p is DFT-analyzed
/// per diameter; the energy fraction of harmonic k (relative to the total
/// non-DC spectrum, via Parseval on the mean-subtracted profile) gives
/// D = min(-ln E, cap). A dead spectrum costs the cap outright.
inline std::vector<double> data_costs(Point p, std::span<const Point> points, double theta,
                                      const PipelineConfig& cfg,
                                      const InterlineLabelSet& labels) {
    std::vector<double> costs(labels.size(), cfg.data_cost_cap);
    for (int d : cfg.diameters) {
        std::vector<int> hist = projection_profile(p, d, theta, points);
        int nonzero = 0;
        for (int h : hist) nonzero += h != 0;
        for (int k : cfg.harmonics) {
            const int idx = labels.index_of_dk(d, k);
            // A profile with a single occupied bin has a flat spectrum: no
            // dominant coefficient, hence no periodicity evidence. Treat it
            // like the all-zero spectrum and charge the cap.
            if (nonzero < 2) {
                costs[idx] = cfg.data_cost_cap;
                continue;
            }
            const double energy = profile_energy_fraction(hist, k);
            costs[idx] = energy <= 0.0 ? cfg.data_cost_cap
                                       : std::min(-std::log(energy), cfg.data_cost_cap);
        }
    }
    return costs;
}

/// Smoothing cost by label indices: the index distance, saturated at sigma
/// once the labels are four or more steps apart.
inline double smoothing_cost(int label_a, int label_b, double sigma) {
    const int diff = std::abs(label_a - label_b);
    return diff >= 4 ? sigma : static_cast<double>(diff);
}

/// Smoothing cost by label values; unknown values are rejected.
inline double smoothing_cost(double value_a, double value_b, const InterlineLabelSet& labels,
                             double sigma) {
    return smoothing_cost(labels.index_of(value_a), labels.index_of(value_b), sigma);
}

/// Total labeling cost: alpha * sum of data costs + beta * sum of smoothing
/// costs over the neighborhood.
inline double labeling_cost(const std::vector<int>& labels,
                            const std::vector<std::vector<double>>& costs,
                            const NeighborhoodSystem& ns, double alpha, double beta,
                            double sigma) {
    double total = 0.0;
    for (size_t p = 0; p < labels.size(); ++p) total += alpha * costs[p][labels[p]];
    for (auto [u, v] : ns.edges) total += beta * smoothing_cost(labels[u], labels[v], sigma);
    return total;
}

namespace detail {

// One full pass of pairwise swap moves (each solved exactly by min-cut),
// iterated until no pair improves. Returns the converged cost.
inline double swap_converge(std::vector<int>& labels,
                            const std::vector<std::vector<double>>& costs,
                            const NeighborhoodSystem& ns,
                            const std::vector<std::vector<std::pair<int, int>>>& adj,
                            double alpha, double beta, double sigma) {
    const int n = static_cast<int>(costs.size());
    const int n_labels = static_cast<int>(costs[0].size());
    double current = labeling_cost(labels, costs, ns, alpha, beta, sigma);
    bool improved = true;
    while (improved) {
        improved = false;
        for (int a = 0; a < n_labels; ++a) {
            for (int b = a + 1; b < n_labels; ++b) {
                std::vector<int> part; // participants: SPs labeled a or b
                std::vector<int> node_of(n, -1);
                for (int p = 0; p < n; ++p)
                    if (labels[p] == a || labels[p] == b) {
                        node_of[p] = static_cast<int>(part.size());
                        part.push_back(p);
                    }
                if (part.empty()) continue;

                const int s = static_cast<int>(part.size());
                MaxFlow flow(s + 2);
                const int src = s, snk = s + 1;
                for (int i = 0; i < s; ++i) {
                    const int p = part[i];
                    double to_a = alpha * costs[p][a]; // paid when p ends up labeled a
                    double to_b = alpha * costs[p][b];
                    for (auto [q, _] : adj[p])
                        if (node_of[q] < 0) {
                            to_a += beta * smoothing_cost(a, labels[q], sigma);
                            to_b += beta * smoothing_cost(b, labels[q], sigma);
                        }
                    flow.add_edge(src, i, to_b); // cut source link => sink side => label b
                    flow.add_edge(i, snk, to_a);
                }
                const double vab = beta * smoothing_cost(a, b, sigma);
                for (auto [u, v] : ns.edges)
                    if (node_of[u] >= 0 && node_of[v] >= 0)
                        flow.add_edge(node_of[u], node_of[v], vab, vab);

                flow.run(src, snk);
                auto reach = flow.source_side(src);
                std::vector<int> proposal = labels;
                for (int i = 0; i < s; ++i) proposal[part[i]] = reach[i] ? a : b;

                const double cost = labeling_cost(proposal, costs, ns, alpha, beta, sigma);
                if (cost < current - 1e-12) {
                    labels = std::move(proposal);
                    current = cost;
                    improved = true;
                }
            }
        }
    }
    return current;
}

} // namespace detail

/// Minimize the labeling cost with iterated pairwise swap moves, each solved
/// exactly by min-cut. The saturated smoothing cost violates the triangle
/// inequality, so expansion moves are not applicable; swap moves need only
/// symmetry and V(s,s)=0. Swap sweeps converge from a fixed family of
/// deterministic starts (the per-SP greedy labeling plus every uniform
/// labeling) and the cheapest converged labeling wins, which escapes most of
/// the scheme's pairwise local optima.
inline std::vector<int> minimize_labeling(const std::vector<std::vector<double>>& costs,
                                          const NeighborhoodSystem& ns, double alpha,
                                          double beta, double sigma) {
    const int n = static_cast<int>(costs.size());
    if (n == 0) return {};
    const int n_labels = static_cast<int>(costs[0].size());

    std::vector<int> greedy(n);
    for (int p = 0; p < n; ++p) {
        int best = 0;
        for (int l = 1; l < n_labels; ++l)
            if (costs[p][l] < costs[p][best]) best = l;
        greedy[p] = best;
    }
    if (beta == 0.0 || ns.edges.empty() || n == 1) return greedy;

    auto adj = ns.adjacency();
    std::vector<int> best_labels = greedy;
    double best_cost =
        detail::swap_converge(best_labels, costs, ns, adj, alpha, beta, sigma);
    for (int l = 0; l < n_labels; ++l) {
        std::vector<int> labels(n, l);
        const double cost = detail::swap_converge(labels, costs, ns, adj, alpha, beta, sigma);
        if (cost < best_cost - 1e-12) {
            best_cost = cost;
            best_labels = std::move(labels);
        }
    }
    return best_labels;
}

/// Full state estimation: orientation from the two strongest baseline-linked
/// neighbors, interline label from the cost-minimal labeling.
inline std::vector<SpState> estimate_states(const std::vector<SuperPixel>& sps,
                                            const NeighborhoodSystem& ns,
                                            const GrayImage& baseline_map,
                                            const PipelineConfig& cfg) {
    const auto labels = InterlineLabelSet::make(cfg);
    const int n = static_cast<int>(sps.size());
    std::vector<Point> positions(n);
    for (int i = 0; i < n; ++i) positions[i] = sps[i].pos;
    auto adj = ns.adjacency();

    std::vector<SpState> states(n);
    for (int p = 0; p < n; ++p) {
        auto est = local_text_orientation(p, adj, baseline_map, positions,
                                          cfg.connectivity_literal);
        states[p].theta = est.theta;
        states[p].isolated = est.isolated;
    }

    // Spatial grid bounds the candidate set for the largest diameter.
    const double max_radius = cfg.diameters.back() / 2.0;
    const double cell = max_radius;
    std::map<std::pair<int, int>, std::vector<int>> grid;
    auto cell_of = [&](Point p) {
        return std::pair{static_cast<int>(std::floor(p.x / cell)),
                         static_cast<int>(std::floor(p.y / cell))};
    };
    for (int i = 0; i < n; ++i) grid[cell_of(positions[i])].push_back(i);

    std::vector<std::vector<double>> costs(n);
    std::vector<Point> candidates;
    for (int p = 0; p < n; ++p) {
        candidates.clear();
        auto [cx, cy] = cell_of(positions[p]);
        for (int gy = cy - 1; gy <= cy + 1; ++gy)
            for (int gx = cx - 1; gx <= cx + 1; ++gx) {
                auto it = grid.find({gx, gy});
                if (it == grid.end()) continue;
                for (int q : it->second) {
                    double dx = positions[q].x - positions[p].x;
                    double dy = positions[q].y - positions[p].y;
                    if (dx * dx + dy * dy <= max_radius * max_radius)
                        candidates.push_back(positions[q]);
                }
            }
        costs[p] = data_costs(positions[p], candidates, states[p].theta, cfg, labels);
    }

    auto assignment = minimize_labeling(costs, ns, cfg.alpha, cfg.beta, cfg.sigma);
    for (int p = 0; p < n; ++p) {
        states[p].label_index = assignment[p];
        states[p].interline = labels.value(assignment[p]);
    }
    return states;
}

} // namespace bld
