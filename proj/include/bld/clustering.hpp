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
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bld/core.hpp"
#include "bld/state_estimation.hpp"

namespace bld {

inline constexpr double kInfDistance = std::numeric_limits<double>::infinity();

/// Axial mean of two orientations (doubled-angle vector sum).
inline double axial_mean(double a, double b) {
    const double sy = std::sin(2.0 * a) + std::sin(2.0 * b);
    const double sx = std::cos(2.0 * a) + std::cos(2.0 * b);
    if (std::abs(sx) < 1e-12 && std::abs(sy) < 1e-12) return 0.0;
    return normalize_axial(0.5 * std::atan2(sy, sx));
}

struct ClusterStats {
    double theta = 0.0; // axial circular mean of member orientations
    double s = 0.0;     // arithmetic mean of member interline distances
};

/// Average orientation (axial circular mean over doubled angles) and average
/// interline distance of a set of SPs.
inline ClusterStats cluster_statistics(std::span<const int> members,
                                       std::span<const SpState> states) {
    if (members.empty())
        throw std::invalid_argument("cluster_statistics: empty cluster");
    double sy = 0.0, sx = 0.0, s = 0.0;
    for (int i : members) {
        sy += std::sin(2.0 * states[i].theta);
        sx += std::cos(2.0 * states[i].theta);
        s += states[i].interline;
    }
    ClusterStats st;
    st.s = s / static_cast<double>(members.size());
    if (std::abs(sx) < 1e-12 && std::abs(sy) < 1e-12)
        st.theta = 0.0;
    else
        st.theta = normalize_axial(0.5 * std::atan2(sy, sx));
    return st;
}

/// Polynomial regression curve of a cluster in its rotated frame.
struct RegressionCurve {
    std::vector<double> coeffs; // monomial coefficients in t, degree <= deg
    double theta = 0.0;         // rotation angle theta(S)
    double t_min = 0.0;
    double t_max = 0.0;

    double eval(double t) const {
        double v = 0.0;
        for (size_t j = coeffs.size(); j-- > 0;) v = v * t + coeffs[j];
        return v;
    }

    double slope(double t) const {
        double v = 0.0;
        for (size_t j = coeffs.size(); j-- > 1;)
            v = v * t + coeffs[j] * static_cast<double>(j);
        return v;
    }

    /// Rotate a rotated-frame point (t, u) back into image coordinates.
    Point to_image(double t, double u) const {
        const double c = std::cos(theta), s = std::sin(theta);
        return {c * t - s * u, s * t + c * u};
    }

    /// Curve tangent direction in image coordinates, folded axially.
    double tangent_theta(double t) const {
        return normalize_axial(theta + std::atan(slope(t)));
    }
};

namespace detail {

// Householder-QR least squares; A is column-major (cols x m), returns x
// minimizing |A x - b|.
inline std::vector<double> qr_least_squares(std::vector<std::vector<double>> a,
                                            std::vector<double> b) {
    const size_t nc = a.size(), m = b.size();
    for (size_t j = 0; j < nc; ++j) {
        double norm = 0.0;
        for (size_t i = j; i < m; ++i) norm += a[j][i] * a[j][i];
        norm = std::sqrt(norm);
        if (norm < 1e-300) continue;
        if (a[j][j] > 0) norm = -norm;
        std::vector<double> v(m, 0.0);
        for (size_t i = j; i < m; ++i) v[i] = a[j][i];
        v[j] -= norm;
        double vtv = 0.0;
        for (size_t i = j; i < m; ++i) vtv += v[i] * v[i];
        if (vtv < 1e-300) continue;
        for (size_t col = j; col < nc; ++col) {
            double d = 0.0;
            for (size_t i = j; i < m; ++i) d += v[i] * a[col][i];
            d = 2.0 * d / vtv;
            for (size_t i = j; i < m; ++i) a[col][i] -= d * v[i];
        }
        double d = 0.0;
        for (size_t i = j; i < m; ++i) d += v[i] * b[i];
        d = 2.0 * d / vtv;
        for (size_t i = j; i < m; ++i) b[i] -= d * v[i];
    }
    std::vector<double> x(nc, 0.0);
    for (size_t j = nc; j-- > 0;) {
        double acc = b[j];
        for (size_t k = j + 1; k < nc; ++k) acc -= a[k][j] * x[k];
        x[j] = std::abs(a[j][j]) < 1e-300 ? 0.0 : acc / a[j][j];
    }
    return x;
}

// Expand coefficients of p((t - mid) / half) into monomials of t.
inline std::vector<double> unscale_poly(const std::vector<double>& scaled, double mid,
                                        double half) {
    std::vector<double> result{0.0};
    std::vector<double> power{1.0};                  // ((t - mid)/half)^j
    const std::vector<double> base{-mid / half, 1.0 / half};
    for (size_t j = 0; j < scaled.size(); ++j) {
        if (result.size() < power.size()) result.resize(power.size(), 0.0);
        for (size_t i = 0; i < power.size(); ++i) result[i] += scaled[j] * power[i];
        if (j + 1 < scaled.size()) {
            std::vector<double> next(power.size() + 1, 0.0);
            for (size_t i = 0; i < power.size(); ++i) {
                next[i] += power[i] * base[0];
                next[i + 1] += power[i] * base[1];
            }
            power.swap(next);
        }
    }
    return result;
}

} // namespace detail

/// Least-squares polynomial through the cluster's points after rotating them
/// by -theta(S); the fitted degree is min(deg, n-1). If all rotated abscissae
/// coincide the curve degenerates to a constant at the mean ordinate.
inline RegressionCurve regression_curve(std::span<const int> members,
                                        std::span<const Point> positions,
                                        std::span<const SpState> states, int deg) {
    if (members.empty())
        throw std::invalid_argument("regression_curve: empty cluster");
    ClusterStats st = cluster_statistics(members, states);
    RegressionCurve curve;
    curve.theta = st.theta;

    const double c = std::cos(-st.theta), s = std::sin(-st.theta);
    std::vector<double> ts(members.size()), us(members.size());
    for (size_t i = 0; i < members.size(); ++i) {
        const Point& p = positions[members[i]];
        ts[i] = c * p.x - s * p.y;
        us[i] = s * p.x + c * p.y;
    }
    curve.t_min = *std::min_element(ts.begin(), ts.end());
    curve.t_max = *std::max_element(ts.begin(), ts.end());

    const double half_range = (curve.t_max - curve.t_min) / 2.0;
    if (half_range < 1e-9) {
        double mean = 0.0;
        for (double u : us) mean += u;
        curve.coeffs = {mean / static_cast<double>(us.size())};
        return curve;
    }

    const int degree = std::min(deg, static_cast<int>(members.size()) - 1);
    const double mid = (curve.t_min + curve.t_max) / 2.0;
    std::vector<std::vector<double>> cols(degree + 1, std::vector<double>(members.size()));
    for (size_t i = 0; i < members.size(); ++i) {
        const double tt = (ts[i] - mid) / half_range;
        double pw = 1.0;
        for (int j = 0; j <= degree; ++j) {
            cols[j][i] = pw;
            pw *= tt;
        }
    }
    auto scaled = detail::qr_least_squares(std::move(cols), us);
    curve.coeffs = detail::unscale_poly(scaled, mid, half_range);
    return curve;
}

/// RMS regression residual normalized by the mean interline distance; 0 for
/// clusters small enough to be interpolated exactly.
inline double curvilinearity(std::span<const int> members, std::span<const Point> positions,
                             std::span<const SpState> states, int deg) {
    if (members.empty())
        throw std::invalid_argument("curvilinearity: empty cluster");
    if (static_cast<int>(members.size()) <= deg + 1) return 0.0;
    ClusterStats st = cluster_statistics(members, states);
    RegressionCurve curve = regression_curve(members, positions, states, deg);
    const double c = std::cos(-st.theta), s = std::sin(-st.theta);
    double sq = 0.0;
    for (int i : members) {
        const Point& p = positions[i];
        const double t = c * p.x - s * p.y;
        const double u = s * p.x + c * p.y;
        const double r = u - curve.eval(t);
        sq += r * r;
    }
    return std::sqrt(sq / static_cast<double>(members.size())) / st.s;
}

struct ProjectedSp {
    int sp = -1;
    double t = 0.0;
    Point pt;              // on the regression curve, image coordinates
    double tangent = 0.0;  // curve tangent at t, axial
};

/// Project each member onto the regression curve along theta(S)+pi/2: in the
/// rotated frame the ordinate is replaced by the curve value. Sorted by t.
inline std::vector<ProjectedSp> project_to_curve(std::span<const int> members,
                                                 std::span<const Point> positions,
                                                 const RegressionCurve& curve) {
    const double c = std::cos(-curve.theta), s = std::sin(-curve.theta);
    std::vector<ProjectedSp> out;
    out.reserve(members.size());
    for (int i : members) {
        const Point& p = positions[i];
        ProjectedSp ps;
        ps.sp = i;
        ps.t = c * p.x - s * p.y;
        ps.pt = curve.to_image(ps.t, curve.eval(ps.t));
        ps.tangent = curve.tangent_theta(ps.t);
        out.push_back(ps);
    }
    std::sort(out.begin(), out.end(), [](const ProjectedSp& a, const ProjectedSp& b) {
        if (a.t != b.t) return a.t < b.t;
        return a.sp < b.sp;
    });
    return out;
}

namespace detail {

struct ClusterGeometry {
    ClusterStats stats;
    RegressionCurve curve;
    std::vector<ProjectedSp> proj;
    double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
    size_t size = 0;
};

inline ClusterGeometry cluster_geometry(std::span<const int> members,
                                        std::span<const Point> positions,
                                        std::span<const SpState> states, int deg) {
    ClusterGeometry g;
    g.size = members.size();
    g.stats = cluster_statistics(members, states);
    g.curve = regression_curve(members, positions, states, deg);
    g.proj = project_to_curve(members, positions, g.curve);
    g.min_x = g.max_x = g.proj.front().pt.x;
    g.min_y = g.max_y = g.proj.front().pt.y;
    for (const auto& p : g.proj) {
        g.min_x = std::min(g.min_x, p.pt.x);
        g.max_x = std::max(g.max_x, p.pt.x);
        g.min_y = std::min(g.min_y, p.pt.y);
        g.max_y = std::max(g.max_y, p.pt.y);
    }
    return g;
}

inline double bbox_gap(const ClusterGeometry& a, const ClusterGeometry& b) {
    const double dx = std::max({a.min_x - b.max_x, b.min_x - a.max_x, 0.0});
    const double dy = std::max({a.min_y - b.max_y, b.min_y - a.max_y, 0.0});
    return std::hypot(dx, dy);
}

inline double cluster_distance_geom(const ClusterGeometry& a, const ClusterGeometry& b) {
    const double s_union =
        (a.stats.s * static_cast<double>(a.size) + b.stats.s * static_cast<double>(b.size)) /
        static_cast<double>(a.size + b.size);
    const double gate = 4.0 * s_union;
    if (bbox_gap(a, b) >= gate) return kInfDistance;
    double best = kInfDistance;
    for (const auto& p : a.proj)
        for (const auto& q : b.proj) {
            if (norm2(p.pt - q.pt) >= gate) continue;
            const double theta_c = axial_mean(p.tangent, q.tangent);
            best = std::min(best, off_text_distance(p.pt, q.pt, theta_c));
        }
    return best;
}

} // namespace detail

/// Gated minimum off-text distance between the curve-projected SPs of two
/// clusters; +infinity when no pair is closer (euclidean) than 4 times the
/// union's mean interline distance.
inline double cluster_distance(std::span<const int> cluster_a, std::span<const int> cluster_b,
                               std::span<const Point> positions,
                               std::span<const SpState> states, int deg) {
    if (cluster_a.empty() || cluster_b.empty())
        throw std::invalid_argument("cluster_distance: empty cluster");
    auto ga = detail::cluster_geometry(cluster_a, positions, states, deg);
    auto gb = detail::cluster_geometry(cluster_b, positions, states, deg);
    return detail::cluster_distance_geom(ga, gb);
}

/// Sorting key for the edge queue: the baseline connectivity discounted by
/// how orthogonal the edge is to the pair's mean orientation.
inline double edge_priority(int u, int v, std::span<const Point> positions,
                            std::span<const SpState> states, const GrayImage& baseline_map,
                            bool literal_connectivity = false) {
    if (u == v) throw std::invalid_argument("edge_priority: endpoints must differ");
    const double len = norm2(positions[u] - positions[v]);
    if (len < 1e-12) throw std::invalid_argument("edge_priority: zero-length edge");
    const double theta = axial_mean(states[u].theta, states[v].theta);
    const double off = off_text_distance(positions[u], positions[v], theta);
    const double gamma =
        connectivity(positions[u], positions[v], baseline_map, literal_connectivity);
    return (1.0 - off / len) * gamma;
}

/// Drop edges whose endpoints disagree in orientation by more than pi/4
/// (axially), cross a separator (mean connectivity > eta or peak > 2*eta),
/// or are not jointly contained in any given region.
inline NeighborhoodSystem reduce_neighborhood(
    const NeighborhoodSystem& ns, std::span<const SpState> states,
    std::span<const Point> positions, const GrayImage* separator_map,
    const std::optional<std::vector<Region>>& regions, const PipelineConfig& cfg) {
    NeighborhoodSystem out;
    out.n = ns.n;

    auto max_along = [](Point a, Point b, const GrayImage& img) {
        const double len = norm2(b - a);
        const int m = static_cast<int>(std::ceil(len)) + 1;
        double mx = 0.0;
        for (int i = 0; i < m; ++i) {
            double t = m == 1 ? 0.0 : static_cast<double>(i) / (m - 1);
            mx = std::max(mx, interp_intensity(img, a + t * (b - a)));
        }
        return mx;
    };

    for (auto [u, v] : ns.edges) {
        if (axial_difference(states[u].theta, states[v].theta) > kPi / 4.0) continue;
        if (separator_map) {
            if (connectivity(positions[u], positions[v], *separator_map,
                             cfg.connectivity_literal) > cfg.eta)
                continue;
            if (max_along(positions[u], positions[v], *separator_map) > 2.0 * cfg.eta)
                continue;
        }
        if (regions && !regions->empty()) {
            bool contained = false;
            for (const auto& r : *regions)
                if (point_in_region(positions[u], r) && point_in_region(positions[v], r)) {
                    contained = true;
                    break;
                }
            if (!contained) continue;
        }
        out.edges.emplace_back(u, v);
    }
    return out;
}

/// Clutter cluster plus baseline clusters; disjoint, covering all SPs.
struct Partition {
    std::vector<int> assignment;            // -1 = clutter, otherwise cluster index
    std::vector<std::vector<int>> clusters; // each sorted ascending

    std::vector<int> clutter() const {
        std::vector<int> out;
        for (size_t i = 0; i < assignment.size(); ++i)
            if (assignment[i] < 0) out.push_back(static_cast<int>(i));
        return out;
    }
};

struct ClusterMove {
    int kind = 0; // 1..4, the case that fired
    int u = -1, v = -1;
    double energy_after = 0.0; // total baseline energy b(P) after the move
};

struct GreedyClusterResult {
    Partition partition;
    std::vector<ClusterMove> moves;
};

/// Total baseline energy: sum of the baseline connectivities of all edges
/// whose endpoints share a baseline cluster.
inline double total_baseline_energy(const Partition& part, const NeighborhoodSystem& ns,
                                    std::span<const Point> positions,
                                    const GrayImage& baseline_map,
                                    bool literal_connectivity = false) {
    double b = 0.0;
    for (auto [u, v] : ns.edges)
        if (part.assignment[u] >= 0 && part.assignment[u] == part.assignment[v])
            b += connectivity(positions[u], positions[v], baseline_map, literal_connectivity);
    return b;
}

/// Greedy feasibility-preserving clustering over the reduced neighborhood.
/// Edges are visited in decreasing priority; each accepted move consumes its
/// edge and keeps every cluster sufficiently straight (curvilinearity < gamma)
/// and separated (pairwise cluster distance > delta * max mean interline).
inline GreedyClusterResult greedy_cluster(std::span<const Point> positions,
                                          std::span<const SpState> states,
                                          const NeighborhoodSystem& reduced,
                                          const GrayImage& baseline_map,
                                          const PipelineConfig& cfg) {
    const int n = static_cast<int>(positions.size());
    const int deg = cfg.reg_degree;

    struct Edge {
        int u, v;
        double priority;
        double gamma; // baseline connectivity, reused for the energy log
    };
    std::vector<Edge> queue;
    queue.reserve(reduced.edges.size());
    for (auto [u, v] : reduced.edges) {
        const double g =
            connectivity(positions[u], positions[v], baseline_map, cfg.connectivity_literal);
        const double len = norm2(positions[u] - positions[v]);
        if (len < 1e-12) continue; // duplicate-position edge, never a baseline link
        const double theta = axial_mean(states[u].theta, states[v].theta);
        queue.push_back({u, v, (1.0 - off_text_distance(positions[u], positions[v], theta) / len) * g, g});
    }
    std::sort(queue.begin(), queue.end(), [](const Edge& a, const Edge& b) {
        if (a.priority != b.priority) return a.priority > b.priority;
        if (a.u != b.u) return a.u < b.u;
        return a.v < b.v;
    });

    struct Cluster {
        std::vector<int> members;
        bool alive = false;
        bool dirty = true;
        detail::ClusterGeometry geom;
    };
    std::vector<Cluster> clusters;
    std::vector<int> assignment(n, -1);

    auto geometry_of = [&](Cluster& c) -> const detail::ClusterGeometry& {
        if (c.dirty) {
            c.geom = detail::cluster_geometry(c.members, positions, states, deg);
            c.dirty = false;
        }
        return c.geom;
    };

    // Tentative cluster T must stay delta-separated from every other cluster.
    // Exception: a violating pair whose union is itself a plausible single
    // baseline (union curvilinearity below gamma) is a pair of collinear
    // fragments of one line; those are allowed to approach so that the merge
    // case can heal them once a connecting edge comes up.
    auto separated_from_all = [&](const detail::ClusterGeometry& tentative,
                                  const std::vector<int>& tentative_members, int skip_a,
                                  int skip_b) {
        for (size_t j = 0; j < clusters.size(); ++j) {
            if (!clusters[j].alive || static_cast<int>(j) == skip_a ||
                static_cast<int>(j) == skip_b)
                continue;
            const auto& gj = geometry_of(clusters[j]);
            const double d = detail::cluster_distance_geom(tentative, gj);
            if (d <= cfg.delta * std::max(tentative.stats.s, gj.stats.s)) {
                std::vector<int> unioned;
                unioned.reserve(tentative_members.size() + clusters[j].members.size());
                std::merge(tentative_members.begin(), tentative_members.end(),
                           clusters[j].members.begin(), clusters[j].members.end(),
                           std::back_inserter(unioned));
                if (curvilinearity(unioned, positions, states, deg) >= cfg.gamma)
                    return false;
            }
        }
        return true;
    };

    double energy = 0.0;
    std::vector<ClusterMove> moves;
    std::vector<bool> consumed(queue.size(), false);

    // Connectivity of all edges between SP p and members of cluster c (for
    // the incremental energy bookkeeping).
    std::vector<std::vector<std::pair<int, double>>> incident(n); // (other SP, gamma)
    for (const auto& e : queue) {
        incident[e.u].push_back({e.v, e.gamma});
        incident[e.v].push_back({e.u, e.gamma});
    }
    auto energy_into = [&](int p, int cluster_idx) {
        double acc = 0.0;
        for (auto [q, g] : incident[p])
            if (assignment[q] == cluster_idx) acc += g;
        return acc;
    };

    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t ei = 0; ei < queue.size(); ++ei) {
            if (consumed[ei]) continue;
            const int u = queue[ei].u, v = queue[ei].v;
            const int au = assignment[u], av = assignment[v];

            if (au >= 0 && au == av) { // Case 1: edge joins an existing cluster
                consumed[ei] = true;
                changed = true;
                moves.push_back({1, u, v, energy});
                continue;
            }

            if (au < 0 && av < 0) { // Case 2: create a new cluster?
                const double theta = axial_mean(states[u].theta, states[v].theta);
                const double s_pair = (states[u].interline + states[v].interline) / 2.0;
                if (off_text_distance(positions[u], positions[v], theta) >=
                    cfg.delta * s_pair)
                    continue;
                std::vector<int> tent{std::min(u, v), std::max(u, v)};
                auto geom = detail::cluster_geometry(tent, positions, states, deg);
                if (!separated_from_all(geom, tent, -1, -1)) continue;
                int idx = static_cast<int>(clusters.size());
                clusters.push_back({tent, true, false, std::move(geom)});
                assignment[u] = assignment[v] = idx;
                consumed[ei] = true;
                changed = true;
                energy += queue[ei].gamma;
                moves.push_back({2, u, v, energy});
                continue;
            }

            if ((au < 0) != (av < 0)) { // Case 3: extend cluster with a clutter SP?
                const int p = au < 0 ? u : v;
                const int ci = au < 0 ? av : au;
                Cluster& c = clusters[ci];
                std::vector<int> tent = c.members;
                tent.insert(std::lower_bound(tent.begin(), tent.end(), p), p);
                if (curvilinearity(tent, positions, states, deg) >= cfg.gamma) continue;
                std::vector<int> single{p};
                const auto singleton = detail::cluster_geometry(single, positions, states, deg);
                if (detail::cluster_distance_geom(geometry_of(c), singleton) >=
                    cfg.delta * geometry_of(c).stats.s)
                    continue;
                auto tent_geom = detail::cluster_geometry(tent, positions, states, deg);
                if (!separated_from_all(tent_geom, tent, ci, -1)) continue;
                c.members = std::move(tent);
                c.geom = std::move(tent_geom);
                c.dirty = false;
                assignment[p] = ci;
                consumed[ei] = true;
                changed = true;
                energy += energy_into(p, ci);
                moves.push_back({3, u, v, energy});
                continue;
            }

            // Case 4: merge two clusters?
            const int ci = au, cj = av;
            std::vector<int> unioned;
            unioned.reserve(clusters[ci].members.size() + clusters[cj].members.size());
            std::merge(clusters[ci].members.begin(), clusters[ci].members.end(),
                       clusters[cj].members.begin(), clusters[cj].members.end(),
                       std::back_inserter(unioned));
            if (curvilinearity(unioned, positions, states, deg) >= cfg.gamma) continue;
            const double d =
                detail::cluster_distance_geom(geometry_of(clusters[ci]), geometry_of(clusters[cj]));
            if (d >= cfg.delta * std::min(geometry_of(clusters[ci]).stats.s,
                                          geometry_of(clusters[cj]).stats.s))
                continue;
            auto union_geom = detail::cluster_geometry(unioned, positions, states, deg);
            if (!separated_from_all(union_geom, unioned, ci, cj)) continue;
            double cross = 0.0;
            for (int p : clusters[cj].members) cross += energy_into(p, ci);
            clusters[ci].members = std::move(unioned);
            clusters[ci].geom = std::move(union_geom);
            clusters[ci].dirty = false;
            clusters[cj].alive = false;
            clusters[cj].members.clear();
            for (int p = 0; p < n; ++p)
                if (assignment[p] == cj) assignment[p] = ci;
            consumed[ei] = true;
            changed = true;
            energy += cross;
            moves.push_back({4, u, v, energy});
        }
    }

    GreedyClusterResult result;
    result.partition.assignment.assign(n, -1);
    for (auto& c : clusters) {
        if (!c.alive) continue;
        const int idx = static_cast<int>(result.partition.clusters.size());
        for (int p : c.members) result.partition.assignment[p] = idx;
        result.partition.clusters.push_back(std::move(c.members));
    }
    result.moves = std::move(moves);
    return result;
}

/// Emit one polygonal chain per sufficiently populated cluster: the projected
/// SPs ordered along the regression curve. Clutter is ignored.
inline std::vector<PolyChain> baselines_from_partition(const Partition& part,
                                                       std::span<const Point> positions,
                                                       std::span<const SpState> states,
                                                       const PipelineConfig& cfg) {
    std::vector<PolyChain> chains;
    for (const auto& members : part.clusters) {
        if (static_cast<int>(members.size()) < cfg.min_sps_per_baseline) continue;
        RegressionCurve curve = regression_curve(members, positions, states, cfg.reg_degree);
        auto proj = project_to_curve(members, positions, curve);
        std::vector<Point> pts;
        for (const auto& ps : proj) {
            if (!pts.empty() && std::abs(pts.back().x - ps.pt.x) < 1e-12 &&
                std::abs(pts.back().y - ps.pt.y) < 1e-12)
                continue;
            pts.push_back(ps.pt);
        }
        if (pts.size() >= 2) chains.push_back(PolyChain(std::move(pts)));
    }
    return chains;
}

} // namespace bld
