#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "disktour/geometry.hpp"
#include "disktour/peeling.hpp"

namespace disktour {

/// A tour: a chain under the reachability order starting at (0,0), visiting
/// one lift of every request, and ending at (k, 0) after k whole rotations.
struct Tour {
    std::vector<StripPoint> visits;  // includes both endpoints
    std::vector<int> request_id;     // -1 for the endpoints
    std::vector<int> layer;          // 0 for the endpoints
    long long k{};
    std::string algorithm;
};

namespace detail {

/// Least integer k with (k,0) reachable from the last visit.
inline long long completion_rotations(StripPoint last, const SeekModel& m) {
    double v = last.t + last.r / m.c;
    long long k = static_cast<long long>(std::ceil(v - 1e-9));
    while (static_cast<double>(k) < last.t || m.c * (static_cast<double>(k) - last.t) < last.r)
        ++k;
    return std::max<long long>(k, 1);
}

/// Lift of angle theta into the window [tau, tau+1).
inline double lift_into_window(double theta, double tau) {
    double t = theta + std::ceil(tau - theta);
    if (t < tau) t += 1.0;
    if (t >= tau + 1.0) t -= 1.0;
    return t;
}

} // namespace detail

/// The T-invariant piecewise-linear curve through one peel layer, stored as
/// breakpoints over one period, plus the layer's window entry point.
struct LayerCurve {
    std::vector<int> cycle;             // layer point indices in cyclic chain order
    std::vector<StripPoint> breakpoints;  // one period, ascending t
    double entry_t{};                   // first meeting of J with the running max L_i
};

struct LayerCurves {
    std::vector<LayerCurve> layers;
};

/// Evaluate the layer curve L_i' at time t (periodic).
inline double eval_layer_curve(const LayerCurve& lc, double t) {
    const auto& b = lc.breakpoints;
    if (b.empty()) throw std::invalid_argument("eval_layer_curve: empty curve");
    if (b.size() == 1) return b[0].r;
    double t0 = b.front().t;
    double shift = std::floor(t - t0);
    // reduce into [t0, t0+1)
    double u = t - shift;
    while (u >= t0 + 1.0) u -= 1.0;
    while (u < t0) u += 1.0;
    auto it = std::upper_bound(b.begin(), b.end(), u,
                               [](double v, const StripPoint& p) { return v < p.t; });
    std::size_t j = static_cast<std::size_t>(it - b.begin());
    StripPoint lo, hi;
    if (j == 0 || j == b.size()) {
        lo = b.back();
        hi = {b.front().t + 1.0, b.front().r};
        if (j == 0) { lo.t -= 1.0; hi = b.front(); }
    } else {
        lo = b[j - 1];
        hi = b[j];
    }
    double f = (u - lo.t) / (hi.t - lo.t);
    return lo.r + (hi.r - lo.r) * f;
}

/// Cyclic chain order of one peel layer: lift every point into a window of
/// width 1 and order by lift time. Validates the antichain precondition.
inline std::vector<int> layer_chain_order(const std::vector<DiskPoint>& layer,
                                          const SeekModel& m) {
    const int n = static_cast<int>(layer.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && leq_ver_cyl(layer[i], layer[j], m))
                throw std::invalid_argument("layer_chain_order: points " + std::to_string(i) +
                                            "," + std::to_string(j) + " are not an antichain");
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return layer[a].theta < layer[b].theta; });
    return order;
}

namespace detail {

inline LayerCurve build_layer_curve(const std::vector<DiskPoint>& pts,
                                    const std::vector<int>& layer_indices) {
    LayerCurve lc;
    lc.cycle = layer_indices;
    std::sort(lc.cycle.begin(), lc.cycle.end(),
              [&](int a, int b) { return pts[a].theta < pts[b].theta; });
    lc.breakpoints.reserve(lc.cycle.size());
    for (int idx : lc.cycle) lc.breakpoints.push_back({pts[idx].theta, pts[idx].r});
    return lc;
}

/// First meeting point of the segment J: r = c t with the curve max(L, prev).
/// Both J and layer curves have slopes within [-c, c], so c*t - L(t) is
/// nondecreasing and the crossing is the unique sign change; the running
/// max just advances the entry point monotonically.
inline double curve_entry(const LayerCurve& lc, const SeekModel& m, double prev_entry) {
    double lo = prev_entry, hi = 1.0 / m.c + 1e-12;
    auto g = [&](double t) { return m.c * t - eval_layer_curve(lc, t); };
    if (g(lo) >= 0.0) return lo;
    if (g(hi) < 0.0)
        throw std::logic_error("curve_entry: no crossing with J");
    for (int it = 0; it < 100; ++it) {
        double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
    }
    return hi;
}

} // namespace detail

/// Layer curves for a peel of `pts`, with accumulated entry points.
inline LayerCurves build_layer_curves(const std::vector<DiskPoint>& pts, const PeelLayers& pl,
                                      const SeekModel& m) {
    LayerCurves lcs;
    double entry = 0.0;
    for (const auto& layer : pl.layers) {
        LayerCurve lc = detail::build_layer_curve(pts, layer);
        entry = detail::curve_entry(lc, m, entry);
        lc.entry_t = entry;
        lcs.layers.push_back(std::move(lc));
    }
    return lcs;
}

/// Accumulated curve L_i = max(L_i', L_{i-1}) evaluated at t (layers 1-based).
inline double eval_accumulated_curve(const LayerCurves& lcs, int layer, double t) {
    double v = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < layer; ++i)
        v = std::max(v, eval_layer_curve(lcs.layers[static_cast<std::size_t>(i)], t));
    return v;
}

/// The modified tour: peel, follow each accumulated layer curve for one
/// period starting at its J entry point, shifting layer i by i-1 rotations.
inline Tour modified_abz(const std::vector<DiskPoint>& batch, const SeekModel& m) {
    if (batch.empty()) throw std::invalid_argument("modified_abz: batch is empty");
    PeelLayers pl = peel_cylinder_ver(batch, m);

    Tour tour;
    tour.algorithm = "modified_abz";
    tour.visits.push_back({0.0, 0.0});
    tour.request_id.push_back(-1);
    tour.layer.push_back(0);

    double entry = 0.0;
    for (int i = 1; i <= pl.depth(); ++i) {
        LayerCurve lc = detail::build_layer_curve(batch, pl.layers[static_cast<std::size_t>(i - 1)]);
        entry = detail::curve_entry(lc, m, entry);

        struct Visit { double t; int id; };
        std::vector<Visit> window;
        window.reserve(lc.cycle.size());
        for (int idx : lc.cycle)
            window.push_back({detail::lift_into_window(batch[idx].theta, entry), idx});
        std::sort(window.begin(), window.end(),
                  [](const Visit& a, const Visit& b) { return a.t < b.t; });
        for (const Visit& v : window) {
            tour.visits.push_back({v.t + (i - 1), batch[v.id].r});
            tour.request_id.push_back(v.id);
            tour.layer.push_back(i);
        }
    }
    tour.k = detail::completion_rotations(tour.visits.back(), m);
    tour.visits.push_back({static_cast<double>(tour.k), 0.0});
    tour.request_id.push_back(-1);
    tour.layer.push_back(0);
    return tour;
}

/// The original tour: per layer, enter at the first chain element reachable
/// from the previous layer's exit and follow the chain for one period.
inline Tour abz(const std::vector<DiskPoint>& batch, const SeekModel& m) {
    if (batch.empty()) throw std::invalid_argument("abz: batch is empty");
    PeelLayers pl = peel_cylinder_ver(batch, m);

    Tour tour;
    tour.algorithm = "abz";
    tour.visits.push_back({0.0, 0.0});
    tour.request_id.push_back(-1);
    tour.layer.push_back(0);

    StripPoint prev{0.0, 0.0};
    for (int i = 1; i <= pl.depth(); ++i) {
        const auto& layer = pl.layers[static_cast<std::size_t>(i - 1)];
        // minimal chain element reachable from prev: earliest arrival lift
        double best_t = std::numeric_limits<double>::infinity();
        DiskPoint prev_disk{wrap(prev.t), prev.r};
        for (int idx : layer) {
            double t = prev.t + seek_time(prev_disk, batch[idx], m);
            best_t = std::min(best_t, t);
        }
        struct Visit { double t; int id; };
        std::vector<Visit> window;
        window.reserve(layer.size());
        for (int idx : layer)
            window.push_back({detail::lift_into_window(batch[idx].theta, best_t - 1e-12), idx});
        std::sort(window.begin(), window.end(),
                  [](const Visit& a, const Visit& b) { return a.t < b.t; });
        for (const Visit& v : window) {
            tour.visits.push_back({v.t, batch[v.id].r});
            tour.request_id.push_back(v.id);
            tour.layer.push_back(i);
        }
        prev = tour.visits.back();
    }
    tour.k = detail::completion_rotations(tour.visits.back(), m);
    tour.visits.push_back({static_cast<double>(tour.k), 0.0});
    tour.request_id.push_back(-1);
    tour.layer.push_back(0);
    return tour;
}

/// Optimal service time by exhaustive visiting-order search (n <= 9).
/// Per fixed order, earliest arrival is optimal by the triangle inequality.
inline long long exact_service_time(const std::vector<DiskPoint>& batch, const SeekModel& m) {
    const int n = static_cast<int>(batch.size());
    if (n > 9)
        throw std::invalid_argument(
            "exact_service_time: n > 9; use the sandwich bounds for large batches");
    const DiskPoint origin{0.0, 0.0};
    if (n == 0) return 1;

    double best = std::numeric_limits<double>::infinity();
    std::vector<char> used(static_cast<std::size_t>(n), 0);

    auto dfs = [&](auto&& self, DiskPoint at, double time, int left) -> void {
        if (time >= best) return;  // k only grows with the prefix
        if (left == 0) {
            best = std::min(best, time + seek_time(at, origin, m));
            return;
        }
        for (int c = 0; c < n; ++c) {
            if (used[static_cast<std::size_t>(c)]) continue;
            used[static_cast<std::size_t>(c)] = 1;
            self(self, batch[static_cast<std::size_t>(c)],
                 time + seek_time(at, batch[static_cast<std::size_t>(c)], m), left - 1);
            used[static_cast<std::size_t>(c)] = 0;
        }
    };
    dfs(dfs, origin, 0.0, n);
    long long k = static_cast<long long>(std::llround(best));
    return std::max<long long>(k, 1);
}

/// Per-instance report of the service-time sandwich around the peel depth.
struct SandwichReport {
    int M{};                              // longest vertical chain incl. the origin
    std::optional<long long> k_exact;     // only for n <= 9
    long long k_modified{};
    bool holds{};
};

inline SandwichReport sandwich_check(const std::vector<DiskPoint>& batch, const SeekModel& m) {
    SandwichReport rep;
    std::vector<DiskPoint> with_origin = batch;
    with_origin.push_back({0.0, 0.0});
    rep.M = peel_cylinder_ver(with_origin, m).depth();

    rep.k_modified = batch.empty() ? 1 : modified_abz(batch, m).k;
    if (batch.size() <= 9) rep.k_exact = exact_service_time(batch, m);

    const double lower = rep.M - 1.0 - 1.0 / m.c - 1e-9;
    const double upper = rep.M + 1.0 + 2.0 / m.c + 1e-9;
    rep.holds = static_cast<double>(rep.k_modified) <= upper;
    if (rep.k_exact) {
        double k = static_cast<double>(*rep.k_exact);
        rep.holds = rep.holds && k >= lower && k <= upper;
    }
    return rep;
}

/// Check the tour contract: chain under the reachability order, endpoints
/// (0,0) and (k,0), and one lift of every request, nothing else.
inline bool validate_tour(const Tour& tour, const std::vector<DiskPoint>& batch,
                          const SeekModel& m) {
    const std::size_t v = tour.visits.size();
    if (v < 2) return false;
    if (tour.visits.front().t != 0.0 || tour.visits.front().r != 0.0) return false;
    if (tour.k <= 0) return false;
    if (tour.visits.back().r != 0.0 ||
        tour.visits.back().t != static_cast<double>(tour.k))
        return false;
    const double eps = 1e-9;
    for (std::size_t i = 0; i + 1 < v; ++i) {
        StripPoint a = tour.visits[i], b = tour.visits[i + 1];
        // exact chain check with a small slack for lift arithmetic
        if (!(b.t >= a.t - eps && m.c * (b.t - a.t) >= std::fabs(b.r - a.r) - eps))
            return false;
    }
    if (v != batch.size() + 2) return false;
    std::vector<char> covered(batch.size(), 0);
    for (std::size_t i = 1; i + 1 < v; ++i) {
        int id = tour.request_id[i];
        if (id < 0 || id >= static_cast<int>(batch.size())) return false;
        if (covered[static_cast<std::size_t>(id)]) return false;
        covered[static_cast<std::size_t>(id)] = 1;
        if (std::fabs(wrap(tour.visits[i].t) - batch[static_cast<std::size_t>(id)].theta) > eps &&
            std::fabs(wrap(tour.visits[i].t) - batch[static_cast<std::size_t>(id)].theta - 1.0) > eps &&
            std::fabs(wrap(tour.visits[i].t) - batch[static_cast<std::size_t>(id)].theta + 1.0) > eps)
            return false;
        if (std::fabs(tour.visits[i].r - batch[static_cast<std::size_t>(id)].r) > eps) return false;
    }
    return std::all_of(covered.begin(), covered.end(), [](char c) { return c != 0; });
}

} // namespace disktour
