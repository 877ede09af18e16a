#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "disktour/density.hpp"
#include "disktour/geometry.hpp"

namespace disktour {

/// Result of the peeling (antichain layer) process on a finite poset.
/// layer_of is 1-based; layers[i] lists the point indices of layer i+1.
/// pred[x] is one point in the previous layer dominated by x (-1 in layer 1).
struct PeelLayers {
    std::vector<int> layer_of;
    std::vector<std::vector<int>> layers;
    std::vector<int> pred;

    int depth() const { return static_cast<int>(layers.size()); }
};

namespace detail {

/// O(n^2) peel from an explicit strict-dominance predicate below(j, i).
/// Strips minimal elements round by round via dominance counts; pred is the
/// smallest-index dominated point in the previous layer.
template <typename Below>
PeelLayers peel_from_dominance(int n, Below&& below) {
    PeelLayers out;
    out.layer_of.assign(n, 0);
    out.pred.assign(n, -1);
    if (n == 0) return out;

    std::vector<std::vector<int>> above(n);  // above[j]: points dominating j
    std::vector<int> remaining_below(n, 0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i != j && below(j, i)) {
                ++remaining_below[i];
                above[j].push_back(i);
            }
        }
    }

    std::vector<int> frontier;
    for (int i = 0; i < n; ++i)
        if (remaining_below[i] == 0) frontier.push_back(i);

    int layer = 0;
    while (!frontier.empty()) {
        ++layer;
        std::sort(frontier.begin(), frontier.end());
        for (int i : frontier) out.layer_of[i] = layer;
        out.layers.push_back(frontier);
        std::vector<int> next;
        for (int j : frontier) {
            for (int i : above[j]) {
                if (--remaining_below[i] == 0) next.push_back(i);
            }
        }
        frontier = std::move(next);
    }
    // pred: smallest-index dominated point exactly one layer down
    for (int i = 0; i < n; ++i) {
        if (out.layer_of[i] <= 1) continue;
        for (int j : out.layers[static_cast<std::size_t>(out.layer_of[i]) - 2]) {
            if (below(j, i)) {
                out.pred[i] = j;
                break;
            }
        }
    }
    return out;
}

inline void reject_tie(bool tie, int a, int b, const char* who) {
    if (tie)
        throw std::invalid_argument(std::string(who) + ": tie between points " +
                                    std::to_string(a) + " and " + std::to_string(b));
}

} // namespace detail

/// Reference peel on strip points under hor_strip, ver_strip, or inc_plane
/// (the latter reads (t, r) as plane coordinates).
inline PeelLayers peel_oracle(const std::vector<StripPoint>& pts, OrderKind order,
                              const SeekModel& m) {
    const int n = static_cast<int>(pts.size());
    const double eps = 1e-9;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double dt = std::fabs(pts[j].t - pts[i].t);
            double dr = std::fabs(pts[j].r - pts[i].r);
            bool tie = (order == OrderKind::inc_plane)
                           ? (dt < eps || dr < eps)
                           : std::fabs(m.c * dt - dr) < eps;
            detail::reject_tie(tie, i, j, "peel_oracle");
        }
    }
    auto below = [&](int j, int i) {
        switch (order) {
            case OrderKind::hor_strip: return leq_hor(pts[j], pts[i], m);
            case OrderKind::ver_strip: return leq_ver_strip(pts[j], pts[i], m);
            case OrderKind::inc_plane:
                return pts[i].t >= pts[j].t && pts[i].r >= pts[j].r;
            default:
                throw std::invalid_argument("peel_oracle: ver_cylinder needs DiskPoints");
        }
    };
    return detail::peel_from_dominance(n, below);
}

/// Reference peel on cylinder points under the lifted vertical order.
inline PeelLayers peel_oracle(const std::vector<DiskPoint>& pts, const SeekModel& m) {
    const int n = static_cast<int>(pts.size());
    const double eps = 1e-9;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double d = wrap_dist(pts[j].theta - pts[i].theta);
            double dr = std::fabs(pts[j].r - pts[i].r);
            detail::reject_tie(std::fabs(m.c * d - dr) < eps, i, j, "peel_oracle");
        }
    auto below = [&](int j, int i) { return leq_ver_cyl(pts[j], pts[i], m); };
    return detail::peel_from_dominance(n, below);
}

/// Patience sorting peel of plane points under the coordinatewise order.
/// O(n log n); pile index equals the peeling layer.
inline PeelLayers patience_peel(const std::vector<PlanePoint>& pts) {
    const int n = static_cast<int>(pts.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return pts[a].x < pts[b].x; });
    {
        std::vector<double> ys(n);
        for (int i = 0; i < n; ++i) ys[i] = pts[i].y;
        std::sort(ys.begin(), ys.end());
        for (int i = 0; i + 1 < n; ++i) {
            detail::reject_tie(pts[order[i]].x == pts[order[i + 1]].x, order[i], order[i + 1],
                               "patience_peel (duplicate x)");
            detail::reject_tie(ys[i] == ys[i + 1], i, i + 1, "patience_peel (duplicate y)");
        }
    }

    PeelLayers out;
    out.layer_of.assign(n, 0);
    out.pred.assign(n, -1);
    std::vector<double> tops;    // tops[l]: smallest top y of pile l so far
    std::vector<int> holder;     // holder[l]: point currently on top of pile l
    for (int idx : order) {
        double y = pts[idx].y;
        auto it = std::lower_bound(tops.begin(), tops.end(), y);
        std::size_t pile = static_cast<std::size_t>(it - tops.begin());
        if (pile == tops.size()) {
            tops.push_back(y);
            holder.push_back(idx);
        } else {
            tops[pile] = y;
            holder[pile] = idx;
        }
        out.layer_of[idx] = static_cast<int>(pile) + 1;
        if (pile > 0) out.pred[idx] = holder[pile - 1];
    }
    out.layers.resize(tops.size());
    for (int i = 0; i < n; ++i) out.layers[out.layer_of[i] - 1].push_back(i);
    return out;
}

/// Fast peel of cylinder points under the lifted vertical order: rescale by
/// V_c, replicate over band shifts, rotate by 45 degrees, patience-sort, and
/// keep the layers of the central copies.
inline PeelLayers peel_cylinder_ver(const std::vector<DiskPoint>& pts, const SeekModel& m) {
    const int n = static_cast<int>(pts.size());
    PeelLayers out;
    out.layer_of.assign(n, 0);
    out.pred.assign(n, -1);
    if (n == 0) return out;

    const int bound = m.shift_bound();
    const int copies = 2 * bound + 1;

    struct Replica {
        double x, y;
        int owner;
        bool central;
    };
    std::vector<Replica> reps;
    reps.reserve(static_cast<std::size_t>(n) * copies);
    constexpr double inv_sqrt2 = 0.7071067811865475244;
    for (int i = 0; i < n; ++i) {
        for (int k = -bound; k <= bound; ++k) {
            double t = m.c * (pts[i].theta + k);
            reps.push_back({(pts[i].r + t) * inv_sqrt2, (pts[i].r - t) * inv_sqrt2, i, k == 0});
        }
    }
    std::sort(reps.begin(), reps.end(),
              [](const Replica& a, const Replica& b) { return a.x < b.x; });
    for (std::size_t i = 0; i + 1 < reps.size(); ++i)
        detail::reject_tie(reps[i].x == reps[i + 1].x, reps[i].owner, reps[i + 1].owner,
                           "peel_cylinder_ver (tie)");

    std::vector<double> tops;
    std::vector<int> holder;  // owner of the pile top
    std::vector<int> raw_pred(n, -1);
    for (const Replica& rep : reps) {
        auto it = std::lower_bound(tops.begin(), tops.end(), rep.y);
        std::size_t pile = static_cast<std::size_t>(it - tops.begin());
        if (pile == tops.size()) {
            tops.push_back(rep.y);
            holder.push_back(rep.owner);
        } else {
            tops[pile] = rep.y;
            holder[pile] = rep.owner;
        }
        if (rep.central) {
            out.layer_of[rep.owner] = static_cast<int>(pile) + 1;
            if (pile > 0) raw_pred[rep.owner] = holder[pile - 1];
        }
    }

    int depth = *std::max_element(out.layer_of.begin(), out.layer_of.end());
    out.layers.resize(static_cast<std::size_t>(depth));
    for (int i = 0; i < n; ++i) out.layers[out.layer_of[i] - 1].push_back(i);

    // Band truncation can hand a central copy a predecessor replica whose own
    // layer index is off by one; repair those against the previous layer.
    for (int i = 0; i < n; ++i) {
        int L = out.layer_of[i];
        if (L <= 1) continue;
        int p = raw_pred[i];
        if (p >= 0 && out.layer_of[p] == L - 1 && leq_ver_cyl(pts[p], pts[i], m)) {
            out.pred[i] = p;
            continue;
        }
        for (int q : out.layers[static_cast<std::size_t>(L) - 2]) {
            if (leq_ver_cyl(pts[q], pts[i], m)) {
                out.pred[i] = q;
                break;
            }
        }
        if (out.pred[i] < 0)
            throw std::logic_error("peel_cylinder_ver: missing predecessor");
    }
    return out;
}

/// A maximal chain: walk pred pointers from the smallest-index element of the
/// deepest layer. Returned indices run from layer 1 to the deepest layer.
inline std::vector<int> longest_chain(const PeelLayers& pl) {
    if (pl.depth() == 0) return {};
    std::vector<int> chain;
    int cur = pl.layers.back().front();
    while (cur >= 0) {
        chain.push_back(cur);
        cur = pl.pred[cur];
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
}

/// Longest increasing subsequence length of a permutation of 1..n.
inline int lis_length(const std::vector<int>& perm) {
    const int n = static_cast<int>(perm.size());
    std::vector<char> seen(static_cast<std::size_t>(n) + 1, 0);
    for (int v : perm) {
        if (v < 1 || v > n || seen[static_cast<std::size_t>(v)])
            throw std::invalid_argument("lis_length: input is not a permutation of 1..n");
        seen[static_cast<std::size_t>(v)] = 1;
    }
    std::vector<int> tails;
    for (int v : perm) {
        auto it = std::lower_bound(tails.begin(), tails.end(), v);
        if (it == tails.end())
            tails.push_back(v);
        else
            *it = v;
    }
    return static_cast<int>(tails.size());
}

} // namespace disktour
