#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "disktour/density.hpp"
#include "disktour/geometry.hpp"
#include "disktour/peeling.hpp"

namespace disktour {

enum class PredictionMethod { closed_form, grid_dp, monte_carlo };

/// A tour-length (chain-length) prediction: the limit constant m for
/// (longest chain)/sqrt(n), plus the maximizing curve when one was computed.
struct AsymptoticPrediction {
    double m{};
    std::vector<std::pair<double, double>> maximizer;  // domain, value pairs
    PredictionMethod method{PredictionMethod::closed_form};
};

/// Chain-length functional for the coordinatewise order on a square of side
/// a: 2 * integral of sqrt(phi'(x) q(x, phi(x))) dx, discretized per segment.
/// phi is given by its values on a uniform grid over [0, a].
inline double dz_functional(const std::vector<double>& phi, double a,
                            const std::function<double(double, double)>& q) {
    if (phi.size() < 2) throw std::invalid_argument("dz_functional: need >= 2 grid values");
    const std::size_t segs = phi.size() - 1;
    const double h = a / static_cast<double>(segs);
    double acc = 0.0;
    for (std::size_t i = 0; i < segs; ++i) {
        double dphi = phi[i + 1] - phi[i];
        if (dphi < -1e-12) throw std::invalid_argument("dz_functional: phi is not nondecreasing");
        dphi = std::max(dphi, 0.0);
        double xm = (static_cast<double>(i) + 0.5) * h;
        double ym = 0.5 * (phi[i] + phi[i + 1]);
        acc += 2.0 * std::sqrt(dphi * h * std::max(q(xm, ym), 0.0));
    }
    return acc;
}

/// Same functional over an explicit polyline: nodes with nondecreasing x and
/// y, arbitrary spacing. Each segment contributes 2*sqrt(dx dy q(midpoint)).
inline double dz_functional(const std::vector<PlanePoint>& nodes,
                            const std::function<double(double, double)>& q) {
    if (nodes.size() < 2) throw std::invalid_argument("dz_functional: need >= 2 nodes");
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        double dx = nodes[i + 1].x - nodes[i].x;
        double dy = nodes[i + 1].y - nodes[i].y;
        if (dx < -1e-12 || dy < -1e-12)
            throw std::invalid_argument("dz_functional: nodes must be nondecreasing");
        double xm = 0.5 * (nodes[i].x + nodes[i + 1].x);
        double ym = 0.5 * (nodes[i].y + nodes[i + 1].y);
        acc += 2.0 * std::sqrt(std::max(dx, 0.0) * std::max(dy, 0.0) * std::max(q(xm, ym), 0.0));
    }
    return acc;
}

/// Maximize the chain-length functional by a windowed dynamic program over
/// an (m+1) x (m+1) grid of nodes on [0,a]^2, path from (0,0) to (a,a).
/// Converges to the supremum from below as m and w grow.
inline AsymptoticPrediction maximize_dz(const std::function<double(double, double)>& q,
                                        double a = 1.0, int m = 200, int w = 8) {
    if (m < 1 || w < 1) throw std::invalid_argument("maximize_dz: grid and window must be >= 1");
    const double h = a / static_cast<double>(m);
    const int nodes = m + 1;
    const double neg = -1.0;
    std::vector<double> value(static_cast<std::size_t>(nodes) * nodes, neg);
    std::vector<int> from(static_cast<std::size_t>(nodes) * nodes, -1);
    auto at = [nodes](int i, int j) { return static_cast<std::size_t>(i) * nodes + j; };
    value[at(0, 0)] = 0.0;
    for (int i = 1; i < nodes; ++i) {
        for (int j = 1; j < nodes; ++j) {
            double bestv = neg;
            int besta = -1, bestb = -1;
            for (int da = 1; da <= w && da <= i; ++da) {
                for (int db = 1; db <= w && db <= j; ++db) {
                    double prev = value[at(i - da, j - db)];
                    if (prev < 0.0) continue;
                    // integrate sqrt(q) along the step in sub-segments so
                    // that density jumps inside a long step are not smeared
                    const int sub = 4;
                    double sum_sqrt_q = 0.0;
                    for (int s = 0; s < sub; ++s) {
                        double f = (s + 0.5) / sub;
                        sum_sqrt_q += std::sqrt(std::max(q((i - da + f * da) * h,
                                                           (j - db + f * db) * h), 0.0));
                    }
                    double cand = prev + 2.0 * std::sqrt(static_cast<double>(da) * db) *
                                             (sum_sqrt_q / sub) * h;
                    if (cand > bestv) {
                        bestv = cand;
                        besta = da;
                        bestb = db;
                    }
                }
            }
            if (besta > 0) {
                value[at(i, j)] = bestv;
                from[at(i, j)] = (i - besta) * nodes + (j - bestb);
            }
        }
    }
    AsymptoticPrediction pred;
    pred.method = PredictionMethod::grid_dp;
    pred.m = value[at(m, m)];
    int cur = m * nodes + m;
    while (cur >= 0) {
        int i = cur / nodes, j = cur % nodes;
        pred.maximizer.push_back({i * h, j * h});
        cur = from[static_cast<std::size_t>(cur)];
    }
    std::reverse(pred.maximizer.begin(), pred.maximizer.end());
    return pred;
}

/// Closed-form limit of (longest vertical chain)/sqrt(n) for radial
/// densities: sqrt(2/c) * integral of sqrt(p(r)) dr.
inline double analytic_m_radial(const Density& d, const SeekModel& m) {
    return std::sqrt(2.0 / m.c) * d.integral_sqrt_radial();
}

/// Chain-length functional on the cylinder for a curve psi(r) given by its
/// theta values on a uniform r grid; slope must satisfy |psi'| <= 1/c.
inline double vertical_functional(const std::vector<double>& psi, const Density& d,
                                  const SeekModel& m) {
    if (psi.size() < 2) throw std::invalid_argument("vertical_functional: need >= 2 grid values");
    const std::size_t segs = psi.size() - 1;
    const double h = 1.0 / static_cast<double>(segs);
    double acc = 0.0;
    for (std::size_t i = 0; i < segs; ++i) {
        double slope = (psi[i + 1] - psi[i]) / h;
        if (std::fabs(slope) > 1.0 / m.c + 1e-9)
            throw std::invalid_argument("vertical_functional: |psi'| exceeds 1/c");
        double rm = (static_cast<double>(i) + 0.5) * h;
        double tm = 0.5 * (psi[i] + psi[i + 1]);
        double factor = std::max(1.0 - m.c * m.c * slope * slope, 0.0);
        acc += std::sqrt(2.0 / m.c) * std::sqrt(d.eval(wrap(tm), rm) * factor) * h;
    }
    return acc;
}

/// Same functional over an explicit polyline (t(r) nodes with increasing r,
/// arbitrary spacing); per segment |dt/dr| <= 1/c.
inline double vertical_functional(const std::vector<StripPoint>& nodes, const Density& d,
                                  const SeekModel& m) {
    if (nodes.size() < 2) throw std::invalid_argument("vertical_functional: need >= 2 nodes");
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        double dr = nodes[i + 1].r - nodes[i].r;
        if (!(dr > 0.0))
            throw std::invalid_argument("vertical_functional: r must be strictly increasing");
        double slope = (nodes[i + 1].t - nodes[i].t) / dr;
        if (std::fabs(slope) > 1.0 / m.c + 1e-9)
            throw std::invalid_argument("vertical_functional: |dt/dr| exceeds 1/c");
        double rm = 0.5 * (nodes[i].r + nodes[i + 1].r);
        double tm = 0.5 * (nodes[i].t + nodes[i + 1].t);
        double factor = std::max(1.0 - m.c * m.c * slope * slope, 0.0);
        acc += std::sqrt(2.0 / m.c) * std::sqrt(d.eval(wrap(tm), rm) * factor) * dr;
    }
    return acc;
}

/// Maximize the vertical functional by a DP over a periodic theta grid and
/// an r ladder; per step the theta move is bounded by (1/c) dr. For radial
/// densities the maximizer is a vertical line and the value matches
/// analytic_m_radial within grid tolerance.
inline AsymptoticPrediction maximize_vertical_functional(const Density& d, const SeekModel& m,
                                                         int grid = 200, int substeps = 4) {
    if (grid < 2 || substeps < 1)
        throw std::invalid_argument("maximize_vertical_functional: bad grid parameters");
    const double dr = 1.0 / static_cast<double>(grid);
    int ntheta = std::max(8, static_cast<int>(std::lround(m.c * substeps * grid)));
    const double dtheta = 1.0 / static_cast<double>(ntheta);
    const int max_off = static_cast<int>(std::floor((dr / m.c) / dtheta + 1e-9));

    std::vector<double> cur(static_cast<std::size_t>(ntheta), 0.0);
    std::vector<double> next(static_cast<std::size_t>(ntheta));
    std::vector<std::vector<int>> from(static_cast<std::size_t>(grid),
                                       std::vector<int>(static_cast<std::size_t>(ntheta)));
    const double scale = std::sqrt(2.0 / m.c);
    for (int level = 0; level < grid; ++level) {
        double rm = (level + 0.5) * dr;
        for (int j = 0; j < ntheta; ++j) {
            double best = -1.0;
            int bestoff = 0;
            // visit offsets by increasing |off| so ties resolve to the
            // most vertical move
            for (int a = 0; a <= 2 * max_off; ++a) {
                int off = (a % 2 == 0) ? a / 2 : -(a + 1) / 2;
                int jp = ((j - off) % ntheta + ntheta) % ntheta;
                double slope = off * dtheta / dr;
                double factor = std::max(1.0 - m.c * m.c * slope * slope, 0.0);
                double tm = (j - 0.5 * off) * dtheta;
                double cand = cur[static_cast<std::size_t>(jp)] +
                              scale * std::sqrt(d.eval(wrap(tm), rm) * factor) * dr;
                if (cand > best) {
                    best = cand;
                    bestoff = off;
                }
            }
            next[static_cast<std::size_t>(j)] = best;
            from[static_cast<std::size_t>(level)][static_cast<std::size_t>(j)] = bestoff;
        }
        cur.swap(next);
    }

    AsymptoticPrediction pred;
    pred.method = PredictionMethod::grid_dp;
    int bestj = 0;
    for (int j = 1; j < ntheta; ++j)
        if (cur[static_cast<std::size_t>(j)] > cur[static_cast<std::size_t>(bestj)]) bestj = j;
    pred.m = cur[static_cast<std::size_t>(bestj)];

    // backtrack the maximizer as (r, theta), theta unwrapped
    double theta = bestj * dtheta;
    std::vector<std::pair<double, double>> rev;
    rev.push_back({1.0, theta});
    int j = bestj;
    for (int level = grid - 1; level >= 0; --level) {
        int off = from[static_cast<std::size_t>(level)][static_cast<std::size_t>(j)];
        theta -= off * dtheta;
        j = ((j - off) % ntheta + ntheta) % ntheta;
        rev.push_back({level * dr, theta});
    }
    std::reverse(rev.begin(), rev.end());
    pred.maximizer = std::move(rev);
    return pred;
}

/// Predicted fraction of requests serviced within tau*sqrt(n) rotations for
/// a radial density: invert the height function h(r) = sqrt(2/c) * integral
/// of sqrt(p) and read off the cumulative radial mass.
inline double served_fraction_radial(double tau, const Density& d, const SeekModel& m) {
    const double scale = std::sqrt(2.0 / m.c);
    const double total = scale * d.integral_sqrt_radial();
    if (tau <= 0.0) return 0.0;
    if (tau >= total) return 1.0;  // out-of-range tau clamps to the boundary
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 50; ++it) {
        double mid = 0.5 * (lo + hi);
        (scale * d.integral_sqrt_radial_partial(mid) < tau ? lo : hi) = mid;
    }
    return d.radial_cdf(0.5 * (lo + hi));
}

/// Cumulative pile-size profile for uniform samples in the unit square:
/// fraction of points in piles up to tau*sqrt(n), tau in [0,2].
inline double uniform_square_pile_profile(double tau) {
    if (!(tau >= 0.0 && tau <= 2.0 + 1e-12))
        throw std::invalid_argument("uniform_square_pile_profile: tau outside [0,2]");
    if (tau <= 0.0) return 0.0;
    tau = std::min(tau, 2.0);
    return 0.5 * tau * tau * std::log(2.0 / tau) + 0.25 * tau * tau;
}

/// Empirical step profile tau -> fraction of points in layers <= tau*sqrt(n).
struct StepProfile {
    std::vector<double> tau;   // layer index / sqrt(n)
    std::vector<double> frac;  // cumulative fraction after that layer

    double eval(double t) const {
        auto it = std::upper_bound(tau.begin(), tau.end(), t);
        std::size_t i = static_cast<std::size_t>(it - tau.begin());
        return i == 0 ? 0.0 : frac[i - 1];
    }
};

inline StepProfile empirical_layer_profile(const PeelLayers& pl, std::size_t n) {
    StepProfile prof;
    if (n == 0) return prof;
    const double sqn = std::sqrt(static_cast<double>(n));
    std::size_t cum = 0;
    for (std::size_t i = 0; i < pl.layers.size(); ++i) {
        cum += pl.layers[i].size();
        prof.tau.push_back(static_cast<double>(i + 1) / sqn);
        prof.frac.push_back(static_cast<double>(cum) / static_cast<double>(n));
    }
    return prof;
}

/// Fine-asymptotics band for the uniform density: the service-time excess
/// over sqrt(2n/c) is predicted to sit between A0*ln^{2/3} n and
/// B0*ln^{2/3} n, with A0 = (1/4)(2c)^{-1/6} and B0 = 3^{2/3} A0.
inline std::pair<double, double> fine_asymptotics_band(double n, const SeekModel& m) {
    if (!(n >= 2.0)) throw std::invalid_argument("fine_asymptotics_band: n must be >= 2");
    const double a0 = 0.25 * std::pow(2.0 * m.c, -1.0 / 6.0);
    const double b0 = std::pow(3.0, 2.0 / 3.0) * a0;
    const double l = std::pow(std::log(n), 2.0 / 3.0);
    return {a0 * l, b0 * l};
}

inline double fine_asymptotics_a0(const SeekModel& m) {
    return 0.25 * std::pow(2.0 * m.c, -1.0 / 6.0);
}

inline double fine_asymptotics_b0(const SeekModel& m) {
    return std::pow(3.0, 2.0 / 3.0) * fine_asymptotics_a0(m);
}

} // namespace disktour
