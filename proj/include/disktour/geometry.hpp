#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace disktour {

/// Location on the cylinder (disk surface): angle in [0,1), radius in [0,1].
/// A full turn is one unit of angle, so angle and time share a scale.
struct DiskPoint {
    double theta{};
    double r{};
};

/// Location on the infinite strip: time in whole rotations (any real),
/// radius in [0,1]. The covering map wraps t back onto the cylinder.
struct StripPoint {
    double t{};
    double r{};
};

/// Plain plane point, used after the 45-degree rotation.
struct PlanePoint {
    double x{};
    double y{};
};

/// Linear seek model: the head can cover radial distance c*dt while the
/// disk rotates through dt.
struct SeekModel {
    double c{1.0};

    SeekModel() = default;
    explicit SeekModel(double c_) : c(c_) {
        if (!(std::isfinite(c) && c > 0.0))
            throw std::invalid_argument("SeekModel: radial speed c must be finite and > 0");
    }

    /// Band lift search bound: radial span <= 1 limits useful time shifts
    /// to 1/c, plus one to absorb wrap boundary cases.
    int shift_bound() const { return static_cast<int>(std::ceil(1.0 / c)) + 1; }
};

enum class OrderKind { hor_strip, ver_strip, ver_cylinder, inc_plane };

/// t mod 1 into [0,1).
inline double wrap(double t) {
    if (!std::isfinite(t)) throw std::invalid_argument("wrap: non-finite input");
    double w = t - std::floor(t);
    if (w >= 1.0) w -= 1.0;  // guards floor rounding at negative near-integers
    return w;
}

/// Distance from t to the nearest integer, in [0, 0.5].
inline double wrap_dist(double t) {
    double w = wrap(t);
    return std::min(w, 1.0 - w);
}

/// Deck shift T^k.
inline StripPoint shift(StripPoint q, long long k) {
    return {q.t + static_cast<double>(k), q.r};
}

/// Least time t >= 0 with t congruent to the angular gap mod 1 and c*t >= |dr|.
/// Asymmetric; satisfies the triangle inequality.
inline double seek_time(DiskPoint p, DiskPoint q, const SeekModel& m) {
    double base = wrap(q.theta - p.theta);
    double need = std::fabs(q.r - p.r) / m.c;
    if (need <= base) return base;
    return base + std::ceil(need - base);
}

/// Reachability order on the strip: the head at q1 can be at q2 on time.
inline bool leq_hor(StripPoint q1, StripPoint q2, const SeekModel& m) {
    return q2.t >= q1.t && m.c * (q2.t - q1.t) >= std::fabs(q2.r - q1.r);
}

/// Complementary (vertical) order on the strip, future direction (0,1).
inline bool leq_ver_strip(StripPoint q1, StripPoint q2, const SeekModel& m) {
    double dr = q2.r - q1.r;
    return dr >= 0.0 && m.c * std::fabs(q2.t - q1.t) <= dr;
}

/// Vertical order lifted to the cylinder. Some integer shift k makes the
/// strip relation hold; the best shift is the one taking the angular gap
/// to its nearest-integer representative, so no search is needed.
inline bool leq_ver_cyl(DiskPoint p1, DiskPoint p2, const SeekModel& m) {
    double dr = p2.r - p1.r;
    if (dr < 0.0) return false;
    return m.c * wrap_dist(p2.theta - p1.theta) <= dr;
}

/// Coordinatewise order in the plane.
inline bool leq_inc(PlanePoint a, PlanePoint b) {
    return b.x >= a.x && b.y >= a.y;
}

/// Rotate the strip by 45 degrees so that leq_ver_strip at c=1 becomes the
/// coordinatewise order.
inline PlanePoint rotate45(StripPoint z) {
    constexpr double inv_sqrt2 = 0.7071067811865475244;
    return {(z.r + z.t) * inv_sqrt2, (z.r - z.t) * inv_sqrt2};
}

inline StripPoint unrotate45(PlanePoint w) {
    constexpr double inv_sqrt2 = 0.7071067811865475244;
    return {(w.x - w.y) * inv_sqrt2, (w.x + w.y) * inv_sqrt2};
}

/// The rescaling V_c: multiplies the angular/time coordinate by c, taking
/// the c-vertical order to the unit-speed vertical order.
inline StripPoint scale_theta(StripPoint q, const SeekModel& m) {
    return {m.c * q.t, q.r};
}

/// Disk variant; the image lives on a cylinder of circumference c.
inline DiskPoint scale_theta(DiskPoint p, const SeekModel& m) {
    return {m.c * p.theta, p.r};
}

/// Diagnostic: find a pair violating general position, i.e. a pair that is
/// null-separated under some lift, or a pair sharing a coordinate.
/// Returns the offending index pair, or nullopt if the batch is clean.
inline std::optional<std::pair<int, int>>
general_position_check(const std::vector<DiskPoint>& points, const SeekModel& m,
                       double tie_epsilon = 1e-9) {
    const int n = static_cast<int>(points.size());
    const int bound = m.shift_bound();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double dt = points[j].theta - points[i].theta;
            double dr = std::fabs(points[j].r - points[i].r);
            if (wrap_dist(dt) < tie_epsilon && dr < tie_epsilon)
                return std::make_pair(i, j);
            if (wrap_dist(dt) < tie_epsilon || dr < tie_epsilon)
                return std::make_pair(i, j);
            for (int k = -bound; k <= bound; ++k) {
                if (std::fabs(m.c * std::fabs(dt + k) - dr) < tie_epsilon)
                    return std::make_pair(i, j);
            }
        }
    }
    return std::nullopt;
}

} // namespace disktour
