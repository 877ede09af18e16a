#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "disktour/geometry.hpp"
#include "disktour/rng.hpp"

namespace disktour {

enum class DensityKind { uniform, radial_step, radial_smooth, general_grid };

/// A request-location probability density p(theta, r) on the cylinder.
/// Normalized to total mass 1 on construction. Radial kinds sample theta
/// uniformly and r by inverse CDF; grid densities sample by rejection.
class Density {
public:
    static Density uniform() {
        Density d;
        d.kind_ = DensityKind::uniform;
        return d;
    }

    /// Piecewise-constant radial density: value values[i] on
    /// [breakpoints[i], breakpoints[i+1]). Breakpoints must run 0..1.
    static Density radial_step(std::vector<double> breakpoints, std::vector<double> values) {
        Density d;
        d.kind_ = DensityKind::radial_step;
        if (breakpoints.size() < 2 || values.size() + 1 != breakpoints.size())
            throw std::invalid_argument("radial_step: need n+1 breakpoints for n values");
        if (std::fabs(breakpoints.front()) > 1e-12 || std::fabs(breakpoints.back() - 1.0) > 1e-12)
            throw std::invalid_argument("radial_step: breakpoints must span [0,1]");
        for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
            if (!(breakpoints[i + 1] > breakpoints[i]))
                throw std::invalid_argument("radial_step: breakpoints must be strictly increasing");
        d.breaks_ = std::move(breakpoints);
        d.values_ = std::move(values);
        d.breaks_.front() = 0.0;
        d.breaks_.back() = 1.0;
        d.normalize();
        return d;
    }

    /// Radial density tabulated at uniform grid nodes over [0,1],
    /// interpolated piecewise-linearly.
    static Density radial_smooth(std::vector<double> grid_values) {
        Density d;
        d.kind_ = DensityKind::radial_smooth;
        if (grid_values.size() < 2)
            throw std::invalid_argument("radial_smooth: need at least 2 grid values");
        d.values_ = std::move(grid_values);
        d.normalize();
        return d;
    }

    /// Tabulate an arbitrary radial density p(r) on `resolution` nodes.
    template <typename F>
    static Density radial_tabulated(F&& p, std::size_t resolution = 512) {
        std::vector<double> v(resolution + 1);
        for (std::size_t i = 0; i <= resolution; ++i)
            v[i] = p(static_cast<double>(i) / resolution);
        return radial_smooth(std::move(v));
    }

    /// General m x m table over (theta, r); theta nodes i/m (periodic),
    /// r nodes j/(m-1). Bilinear interpolation between nodes.
    static Density general_grid(std::size_t m, std::vector<double> table) {
        Density d;
        d.kind_ = DensityKind::general_grid;
        if (m < 2 || table.size() != m * m)
            throw std::invalid_argument("general_grid: table must be m*m with m >= 2");
        d.grid_m_ = m;
        d.values_ = std::move(table);
        d.normalize();
        return d;
    }

    static Density from_json(const nlohmann::json& j) {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "uniform") return uniform();
        if (kind == "radial_step")
            return radial_step(j.at("breakpoints").get<std::vector<double>>(),
                               j.at("values").get<std::vector<double>>());
        if (kind == "radial_smooth")
            return radial_smooth(j.at("values").get<std::vector<double>>());
        if (kind == "general_grid")
            return general_grid(j.at("size").get<std::size_t>(),
                                j.at("table").get<std::vector<double>>());
        throw std::invalid_argument("Density: unknown kind '" + kind + "'");
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        switch (kind_) {
            case DensityKind::uniform:
                j["kind"] = "uniform";
                break;
            case DensityKind::radial_step:
                j["kind"] = "radial_step";
                j["breakpoints"] = breaks_;
                j["values"] = values_;
                break;
            case DensityKind::radial_smooth:
                j["kind"] = "radial_smooth";
                j["values"] = values_;
                break;
            case DensityKind::general_grid:
                j["kind"] = "general_grid";
                j["size"] = grid_m_;
                j["table"] = values_;
                break;
        }
        return j;
    }

    DensityKind kind() const { return kind_; }

    bool is_radial() const { return kind_ != DensityKind::general_grid; }

    std::string descriptor() const { return to_json().dump(); }

    /// Normalized density value at (theta, r).
    double eval(double theta, double r) const {
        if (!(r >= 0.0 && r <= 1.0))
            throw std::invalid_argument("Density::eval: r outside [0,1]");
        if (!std::isfinite(theta))
            throw std::invalid_argument("Density::eval: non-finite theta");
        switch (kind_) {
            case DensityKind::uniform:
                return 1.0;
            case DensityKind::radial_step:
                return values_[step_index(r)];
            case DensityKind::radial_smooth:
                return smooth_value(r);
            case DensityKind::general_grid:
                return bilinear(wrap(theta), r);
        }
        return 0.0;  // unreachable
    }

    /// Integral of sqrt(p(r)) over [0,1]; exact for the stored
    /// piecewise-constant / piecewise-linear representation.
    double integral_sqrt_radial() const { return integral_sqrt_radial_partial(1.0); }

    /// Integral of sqrt(p(s)) over [0, r].
    double integral_sqrt_radial_partial(double r) const {
        require_radial("integral_sqrt_radial");
        if (!(r >= 0.0 && r <= 1.0 + 1e-12))
            throw std::invalid_argument("integral_sqrt_radial_partial: r outside [0,1]");
        r = std::min(r, 1.0);
        if (kind_ == DensityKind::uniform) return r;
        if (kind_ == DensityKind::radial_step) {
            double acc = 0.0;
            for (std::size_t i = 0; i < values_.size(); ++i) {
                double lo = breaks_[i], hi = breaks_[i + 1];
                if (r <= lo) break;
                acc += std::sqrt(values_[i]) * (std::min(r, hi) - lo);
            }
            return acc;
        }
        // radial_smooth: integrate sqrt of each linear segment in closed form.
        const std::size_t cells = values_.size() - 1;
        const double h = 1.0 / static_cast<double>(cells);
        double acc = 0.0;
        for (std::size_t i = 0; i < cells; ++i) {
            double lo = i * h;
            if (r <= lo) break;
            double frac = std::min((r - lo) / h, 1.0);
            double p0 = values_[i];
            double p1 = p0 + (values_[i + 1] - p0) * frac;
            acc += sqrt_segment_integral(p0, p1) * h * frac;
        }
        return acc;
    }

    /// Cumulative radial mass: integral of p over [0, r].
    double radial_cdf(double r) const {
        require_radial("radial_cdf");
        if (!(r >= 0.0 && r <= 1.0 + 1e-12))
            throw std::invalid_argument("radial_cdf: r outside [0,1]");
        r = std::min(r, 1.0);
        if (kind_ == DensityKind::uniform) return r;
        if (kind_ == DensityKind::radial_step) {
            double acc = 0.0;
            for (std::size_t i = 0; i < values_.size(); ++i) {
                double lo = breaks_[i], hi = breaks_[i + 1];
                if (r <= lo) break;
                acc += values_[i] * (std::min(r, hi) - lo);
            }
            return acc;
        }
        const std::size_t cells = values_.size() - 1;
        const double h = 1.0 / static_cast<double>(cells);
        double acc = 0.0;
        for (std::size_t i = 0; i < cells; ++i) {
            double lo = i * h;
            if (r <= lo) break;
            double x = std::min((r - lo), h);
            double slope = (values_[i + 1] - values_[i]) / h;
            acc += values_[i] * x + 0.5 * slope * x * x;
        }
        return acc;
    }

    double grid_max() const {
        return *std::max_element(values_.begin(), values_.end());
    }

    std::size_t grid_size() const { return grid_m_; }

private:
    void require_radial(const char* who) const {
        if (!is_radial())
            throw std::invalid_argument(std::string(who) + ": density is not radial");
    }

    std::size_t step_index(double r) const {
        auto it = std::upper_bound(breaks_.begin(), breaks_.end(), r);
        std::size_t i = static_cast<std::size_t>(it - breaks_.begin());
        if (i == 0) i = 1;
        if (i > values_.size()) i = values_.size();
        return i - 1;
    }

    double smooth_value(double r) const {
        const std::size_t cells = values_.size() - 1;
        double pos = r * static_cast<double>(cells);
        std::size_t i = std::min(static_cast<std::size_t>(pos), cells - 1);
        double f = pos - static_cast<double>(i);
        return values_[i] + (values_[i + 1] - values_[i]) * f;
    }

    double bilinear(double theta, double r) const {
        const std::size_t m = grid_m_;
        double tp = theta * static_cast<double>(m);
        std::size_t i = std::min(static_cast<std::size_t>(tp), m - 1);
        double ft = tp - static_cast<double>(i);
        std::size_t i1 = (i + 1) % m;  // theta wraps

        double rp = r * static_cast<double>(m - 1);
        std::size_t j = std::min(static_cast<std::size_t>(rp), m - 2);
        double fr = rp - static_cast<double>(j);

        double v00 = values_[i * m + j], v01 = values_[i * m + j + 1];
        double v10 = values_[i1 * m + j], v11 = values_[i1 * m + j + 1];
        return (1 - ft) * ((1 - fr) * v00 + fr * v01) + ft * ((1 - fr) * v10 + fr * v11);
    }

    // Mean of sqrt over one linear segment running p0 -> p1.
    static double sqrt_segment_integral(double p0, double p1) {
        if (p0 < 0 || p1 < 0) throw std::invalid_argument("density must be nonnegative");
        double dp = p1 - p0;
        if (std::fabs(dp) < 1e-14 * std::max(1.0, p0))
            return std::sqrt(0.5 * (p0 + p1));
        return (2.0 / 3.0) * (p1 * std::sqrt(p1) - p0 * std::sqrt(p0)) / dp;
    }

    void normalize() {
        double mass = 0.0;
        switch (kind_) {
            case DensityKind::uniform:
                return;
            case DensityKind::radial_step:
                for (std::size_t i = 0; i < values_.size(); ++i) {
                    if (values_[i] < 0.0)
                        throw std::invalid_argument("density must be nonnegative");
                    mass += values_[i] * (breaks_[i + 1] - breaks_[i]);
                }
                break;
            case DensityKind::radial_smooth: {
                const std::size_t cells = values_.size() - 1;
                for (double v : values_)
                    if (v < 0.0) throw std::invalid_argument("density must be nonnegative");
                for (std::size_t i = 0; i < cells; ++i)
                    mass += 0.5 * (values_[i] + values_[i + 1]) / static_cast<double>(cells);
                break;
            }
            case DensityKind::general_grid: {
                const std::size_t m = grid_m_;
                for (double v : values_)
                    if (v < 0.0) throw std::invalid_argument("density must be nonnegative");
                for (std::size_t i = 0; i < m; ++i) {
                    std::size_t i1 = (i + 1) % m;
                    for (std::size_t j = 0; j + 1 < m; ++j) {
                        double cell = 0.25 * (values_[i * m + j] + values_[i * m + j + 1] +
                                              values_[i1 * m + j] + values_[i1 * m + j + 1]);
                        mass += cell / static_cast<double>(m) / static_cast<double>(m - 1);
                    }
                }
                break;
            }
        }
        if (!(mass > 0.0))
            throw std::invalid_argument("density has zero total mass");
        for (double& v : values_) v /= mass;
    }

    friend class DensitySampler;

    DensityKind kind_{DensityKind::uniform};
    std::vector<double> breaks_;  // radial_step only
    std::vector<double> values_;
    std::size_t grid_m_{0};  // general_grid only
};

/// A reproducible i.i.d. batch of request locations.
struct SampleBatch {
    std::vector<DiskPoint> points;
    std::uint64_t seed{};
    std::string density;
};

/// Draws points from a Density using a private RNG stream.
class DensitySampler {
public:
    DensitySampler(const Density& d, std::uint64_t seed) : d_(d), rng_(seed) {
        if (d.kind_ == DensityKind::radial_step) {
            cdf_.assign(1, 0.0);
            for (std::size_t i = 0; i < d.values_.size(); ++i)
                cdf_.push_back(cdf_.back() + d.values_[i] * (d.breaks_[i + 1] - d.breaks_[i]));
        } else if (d.kind_ == DensityKind::radial_smooth) {
            const std::size_t cells = d.values_.size() - 1;
            cdf_.assign(1, 0.0);
            for (std::size_t i = 0; i < cells; ++i)
                cdf_.push_back(cdf_.back() +
                               0.5 * (d.values_[i] + d.values_[i + 1]) / static_cast<double>(cells));
        }
    }

    DiskPoint next() {
        switch (d_.kind_) {
            case DensityKind::uniform:
                return {rng_.next_double(), rng_.next_double()};
            case DensityKind::radial_step:
                return {rng_.next_double(), invert_step(rng_.next_double())};
            case DensityKind::radial_smooth:
                return {rng_.next_double(), invert_smooth(rng_.next_double())};
            case DensityKind::general_grid: {
                const double pmax = d_.grid_max();
                for (;;) {
                    double theta = rng_.next_double();
                    double r = rng_.next_double();
                    if (rng_.next_double() * pmax <= d_.bilinear(theta, r))
                        return {theta, r};
                }
            }
        }
        return {};  // unreachable
    }

    long long next_poisson_count(double intensity) { return rng_.next_poisson(intensity); }

private:
    double invert_step(double u) {
        u *= cdf_.back();
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()),
                                              d_.values_.size());
        if (i == 0) i = 1;
        --i;
        // skip zero-mass segments at the boundary
        while (d_.values_[i] <= 0.0 && i + 1 < d_.values_.size()) ++i;
        double r = d_.breaks_[i] + (u - cdf_[i]) / d_.values_[i];
        return std::clamp(r, d_.breaks_[i], d_.breaks_[i + 1]);
    }

    double invert_smooth(double u) {
        u *= cdf_.back();
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()),
                                              cdf_.size() - 1);
        if (i == 0) i = 1;
        --i;
        const std::size_t cells = d_.values_.size() - 1;
        const double h = 1.0 / static_cast<double>(cells);
        double need = u - cdf_[i];
        double p0 = d_.values_[i];
        double slope = (d_.values_[i + 1] - p0) / h;
        // solve p0*x + slope*x^2/2 = need on [0,h]
        double x;
        if (std::fabs(slope) < 1e-12 * std::max(1.0, p0)) {
            x = p0 > 0 ? need / p0 : h;
        } else {
            double disc = p0 * p0 + 2.0 * slope * need;
            x = (-p0 + std::sqrt(std::max(disc, 0.0))) / slope;
        }
        return std::clamp(i * h + x, i * h, (i + 1) * h);
    }

    const Density& d_;
    Rng rng_;
    std::vector<double> cdf_;
};

/// n i.i.d. draws from d, reproducible from (seed, n, d).
inline SampleBatch sample(const Density& d, std::size_t n, std::uint64_t seed) {
    DensitySampler s(d, seed);
    SampleBatch batch;
    batch.seed = seed;
    batch.density = d.descriptor();
    batch.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) batch.points.push_back(s.next());
    return batch;
}

/// Poissonized sampling: N ~ Poisson(intensity), then N i.i.d. draws.
inline SampleBatch poisson_sample(const Density& d, double intensity, std::uint64_t seed) {
    if (!(intensity >= 0.0))
        throw std::invalid_argument("poisson_sample: intensity must be >= 0");
    DensitySampler s(d, seed);
    long long n = s.next_poisson_count(intensity);
    SampleBatch batch;
    batch.seed = seed;
    batch.density = d.descriptor();
    batch.points.reserve(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) batch.points.push_back(s.next());
    return batch;
}

} // namespace disktour
