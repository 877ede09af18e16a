#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "disktour/analytics.hpp"
#include "disktour/density.hpp"
#include "disktour/geometry.hpp"
#include "disktour/peeling.hpp"
#include "disktour/rng.hpp"
#include "disktour/scheduler.hpp"

namespace disktour {

enum class ExperimentKind { schedule, estimate_m, profile, fine_asymptotics, sandwich };

inline std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::schedule: return "schedule";
        case ExperimentKind::estimate_m: return "estimate_m";
        case ExperimentKind::profile: return "profile";
        case ExperimentKind::fine_asymptotics: return "fine_asymptotics";
        case ExperimentKind::sandwich: return "sandwich";
    }
    return "?";
}

inline ExperimentKind experiment_kind_from_string(const std::string& s) {
    if (s == "schedule") return ExperimentKind::schedule;
    if (s == "estimate_m") return ExperimentKind::estimate_m;
    if (s == "profile") return ExperimentKind::profile;
    if (s == "fine_asymptotics") return ExperimentKind::fine_asymptotics;
    if (s == "sandwich") return ExperimentKind::sandwich;
    throw std::invalid_argument("unknown experiment kind '" + s + "'");
}

/// Everything a run needs; round-trips losslessly through JSON.
struct ExperimentConfig {
    ExperimentKind kind{ExperimentKind::estimate_m};
    nlohmann::json density_spec = {{"kind", "uniform"}};
    double c{1.0};
    std::vector<long long> n_values{1000};
    int trials{1};
    std::uint64_t seed{0};
    std::string out_dir;
    int grid{200};
    int window{8};
    bool square_domain{false};  // profile: peel the unit square instead of the cylinder

    void validate() const {
        if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
        if (n_values.empty()) throw std::invalid_argument("config: need at least one n");
        for (long long n : n_values)
            if (n < 1) throw std::invalid_argument("config: n must be >= 1");
        if (!(c > 0.0)) throw std::invalid_argument("config: c must be > 0");
        Density::from_json(density_spec);  // throws on a bad spec
    }

    nlohmann::json to_json() const {
        return {{"kind", to_string(kind)}, {"density", density_spec},
                {"c", c},                  {"n", n_values},
                {"trials", trials},        {"seed", seed},
                {"out", out_dir},          {"grid", grid},
                {"window", window},        {"square", square_domain}};
    }

    static ExperimentConfig from_json(const nlohmann::json& j) {
        ExperimentConfig cfg;
        cfg.kind = experiment_kind_from_string(j.at("kind").get<std::string>());
        if (j.contains("density")) cfg.density_spec = j.at("density");
        if (j.contains("c")) cfg.c = j.at("c").get<double>();
        if (j.contains("n")) cfg.n_values = j.at("n").get<std::vector<long long>>();
        if (j.contains("trials")) cfg.trials = j.at("trials").get<int>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
        if (j.contains("grid")) cfg.grid = j.at("grid").get<int>();
        if (j.contains("window")) cfg.window = j.at("window").get<int>();
        if (j.contains("square")) cfg.square_domain = j.at("square").get<bool>();
        return cfg;
    }

    std::uint64_t hash() const {
        // FNV-1a over the canonical dump
        std::string s = to_json().dump();
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
        return h;
    }
};

/// One trial's worth of numbers; unused fields stay empty in the CSV.
struct TrialRecord {
    long long n{};
    int trial{};
    int M{};
    long long k_modified{-1};
    long long k_abz{-1};
    std::optional<long long> k_exact;
    double stat{};        // experiment statistic (see column docs in the README)
    double prediction{};  // analytic prediction for the statistic, when defined
    bool holds{true};
    double elapsed{};
};

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string csv_opt(const std::optional<long long>& v) {
    return v ? std::to_string(*v) : std::string();
}

} // namespace detail

struct Report {
    ExperimentConfig config;
    std::vector<TrialRecord> records;
    nlohmann::json summary;
    // profile experiments also emit a curve table
    std::vector<std::array<double, 3>> profile_rows;  // tau, predicted, empirical

    std::string records_csv() const {
        std::ostringstream out;
        // wall-clock timings stay out of the CSV so reruns are byte-identical
        out << "n,trial,M,k_modified,k_abz,k_exact,stat,prediction,holds\n";
        for (const auto& r : records) {
            out << r.n << ',' << r.trial << ',' << r.M << ','
                << (r.k_modified >= 0 ? std::to_string(r.k_modified) : std::string()) << ','
                << (r.k_abz >= 0 ? std::to_string(r.k_abz) : std::string()) << ','
                << detail::csv_opt(r.k_exact) << ',' << detail::fmt(r.stat) << ','
                << detail::fmt(r.prediction) << ',' << (r.holds ? 1 : 0) << "\n";
        }
        return out.str();
    }

    std::string profile_csv() const {
        std::ostringstream out;
        out << "tau,predicted_fraction,empirical_fraction\n";
        for (const auto& row : profile_rows)
            out << detail::fmt(row[0]) << ',' << detail::fmt(row[1]) << ','
                << detail::fmt(row[2]) << "\n";
        return out.str();
    }

    void write(const std::string& dir) const {
        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(dir, ec);
        auto dump = [&](const std::string& name, const std::string& body) {
            std::ofstream f(fs::path(dir) / name, std::ios::binary);
            if (!f) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
            f << body;
        };
        dump("records.csv", records_csv());
        if (!profile_rows.empty()) dump("profile.csv", profile_csv());
        dump("summary.json", summary.dump(2) + "\n");
    }
};

namespace detail {

inline nlohmann::json aggregate(const std::vector<TrialRecord>& records) {
    nlohmann::json per_n = nlohmann::json::array();
    std::vector<long long> ns;
    for (const auto& r : records)
        if (std::find(ns.begin(), ns.end(), r.n) == ns.end()) ns.push_back(r.n);
    for (long long n : ns) {
        std::vector<double> stats;
        int violations = 0;
        for (const auto& r : records)
            if (r.n == n) {
                stats.push_back(r.stat);
                if (!r.holds) ++violations;
            }
        std::sort(stats.begin(), stats.end());
        double mean = 0.0;
        for (double s : stats) mean += s;
        mean /= static_cast<double>(stats.size());
        double var = 0.0;
        for (double s : stats) var += (s - mean) * (s - mean);
        var = stats.size() > 1 ? var / static_cast<double>(stats.size() - 1) : 0.0;
        auto quant = [&](double p) {
            double idx = p * static_cast<double>(stats.size() - 1);
            std::size_t lo = static_cast<std::size_t>(idx);
            std::size_t hi = std::min(lo + 1, stats.size() - 1);
            return stats[lo] + (stats[hi] - stats[lo]) * (idx - static_cast<double>(lo));
        };
        per_n.push_back({{"n", n},
                         {"trials", stats.size()},
                         {"mean", mean},
                         {"stddev", std::sqrt(var)},
                         {"p10", quant(0.1)},
                         {"p50", quant(0.5)},
                         {"p90", quant(0.9)},
                         {"violations", violations}});
    }
    return per_n;
}

/// Run fn(n_index, trial) over all (n, trial) pairs, possibly on several
/// threads; records land in a preallocated slot per pair so the output is
/// independent of scheduling.
template <typename F>
void for_each_trial(std::size_t n_count, int trials, F&& fn, unsigned threads) {
    const std::size_t total = n_count * static_cast<std::size_t>(trials);
    if (threads <= 1 || total <= 1) {
        for (std::size_t w = 0; w < total; ++w)
            fn(w / static_cast<std::size_t>(trials), static_cast<int>(w % trials));
        return;
    }
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    unsigned count = std::min<unsigned>(threads, static_cast<unsigned>(total));
    std::vector<std::exception_ptr> errors(count);
    for (unsigned t = 0; t < count; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (;;) {
                    std::size_t w = cursor.fetch_add(1);
                    if (w >= total) break;
                    fn(w / static_cast<std::size_t>(trials), static_cast<int>(w % trials));
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace detail

/// Execute an experiment. Per-trial RNG streams are derived from the master
/// seed and the (n, trial) pair, so the report is identical across runs and
/// thread counts.
inline Report run_experiment(const ExperimentConfig& cfg,
                             unsigned threads = std::thread::hardware_concurrency()) {
    cfg.validate();
    const Density density = Density::from_json(cfg.density_spec);
    const SeekModel model(cfg.c);

    Report report;
    report.config = cfg;
    report.records.resize(cfg.n_values.size() * static_cast<std::size_t>(cfg.trials));

    auto stream_of = [&](std::size_t ni, int trial) {
        return derive_seed(cfg.seed, ni * 1000003ULL + static_cast<std::uint64_t>(trial));
    };
    auto slot = [&](std::size_t ni, int trial) -> TrialRecord& {
        return report.records[ni * static_cast<std::size_t>(cfg.trials) +
                              static_cast<std::size_t>(trial)];
    };

    const double sqrt2c = std::sqrt(2.0 / cfg.c);

    switch (cfg.kind) {
        case ExperimentKind::schedule: {
            detail::for_each_trial(cfg.n_values.size(), cfg.trials, [&](std::size_t ni, int trial) {
                auto t0 = std::chrono::steady_clock::now();
                long long n = cfg.n_values[ni];
                SampleBatch batch = sample(density, static_cast<std::size_t>(n), stream_of(ni, trial));
                Tour mod = modified_abz(batch.points, model);
                Tour orig = abz(batch.points, model);
                TrialRecord& r = slot(ni, trial);
                r.n = n;
                r.trial = trial;
                r.M = static_cast<int>(mod.layer.empty() ? 0 : *std::max_element(mod.layer.begin(), mod.layer.end()));
                r.k_modified = mod.k;
                r.k_abz = orig.k;
                if (n <= 9) r.k_exact = exact_service_time(batch.points, model);
                r.stat = static_cast<double>(mod.k) / std::sqrt(static_cast<double>(n));
                r.prediction = density.is_radial() ? analytic_m_radial(density, model) : 0.0;
                r.holds = validate_tour(mod, batch.points, model) &&
                          validate_tour(orig, batch.points, model);
                r.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            }, threads);
            break;
        }
        case ExperimentKind::estimate_m: {
            detail::for_each_trial(cfg.n_values.size(), cfg.trials, [&](std::size_t ni, int trial) {
                auto t0 = std::chrono::steady_clock::now();
                long long n = cfg.n_values[ni];
                SampleBatch batch = sample(density, static_cast<std::size_t>(n), stream_of(ni, trial));
                PeelLayers pl = peel_cylinder_ver(batch.points, model);
                TrialRecord& r = slot(ni, trial);
                r.n = n;
                r.trial = trial;
                r.M = pl.depth();
                r.stat = static_cast<double>(pl.depth()) / std::sqrt(static_cast<double>(n));
                r.prediction = density.is_radial() ? analytic_m_radial(density, model) : 0.0;
                r.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            }, threads);
            if (density.is_radial())
                report.summary["analytic_m"] = analytic_m_radial(density, model);
            report.summary["dp_m"] = maximize_vertical_functional(density, model, cfg.grid).m;
            break;
        }
        case ExperimentKind::profile: {
            const int taus = 200;
            std::vector<std::vector<double>> empirical(
                cfg.n_values.size() * static_cast<std::size_t>(cfg.trials));
            double tau_max = cfg.square_domain ? 2.0 : analytic_m_radial(density, model);
            detail::for_each_trial(cfg.n_values.size(), cfg.trials, [&](std::size_t ni, int trial) {
                auto t0 = std::chrono::steady_clock::now();
                long long n = cfg.n_values[ni];
                SampleBatch batch = sample(density, static_cast<std::size_t>(n), stream_of(ni, trial));
                PeelLayers pl;
                if (cfg.square_domain) {
                    std::vector<PlanePoint> pts;
                    pts.reserve(batch.points.size());
                    for (const auto& p : batch.points) pts.push_back({p.theta, p.r});
                    pl = patience_peel(pts);
                } else {
                    pl = peel_cylinder_ver(batch.points, model);
                }
                StepProfile prof = empirical_layer_profile(pl, static_cast<std::size_t>(n));
                std::vector<double> vals(taus + 1);
                double sup = 0.0;
                for (int i = 0; i <= taus; ++i) {
                    double tau = tau_max * i / taus;
                    vals[static_cast<std::size_t>(i)] = prof.eval(tau);
                    double pred = cfg.square_domain ? uniform_square_pile_profile(tau)
                                                    : served_fraction_radial(tau, density, model);
                    sup = std::max(sup, std::fabs(pred - vals[static_cast<std::size_t>(i)]));
                }
                empirical[ni * static_cast<std::size_t>(cfg.trials) +
                          static_cast<std::size_t>(trial)] = std::move(vals);
                TrialRecord& r = slot(ni, trial);
                r.n = n;
                r.trial = trial;
                r.M = pl.depth();
                r.stat = sup;  // sup-distance to the predicted profile
                r.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            }, threads);
            for (int i = 0; i <= taus; ++i) {
                double tau = tau_max * i / taus;
                double pred = cfg.square_domain ? uniform_square_pile_profile(tau)
                                                : served_fraction_radial(tau, density, model);
                double mean = 0.0;
                for (const auto& e : empirical) mean += e[static_cast<std::size_t>(i)];
                mean /= static_cast<double>(empirical.size());
                report.profile_rows.push_back({tau, pred, mean});
            }
            break;
        }
        case ExperimentKind::fine_asymptotics: {
            detail::for_each_trial(cfg.n_values.size(), cfg.trials, [&](std::size_t ni, int trial) {
                auto t0 = std::chrono::steady_clock::now();
                long long n = cfg.n_values[ni];
                SampleBatch batch = sample(density, static_cast<std::size_t>(n), stream_of(ni, trial));
                Tour mod = modified_abz(batch.points, model);
                TrialRecord& r = slot(ni, trial);
                r.n = n;
                r.trial = trial;
                r.M = mod.layer.empty() ? 0 : *std::max_element(mod.layer.begin(), mod.layer.end());
                r.k_modified = mod.k;
                double excess = static_cast<double>(mod.k) - sqrt2c * std::sqrt(static_cast<double>(n));
                double lpow = std::pow(std::log(static_cast<double>(n)), 2.0 / 3.0);
                r.stat = excess / lpow;
                r.prediction = fine_asymptotics_a0(model);
                r.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            }, threads);
            nlohmann::json bands = nlohmann::json::array();
            for (long long n : cfg.n_values) {
                auto band = fine_asymptotics_band(static_cast<double>(n), model);
                bands.push_back({{"n", n}, {"band_lower", band.first}, {"band_upper", band.second}});
            }
            report.summary["bands"] = bands;
            report.summary["A0"] = fine_asymptotics_a0(model);
            report.summary["B0"] = fine_asymptotics_b0(model);
            break;
        }
        case ExperimentKind::sandwich: {
            detail::for_each_trial(cfg.n_values.size(), cfg.trials, [&](std::size_t ni, int trial) {
                auto t0 = std::chrono::steady_clock::now();
                long long n = cfg.n_values[ni];
                SampleBatch batch = sample(density, static_cast<std::size_t>(n), stream_of(ni, trial));
                SandwichReport sr = sandwich_check(batch.points, model);
                TrialRecord& r = slot(ni, trial);
                r.n = n;
                r.trial = trial;
                r.M = sr.M;
                r.k_modified = sr.k_modified;
                r.k_exact = sr.k_exact;
                r.stat = sr.k_exact ? static_cast<double>(*sr.k_exact - sr.M)
                                    : static_cast<double>(sr.k_modified - sr.M);
                r.holds = sr.holds;
                r.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            }, threads);
            break;
        }
    }

    report.summary["experiment"] = to_string(cfg.kind);
    report.summary["config"] = cfg.to_json();
    report.summary["config_hash"] = cfg.hash();
    report.summary["seed"] = cfg.seed;
    report.summary["version"] = "1.0.0";
    report.summary["aggregates"] = detail::aggregate(report.records);
    double elapsed_total = 0.0;
    for (const auto& r : report.records) elapsed_total += r.elapsed;
    report.summary["elapsed_total"] = elapsed_total;
    if (!cfg.out_dir.empty()) report.write(cfg.out_dir);
    return report;
}

} // namespace disktour
