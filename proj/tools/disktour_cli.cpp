// Command-line front end: sampling, scheduling, peeling, and the Monte Carlo
// experiment runners, with CSV/JSON output.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "disktour/harness.hpp"

namespace {

using namespace disktour;

struct CommonOpts {
    std::string config_path;
    std::string n_spec = "1000";
    double c = 1.0;
    std::string density = "uniform";
    int trials = 1;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out_dir;
    std::string format = "csv";
};

std::uint64_t env_seed() {
    if (const char* env = std::getenv("DISKTOUR_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw std::invalid_argument("DISKTOUR_SEED is not a valid unsigned integer");
        }
    }
    return 0;
}

std::vector<long long> parse_n_list(const std::string& spec) {
    std::vector<long long> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t pos = 0;
        double v = std::stod(item, &pos);
        if (pos != item.size() || !(v >= 1.0) || v > 9.2e18 || v != std::floor(v))
            throw std::invalid_argument("bad n value '" + item + "'");
        out.push_back(static_cast<long long>(v));
    }
    if (out.empty()) throw std::invalid_argument("empty n list");
    return out;
}

nlohmann::json load_density_spec(const std::string& arg) {
    if (arg == "uniform") return {{"kind", "uniform"}};
    std::ifstream f(arg);
    if (!f) throw std::invalid_argument("cannot open density file '" + arg + "'");
    nlohmann::json j;
    f >> j;
    Density::from_json(j);  // validate eagerly for a clean error message
    return j;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON config file; flags override its fields");
    cmd->add_option("--seed", opts.seed, "master RNG seed (default: DISKTOUR_SEED env or 0)")
        ->each([&](const std::string&) { opts.seed_given = true; });
    cmd->add_option("--n", opts.n_spec, "sample size, or comma list like 1e4,1e5");
    cmd->add_option("--c", opts.c, "radial head speed (radius units per rotation)");
    cmd->add_option("--density", opts.density, "'uniform' or a density JSON file");
    cmd->add_option("--trials", opts.trials, "Monte Carlo trials per n");
    cmd->add_option("--out", opts.out_dir, "output directory for reports");
    cmd->add_option("--format", opts.format, "stdout format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
}

ExperimentConfig build_config(const CommonOpts& opts, ExperimentKind kind) {
    ExperimentConfig cfg;
    if (!opts.config_path.empty()) {
        std::ifstream f(opts.config_path);
        if (!f) throw std::invalid_argument("cannot open config '" + opts.config_path + "'");
        nlohmann::json j;
        f >> j;
        cfg = ExperimentConfig::from_json(j);
    } else {
        cfg.kind = kind;
        cfg.seed = env_seed();
    }
    if (opts.config_path.empty() || opts.seed_given) {
        if (opts.seed_given) cfg.seed = opts.seed;
    }
    if (opts.config_path.empty()) {
        cfg.c = opts.c;
        cfg.n_values = parse_n_list(opts.n_spec);
        cfg.trials = opts.trials;
        cfg.density_spec = load_density_spec(opts.density);
    }
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    cfg.validate();
    return cfg;
}

void emit_batch(const SampleBatch& batch, const std::string& format, std::ostream& os) {
    if (format == "json") {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& p : batch.points) rows.push_back({{"theta", p.theta}, {"r", p.r}});
        os << nlohmann::json{{"seed", batch.seed}, {"points", rows}}.dump(2) << "\n";
        return;
    }
    os << "theta,r\n";
    char buf[64];
    for (const auto& p : batch.points) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g\n", p.theta, p.r);
        os << buf;
    }
}

void write_or_print(const std::string& out_dir, const std::string& name,
                    const std::string& body) {
    if (out_dir.empty()) {
        std::cout << body;
        return;
    }
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + out_dir + "/" + name);
    f << body;
}

std::string tour_csv(const Tour& tour) {
    std::ostringstream os;
    os << "t,r,wrapped_theta,layer,request_id\n";
    char buf[96];
    for (std::size_t i = 0; i < tour.visits.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%d,%d\n", tour.visits[i].t,
                      tour.visits[i].r, wrap(tour.visits[i].t), tour.layer[i],
                      tour.request_id[i]);
        os << buf;
    }
    return os.str();
}

int cmd_sample(const CommonOpts& opts) {
    auto n_values = parse_n_list(opts.n_spec);
    std::uint64_t seed = opts.seed_given ? opts.seed : env_seed();
    Density d = Density::from_json(load_density_spec(opts.density));
    SampleBatch batch = sample(d, static_cast<std::size_t>(n_values.front()), seed);
    std::ostringstream body;
    emit_batch(batch, opts.format, body);
    write_or_print(opts.out_dir, opts.format == "json" ? "batch.json" : "batch.csv", body.str());
    return 0;
}

int cmd_peel(const CommonOpts& opts) {
    auto n_values = parse_n_list(opts.n_spec);
    std::uint64_t seed = opts.seed_given ? opts.seed : env_seed();
    Density d = Density::from_json(load_density_spec(opts.density));
    SeekModel model(opts.c);
    SampleBatch batch = sample(d, static_cast<std::size_t>(n_values.front()), seed);
    PeelLayers pl = peel_cylinder_ver(batch.points, model);
    std::ostringstream body;
    body << "theta,r,layer\n";
    char buf[80];
    for (std::size_t i = 0; i < batch.points.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%d\n", batch.points[i].theta,
                      batch.points[i].r, pl.layer_of[i]);
        body << buf;
    }
    write_or_print(opts.out_dir, "peel.csv", body.str());
    std::cerr << "depth " << pl.depth() << " over " << batch.points.size() << " points\n";
    return 0;
}

int cmd_schedule(const CommonOpts& opts) {
    ExperimentConfig cfg = build_config(opts, ExperimentKind::schedule);
    Report rep = run_experiment(cfg);
    // also emit the head trajectory of the first trial for plotting
    Density d = Density::from_json(cfg.density_spec);
    SeekModel model(cfg.c);
    SampleBatch batch = sample(d, static_cast<std::size_t>(cfg.n_values.front()),
                               derive_seed(cfg.seed, 0));
    Tour tour = modified_abz(batch.points, model);
    if (cfg.out_dir.empty()) {
        std::cout << rep.records_csv();
    } else {
        write_or_print(cfg.out_dir, "tour.csv", tour_csv(tour));
    }
    std::cerr << "k=" << tour.k << " for n=" << cfg.n_values.front() << "\n";
    return 0;
}

int cmd_estimate(const CommonOpts& opts) {
    ExperimentConfig cfg = build_config(opts, ExperimentKind::estimate_m);
    Report rep = run_experiment(cfg);
    if (rep.summary.contains("analytic_m"))
        std::cout << "analytic_m " << detail::fmt(rep.summary.at("analytic_m").get<double>())
                  << "\n";
    std::cout << "dp_m " << detail::fmt(rep.summary.at("dp_m").get<double>()) << "\n";
    for (const auto& agg : rep.summary.at("aggregates"))
        std::cout << "n " << agg.at("n").get<long long>() << " mean_M_over_sqrt_n "
                  << detail::fmt(agg.at("mean").get<double>()) << "\n";
    return 0;
}

int cmd_fine(const CommonOpts& opts) {
    ExperimentConfig cfg = build_config(opts, ExperimentKind::fine_asymptotics);
    Report rep = run_experiment(cfg);
    double a0 = rep.summary.at("A0").get<double>();
    double b0 = rep.summary.at("B0").get<double>();
    std::cout << "n,mean_stat,stddev,A0,B0\n";
    for (const auto& agg : rep.summary.at("aggregates"))
        std::cout << agg.at("n").get<long long>() << ','
                  << detail::fmt(agg.at("mean").get<double>()) << ','
                  << detail::fmt(agg.at("stddev").get<double>()) << ',' << detail::fmt(a0)
                  << ',' << detail::fmt(b0) << "\n";
    return 0;
}

int cmd_sandwich(const CommonOpts& opts) {
    ExperimentConfig cfg = build_config(opts, ExperimentKind::sandwich);
    Report rep = run_experiment(cfg);
    long long violations = 0;
    for (const auto& r : rep.records)
        if (!r.holds) ++violations;
    if (cfg.out_dir.empty()) std::cout << rep.records_csv();
    std::cerr << "violations " << violations << " / " << rep.records.size() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"batched disk-scheduling tours, peeling, and Monte Carlo diagnostics"};
    app.require_subcommand(1);

    CommonOpts opts;
    auto* sample_cmd = app.add_subcommand("sample", "draw a request batch from a density");
    auto* schedule_cmd = app.add_subcommand("schedule", "build tours and service times");
    auto* peel_cmd = app.add_subcommand("peel", "peel a batch into antichain layers");
    auto* estimate_cmd = app.add_subcommand("estimate", "estimate the tour-length constant m");
    auto* profile_cmd = app.add_subcommand("profile", "service/pile profile vs prediction");
    auto* fine_cmd = app.add_subcommand("fine", "fine-asymptotics band diagnostic");
    auto* sandwich_cmd = app.add_subcommand("sandwich", "service-time sandwich property check");
    bool square = false;
    profile_cmd->add_flag("--square", square, "peel the unit square instead of the cylinder");
    for (CLI::App* cmd : {sample_cmd, schedule_cmd, peel_cmd, estimate_cmd, profile_cmd,
                          fine_cmd, sandwich_cmd})
        add_common(cmd, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sample_cmd->parsed()) return cmd_sample(opts);
        if (peel_cmd->parsed()) return cmd_peel(opts);
        if (schedule_cmd->parsed()) return cmd_schedule(opts);
        if (estimate_cmd->parsed()) return cmd_estimate(opts);
        if (fine_cmd->parsed()) return cmd_fine(opts);
        if (sandwich_cmd->parsed()) return cmd_sandwich(opts);
        if (profile_cmd->parsed()) {
            CommonOpts popts = opts;
            ExperimentConfig cfg = build_config(popts, ExperimentKind::profile);
            cfg.square_domain = square;
            cfg.validate();
            Report rep = run_experiment(cfg);
            if (cfg.out_dir.empty()) std::cout << rep.profile_csv();
            std::cerr << rep.summary.at("aggregates").dump(2) << "\n";
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
