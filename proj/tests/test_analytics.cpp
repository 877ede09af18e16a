#include <doctest.h>

#include <cmath>
#include <vector>

#include "disktour/analytics.hpp"
#include "disktour/density.hpp"
#include "disktour/peeling.hpp"
#include "disktour/rng.hpp"

using namespace disktour;

TEST_CASE("dz_functional on a grid") {
    auto one = [](double, double) { return 1.0; };
    {
        std::vector<double> phi(101);
        for (int i = 0; i <= 100; ++i) phi[static_cast<std::size_t>(i)] = i / 100.0;
        CHECK(dz_functional(phi, 1.0, one) == doctest::Approx(2.0).epsilon(1e-9));
    }
    {
        std::vector<double> phi(2001);
        for (int i = 0; i <= 2000; ++i) {
            double x = i / 2000.0;
            phi[static_cast<std::size_t>(i)] = x * x;
        }
        // analytic value: 2 * integral of sqrt(2x) dx = 4 sqrt(2) / 3
        CHECK(dz_functional(phi, 1.0, one) ==
              doctest::Approx(4.0 * std::sqrt(2.0) / 3.0).epsilon(1e-3));
    }
    CHECK(dz_functional(std::vector<double>(50, 0.7), 1.0, one) == doctest::Approx(0.0));
    std::vector<double> bad{0.0, 0.5, 0.3, 1.0};
    CHECK_THROWS_AS(dz_functional(bad, 1.0, one), std::invalid_argument);
}

TEST_CASE("maximize_dz on the uniform square") {
    auto one = [](double, double) { return 1.0; };
    AsymptoticPrediction coarse = maximize_dz(one, 1.0, 60, 6);
    AsymptoticPrediction fine = maximize_dz(one, 1.0, 120, 6);
    CHECK(fine.m >= coarse.m - 1e-12);  // refinement converges from below
    CHECK(fine.m <= 2.0 + 1e-3);
    CHECK(fine.m == doctest::Approx(2.0).epsilon(0.02));
    // the maximizer hugs the diagonal
    for (const auto& [x, y] : fine.maximizer) CHECK(std::fabs(y - x) <= 0.05);
}

TEST_CASE("maximize_dz on a scaled sub-square") {
    // mass 4 on [0, 1/2]^2: the sub-diagonal gives 2 * (1/2) * sqrt(4) = 2
    auto q = [](double x, double y) { return (x <= 0.5 && y <= 0.5) ? 4.0 : 0.0; };
    AsymptoticPrediction pred = maximize_dz(q, 1.0, 200, 8);
    CHECK(pred.m == doctest::Approx(2.0).epsilon(0.015));
}

TEST_CASE("maximize_dz matches Monte Carlo pile depth for a product density") {
    // 1-d step density 1.5 on [0, 1/2), 0.5 on [1/2, 1]; q = p(x) p(y)
    auto p1 = [](double x) { return x < 0.5 ? 1.5 : 0.5; };
    auto q = [&](double x, double y) { return p1(x) * p1(y); };
    auto draw = [](Rng& rng) {
        double u = rng.next_double();
        return u < 0.75 ? u / 1.5 : 0.5 + (u - 0.75) / 0.5;
    };
    const int n = 1000000;
    Rng rng(20240817);
    std::vector<PlanePoint> pts;
    pts.reserve(n);
    for (int i = 0; i < n; ++i) {
        double x = draw(rng), y = draw(rng);
        pts.push_back({x, y});
    }
    double mc = patience_peel(pts).depth() / std::sqrt(static_cast<double>(n));
    double dp = maximize_dz(q, 1.0, 200, 8).m;
    CHECK(std::fabs(dp - mc) <= 0.05);
}

TEST_CASE("analytic_m_radial") {
    SeekModel c1(1.0), c2(2.0);
    CHECK(analytic_m_radial(Density::uniform(), c1) == doctest::Approx(std::sqrt(2.0)));
    CHECK(analytic_m_radial(Density::uniform(), c2) == doctest::Approx(1.0));
    Density lin = Density::radial_tabulated([](double r) { return 2.0 * r; });
    CHECK(analytic_m_radial(lin, c1) == doctest::Approx(4.0 / 3.0).epsilon(1e-5));
    std::vector<double> t(9, 1.0);
    CHECK_THROWS_AS(analytic_m_radial(Density::general_grid(3, t), c1), std::invalid_argument);
}

TEST_CASE("vertical_functional") {
    SeekModel c1(1.0);
    Density u = Density::uniform();
    std::vector<double> vertical(101, 0.25);
    CHECK(vertical_functional(vertical, u, c1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    // a null-slope curve contributes nothing
    std::vector<double> diag(101);
    for (int i = 0; i <= 100; ++i) diag[static_cast<std::size_t>(i)] = i / 100.0;
    CHECK(vertical_functional(diag, u, c1) <= 1e-6);  // fp residue in 1 - slope^2
    std::vector<double> steep{0.0, 0.5, 0.5};  // slope 1 over h=1/2 at c=2 is too steep
    CHECK_THROWS_AS(vertical_functional(steep, u, SeekModel(2.0)), std::invalid_argument);
}

TEST_CASE("maximize_vertical_functional uniform") {
    SeekModel c1(1.0);
    AsymptoticPrediction pred = maximize_vertical_functional(Density::uniform(), c1, 200);
    CHECK(pred.m == doctest::Approx(std::sqrt(2.0)).epsilon(0.015));
    // maximizer is a vertical line up to one theta-grid step per level
    double max_step = 0.0;
    for (std::size_t i = 0; i + 1 < pred.maximizer.size(); ++i)
        max_step = std::max(max_step,
                            std::fabs(pred.maximizer[i + 1].second - pred.maximizer[i].second));
    CHECK(max_step <= 1.0 / 200.0 + 1e-12);
}

TEST_CASE("maximize_vertical_functional radial step") {
    SeekModel c1(1.0);
    Density d = Density::radial_step({0.0, 0.5, 1.0}, {2.0, 0.0});
    AsymptoticPrediction pred = maximize_vertical_functional(d, c1, 200);
    CHECK(pred.m == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("maximize_vertical_functional dominates vertical lines") {
    // a theta-dependent bump: the DP maximizes over a superset of the
    // vertical lines, so it can only do better
    const std::size_t m = 8;
    std::vector<double> table(m * m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            table[i * m + j] = 0.2 + std::exp(-10.0 * (i / static_cast<double>(m) - 0.4) *
                                              (i / static_cast<double>(m) - 0.4)) *
                                         (0.5 + j / static_cast<double>(m));
    Density d = Density::general_grid(m, table);
    SeekModel c1(1.0);
    double dp = maximize_vertical_functional(d, c1, 100).m;
    for (int g = 0; g < 32; ++g) {
        std::vector<double> psi(101, g / 32.0);
        CHECK(dp >= vertical_functional(psi, d, c1) - 1e-6);
    }
}

TEST_CASE("agreement of closed form, DP, and Monte Carlo depth") {
    Density u = Density::uniform();
    for (double c : {0.5, 1.0, 2.0}) {
        SeekModel m(c);
        double analytic = analytic_m_radial(u, m);
        double dp = maximize_vertical_functional(u, m, 200).m;
        CHECK(std::fabs(dp - analytic) <= 0.02);
    }
    SeekModel c1(1.0);
    auto batch = sample(u, 100000, 271828);
    double mc = peel_cylinder_ver(batch.points, c1).depth() / std::sqrt(1e5);
    CHECK(std::fabs(mc - std::sqrt(2.0)) <= 0.03 * std::sqrt(2.0));
}

TEST_CASE("served_fraction_radial") {
    SeekModel c1(1.0);
    Density u = Density::uniform();
    CHECK(served_fraction_radial(std::sqrt(2.0), u, c1) == doctest::Approx(1.0));
    CHECK(served_fraction_radial(std::sqrt(2.0) / 2.0, u, c1) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(served_fraction_radial(0.0, u, c1) == 0.0);
    // p(r) = 2r: height h(r) = (4/3) r^{3/2}, fraction = r^2
    Density lin = Density::radial_tabulated([](double r) { return 2.0 * r; });
    double tau = 2.0 / 3.0;
    double r = std::pow(0.5, 2.0 / 3.0);
    CHECK(served_fraction_radial(tau, lin, c1) == doctest::Approx(r * r).epsilon(1e-4));
    // monotone and conservative
    double prev = 0.0;
    for (int i = 0; i <= 64; ++i) {
        double v = served_fraction_radial(std::sqrt(2.0) * i / 64.0, u, c1);
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
    CHECK(prev == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("uniform_square_pile_profile") {
    CHECK(uniform_square_pile_profile(2.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(uniform_square_pile_profile(1.0) ==
          doctest::Approx(0.5 * std::log(2.0) + 0.25).epsilon(1e-12));
    CHECK(uniform_square_pile_profile(0.0) == 0.0);
    CHECK_THROWS_AS(uniform_square_pile_profile(2.5), std::invalid_argument);
    CHECK_THROWS_AS(uniform_square_pile_profile(-0.1), std::invalid_argument);
    double prev = 0.0;
    for (int i = 0; i <= 100; ++i) {
        double v = uniform_square_pile_profile(2.0 * i / 100.0);
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
}

TEST_CASE("empirical_layer_profile") {
    {
        PeelLayers pl;
        pl.layer_of = {1};
        pl.layers = {{0}};
        pl.pred = {-1};
        StepProfile prof = empirical_layer_profile(pl, 1);
        CHECK(prof.eval(0.5) == 0.0);
        CHECK(prof.eval(1.0) == doctest::Approx(1.0));
        CHECK(prof.eval(2.0) == doctest::Approx(1.0));
    }
    // uniform square at n=10^5 tracks the closed-form profile
    Rng rng(5551212);
    const int n = 100000;
    std::vector<PlanePoint> pts;
    pts.reserve(n);
    for (int i = 0; i < n; ++i) pts.push_back({rng.next_double(), rng.next_double()});
    StepProfile prof = empirical_layer_profile(patience_peel(pts), n);
    double sup = 0.0;
    for (int i = 0; i <= 200; ++i) {
        double tau = 2.0 * i / 200.0;
        sup = std::max(sup, std::fabs(prof.eval(tau) - uniform_square_pile_profile(tau)));
    }
    CHECK(sup <= 0.05);
}

TEST_CASE("fine_asymptotics_band") {
    SeekModel c1(1.0);
    double a0 = fine_asymptotics_a0(c1);
    double b0 = fine_asymptotics_b0(c1);
    CHECK(a0 == doctest::Approx(0.25 * std::pow(2.0, -1.0 / 6.0)).epsilon(1e-12));
    CHECK(b0 == doctest::Approx(std::pow(3.0, 2.0 / 3.0) * a0).epsilon(1e-12));
    auto band = fine_asymptotics_band(std::exp(8.0), c1);
    CHECK(band.first == doctest::Approx(4.0 * a0).epsilon(1e-9));
    CHECK(band.second == doctest::Approx(4.0 * b0).epsilon(1e-9));
    double prev = 0.0;
    for (double n : {10.0, 100.0, 1e4, 1e6}) {
        auto b = fine_asymptotics_band(n, c1);
        CHECK(b.first > prev);
        prev = b.first;
    }
    CHECK_THROWS_AS(fine_asymptotics_band(1.0, c1), std::invalid_argument);
}

TEST_CASE("functional coherence across the 45-degree rotation") {
    // at c=1 a slope-bounded curve on the strip and its rotated image in the
    // plane must be assigned the same value by the two functionals
    SeekModel c1(1.0);
    const std::size_t m = 6;
    Rng table_rng(33);
    std::vector<double> table(m * m);
    for (double& v : table) v = 0.2 + table_rng.next_double();
    Density d = Density::general_grid(m, table);
    auto q = [&](double x, double y) {
        StripPoint s = unrotate45({x, y});
        return d.eval(wrap(s.t), s.r);
    };

    Rng rng(123321);
    for (int curve = 0; curve < 100; ++curve) {
        std::vector<StripPoint> nodes;
        double r = 0.0, t = rng.next_double();
        nodes.push_back({t, r});
        while (r < 1.0) {
            double dr = std::min(0.02 + 0.05 * rng.next_double(), 1.0 - r);
            if (dr < 1e-6) break;
            double slope = 1.9 * (rng.next_double() - 0.5);  // |slope| < 1
            r += dr;
            t += slope * dr;
            nodes.push_back({t, r});
        }
        std::vector<PlanePoint> rotated;
        rotated.reserve(nodes.size());
        for (const auto& s : nodes) rotated.push_back(rotate45(s));
        double lhs = vertical_functional(nodes, d, c1);
        double rhs = dz_functional(rotated, q);
        CHECK(std::fabs(lhs - rhs) <= 1e-6);
    }
}
