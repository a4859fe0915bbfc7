#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "slereg/experiments.hpp"

using namespace slereg;

namespace {

ExperimentConfig derivative_cfg() {
    ExperimentConfig cfg;
    cfg.kind = "derivative_moment";
    cfg.kappa = 2.0;
    cfg.n_traces = 800;
    cfg.dt = 1.0 / 4096.0;
    cfg.seed = 20240601;
    cfg.r = 1.0;
    cfg.grid = {{0.25, 1.0 / 8}, {0.25, 1.0 / 16}, {0.25, 1.0 / 32},
                {1.0, 1.0 / 8},  {1.0, 1.0 / 16},  {1.0, 1.0 / 32}};
    return cfg;
}

}  // namespace

TEST_CASE("derivative scan is reproducible byte for byte") {
    ExperimentConfig cfg = derivative_cfg();
    cfg.n_traces = 100;
    const MomentTable a = derivative_moment_scan(cfg);
    const MomentTable b = derivative_moment_scan(cfg);
    REQUIRE(a.to_csv() == b.to_csv());
}

TEST_CASE("derivative moments sit in a uniform band around the envelope") {
    const MomentTable table = derivative_moment_scan(derivative_cfg());
    REQUIRE(table.rows.size() == 6);
    REQUIRE(table.fitted_c > 0.0);
    std::size_t flagged = 0;
    for (const MomentRow& row : table.rows) {
        CAPTURE(row.a, row.b);
        REQUIRE_FALSE(row.unreliable);
        flagged += row.flagged;
        CHECK(row.mean > 0.0);
        // one fitted constant covers every row within a modest band
        CHECK(row.mean <= 3.0 * table.fitted_c * row.envelope);
        CHECK(row.mean >= table.fitted_c * row.envelope / 3.0);
    }
    CHECK(flagged * 100 < table.rows.size() * 800);

    // the log-log slope in y at fixed s cannot fall far below zeta
    const double zeta = zeta_of_r(1.0, Kappa{2.0});
    REQUIRE_FALSE(table.fits.empty());
    for (const ExponentFit& fit : table.fits) {
        CAPTURE(fit.fixed_abscissa, fit.slope);
        CHECK(fit.slope >= zeta - 0.3);
    }
}

TEST_CASE("rows at equal s/y^2 collapse onto one value") {
    ExperimentConfig cfg = derivative_cfg();
    cfg.grid = {{0.25, 0.25}, {1.0, 0.5}};  // both have s/y^2 = 4
    cfg.n_traces = 2000;
    const MomentTable table = derivative_moment_scan(cfg);
    const MomentRow& r0 = table.rows[0];
    const MomentRow& r1 = table.rows[1];
    const double gap = std::fabs(r0.mean - r1.mean);
    CHECK(gap < 4.0 * std::sqrt(r0.std_error * r0.std_error +
                                r1.std_error * r1.std_error));
}

TEST_CASE("derivative scan rejects bad configs") {
    ExperimentConfig cfg = derivative_cfg();
    cfg.grid = {{1.5, 0.5}};
    CHECK_THROWS_AS(derivative_moment_scan(cfg), std::invalid_argument);
    cfg = derivative_cfg();
    cfg.r = 3.0;  // outside I at kappa = 2
    CHECK_THROWS_AS(derivative_moment_scan(cfg), std::invalid_argument);
    cfg = derivative_cfg();
    cfg.grid.clear();
    CHECK_THROWS_AS(derivative_moment_scan(cfg), std::invalid_argument);
}

TEST_CASE("increment moments: exponent fit and envelope domination") {
    ExperimentConfig cfg;
    cfg.kind = "increment_moment";
    cfg.kappa = 2.0;
    cfg.n_traces = 10000;
    cfg.dt = 1.0 / 4096.0;
    cfg.seed = 7100;
    cfg.r = 1.0;  // q = 1.25, zeta = 0.75, (q+zeta)/2 = 1
    cfg.grid = {{0.5, 0.5}};
    for (int j = 4; j <= 8; ++j) cfg.grid.push_back({0.5, 0.5 + std::pow(2.0, -j)});

    const MomentTable table = increment_moment_scan(cfg);

    // the coincident pair is exactly zero
    CHECK(table.rows[0].mean == 0.0);
    CHECK(table.rows[0].envelope == 0.0);

    REQUIRE(table.fits.size() == 1);
    const double target = (q_of_r(1.0, Kappa{2.0}) + zeta_of_r(1.0, Kappa{2.0})) / 2.0;
    CHECK(table.fits[0].slope == Catch::Approx(target).margin(0.1));

    // a single constant dominates every nonzero row
    for (const MomentRow& row : table.rows) {
        if (row.mean == 0.0) continue;
        CHECK(row.mean <= 3.0 * table.fitted_c * row.envelope);
    }

    // both admissible r_tilde choices produce envelopes that dominate the
    // same empirical data with a bounded fitted constant
    const double rc = r_critical(Kappa{2.0});
    for (double rt : {0.5 * (1.0 + rc), 1.0 + 0.9 * (rc - 1.0)}) {
        double worst = 0.0;
        for (const MomentRow& row : table.rows) {
            if (row.mean == 0.0) continue;
            const double env = envelope_increment_moment(row.a, row.b, cfg.r, rt, Kappa{2.0});
            worst = std::max(worst, row.mean / env);
        }
        CAPTURE(rt);
        CHECK(worst < 10.0);
    }
}

TEST_CASE("increment scan precondition checks") {
    ExperimentConfig cfg;
    cfg.kind = "increment_moment";
    cfg.kappa = 2.0;
    cfg.n_traces = 10;
    cfg.dt = 1.0 / 256.0;
    cfg.r = 1.0;
    cfg.grid = {{0.75, 0.5}};  // s > t
    CHECK_THROWS_AS(increment_moment_scan(cfg), std::invalid_argument);
    cfg.grid = {{0.5, 0.75}};
    cfg.r_tilde = 5.0;  // beyond r_c
    CHECK_THROWS_AS(increment_moment_scan(cfg), std::invalid_argument);
}

TEST_CASE("Besov finiteness run stabilizes for admissible parameters") {
    ExperimentConfig cfg;
    cfg.kind = "besov_finiteness";
    cfg.kappa = 2.0;
    cfg.n_traces = 60;
    cfg.dt = 1.0 / 1024.0;
    cfg.seed = 31;
    cfg.r = 1.2;
    cfg.grid_n = 256;
    const double q = q_of_r(1.2, Kappa{2.0});
    const BesovParams params{0.4, q};
    const BesovFinitenessReport rep = besov_finiteness(cfg, params, 0.0);
    REQUIRE(rep.values.size() == 60);
    for (double v : rep.values) CHECK(v > 0.0);
    CHECK(rep.stability_rel_change < 0.2);
    CHECK_FALSE(rep.out_of_window);
}

TEST_CASE("Besov finiteness rejects inadmissible parameters by name") {
    ExperimentConfig cfg;
    cfg.kind = "besov_finiteness";
    cfg.kappa = 2.0;
    cfg.n_traces = 4;
    cfg.dt = 1.0 / 256.0;
    cfg.r = 1.2;
    cfg.grid_n = 64;
    const double q = q_of_r(1.2, Kappa{2.0});
    CHECK_THROWS_WITH(besov_finiteness(cfg, BesovParams{0.95, q}, 0.0),
                      Catch::Matchers::ContainsSubstring("window"));
    cfg.r = 3.0;  // outside I
    CHECK_THROWS_WITH(besov_finiteness(cfg, BesovParams{0.4, q}, 0.0),
                      Catch::Matchers::ContainsSubstring("admissible"));
}

TEST_CASE("Besov finiteness degenerates at epsilon = 1") {
    ExperimentConfig cfg;
    cfg.kind = "besov_finiteness";
    cfg.kappa = 2.0;
    cfg.n_traces = 4;
    cfg.dt = 1.0 / 256.0;
    cfg.r = 1.2;
    cfg.grid_n = 64;
    const BesovFinitenessReport rep =
        besov_finiteness(cfg, BesovParams{0.4, q_of_r(1.2, Kappa{2.0})}, 1.0);
    for (double v : rep.values) CHECK(v == 0.0);
}

TEST_CASE("out-of-window delta grows under mesh refinement") {
    ExperimentConfig cfg;
    cfg.kind = "besov_finiteness";
    cfg.kappa = 2.0;
    cfg.n_traces = 40;
    cfg.dt = 1.0 / 1024.0;
    cfg.seed = 77;
    cfg.r = 1.2;
    const BesovParams bad{0.95, q_of_r(1.2, Kappa{2.0})};
    const BesovFinitenessReport rep =
        besov_finiteness(cfg, bad, 0.0, /*allow_out_of_window=*/true, {64, 128, 256});
    REQUIRE(rep.out_of_window);
    REQUIRE(rep.refinement.size() == 3);
    CHECK(rep.refinement[1].second > rep.refinement[0].second);
    CHECK(rep.refinement[2].second > rep.refinement[1].second);
    CHECK(rep.refinement[2].second > 1.1 * rep.refinement[0].second);
}

TEST_CASE("critical variation estimate at desk scale") {
    const CriticalEstimate est =
        critical_pvar_estimate(Kappa{2.0}, 60, 1.0 / 4096.0, 9, 555, 5);
    CAPTURE(est.estimate, est.ci_lo, est.ci_hi);
    CHECK(est.estimate == Catch::Approx(1.25).margin(0.35));
    CHECK(est.ci_lo <= est.estimate);
    CHECK(est.ci_hi >= est.estimate);

    // interval stability under doubling on the fixed seed schedule
    const CriticalEstimate wider =
        critical_pvar_estimate(Kappa{2.0}, 120, 1.0 / 4096.0, 9, 555, 5);
    CHECK(std::fabs(wider.estimate - est.estimate) < 0.2);
    CHECK((wider.ci_hi - wider.ci_lo) < 1.3 * (est.ci_hi - est.ci_lo));

    CHECK_THROWS_AS(critical_pvar_estimate(Kappa{2.0}, 10, 1.0 / 4096.0, 9, 1, 5),
                    std::invalid_argument);
    CHECK_THROWS_AS(critical_pvar_estimate(Kappa{2.0}, 60, 1.0 / 256.0, 12, 1, 5),
                    std::invalid_argument);
}

TEST_CASE("sup-increment slope recovers an exact scaling modulus") {
    // t^alpha has sup increment exactly h^alpha at every dyadic gap
    for (double alpha : {0.3, 0.5, 0.8}) {
        const std::size_t n = 1 << 12;
        std::vector<double> times(n + 1);
        std::vector<std::complex<double>> pts(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            times[i] = static_cast<double>(i) / static_cast<double>(n);
            pts[i] = {std::pow(times[i], alpha), 0.0};
        }
        const SampledPath path(times, pts);
        CHECK(sup_increment_slope(path, 0.0, 3, 9) == Catch::Approx(alpha).margin(1e-9));
    }
}

TEST_CASE("critical Hoelder estimate at desk scale") {
    const CriticalEstimate est =
        critical_hoelder_estimate(Kappa{1.0}, 50, 0.1, 909, 1.0 / 8192.0, 11, 4, 8);
    CAPTURE(est.estimate, est.ci_lo, est.ci_hi);
    CHECK(est.estimate == Catch::Approx(0.5).margin(0.12));
    CHECK(est.ci_lo < est.ci_hi);
    // deterministic given the seed
    const CriticalEstimate again =
        critical_hoelder_estimate(Kappa{1.0}, 50, 0.1, 909, 1.0 / 8192.0, 11, 4, 8);
    CHECK(again.estimate == est.estimate);
    CHECK(again.ci_lo == est.ci_lo);
}
