#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "qspi/experiments.hpp"
#include "qspi/spectrum.hpp"

using namespace qspi;

namespace {

double symmetric(double eta, NoiseVariant v, double gain = 4.0) {
    return nrf(NoiseModel::single_cell(gain, v, eta, eta)).nrf_linear;
}

// n equal-flux cells; equal flux keeps the detected power fixed under any
// permutation of the conjugate transmissions.
NoiseModel equal_cells(std::size_t n, const std::vector<double>& tp, const std::vector<double>& tc) {
    NoiseModel m;
    m.probe_flux.assign(n, 4.0);
    m.conjugate_flux.assign(n, 3.0);
    m.t_probe = tp;
    m.t_conjugate = tc;
    return m;
}

}  // namespace

TEST_CASE("variant parameters") {
    CHECK(ideal_nrf(4.0, NoiseVariant::standard) == doctest::Approx(1.0 / 7.0));
    CHECK(ideal_nrf(4.0, NoiseVariant::paper_corrected) == doctest::Approx(0.25));
    CHECK(fano_factor(4.0) == 7.0);
    CHECK(parse_variant("standard") == NoiseVariant::standard);
    CHECK(parse_variant("paper-corrected") == NoiseVariant::paper_corrected);
    CHECK(parse_variant("paper_corrected") == NoiseVariant::paper_corrected);
    CHECK_THROWS_AS(parse_variant("other"), Error);
}

TEST_CASE("noise figure conversions") {
    const NoiseFigure a = NoiseFigure::from_linear(0.5);
    CHECK(a.value_db == doctest::Approx(10 * std::log10(0.5)));
    const NoiseFigure b = NoiseFigure::from_db(-3.1);
    CHECK(b.nrf_linear == std::pow(10.0, -0.31));
    CHECK(b.squeezed());
    CHECK_FALSE(NoiseFigure::from_db(0.0).squeezed());
}

TEST_CASE("nrf examples") {
    SUBCASE("near-total loss approaches the shot-noise limit") {
        const double eta = 0.001;
        const double ideal = ideal_nrf(4.0, NoiseVariant::standard);
        CHECK(std::abs(symmetric(eta, NoiseVariant::standard) - (1 - eta + eta * ideal)) < 1e-3);
        CHECK(std::abs(symmetric(eta, NoiseVariant::standard) - 1.0) < 1e-3);
    }
    SUBCASE("symmetric 0.6 with the corrected formula") {
        const NoiseFigure f = nrf(NoiseModel::single_cell(4.0, NoiseVariant::paper_corrected, 0.6, 0.6));
        CHECK(f.nrf_linear == doctest::Approx(0.55).epsilon(1e-12));
        CHECK(f.value_db == doctest::Approx(-2.5963).epsilon(1e-4));
    }
    SUBCASE("probe alone shows the full Fano factor") {
        const NoiseFigure f = nrf(NoiseModel::single_cell(4.0, NoiseVariant::standard, 1.0, 0.0));
        CHECK(f.nrf_linear == doctest::Approx(7.0).epsilon(1e-12));
        CHECK(f.value_db == doctest::Approx(8.4510).epsilon(1e-4));
    }
    SUBCASE("no detected light is an error") {
        CHECK_THROWS_WITH_AS(nrf(NoiseModel::single_cell(4.0, NoiseVariant::standard, 0.0, 0.0)),
                             "no light on detector", Error);
    }
    SUBCASE("transmissions outside [0, 1] are rejected") {
        CHECK_THROWS_AS(nrf(NoiseModel::single_cell(4.0, NoiseVariant::standard, 1.2, 1.0)), Error);
    }
}

TEST_CASE("nrf matches the term-by-term variance oracle") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto variant : {NoiseVariant::standard, NoiseVariant::paper_corrected}) {
        for (int trial = 0; trial < 20; ++trial) {
            NoiseModel m;
            m.variant = variant;
            m.gain = 1.5 + 4 * u(gen);
            std::vector<oracle::Cell> cells;
            for (int c = 0; c < 6; ++c) {
                const double n = 0.1 + u(gen);
                cells.push_back({m.gain * n, (m.gain - 1) * n, u(gen), u(gen)});
                m.probe_flux.push_back(cells.back().np);
                m.conjugate_flux.push_back(cells.back().nc);
                m.t_probe.push_back(cells.back().tp);
                m.t_conjugate.push_back(cells.back().tc);
            }
            CHECK(nrf(m).nrf_linear == doctest::Approx(oracle::nrf(cells, m.gain, m.ideal())).epsilon(1e-12));
        }
    }
}

TEST_CASE("single-mode prediction") {
    CHECK(predicted_squeezing_single_mode(1.0, 4.0, NoiseVariant::paper_corrected) ==
          doctest::Approx(-6.0206).epsilon(1e-4));
    CHECK(predicted_squeezing_single_mode(1.0, 4.0, NoiseVariant::standard) == doctest::Approx(-8.4510).epsilon(1e-4));
    CHECK(predicted_squeezing_single_mode(0.0, 4.0, NoiseVariant::standard) == 0.0);
    CHECK(std::abs(predicted_squeezing_single_mode(1e-9, 4.0, NoiseVariant::standard)) < 1e-7);
    CHECK_THROWS_AS(predicted_squeezing_single_mode(1.5, 4.0, NoiseVariant::standard), Error);
    // Agrees with the full model for a single uniformly attenuated cell.
    for (double eta : {0.1, 0.5, 0.9})
        CHECK(predicted_squeezing_single_mode(eta, 4.0, NoiseVariant::standard) ==
              doctest::Approx(nrf(NoiseModel::single_cell(4.0, NoiseVariant::standard, eta, eta)).value_db));
}

TEST_CASE("loss composition") {
    SUBCASE("mirrors baseline through the DMD efficiency") {
        const NoiseFigure base = NoiseFigure::from_db(-4.0);
        CHECK(base.nrf_linear == doctest::Approx(0.398).epsilon(1e-3));
        const NoiseFigure out = compose_loss(base, 0.6);
        CHECK(out.nrf_linear == doctest::Approx(0.639).epsilon(1e-3));
        CHECK(out.value_db == doctest::Approx(-1.9459).epsilon(1e-4));
    }
    SUBCASE("unit transmission is the identity") {
        for (double db : {-4.5, -1.0, 0.0, 3.0})
            CHECK(compose_loss(NoiseFigure::from_db(db), 1.0).nrf_linear ==
                  doctest::Approx(NoiseFigure::from_db(db).nrf_linear).epsilon(1e-15));
    }
    SUBCASE("loss cannot create correlations") {
        for (double eta : {0.1, 0.5, 0.9}) CHECK(compose_loss(NoiseFigure::from_linear(1.0), eta).nrf_linear == 1.0);
    }
    SUBCASE("composition is the model's own loss law") {
        for (auto v : {NoiseVariant::standard, NoiseVariant::paper_corrected})
            for (double e1 : {0.2, 0.55, 1.0})
                for (double e2 : {0.1, 0.6, 1.0})
                    CHECK(compose_loss(NoiseFigure::from_linear(symmetric(e1, v)), e2).nrf_linear ==
                          doctest::Approx(symmetric(e1 * e2, v)).epsilon(1e-12));
    }
    SUBCASE("transmission out of range") { CHECK_THROWS_AS(compose_loss(NoiseFigure::from_db(-3), 0.0), Error); }
}

TEST_CASE("transmission for a target squeezing inverts the prediction") {
    for (auto v : {NoiseVariant::standard, NoiseVariant::paper_corrected})
        for (double db : {1.0, 3.1, 4.5}) {
            const double eta = transmission_for_squeezing(db, 4.0, v);
            CHECK(predicted_squeezing_single_mode(eta, 4.0, v) == doctest::Approx(-db).epsilon(1e-12));
        }
    CHECK_THROWS_AS(transmission_for_squeezing(12.0, 4.0, NoiseVariant::paper_corrected), Error);
}

TEST_CASE("symmetric nrf is bounded and decreasing") {
    for (auto v : {NoiseVariant::standard, NoiseVariant::paper_corrected})
        for (double g : {1.5, 4.0, 10.0}) {
            const double ideal = ideal_nrf(g, v);
            double prev = 1.0 + 1e-15;
            for (int k = 1; k <= 100; ++k) {
                const double value = symmetric(k / 100.0, v, g);
                CHECK(value >= ideal - 1e-12);
                CHECK(value <= 1.0 + 1e-12);
                CHECK(value < prev);
                prev = value;
            }
            CHECK(symmetric(1.0, v, g) == doctest::Approx(ideal).epsilon(1e-12));
        }
}

TEST_CASE("mismatched masks cost squeezing") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> t(5);
        for (double& v : t) v = u(gen);
        const double matched = nrf(equal_cells(5, t, t)).nrf_linear;
        std::vector<double> perm = t;
        std::shuffle(perm.begin(), perm.end(), gen);
        CHECK(matched <= nrf(equal_cells(5, t, perm)).nrf_linear + 1e-12);
    }
    // Disjoint cell support: the arms no longer share any mode.
    CHECK(nrf(equal_cells(4, {1, 1, 0, 0}, {0, 0, 1, 1})).nrf_linear > 1.0);
}

TEST_CASE("monte carlo oracle") {
    SUBCASE("lossless standard model") {
        const auto r = monte_carlo_nrf(NoiseModel::single_cell(4.0, NoiseVariant::standard, 1.0, 1.0), 100000, 1);
        CHECK(std::abs(r.estimate.nrf_linear - 1.0 / 7.0) < 3 * r.std_error);
    }
    SUBCASE("corrected model at 0.55") {
        const auto r =
            monte_carlo_nrf(NoiseModel::single_cell(4.0, NoiseVariant::paper_corrected, 0.55, 0.55), 100000, 2);
        CHECK(std::abs(r.estimate.nrf_linear - (1 - 0.55 + 0.55 / 4)) < 3 * r.std_error);
    }
    SUBCASE("deterministic per seed") {
        const NoiseModel m = NoiseModel::single_cell(4.0, NoiseVariant::standard, 0.7, 0.6);
        const auto a = monte_carlo_nrf(m, 5000, 99);
        const auto b = monte_carlo_nrf(m, 5000, 99);
        CHECK(a.estimate.nrf_linear == b.estimate.nrf_linear);
        CHECK(a.std_error == b.std_error);
    }
    SUBCASE("shot count validation") {
        const NoiseModel m = NoiseModel::single_cell(4.0, NoiseVariant::standard, 1, 1);
        CHECK_THROWS_AS(monte_carlo_nrf(m, 0, 1), Error);
        CHECK_THROWS_AS(monte_carlo_nrf(m, -5, 1), Error);
        CHECK_THROWS_AS(monte_carlo_nrf(m, 999, 1), Error);
    }
}

TEST_CASE("monte carlo agrees with the analytic model across seeds") {
    const NoiseModel m = NoiseModel::single_cell(4.0, NoiseVariant::standard, 0.8, 0.7);
    const double exact = nrf(m).nrf_linear;
    int pass = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto r = monte_carlo_nrf(m, 100000, seed);
        if (std::abs(r.estimate.nrf_linear - exact) < 3 * r.std_error) ++pass;
    }
    CHECK(pass >= 99);
}

TEST_CASE("spectrum synthesis") {
    SpectrumSettings s;
    SUBCASE("jitter off is flat in band") {
        const Spectrum sp = simulate_spectrum(NoiseFigure::from_db(-4.5), s);
        REQUIRE(sp.frequency_hz.size() == 401);
        CHECK(sp.frequency_hz.front() == 50e3);
        CHECK(sp.frequency_hz.back() == 5e6);
        for (double v : sp.level_db) CHECK(v == -4.5);
        CHECK(sp.mean_db() == -4.5);
    }
    SUBCASE("jittered mean stays on the noise figure") {
        s.jitter = true;
        const Spectrum sp = simulate_spectrum(NoiseFigure::from_db(-1.0), s);
        CHECK(std::abs(sp.mean_db() + 1.0) < 0.02);
        const Spectrum again = simulate_spectrum(NoiseFigure::from_db(-1.0), s);
        CHECK(sp.level_db == again.level_db);
    }
    SUBCASE("technical noise rises below the band") {
        s.start_hz = 5e3;
        s.band_low_hz = 50e3;
        const Spectrum sp = simulate_spectrum(NoiseFigure::from_db(-3.0), s);
        CHECK(sp.level_db.front() > -3.0);
        CHECK(sp.level_db.back() == -3.0);
    }
    SUBCASE("shot-noise reference") {
        for (double v : snl_reference(s).level_db) CHECK(v == 0.0);
    }
    SUBCASE("bad ranges") {
        s.stop_hz = s.start_hz;
        CHECK_THROWS_AS(simulate_spectrum(NoiseFigure::from_db(-1), s), Error);
        s = SpectrumSettings{};
        s.start_hz = -1;
        CHECK_THROWS_AS(simulate_spectrum(NoiseFigure::from_db(-1), s), Error);
    }
}
