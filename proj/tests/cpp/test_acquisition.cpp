#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "qspi/experiments.hpp"

using namespace qspi;

namespace {

AcquisitionConfig quiet() {
    AcquisitionConfig c;
    c.noise = false;
    return c;
}

double sample_variance(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m += x;
    m /= v.size();
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s / (v.size() - 1);
}

CompressiveScenario small_scenario(std::size_t rows = 40) {
    CompressiveSettings s;
    s.side = 16;
    s.pitch_um = 160;
    s.block = 16;
    s.window = 16;
    s.rows = rows;
    return letter_e_scenario(Calibration{}, s);
}

}  // namespace

TEST_CASE("single pixel measurement") {
    const BeamImage beam = Calibration{}.seed();
    SUBCASE("noise off returns the masked flux") {
        CHECK(single_pixel_measure(beam, scenes::uniform(64, 64, 40.0), quiet()) ==
              doctest::Approx(beam.total()).epsilon(1e-12));
        const Mask m = scenes::left_half(64, 64, 40.0);
        CHECK(single_pixel_measure(beam, m, quiet()) == doctest::Approx(inner(m, beam)).epsilon(1e-12));
    }
    SUBCASE("dark frame with no dark noise reads zero") {
        AcquisitionConfig c;
        CHECK(single_pixel_measure(beam, BeamImage(64, 64, 40.0), c) == 0.0);
    }
    SUBCASE("shot noise variance follows the detected flux") {
        AcquisitionConfig c;
        c.photons_per_exposure = 1e4;
        const Mask m = scenes::left_half(64, 64, 40.0);
        std::vector<double> v;
        for (std::uint64_t k = 0; k < 10000; ++k) v.push_back(single_pixel_measure(beam, m, c, k));
        const double expected = shot_noise_scale(beam, c) * inner(m, beam);
        CHECK(std::abs(sample_variance(v) / expected - 1.0) < 0.05);
    }
    SUBCASE("shape mismatch") {
        CHECK_THROWS_AS(single_pixel_measure(beam, scenes::uniform(8, 8), quiet()), Error);
    }
}

TEST_CASE("compressive acquisition") {
    const CompressiveScenario sc = small_scenario();
    SUBCASE("noise off gives A x") {
        const MeasurementVector m = compressive_acquire(sc.pair, sc.matrix, sc.model, quiet());
        const auto ax = sc.matrix.apply(sc.truth);
        REQUIRE(m.size() == 40);
        for (std::size_t i = 0; i < 40; ++i) CHECK(m.y[i] == doctest::Approx(ax[i]).epsilon(1e-12));
        for (double b : m.noise_budget) CHECK(b == 0.0);
        CHECK(m.matrix_header == sc.matrix.header());
    }
    SUBCASE("linear in the scene") {
        const TwinBeamPair p1 = pair_from_probe(sc.pair.probe, sc.pair.source, 3);
        BeamImage x2 = scenes::uniform(16, 16, 160.0, 1.0);
        for (std::size_t i = 0; i < x2.size(); ++i) x2.pixels()[i] = 1.0 + (i % 7);
        BeamImage mix(16, 16, 160.0);
        for (std::size_t i = 0; i < mix.size(); ++i) mix.pixels()[i] = 2.0 * p1.probe.pixels()[i] + 0.5 * x2.pixels()[i];
        const auto pair2 = pair_from_probe(x2, sc.pair.source, 3);
        const auto pairm = pair_from_probe(mix, sc.pair.source, 3);
        const auto y1 = compressive_acquire(p1, sc.matrix, NoiseModel::from_pair(p1, NoiseVariant::standard, 1, 1), quiet()).y;
        const auto y2 = compressive_acquire(pair2, sc.matrix, NoiseModel::from_pair(pair2, NoiseVariant::standard, 1, 1), quiet()).y;
        const auto ym = compressive_acquire(pairm, sc.matrix, NoiseModel::from_pair(pairm, NoiseVariant::standard, 1, 1), quiet()).y;
        for (std::size_t i = 0; i < ym.size(); ++i) CHECK(ym[i] == doctest::Approx(2.0 * y1[i] + 0.5 * y2[i]).epsilon(1e-9).scale(1.0));
    }
    SUBCASE("deterministic per seed") {
        AcquisitionConfig c;
        c.rng_seed = 42;
        const auto a = compressive_acquire(sc.pair, sc.matrix, sc.model, c);
        const auto b = compressive_acquire(sc.pair, sc.matrix, sc.model, c);
        CHECK(a.y == b.y);
        c.rng_seed = 43;
        CHECK(compressive_acquire(sc.pair, sc.matrix, sc.model, c).y != a.y);
    }
    SUBCASE("noise budget matches the empirical variance of one row") {
        AcquisitionConfig c;
        c.photons_per_exposure = 1e4;
        std::vector<double> v;
        double budget = 0;
        const auto clean = compressive_acquire(sc.pair, sc.matrix, sc.model, quiet()).y[3];
        for (std::uint64_t s = 1; s <= 10000; ++s) {
            c.rng_seed = s;
            const auto m = compressive_acquire(sc.pair, sc.matrix, sc.model, c);
            v.push_back(m.y[3] - clean);
            budget = m.noise_budget[3];
        }
        CHECK(budget > 0);
        CHECK(std::abs(sample_variance(v) / budget - 1.0) < 0.05);
    }
    SUBCASE("quantum mode never has more noise than classical") {
        AcquisitionConfig q, k;
        k.mode = AcquisitionMode::classical;
        const auto mq = compressive_acquire(sc.pair, sc.matrix, sc.model, q);
        const auto mk = compressive_acquire(sc.pair, sc.matrix, sc.model, k);
        for (std::size_t i = 0; i < mq.size(); ++i) CHECK(mq.noise_budget[i] < mk.noise_budget[i]);
    }
    SUBCASE("exposures per row average the noise") {
        AcquisitionConfig c;
        const auto one = compressive_acquire(sc.pair, sc.matrix, sc.model, c);
        c.exposures_per_row = 4;
        const auto four = compressive_acquire(sc.pair, sc.matrix, sc.model, c);
        CHECK(four.noise_budget[0] == doctest::Approx(one.noise_budget[0] / 4));
    }
    SUBCASE("pixel count mismatch") {
        const SensingMatrix big = make_sensing_matrix({1024, 32, 1, 32, true}, 10);
        CHECK_THROWS_AS(compressive_acquire(sc.pair, big, sc.model, quiet()), Error);
    }
    SUBCASE("config validation") {
        AcquisitionConfig c;
        c.photons_per_exposure = 0;
        CHECK_THROWS_AS(compressive_acquire(sc.pair, sc.matrix, sc.model, c), Error);
        c = AcquisitionConfig{};
        c.exposures_per_row = 0;
        CHECK_THROWS_AS(compressive_acquire(sc.pair, sc.matrix, sc.model, c), Error);
    }
}

TEST_CASE("whole-cell differential rows see the configured noise figure") {
    // Rows that pass whole coherence cells keep each cell balanced, so the
    // exposure NRF is the full-beam figure.
    const CompressiveScenario sc = small_scenario();
    const auto& g = sc.pair.grid;
    std::vector<int> row(256);
    for (std::size_t p = 0; p < 256; ++p) {
        const auto [lx, ly] = g.lattice(g.cell_of(p));
        row[p] = ((lx + ly) % 2 == 0) ? 1 : -1;
    }
    const SensingMatrix a(1, 256, row);
    AcquisitionConfig q, k;
    k.mode = AcquisitionMode::classical;
    const double ratio = compressive_acquire(sc.pair, a, sc.model, q).noise_budget[0] /
                         compressive_acquire(sc.pair, a, sc.model, k).noise_budget[0];
    CHECK(ratio == doctest::Approx(nrf(sc.model).nrf_linear).epsilon(1e-12));
    CHECK(nrf(sc.model).value_db == doctest::Approx(-3.1).epsilon(1e-9));
}

TEST_CASE("line raster") {
    const LineRasterSetup s = default_line_raster(Calibration{});
    SUBCASE("geometry") {
        CHECK(s.shape.width_px % 2 == 0);
        CHECK(std::abs(s.shape.width_px - s.pair.beam_diameter_px / 4) <= 1.0);
        CHECK(s.positions.size() == 7);
    }
    SUBCASE("centered line squeezes, every other offset shows excess noise") {
        const RasterResult r = raster_scan(s.pair, s.model, s.shape, s.positions, ConjugateMaskPolicy::fixed_centered);
        REQUIRE(r.nrf_curve.size() == s.positions.size());
        const std::size_t mid = s.positions.size() / 2;
        CHECK(r.nrf_curve[mid].value_db >= -1.5);
        CHECK(r.nrf_curve[mid].value_db <= -0.5);
        for (std::size_t i = 0; i < r.nrf_curve.size(); ++i)
            if (i != mid) CHECK(r.nrf_curve[i].value_db > 0.0);
        for (std::size_t i = 0; i < r.nrf_curve.size(); ++i) CHECK(r.nrf_curve[i].value_db >= r.nrf_curve[mid].value_db);
    }
    SUBCASE("mirrored policy has the same center value") {
        const RasterResult a = raster_scan(s.pair, s.model, s.shape, s.positions, ConjugateMaskPolicy::fixed_centered);
        const RasterResult b = raster_scan(s.pair, s.model, s.shape, s.positions, ConjugateMaskPolicy::mirrored);
        CHECK(a.nrf_curve[3].value_db == doctest::Approx(b.nrf_curve[3].value_db));
    }
    SUBCASE("line outside the beam") {
        CHECK_THROWS_WITH_AS(raster_scan(s.pair, s.model, s.shape, {3.0}, ConjugateMaskPolicy::fixed_centered),
                             "no light on detector", Error);
    }
    SUBCASE("line past the frame edge") {
        CHECK_THROWS_AS(raster_scan(s.pair, s.model, s.shape, {200.0}, ConjugateMaskPolicy::fixed_centered), Error);
    }
    SUBCASE("no positions") {
        CHECK_THROWS_AS(raster_scan(s.pair, s.model, s.shape, {}, ConjugateMaskPolicy::fixed_centered), Error);
    }
}

TEST_CASE("pixel raster") {
    const Calibration cal;
    const TwinBeamPair pair = cal.pair();
    const NoiseModel model = NoiseModel::from_pair(pair, cal.variant, 1, 1);
    RasterShape shape;
    shape.kind = RasterShape::Kind::pixel;
    shape.pixel_size = 8;
    std::vector<double> pos;
    for (int i = 0; i < 64; ++i) pos.push_back(i);
    const AcquisitionConfig c = quiet();
    const RasterResult r = raster_scan(pair, model, shape, pos, ConjugateMaskPolicy::fixed_centered, &c);
    CHECK(r.nrf_curve.size() == 64);
    // The truncated seed leaves the corner blocks dark; the centre block squeezes.
    CHECK(std::isnan(r.nrf_curve[0].value_db));
    CHECK(r.nrf_curve[27].value_db < 0);
    const auto sums = oracle::block_sums(pair.probe, 8);
    REQUIRE(r.image.size() == sums.size());
    for (std::size_t i = 0; i < sums.size(); ++i) CHECK(r.image.pixels()[i] == doctest::Approx(sums[i]).epsilon(1e-12));
    CHECK_THROWS_AS(raster_scan(pair, model, shape, {64.0}, ConjugateMaskPolicy::fixed_centered, &c), Error);
}

TEST_CASE("rastered image") {
    const BeamImage beam = Calibration{}.seed();
    SUBCASE("unit pixels reproduce the source") {
        const BeamImage img = rastered_image(beam, 1, quiet());
        for (std::size_t i = 0; i < img.size(); ++i) CHECK(img.pixels()[i] == beam.pixels()[i]);
    }
    SUBCASE("uniform source") {
        const BeamImage img = rastered_image(scenes::uniform(16, 16, 1.0, 0.25), 4, quiet());
        CHECK(img.width() == 4);
        for (double v : img.pixels()) CHECK(v == doctest::Approx(16 * 0.25));
    }
    SUBCASE("Gaussian equals block sums and conserves flux") {
        for (std::size_t k : {2u, 4u, 8u, 5u}) {
            const BeamImage img = rastered_image(beam, k, quiet());
            const auto sums = oracle::block_sums(beam, k);
            for (std::size_t i = 0; i < sums.size(); ++i) CHECK(img.pixels()[i] == doctest::Approx(sums[i]).epsilon(1e-12));
            CHECK(img.total() == doctest::Approx(beam.total()).epsilon(1e-12));
        }
    }
    SUBCASE("too-large pixels") {
        CHECK_THROWS_AS(rastered_image(beam, 65, quiet()), Error);
        CHECK_THROWS_AS(rastered_image(beam, 0, quiet()), Error);
    }
}

TEST_CASE("measurement text format round-trips") {
    const CompressiveScenario sc = small_scenario(12);
    const MeasurementVector m = compressive_acquire(sc.pair, sc.matrix, sc.model, AcquisitionConfig{});
    std::ostringstream out;
    write_measurements(out, m);
    CHECK(out.str().rfind("MEAS 12 1 quantum\n", 0) == 0);
    std::istringstream in(out.str());
    const MeasurementVector back = read_measurements(in);
    CHECK(back.y == m.y);
    CHECK(back.noise_budget == m.noise_budget);
    CHECK(back.matrix_header == m.matrix_header);
    std::ostringstream again;
    write_measurements(again, back);
    CHECK(again.str() == out.str());

    std::istringstream truncated("MEAS 3 1 quantum\n0 1 1\n");
    CHECK_THROWS_AS(read_measurements(truncated), Error);
    std::istringstream bad("MEAS 1 1 quantum\n0 abc 1\n");
    CHECK_THROWS_AS(read_measurements(bad), Error);
}

TEST_CASE("experiment runners") {
    const Calibration cal;
    SUBCASE("source ceiling and mirrors baseline") {
        CHECK(seed_stage_figure(cal, scenes::uniform(64, 64, cal.pitch_um)).model.value_db == doctest::Approx(-4.5).epsilon(1e-9));
        const TwinBeamPair pair = cal.pair();
        const MaskFigure f = detect_stage_figure(cal, pair, scenes::uniform(64, 64, cal.pitch_um));
        CHECK(f.model.value_db == doctest::Approx(compose_loss(NoiseFigure::from_db(-4.0), 0.6).value_db).epsilon(1e-9));
    }
    SUBCASE("image-dependent squeezing ordering") {
        const double flat = seed_stage_figure(cal, scenes::uniform(64, 64, cal.pitch_um)).model.value_db;
        const double face = seed_stage_figure(cal, scenes::happy_face(64, 64, 44, cal.pitch_um)).model.value_db;
        const double checker = seed_stage_figure(cal, scenes::checkerboard(64, 64, 4, cal.pitch_um)).model.value_db;
        CHECK(-flat > -face);
        CHECK(-face > -checker);
    }
    SUBCASE("empty mask") {
        CHECK_THROWS_WITH_AS(seed_stage_figure(cal, BeamImage(64, 64, cal.pitch_um)), "no light on detector", Error);
    }
    SUBCASE("cross sweep") {
        const auto rows = cross_angle_sweep(cal, {0, 45, 90}, 8);
        REQUIRE(rows.size() == 3);
        CHECK(rows[0].model.value_db == doctest::Approx(rows[2].model.value_db).epsilon(1e-9));
        for (const auto& r : rows) CHECK(r.model.value_db < 0);
    }
}
