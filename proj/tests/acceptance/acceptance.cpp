// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "qspi/experiments.hpp"
#include "qspi/reconstruct.hpp"
#include "qspi/spectrum.hpp"

using namespace qspi;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double sample_variance(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

Outcome loss_composition() {
    const NoiseFigure mirrors = NoiseFigure::from_db(-4.0);
    const double predicted = -compose_loss(mirrors, 0.6).value_db;
    const double measured = 1.67;
    // Also the full detection-stage runner, which must agree with the bare composition.
    const Calibration cal;
    const double runner = -detect_stage_figure(cal, cal.pair(), scenes::uniform(64, 64, cal.pitch_um)).model.value_db;
    const bool ok = std::abs(predicted - measured) <= 0.5 && std::abs(runner - predicted) < 1e-9;
    return {ok, fmt("predicted %.4f dB squeezing (runner %.4f) vs measured 1.67 dB, |diff| %.4f <= 0.5", predicted,
                    runner, std::abs(predicted - measured))};
}

Outcome line_raster() {
    const LineRasterSetup s = default_line_raster(Calibration{});
    const RasterResult r = raster_scan(s.pair, s.model, s.shape, s.positions, ConjugateMaskPolicy::fixed_centered);
    const std::size_t mid = r.nrf_curve.size() / 2;
    const double center = r.nrf_curve[mid].value_db;
    bool ok = center >= -1.5 && center <= -0.5;
    double min_off = 1e300;
    for (std::size_t i = 0; i < r.nrf_curve.size(); ++i)
        if (i != mid) min_off = std::min(min_off, r.nrf_curve[i].value_db);
    ok = ok && min_off > 0.0;
    return {ok, fmt("center %.4f dB in [-1.5, -0.5], min off-center %.4f dB > 0 (%zu positions, width %zu px)", center,
                    min_off, r.nrf_curve.size(), s.shape.width_px)};
}

Outcome compressive() {
    const Calibration cal;
    const int seeds = 20;
    double worst_tv = 1e300, sum_tv = 0, sum_ls = 0, worst_time = 0;
    int beats = 0, converged = 0;
    for (int seed = 1; seed <= seeds; ++seed) {
        CompressiveSettings s;
        s.seed = static_cast<std::uint64_t>(seed);
        const CompressiveScenario sc = letter_e_scenario(cal, s);
        AcquisitionConfig c;
        c.rng_seed = static_cast<std::uint64_t>(seed);
        const MeasurementVector m = compressive_acquire(sc.pair, sc.matrix, sc.model, c);
        const ReconstructionProblem p = make_problem(m, sc.matrix, 32, 32);
        const auto t0 = std::chrono::steady_clock::now();
        const ReconstructionResult tv = reconstruct_tv(p);
        worst_time = std::max(worst_time, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        const ReconstructionResult ls = reconstruct_ls(p);
        const double q_tv = psnr(tv.estimate, sc.truth), q_ls = psnr(ls.estimate, sc.truth);
        worst_tv = std::min(worst_tv, q_tv);
        sum_tv += q_tv;
        sum_ls += q_ls;
        if (q_tv > q_ls) ++beats;
        if (tv.converged) ++converged;
    }
    const bool ok = worst_tv >= 15.0 && beats == seeds && worst_time < 10.0;
    return {ok, fmt("%d seeds: min TV PSNR %.2f dB >= 15, mean TV %.2f vs LS %.2f dB, TV > LS on %d/%d, "
                    "%d/%d converged, slowest %.3f s",
                    seeds, worst_tv, sum_tv / seeds, sum_ls / seeds, beats, seeds, converged, seeds, worst_time)};
}

Outcome quantum_advantage() {
    CompressiveSettings s;
    const CompressiveScenario sc = letter_e_scenario(Calibration{}, s);
    // A row that keeps every coherence cell on one side of the differential
    // pair: each exposure sees the full-beam noise figure.
    const auto& g = sc.pair.grid;
    std::vector<int> row(sc.truth.size());
    for (std::size_t p = 0; p < row.size(); ++p) {
        const auto [lx, ly] = g.lattice(g.cell_of(p));
        row[p] = ((lx + ly) % 2 == 0) ? 1 : -1;
    }
    const SensingMatrix a(1, row.size(), row);
    const int repeats = 10000;
    std::vector<double> q(repeats), k(repeats);
    AcquisitionConfig cq, ck;
    ck.mode = AcquisitionMode::classical;
    for (int i = 0; i < repeats; ++i) {
        // Independent streams for the two modes.
        cq.rng_seed = static_cast<std::uint64_t>(i + 1);
        ck.rng_seed = static_cast<std::uint64_t>(i + 1 + 1000000);
        q[i] = compressive_acquire(sc.pair, a, sc.model, cq).y[0];
        k[i] = compressive_acquire(sc.pair, a, sc.model, ck).y[0];
    }
    const double ratio = sample_variance(q) / sample_variance(k);
    const double target = nrf(sc.model).nrf_linear;
    return {std::abs(ratio - target) <= 0.03,
            fmt("variance ratio %.4f vs configured NRF %.4f (%.2f dB), |diff| %.4f <= 0.03 over %d acquisitions", ratio,
                target, nrf(sc.model).value_db, std::abs(ratio - target), repeats)};
}

Outcome monte_carlo() {
    const Calibration cal;
    std::mt19937_64 gen(20240501);
    std::uniform_real_distribution<double> u(0, 1);
    // Small frame so 10^5 shots over all cells stays cheap.
    Calibration small = cal;
    small.frame_px = 32;
    small.pitch_um = 80;
    const TwinBeamPair pair = small.pair();
    int pass = 0;
    double worst = 0;
    const int configs = 20;
    for (int c = 0; c < configs; ++c) {
        auto random_mask = [&] {
            Mask m(32, 32, pair.probe.pitch());
            const double density = 0.3 + 0.7 * u(gen);
            const std::size_t blk = 1 + static_cast<std::size_t>(u(gen) * 6);
            for (std::size_t by = 0; by < 32; by += blk)
                for (std::size_t bx = 0; bx < 32; bx += blk) {
                    const double v = u(gen) < density ? 1.0 : 0.0;
                    for (std::size_t y = by; y < std::min<std::size_t>(by + blk, 32); ++y)
                        for (std::size_t x = bx; x < std::min<std::size_t>(bx + blk, 32); ++x) m(x, y) = v;
                }
            return m;
        };
        const Mask mp = random_mask(), mc = u(gen) < 0.5 ? mp : random_mask();
        const double eta_p = 0.2 + 0.8 * u(gen), eta_c = 0.2 + 0.8 * u(gen);
        const NoiseModel base = NoiseModel::from_pair(pair, cal.variant, eta_p, eta_c);
        const auto tp = mask_transmission(pair.probe, pair.grid, mp);
        const auto tc = mask_transmission(pair.conjugate, pair.grid, mc);
        const double exact = nrf(base.masked(tp.per_cell, tc.per_cell)).nrf_linear;
        const MonteCarloResult r = monte_carlo_nrf(pair, mp, mc, base, 100000, 1000 + c);
        const double z = std::abs(r.estimate.nrf_linear - exact) / r.std_error;
        worst = std::max(worst, z);
        if (z < 3.0) ++pass;
    }
    return {pass >= 19, fmt("%d/%d configurations within 3 standard errors (>= 19 needed), worst %.2f SE", pass,
                            configs, worst)};
}

Outcome structure() {
    bool ok = true;
    std::string failures;
    for (std::size_t n = 1; n <= 1024; n *= 2) {
        const auto h = hadamard(n);
        for (std::size_t a = 0; a < n && ok; ++a)
            for (std::size_t b = a; b < n; ++b) {
                long s = 0;
                const std::int8_t* ra = &h.entries[a * n];
                const std::int8_t* rb = &h.entries[b * n];
                for (std::size_t c = 0; c < n; ++c) s += ra[c] * rb[c];
                if (s != (a == b ? long(n) : 0L)) {
                    ok = false;
                    failures += fmt(" H%zu", n);
                    break;
                }
            }
    }
    const std::pair<std::size_t, std::size_t> shapes[] = {{64, 8}, {256, 16}, {1024, 32}};
    for (auto [n, blk] : shapes) {
        const ScrambledBlockHadamard w({n, blk, 1, blk, true});
        const auto d = w.dense();
        bool good = true;
        for (std::size_t a = 0; a < n && good; ++a)
            for (std::size_t b = a; b < n; ++b) {
                long s = 0;
                for (std::size_t c = 0; c < n; ++c) s += long(d[a * n + c]) * d[b * n + c];
                if (s != (a == b ? long(blk) : 0L)) {
                    good = false;
                    break;
                }
            }
        if (!good) failures += fmt(" W(%zu,%zu)", n, blk);
        ok = ok && good;
    }
    const SensingMatrix a = make_sensing_matrix({1024, 32, 7, 32, true}, 300);
    const auto pairs = to_mask_pairs(a, 32, 32);
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0, 1);
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        BeamImage x(32, 32);
        for (double& v : x.pixels()) v = u(gen);
        const auto ax = a.apply(x.pixels());
        for (std::size_t r = 0; r < pairs.size(); ++r)
            worst = std::max(worst, std::abs(inner(pairs[r].positive, x) - inner(pairs[r].negative, x) - ax[r]));
    }
    if (worst > 1e-9) {
        ok = false;
        failures += " mask-pairs";
    }
    return {ok, fmt("H H^T = nI for n = 1..1024, W W^T = BI for (64,8),(256,16),(1024,32), mask pairs max error %.1e "
                    "on 1000 vectors%s",
                    worst, failures.empty() ? "" : (" failed:" + failures).c_str())};
}

Outcome fig3_ordering() {
    const Calibration cal;
    const double flat = -seed_stage_figure(cal, scenes::uniform(64, 64, cal.pitch_um)).model.value_db;
    const double face = -seed_stage_figure(cal, scenes::happy_face(64, 64, 44, cal.pitch_um)).model.value_db;
    const double checker = -seed_stage_figure(cal, scenes::checkerboard(64, 64, 1, cal.pitch_um)).model.value_db;
    const bool ok = flat > face && face > checker && std::abs(flat - 4.5) <= 0.01;
    return {ok, fmt("squeezing uniform %.4f > happy face %.4f > checkerboard %.4f dB, uniform vs 4.5 ceiling %.2e <= 0.01",
                    flat, face, checker, std::abs(flat - 4.5))};
}

Outcome spectrum() {
    const double db = -3.1;
    SpectrumSettings s;
    s.points = 401;
    const Spectrum flat = simulate_spectrum(NoiseFigure::from_db(db), s);
    double flat_dev = 0;
    for (std::size_t i = 0; i < flat.level_db.size(); ++i)
        if (flat.frequency_hz[i] >= s.band_low_hz && flat.frequency_hz[i] <= s.band_high_hz)
            flat_dev = std::max(flat_dev, std::abs(flat.level_db[i] - db));
    s.jitter = true;
    s.jitter_sigma_db = 0.1;
    s.seed = 1;
    const Spectrum j = simulate_spectrum(NoiseFigure::from_db(db), s);
    double mean = 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < j.level_db.size(); ++i)
        if (j.frequency_hz[i] >= s.band_low_hz && j.frequency_hz[i] <= s.band_high_hz) {
            mean += j.level_db[i];
            ++count;
        }
    mean /= static_cast<double>(count);
    const bool ok = flat.level_db.size() == 401 && flat_dev < 1e-12 && std::abs(mean - db) <= 0.02;
    return {ok, fmt("%zu points, flat max deviation %.1e dB, jittered mean %.4f vs %.1f dB (|diff| %.4f <= 0.02)",
                    flat.level_db.size(), flat_dev, mean, db, std::abs(mean - db))};
}

}  // namespace

// With a criterion number as argument, runs only that criterion.
int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 loss composition", loss_composition},
        {"2 line raster", line_raster},
        {"3 compressive reconstruction", compressive},
        {"4 quantum advantage", quantum_advantage},
        {"5 monte carlo agreement", monte_carlo},
        {"6 structural exactness", structure},
        {"7 image ordering", fig3_ordering},
        {"8 spectrum synthesis", spectrum},
    };
    const int only = argc > 1 ? std::atoi(argv[1]) : 0;
    if (only < 0 || only > static_cast<int>(criteria.size())) {
        std::fprintf(stderr, "usage: acceptance [1-%zu]\n", criteria.size());
        return 2;
    }
    int failed = 0, ran = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (only && static_cast<int>(i) + 1 != only) continue;
        ++ran;
        const auto& [name, run] = criteria[i];
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    std::printf("%d/%d criteria passed\n", ran - failed, ran);
    return failed == 0 ? 0 : 1;
}
