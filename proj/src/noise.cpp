#include "qspi/noise.hpp"

#include <cmath>

#include "qspi/rng.hpp"

namespace qspi {

NoiseVariant parse_variant(const std::string& text) {
    if (text == "standard") return NoiseVariant::standard;
    if (text == "paper-corrected" || text == "paper_corrected") return NoiseVariant::paper_corrected;
    throw Error("unknown noise variant '" + text + "' (expected standard|paper-corrected)");
}

std::string to_string(NoiseVariant v) {
    return v == NoiseVariant::standard ? "standard" : "paper-corrected";
}

double ideal_nrf(double gain, NoiseVariant variant) {
    if (!(gain > 1)) throw Error("gain must be > 1");
    return variant == NoiseVariant::standard ? 1.0 / (2.0 * gain - 1.0) : 1.0 / gain;
}

NoiseFigure NoiseFigure::from_linear(double nrf, double snl) {
    if (!(nrf > 0) || !std::isfinite(nrf)) throw Error("noise reduction factor must be positive");
    return {nrf, 10.0 * std::log10(nrf), snl};
}

NoiseFigure NoiseFigure::from_db(double db, double snl) {
    return {std::pow(10.0, db / 10.0), db, snl};
}

double NoiseModel::covariance(std::size_t cell) const {
    return 0.5 * (fano() - ideal()) * (probe_flux[cell] + conjugate_flux[cell]);
}

void NoiseModel::validate() const {
    ideal_nrf(gain, variant);
    const std::size_t n = probe_flux.size();
    if (conjugate_flux.size() != n || t_probe.size() != n || t_conjugate.size() != n)
        throw Error("noise model: per-cell vectors differ in length");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(probe_flux[i] >= 0) || !(conjugate_flux[i] >= 0))
            throw Error("noise model: cell fluxes must be >= 0");
        if (!(t_probe[i] >= 0 && t_probe[i] <= 1) || !(t_conjugate[i] >= 0 && t_conjugate[i] <= 1))
            throw Error("noise model: transmissions must lie in [0, 1]");
    }
}

NoiseModel NoiseModel::single_cell(double gain, NoiseVariant variant, double t_probe,
                                   double t_conjugate) {
    NoiseModel m;
    m.gain = gain;
    m.variant = variant;
    m.probe_flux = {gain};
    m.conjugate_flux = {gain - 1.0};
    m.t_probe = {t_probe};
    m.t_conjugate = {t_conjugate};
    m.validate();
    return m;
}

NoiseModel NoiseModel::from_pair(const TwinBeamPair& pair, NoiseVariant variant,
                                 double eta_probe, double eta_conjugate) {
    NoiseModel m;
    m.gain = pair.source.gain;
    m.variant = variant;
    for (const auto& c : pair.grid.cells()) {
        m.probe_flux.push_back(c.probe_flux);
        m.conjugate_flux.push_back(c.conjugate_flux);
    }
    m.t_probe.assign(m.cells(), eta_probe);
    m.t_conjugate.assign(m.cells(), eta_conjugate);
    m.validate();
    return m;
}

NoiseModel NoiseModel::masked(const std::vector<double>& probe_fraction,
                              const std::vector<double>& conjugate_fraction) const {
    if (probe_fraction.size() != cells() || conjugate_fraction.size() != cells())
        throw Error("noise model: mask transmission vector does not match cell count");
    NoiseModel m = *this;
    for (std::size_t i = 0; i < cells(); ++i) {
        m.t_probe[i] *= probe_fraction[i];
        m.t_conjugate[i] *= conjugate_fraction[i];
    }
    m.validate();
    return m;
}

NoiseFigure nrf(const NoiseModel& model) {
    model.validate();
    const double f = model.fano();
    double variance = 0, snl = 0, total = 0;
    for (std::size_t i = 0; i < model.cells(); ++i) {
        const double tp = model.t_probe[i], tc = model.t_conjugate[i];
        const double np = model.probe_flux[i], nc = model.conjugate_flux[i];
        variance += tp * tp * f * np + tp * (1 - tp) * np;
        variance += tc * tc * f * nc + tc * (1 - tc) * nc;
        variance -= 2.0 * tp * tc * model.covariance(i);
        snl += tp * np + tc * nc;
        total += np + nc;
    }
    if (!(snl > 1e-12 * total) || !(snl > 0)) throw Error("no light on detector");
    return NoiseFigure::from_linear(variance / snl, snl);
}

double predicted_squeezing_single_mode(double eta, double gain, NoiseVariant variant) {
    if (!(eta >= 0 && eta <= 1)) throw Error("transmission must lie in [0, 1]");
    if (eta == 0) return 0.0;
    return 10.0 * std::log10(1.0 - eta + eta * ideal_nrf(gain, variant));
}

NoiseFigure compose_loss(const NoiseFigure& base, double extra_transmission) {
    if (!(extra_transmission > 0 && extra_transmission <= 1))
        throw Error("extra transmission must lie in (0, 1]");
    if (!(base.nrf_linear > 0)) throw Error("base noise figure must be positive");
    if (extra_transmission == 1.0) return base;
    const double composed = 1.0 - extra_transmission * (1.0 - base.nrf_linear);
    return NoiseFigure::from_linear(composed, base.shot_noise_reference * extra_transmission);
}

double transmission_for_squeezing(double squeezing_db, double gain, NoiseVariant variant) {
    if (!(squeezing_db >= 0)) throw Error("squeezing magnitude must be >= 0 dB");
    const double target = std::pow(10.0, -squeezing_db / 10.0);
    const double eta = (1.0 - target) / (1.0 - ideal_nrf(gain, variant));
    if (eta > 1.0)
        throw Error("requested squeezing exceeds the lossless limit of the source model");
    return eta;
}

MonteCarloResult monte_carlo_nrf(const NoiseModel& model, long shots, std::uint64_t rng_seed) {
    if (shots <= 0) throw Error("shots must be positive");
    if (shots < 1000) throw Error("monte carlo needs at least 1000 shots");
    model.validate();

    // Per-cell Cholesky factors of [[F np, C], [C, F nc]] and thinning widths.
    struct CellDraw {
        double np, nc, a, b, c, tp, tc, sp, sc;
    };
    std::vector<CellDraw> draws;
    const double f = model.fano();
    for (std::size_t i = 0; i < model.cells(); ++i) {
        CellDraw d{};
        d.np = model.probe_flux[i];
        d.nc = model.conjugate_flux[i];
        d.tp = model.t_probe[i];
        d.tc = model.t_conjugate[i];
        const double vp = f * d.np, vc = f * d.nc, cov = model.covariance(i);
        d.a = std::sqrt(vp);
        d.b = d.a > 0 ? cov / d.a : 0.0;
        d.c = std::sqrt(std::max(0.0, vc - d.b * d.b));
        d.sp = std::sqrt(d.tp * (1 - d.tp) * d.np);
        d.sc = std::sqrt(d.tc * (1 - d.tc) * d.nc);
        draws.push_back(d);
    }

    std::vector<double> diff(static_cast<std::size_t>(shots)), sum(diff.size());
    for (long k = 0; k < shots; ++k) {
        Rng rng(rng_seed, static_cast<std::uint64_t>(k));
        double dsum = 0, ssum = 0;
        for (const auto& d : draws) {
            const double z1 = rng.normal(), z2 = rng.normal();
            const double np = d.np + d.a * z1;
            const double nc = d.nc + d.b * z1 + d.c * z2;
            const double mp = d.tp * np + d.sp * rng.normal();
            const double mc = d.tc * nc + d.sc * rng.normal();
            dsum += mp - mc;
            ssum += mp + mc;
        }
        diff[static_cast<std::size_t>(k)] = dsum;
        sum[static_cast<std::size_t>(k)] = ssum;
    }

    const double n = static_cast<double>(shots);
    double mean = 0, snl = 0;
    for (std::size_t k = 0; k < diff.size(); ++k) {
        mean += diff[k];
        snl += sum[k];
    }
    mean /= n;
    snl /= n;
    if (!(snl > 0)) throw Error("no light on detector");
    double m2 = 0;
    for (double v : diff) m2 += (v - mean) * (v - mean);
    const double variance = m2 / (n - 1);
    const double ratio = variance / snl;

    // Delta method on variance / mean(sum): the shot-noise reference is a
    // sample mean too and its scatter matters at low photon numbers.
    double psi2 = 0;
    for (std::size_t k = 0; k < diff.size(); ++k) {
        const double psi = ((diff[k] - mean) * (diff[k] - mean) - variance - ratio * (sum[k] - snl)) / snl;
        psi2 += psi * psi;
    }

    MonteCarloResult r;
    r.estimate = NoiseFigure::from_linear(ratio, snl);
    r.std_error = std::sqrt(psi2 / n / n);
    return r;
}

MonteCarloResult monte_carlo_nrf(const TwinBeamPair& pair, const Mask& mask_probe,
                                 const Mask& mask_conjugate, const NoiseModel& base, long shots,
                                 std::uint64_t rng_seed) {
    const auto tp = mask_transmission(pair.probe, pair.grid, mask_probe);
    const auto tc = mask_transmission(pair.conjugate, pair.grid, mask_conjugate);
    return monte_carlo_nrf(base.masked(tp.per_cell, tc.per_cell), shots, rng_seed);
}

}  // namespace qspi
