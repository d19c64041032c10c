#include "qspi/spectrum.hpp"

#include <cmath>

#include "qspi/rng.hpp"

namespace qspi {

void SpectrumSettings::validate() const {
    if (!(start_hz > 0) || !(stop_hz > start_hz)) throw Error("nonpositive frequency range");
    if (points < 2) throw Error("spectrum needs at least 2 points");
    if (!(resolution_bandwidth_hz > 0) || !(video_bandwidth_hz > 0))
        throw Error("bandwidths must be positive");
    if (!(band_high_hz > band_low_hz)) throw Error("squeezing band is empty");
    if (!(jitter_sigma_db >= 0)) throw Error("jitter sigma must be >= 0");
}

double Spectrum::mean_db() const {
    double s = 0;
    for (double v : level_db) s += v;
    return level_db.empty() ? 0.0 : s / static_cast<double>(level_db.size());
}

Spectrum simulate_spectrum(const NoiseFigure& nf, const SpectrumSettings& settings) {
    settings.validate();
    Spectrum out;
    out.frequency_hz.resize(settings.points);
    out.level_db.resize(settings.points);
    Rng rng(settings.seed, 0x5eec);
    const double step = (settings.stop_hz - settings.start_hz) / (settings.points - 1);
    for (int i = 0; i < settings.points; ++i) {
        const double f = i + 1 == settings.points ? settings.stop_hz : settings.start_hz + i * step;
        double level;
        if (f < settings.band_low_hz)
            level = nf.value_db +
                    settings.technical_noise_db_per_decade * std::log10(settings.band_low_hz / f);
        else if (f > settings.band_high_hz)
            level = 0.0;
        else
            level = nf.value_db;
        if (settings.jitter) level += settings.jitter_sigma_db * rng.normal();
        out.frequency_hz[i] = f;
        out.level_db[i] = level;
    }
    return out;
}

Spectrum snl_reference(const SpectrumSettings& settings) {
    SpectrumSettings s = settings;
    s.jitter = false;
    s.technical_noise_db_per_decade = 0.0;
    return simulate_spectrum(NoiseFigure::from_linear(1.0), s);
}

}  // namespace qspi
