#pragma once

#include <cstdint>
#include <vector>

#include "qspi/noise.hpp"

namespace qspi {

/// Spectrum-analyzer style settings. Frequencies in Hz.
struct SpectrumSettings {
    double start_hz = 50e3;
    double stop_hz = 5e6;
    int points = 401;
    double resolution_bandwidth_hz = 20e3;
    double video_bandwidth_hz = 3e3;
    double band_low_hz = 50e3;   // squeezing band
    double band_high_hz = 5e6;
    double technical_noise_db_per_decade = 10.0;  // roll-up below the band
    double jitter_sigma_db = 0.1;
    bool jitter = false;
    std::uint64_t seed = 1;

    void validate() const;
};

struct Spectrum {
    std::vector<double> frequency_hz;
    std::vector<double> level_db;  // relative to the SNL

    double mean_db() const;
};

/// Linearly spaced trace: flat at the noise figure inside the band, technical
/// noise rising toward low frequency below it, shot-noise limited above it.
Spectrum simulate_spectrum(const NoiseFigure& nf, const SpectrumSettings& settings);

/// Shot-noise reference trace (0 dB everywhere, no jitter).
Spectrum snl_reference(const SpectrumSettings& settings);

}  // namespace qspi
