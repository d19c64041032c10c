#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qspi/source.hpp"

namespace qspi {

/// Which single-mode ideal noise reduction the model closes on.
///  standard:        1 / (2G - 1)  (phase-insensitive amplifier)
///  paper_corrected: 1 / G         (closed form with the loss term sign flipped)
enum class NoiseVariant { standard, paper_corrected };

NoiseVariant parse_variant(const std::string& text);
std::string to_string(NoiseVariant v);

double ideal_nrf(double gain, NoiseVariant variant);
inline double fano_factor(double gain) { return 2.0 * gain - 1.0; }

/// Intensity-difference noise normalized to the shot-noise limit.
struct NoiseFigure {
    double nrf_linear = 1.0;
    double value_db = 0.0;
    double shot_noise_reference = 0.0;

    static NoiseFigure from_linear(double nrf, double snl = 0.0);
    static NoiseFigure from_db(double db, double snl = 0.0);
    bool squeezed() const { return value_db < 0; }
};

/// Per-cell twin-beam statistics plus the transmissions each arm sees.
///
/// Within a cell the arm photon numbers have mean n, variance F n with
/// F = 2G - 1, and a cross-covariance chosen so symmetric loss eta gives
/// NRF = 1 - eta + eta * ideal_nrf. Detection thins each arm binomially; cells
/// are independent.
struct NoiseModel {
    double gain = 4.0;
    NoiseVariant variant = NoiseVariant::standard;
    std::vector<double> probe_flux;
    std::vector<double> conjugate_flux;
    std::vector<double> t_probe;
    std::vector<double> t_conjugate;

    double fano() const { return fano_factor(gain); }
    double ideal() const { return ideal_nrf(gain, variant); }
    double covariance(std::size_t cell) const;
    std::size_t cells() const { return probe_flux.size(); }
    void validate() const;

    /// One cell carrying probe flux G and conjugate flux G-1.
    static NoiseModel single_cell(double gain, NoiseVariant variant, double t_probe,
                                  double t_conjugate);
    /// Model over a twin pair with uniform arm transmissions.
    static NoiseModel from_pair(const TwinBeamPair& pair, NoiseVariant variant,
                                double eta_probe, double eta_conjugate);

    /// Copy with per-cell transmissions multiplied by mask fractions.
    NoiseModel masked(const std::vector<double>& probe_fraction,
                      const std::vector<double>& conjugate_fraction) const;
};

NoiseFigure nrf(const NoiseModel& model);

/// Single-spatial-mode prediction 10 log10(1 - eta + eta * ideal_nrf).
double predicted_squeezing_single_mode(double eta, double gain, NoiseVariant variant);

/// Symmetric extra loss on both arms: NRF' = 1 - eta' (1 - NRF).
NoiseFigure compose_loss(const NoiseFigure& base, double extra_transmission);

/// Symmetric transmission at which the single-mode model reaches the given
/// squeezing magnitude (positive dB).
double transmission_for_squeezing(double squeezing_db, double gain, NoiseVariant variant);

struct MonteCarloResult {
    NoiseFigure estimate;
    double std_error = 0;
};

/// Gaussian Monte Carlo of the masked twin-beam detection. Shot k draws from
/// the stream (rng_seed, k), so the result is independent of evaluation order.
MonteCarloResult monte_carlo_nrf(const NoiseModel& model, long shots, std::uint64_t rng_seed);

/// Same, with the model built from a pair, two detection masks and base arm
/// transmissions.
MonteCarloResult monte_carlo_nrf(const TwinBeamPair& pair, const Mask& mask_probe,
                                 const Mask& mask_conjugate, const NoiseModel& base, long shots,
                                 std::uint64_t rng_seed);

}  // namespace qspi
