#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qspi/noise.hpp"
#include "qspi/sampling.hpp"
#include "qspi/scenes.hpp"

namespace qspi {

enum class AcquisitionMode { classical, quantum };
AcquisitionMode parse_mode(const std::string& text);
std::string to_string(AcquisitionMode mode);

struct AcquisitionConfig {
    AcquisitionMode mode = AcquisitionMode::quantum;
    // Photons carried by the whole arm in one exposure; sets the shot-noise
    // scale (flux units per photon = arm total / photons_per_exposure).
    double photons_per_exposure = 1e6;
    double dark_noise_variance = 0.0;
    std::uint64_t rng_seed = 1;
    int exposures_per_row = 1;
    bool noise = true;

    void validate() const;
};

/// Flux units per detected photon for an arm.
double shot_noise_scale(const BeamImage& arm, const AcquisitionConfig& cfg);

/// Masked flux plus Gaussian noise of variance scale * flux + dark. The noise
/// draw comes from the stream (cfg.rng_seed, exposure_index).
double single_pixel_measure(const BeamImage& arm, const Mask& mask, const AcquisitionConfig& cfg,
                            std::uint64_t exposure_index = 0);

struct MeasurementVector {
    std::vector<double> y;
    std::vector<double> noise_budget;  // variance used per entry
    std::uint64_t seed = 0;
    AcquisitionMode mode = AcquisitionMode::classical;
    std::string matrix_header;  // identity of the sensing matrix

    std::size_t size() const { return y.size(); }
};

/// Differential (positive minus negative exposure) measurement of the probe
/// for every row. In quantum mode the shot noise of each exposure is scaled by
/// the NRF of the twin pair with that exposure's mask on both arms.
MeasurementVector compressive_acquire(const TwinBeamPair& pair, const SensingMatrix& a,
                                      const NoiseModel& model, const AcquisitionConfig& cfg);

/// NRF of one exposure: both arms masked with the same pattern.
NoiseFigure exposure_nrf(const TwinBeamPair& pair, const NoiseModel& model, const Mask& mask);

struct RasterShape {
    enum class Kind { line, pixel } kind = Kind::line;
    int width_px = 6;  // line width
    scenes::Orientation orientation = scenes::Orientation::vertical;
    std::size_t pixel_size = 4;  // pixel raster block edge
};

/// fixed_centered: conjugate mask is a centered line, the probe line moves.
/// mirrored: probe mask is a centered line, the conjugate line moves.
enum class ConjugateMaskPolicy { fixed_centered, mirrored };

struct RasterResult {
    std::vector<double> positions;
    std::vector<NoiseFigure> nrf_curve;
    BeamImage image;  // pixel rasters only
};

/// For line rasters the positions are line centers (pixel coordinates along
/// the scan axis). For pixel rasters they are row-major block indices and the
/// same block is passed on both arms; blocks that see no light get NaN.
RasterResult raster_scan(const TwinBeamPair& pair, const NoiseModel& model, const RasterShape& shape,
                         const std::vector<double>& positions, ConjugateMaskPolicy policy,
                         const AcquisitionConfig* image_cfg = nullptr);

/// Line positions stepping by the line width around the beam center.
std::vector<double> line_positions(const TwinBeamPair& pair, const RasterShape& shape, int steps_each_side);

/// Block-summed fluxes (plus shot/dark noise when enabled); partial edge
/// blocks are kept.
BeamImage rastered_image(const BeamImage& arm, std::size_t pixel_size, const AcquisitionConfig& cfg);

void write_measurements(std::ostream& out, const MeasurementVector& m);
MeasurementVector read_measurements(std::istream& in);
void write_measurements_file(const std::string& path, const MeasurementVector& m);
MeasurementVector read_measurements_file(const std::string& path);

}  // namespace qspi
