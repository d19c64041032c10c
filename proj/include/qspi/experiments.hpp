#pragma once

// Experiment runners shared by the CLI, the acceptance suite and the Python
// module. A Calibration ties the phenomenological model to measured points:
//  - seed-side experiments (images imprinted on the probe before the gain
//    medium) are normalized so the bare beam sits at the source ceiling;
//  - detection-DMD experiments start from the mirrors baseline and lose the
//    DMD efficiency on each arm.

#include <string>
#include <vector>

#include "qspi/acquisition.hpp"

namespace qspi {

struct Calibration {
    SourceConfig source;
    NoiseVariant variant = NoiseVariant::standard;
    int cells_per_diameter = 3;
    std::size_t frame_px = 64;
    double pitch_um = 40.0;
    double seed_truncate = 2.0;          // seed Gaussian zeroed beyond this many radii
    double mirrors_baseline_db = 4.0;    // detection setup with mirrors in place of DMDs
    double dmd_transmission = 0.6;       // zero-order efficiency of each detection DMD

    /// Symmetric transmission that brings the bare beam to the source ceiling.
    double source_transmission() const;
    /// Per-arm transmission of the two-DMD detection setup.
    double dmd_setup_transmission() const;

    BeamImage seed() const;
    TwinBeamPair pair() const;
    TwinBeamPair pair(const BeamImage& seed) const;
};

/// One row of the mask sweep: mask transmission, single-mode prediction and
/// full-model noise figure.
struct MaskFigure {
    double eta = 0;
    double predicted_db = 0;
    NoiseFigure model;
};

/// Mask imprinted on the seed before the gain medium. eta is the pump-overlap
/// efficiency of the imprinted seed relative to the bare seed.
MaskFigure seed_stage_figure(const Calibration& cal, const Mask& mask);

/// Mask on the probe detection DMD; the conjugate passes all modes and is
/// attenuated by the same total transmission (bucket detection).
MaskFigure detect_stage_figure(const Calibration& cal, const TwinBeamPair& pair, const Mask& mask);

/// Seed-stage sweep of a rotating cross, one figure per angle.
std::vector<MaskFigure> cross_angle_sweep(const Calibration& cal, const std::vector<double>& angles_deg,
                                          double bar_width_px);

/// Default line raster of the calibrated pair: line width = half the 1/e^2
/// radius (rounded to an even pixel count), positions stepping by one width.
struct LineRasterSetup {
    TwinBeamPair pair;
    NoiseModel model;
    RasterShape shape;
    std::vector<double> positions;
};
LineRasterSetup default_line_raster(const Calibration& cal, int steps_each_side = 3);

/// 32x32 'E' compressive imaging scenario.
struct CompressiveScenario {
    TwinBeamPair pair;
    NoiseModel model;
    SensingMatrix matrix;
    std::vector<double> truth;  // probe image, row-major
};

struct CompressiveSettings {
    std::size_t side = 32;
    double pitch_um = 80.0;
    std::size_t block = 32;
    std::size_t window = 32;
    std::size_t rows = 300;
    std::uint64_t seed = 1;
    double full_beam_squeezing_db = 3.1;
};

CompressiveScenario letter_e_scenario(const Calibration& cal, const CompressiveSettings& settings);

}  // namespace qspi
