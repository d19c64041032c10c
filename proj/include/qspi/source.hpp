#pragma once

#include <cstddef>
#include <vector>

#include "qspi/image.hpp"

namespace qspi {

/// Phenomenological four-wave-mixing source. Lengths in micrometers, angles in
/// milliradians.
struct SourceConfig {
    double gain = 4.0;
    double probe_waist_um = 450.0;
    double pump_waist_um = 1000.0;
    double max_squeezing_db = 4.5;
    double angular_beam_diameter_mrad = 2.4;
    double coherence_area_angle_mrad = 1.4;
    int mode_count = 70;
    // 1/e^2 power cutoff of the pump-overlap filter is this many cycles per
    // pump waist.
    double cutoff_cycles_per_pump_waist = 5.0;

    void validate() const;
    /// Spatial frequency (cycles/um) where the power transfer falls to 1/e^2.
    double cutoff_frequency() const { return cutoff_cycles_per_pump_waist / pump_waist_um; }
};

/// Gaussian pump-overlap filter applied to the field amplitude sqrt(I); the
/// returned intensity is |E|^2, so total power never increases and DC passes.
BeamImage lowpass_fourier(const BeamImage& image, const SourceConfig& source);

/// Fraction of the image power that survives lowpass_fourier.
double lowpass_power_fraction(const BeamImage& image, const SourceConfig& source);

/// One quantum-correlated macro-cell.
struct CoherenceCell {
    std::size_t id = 0;
    std::vector<std::size_t> pixels;  // row-major pixel indices
    double probe_flux = 0;
    double conjugate_flux = 0;
};

/// Square tiling of the beam plane. One cell is centered on the beam centroid;
/// every pixel belongs to exactly one cell.
class CoherenceGrid {
public:
    CoherenceGrid() = default;
    CoherenceGrid(const BeamImage& probe, const BeamImage& conjugate, double cell_edge_px,
                  double center_x, double center_y);

    const std::vector<CoherenceCell>& cells() const { return cells_; }
    std::size_t size() const { return cells_.size(); }
    double cell_edge() const { return edge_; }
    double center_x() const { return cx_; }
    double center_y() const { return cy_; }
    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }

    /// Index into cells() for a pixel.
    std::size_t cell_of(std::size_t pixel) const { return pixel_cell_[pixel]; }
    /// Lattice coordinates of a cell relative to the central cell.
    std::pair<long, long> lattice(std::size_t cell) const { return lattice_[cell]; }
    /// Index of the cell containing the beam centroid.
    std::size_t central_cell() const { return central_; }

    double probe_total() const;
    double conjugate_total() const;

private:
    std::vector<CoherenceCell> cells_;
    std::vector<std::size_t> pixel_cell_;
    std::vector<std::pair<long, long>> lattice_;
    std::size_t central_ = 0;
    std::size_t width_ = 0, height_ = 0;
    double edge_ = 0, cx_ = 0, cy_ = 0;
};

struct TwinBeamPair {
    BeamImage probe;
    BeamImage conjugate;
    CoherenceGrid grid;
    SourceConfig source;
    double beam_diameter_px = 0;  // 1/e^2 diameter of the probe
};

/// Seeded amplifier: probe = G * lowpass(seed), conjugate = (G-1) * lowpass(seed).
TwinBeamPair build_twin_pair(const BeamImage& seed, const SourceConfig& source,
                             int cells_per_diameter);

/// Pair for a probe already at the detector: conjugate = probe * (G-1)/G,
/// no filtering.
TwinBeamPair pair_from_probe(const BeamImage& probe, const SourceConfig& source, int cells_per_diameter);

struct MaskTransmission {
    std::vector<double> per_cell;  // masked flux / cell flux, in [0, 1]
    double eta_total = 0;
};

MaskTransmission mask_transmission(const BeamImage& arm, const CoherenceGrid& grid,
                                   const Mask& mask);

}  // namespace qspi
