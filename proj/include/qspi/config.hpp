#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qspi/experiments.hpp"
#include "qspi/format.hpp"
#include "qspi/spectrum.hpp"

namespace qspi {

/// Environment variable naming the default config file.
inline constexpr const char* kConfigEnv = "QSPI_CONFIG";

struct RunConfig {
    Calibration calibration;
    AcquisitionConfig acquisition;
    double full_beam_squeezing_db = 3.1;  // compressive acquisitions
    double image_pitch_um = 80.0;         // pitch assigned to PGM inputs

    SbhOptions sampling;
    std::size_t rows = 300;

    struct Solver {
        double epsilon = -1.0;  // < 0: sqrt of the summed noise budget
        double tolerance = 1e-5;
        int max_iterations = 5000;
    } solver;

    struct Raster {
        RasterShape::Kind kind = RasterShape::Kind::line;
        int width_px = 0;  // 0: quarter of the beam diameter
        int steps = 3;
        std::size_t pixel_size = 4;
        scenes::Orientation orientation = scenes::Orientation::vertical;
        ConjugateMaskPolicy policy = ConjugateMaskPolicy::fixed_centered;
    } raster;

    struct Sweep {
        std::string stage = "seed";
        double cross_step_deg = 5.0;
        double cross_bar_px = 8.0;
    } sweep;

    SpectrumSettings spectrum;
    std::optional<double> spectrum_nrf_db;  // default: minus the source ceiling

    struct Paths {
        std::string matrix;
        std::string truth;
        std::string out_dir = ".";
    } paths;

    /// Sets one dotted key. Unknown keys and malformed values throw Error.
    void set(const std::string& key, const std::string& value);
    /// Applies a "key = value" text; '#' starts a comment. Errors name the line.
    void apply_text(const std::string& text, const std::string& origin = "config");
    void apply_file(const std::string& path);
    void validate() const;

    /// Every key with its current value, one "key = value" line each.
    std::string dump() const;
    static std::vector<std::string> keys();
};

/// Defaults, then the file (explicit path, else $QSPI_CONFIG if set), then
/// each "key=value" override in order.
RunConfig load_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides);

}  // namespace qspi
