#include "qspi/experiments.hpp"

#include <cmath>

namespace qspi {

double Calibration::source_transmission() const {
    return transmission_for_squeezing(source.max_squeezing_db, source.gain, variant);
}

double Calibration::dmd_setup_transmission() const {
    if (!(dmd_transmission > 0 && dmd_transmission <= 1)) throw Error("dmd_transmission must lie in (0, 1]");
    return transmission_for_squeezing(mirrors_baseline_db, source.gain, variant) * dmd_transmission;
}

BeamImage Calibration::seed() const {
    return scenes::gaussian(frame_px, frame_px, pitch_um, source.probe_waist_um, seed_truncate);
}

TwinBeamPair Calibration::pair() const { return pair(seed()); }

TwinBeamPair Calibration::pair(const BeamImage& seed_image) const {
    return build_twin_pair(seed_image, source, cells_per_diameter);
}

MaskFigure seed_stage_figure(const Calibration& cal, const Mask& mask) {
    const BeamImage bare = cal.seed();
    require_same_shape(bare, mask, "seed mask");
    require_binary(mask, "seed mask");
    const BeamImage imprinted = scenes::apply(bare, mask);
    if (!(imprinted.total() > 0)) throw Error("no light on detector");

    MaskFigure f;
    f.eta = lowpass_power_fraction(imprinted, cal.source) / lowpass_power_fraction(bare, cal.source);
    const double eta = cal.source_transmission() * f.eta;
    f.predicted_db = predicted_squeezing_single_mode(eta, cal.source.gain, cal.variant);
    const TwinBeamPair pair = cal.pair(imprinted);
    f.model = nrf(NoiseModel::from_pair(pair, cal.variant, eta, eta));
    return f;
}

MaskFigure detect_stage_figure(const Calibration& cal, const TwinBeamPair& pair, const Mask& mask) {
    const auto tp = mask_transmission(pair.probe, pair.grid, mask);
    if (!(tp.eta_total > 0)) throw Error("no light on detector");
    const double base = cal.dmd_setup_transmission();
    MaskFigure f;
    f.eta = tp.eta_total;
    f.predicted_db = predicted_squeezing_single_mode(base * f.eta, cal.source.gain, cal.variant);
    const std::vector<double> bucket(pair.grid.size(), f.eta);
    f.model = nrf(NoiseModel::from_pair(pair, cal.variant, base, base).masked(tp.per_cell, bucket));
    return f;
}

std::vector<MaskFigure> cross_angle_sweep(const Calibration& cal, const std::vector<double>& angles_deg,
                                          double bar_width_px) {
    std::vector<MaskFigure> out;
    for (double a : angles_deg)
        out.push_back(seed_stage_figure(cal, scenes::cross(cal.frame_px, cal.frame_px, a, bar_width_px, cal.pitch_um)));
    return out;
}

LineRasterSetup default_line_raster(const Calibration& cal, int steps_each_side) {
    LineRasterSetup s;
    s.pair = cal.pair();
    const double eta = cal.dmd_setup_transmission();
    s.model = NoiseModel::from_pair(s.pair, cal.variant, eta, eta);
    // Half of the 1/e^2 radius is a quarter of the diameter.
    const double width = s.pair.beam_diameter_px / 4.0;
    s.shape.kind = RasterShape::Kind::line;
    s.shape.width_px = std::max(2, 2 * static_cast<int>(std::lround(width / 2.0)));
    s.shape.orientation = scenes::Orientation::vertical;
    s.positions = line_positions(s.pair, s.shape, steps_each_side);
    return s;
}

CompressiveScenario letter_e_scenario(const Calibration& cal, const CompressiveSettings& settings) {
    CompressiveScenario s;
    const Mask e = scenes::letter_e(settings.side, settings.side, settings.pitch_um);
    s.pair = build_twin_pair(e, cal.source, cal.cells_per_diameter);
    const double eta = transmission_for_squeezing(settings.full_beam_squeezing_db, cal.source.gain, cal.variant);
    s.model = NoiseModel::from_pair(s.pair, cal.variant, eta, eta);
    s.matrix = make_sensing_matrix({settings.side * settings.side, settings.block, settings.seed, settings.window, true},
                                   settings.rows);
    s.truth.assign(s.pair.probe.pixels().begin(), s.pair.probe.pixels().end());
    return s;
}

}  // namespace qspi
