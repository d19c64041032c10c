#include "qspi/acquisition.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "qspi/format.hpp"
#include "qspi/rng.hpp"

namespace qspi {

namespace {
constexpr std::uint64_t kRowStreamBase = 0x1000000000ULL;
constexpr std::uint64_t kRasterStreamBase = 0x2000000000ULL;
}  // namespace

AcquisitionMode parse_mode(const std::string& text) {
    if (text == "classical") return AcquisitionMode::classical;
    if (text == "quantum") return AcquisitionMode::quantum;
    throw Error("unknown acquisition mode '" + text + "' (expected classical|quantum)");
}

std::string to_string(AcquisitionMode mode) {
    return mode == AcquisitionMode::classical ? "classical" : "quantum";
}

void AcquisitionConfig::validate() const {
    if (!(photons_per_exposure > 0)) throw Error("photons_per_exposure must be positive");
    if (!(dark_noise_variance >= 0)) throw Error("dark_noise_variance must be >= 0");
    if (exposures_per_row < 1) throw Error("exposures_per_row must be >= 1");
}

double shot_noise_scale(const BeamImage& arm, const AcquisitionConfig& cfg) {
    return arm.total() / cfg.photons_per_exposure;
}

double single_pixel_measure(const BeamImage& arm, const Mask& mask, const AcquisitionConfig& cfg,
                            std::uint64_t exposure_index) {
    cfg.validate();
    require_same_shape(arm, mask, "single pixel measurement");
    require_binary(mask, "single pixel measurement");
    const double flux = inner(arm, mask);
    if (!cfg.noise) return flux;
    const double variance = shot_noise_scale(arm, cfg) * flux + cfg.dark_noise_variance;
    Rng rng(cfg.rng_seed, exposure_index);
    return flux + std::sqrt(variance) * rng.normal();
}

NoiseFigure exposure_nrf(const TwinBeamPair& pair, const NoiseModel& model, const Mask& mask) {
    const auto t = mask_transmission(pair.probe, pair.grid, mask);
    return nrf(model.masked(t.per_cell, t.per_cell));
}

namespace {

// Flux passed by the +1 and -1 halves of a row and, in quantum mode, the NRF
// of each exposure. Per-cell fractions are accumulated from the sparse row.
struct RowExposures {
    double flux_pos = 0, flux_neg = 0;
    double nrf_pos = 1, nrf_neg = 1;
};

RowExposures row_exposures(const TwinBeamPair& pair, const SensingMatrix::Row& row,
                           const NoiseModel* model) {
    RowExposures e;
    const auto x = pair.probe.pixels();
    const auto& grid = pair.grid;
    std::vector<double> frac_pos, frac_neg;
    if (model) {
        frac_pos.assign(grid.size(), 0.0);
        frac_neg.assign(grid.size(), 0.0);
    }
    for (std::size_t k = 0; k < row.cols.size(); ++k) {
        const std::size_t p = row.cols[k];
        (row.signs[k] > 0 ? e.flux_pos : e.flux_neg) += x[p];
        if (model) {
            const std::size_t c = grid.cell_of(p);
            const double cell_flux = grid.cells()[c].probe_flux;
            if (cell_flux > 0) (row.signs[k] > 0 ? frac_pos : frac_neg)[c] += x[p] / cell_flux;
        }
    }
    if (model) {
        for (auto* f : {&frac_pos, &frac_neg})
            for (double& v : *f) v = std::min(1.0, v);
        if (e.flux_pos > 0) e.nrf_pos = nrf(model->masked(frac_pos, frac_pos)).nrf_linear;
        if (e.flux_neg > 0) e.nrf_neg = nrf(model->masked(frac_neg, frac_neg)).nrf_linear;
    }
    return e;
}

}  // namespace

MeasurementVector compressive_acquire(const TwinBeamPair& pair, const SensingMatrix& a,
                                      const NoiseModel& model, const AcquisitionConfig& cfg) {
    cfg.validate();
    if (a.cols() != pair.probe.size())
        throw Error("sensing matrix has N=" + std::to_string(a.cols()) + " but the probe has " +
                    std::to_string(pair.probe.size()) + " pixels");
    if (model.cells() != pair.grid.size()) throw Error("noise model does not match the twin pair grid");

    MeasurementVector out;
    out.seed = cfg.rng_seed;
    out.mode = cfg.mode;
    out.matrix_header = a.header();
    out.y.resize(a.rows());
    out.noise_budget.assign(a.rows(), 0.0);

    const double scale = shot_noise_scale(pair.probe, cfg);
    const bool quantum = cfg.mode == AcquisitionMode::quantum;
    const int reps = cfg.exposures_per_row;
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const RowExposures e = row_exposures(pair, a.row(r), quantum && cfg.noise ? &model : nullptr);
        const double signal = e.flux_pos - e.flux_neg;
        if (!cfg.noise) {
            out.y[r] = signal;
            continue;
        }
        // Two exposures per repetition, each with its own dark noise.
        const double single = scale * (e.flux_pos * e.nrf_pos + e.flux_neg * e.nrf_neg) +
                              2.0 * cfg.dark_noise_variance;
        double sum = 0;
        for (int k = 0; k < reps; ++k) {
            Rng rng(cfg.rng_seed, kRowStreamBase + r * static_cast<std::uint64_t>(reps) + k);
            sum += signal + std::sqrt(single) * rng.normal();
        }
        out.y[r] = sum / reps;
        out.noise_budget[r] = single / reps;
    }
    return out;
}

std::vector<double> line_positions(const TwinBeamPair& pair, const RasterShape& shape,
                                   int steps_each_side) {
    const double center = shape.orientation == scenes::Orientation::vertical ? pair.grid.center_x()
                                                                            : pair.grid.center_y();
    std::vector<double> out;
    for (int k = -steps_each_side; k <= steps_each_side; ++k) out.push_back(center + k * shape.width_px);
    return out;
}

RasterResult raster_scan(const TwinBeamPair& pair, const NoiseModel& model, const RasterShape& shape,
                         const std::vector<double>& positions, ConjugateMaskPolicy policy,
                         const AcquisitionConfig* image_cfg) {
    if (positions.empty()) throw Error("raster scan needs at least one position");
    const std::size_t w = pair.probe.width(), h = pair.probe.height();
    RasterResult out;
    out.positions = positions;

    if (shape.kind == RasterShape::Kind::line) {
        const double center = shape.orientation == scenes::Orientation::vertical ? pair.grid.center_x()
                                                                                : pair.grid.center_y();
        const Mask fixed = scenes::line(w, h, center, shape.width_px, shape.orientation, pair.probe.pitch());
        const auto t_fixed_c = mask_transmission(pair.conjugate, pair.grid, fixed);
        const auto t_fixed_p = mask_transmission(pair.probe, pair.grid, fixed);
        for (double pos : positions) {
            const Mask moving = scenes::line(w, h, pos, shape.width_px, shape.orientation, pair.probe.pitch());
            const BeamImage& scanned = policy == ConjugateMaskPolicy::fixed_centered ? pair.probe : pair.conjugate;
            // A line that passes (numerically) no light leaves one detector port dark.
            if (!(inner(scanned, moving) > 1e-12 * scanned.total())) throw Error("no light on detector");
            if (policy == ConjugateMaskPolicy::fixed_centered) {
                const auto tp = mask_transmission(pair.probe, pair.grid, moving);
                out.nrf_curve.push_back(nrf(model.masked(tp.per_cell, t_fixed_c.per_cell)));
            } else {
                const auto tc = mask_transmission(pair.conjugate, pair.grid, moving);
                out.nrf_curve.push_back(nrf(model.masked(t_fixed_p.per_cell, tc.per_cell)));
            }
        }
        return out;
    }

    const std::size_t s = shape.pixel_size;
    if (s < 1 || s > w || s > h) throw Error("raster pixel size must lie in [1, image size]");
    const std::size_t bw = (w + s - 1) / s, bh = (h + s - 1) / s;
    for (double pos : positions) {
        if (pos < 0 || pos >= static_cast<double>(bw * bh) || pos != std::floor(pos))
            throw Error("raster block index " + std::to_string(pos) + " out of range");
        const auto k = static_cast<std::size_t>(pos);
        const Mask m = scenes::block(w, h, s, k % bw, k / bw, pair.probe.pitch());
        const auto tp = mask_transmission(pair.probe, pair.grid, m);
        const auto tc = mask_transmission(pair.conjugate, pair.grid, m);
        // Dark blocks (outside the beam) get NaN instead of failing the whole image.
        if (!(inner(pair.probe, m) > 1e-12 * pair.probe.total())) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            out.nrf_curve.push_back(NoiseFigure{nan, nan, 0.0});
            continue;
        }
        out.nrf_curve.push_back(nrf(model.masked(tp.per_cell, tc.per_cell)));
    }
    AcquisitionConfig quiet;
    quiet.noise = false;
    out.image = rastered_image(pair.probe, s, image_cfg ? *image_cfg : quiet);
    return out;
}

BeamImage rastered_image(const BeamImage& arm, std::size_t pixel_size, const AcquisitionConfig& cfg) {
    cfg.validate();
    if (pixel_size < 1) throw Error("raster pixel size must be >= 1");
    if (pixel_size > arm.width() || pixel_size > arm.height())
        throw Error("raster pixel size " + std::to_string(pixel_size) + " exceeds image dimensions");
    const std::size_t bw = (arm.width() + pixel_size - 1) / pixel_size;
    const std::size_t bh = (arm.height() + pixel_size - 1) / pixel_size;
    const double scale = shot_noise_scale(arm, cfg);
    std::vector<double> values(bw * bh, 0.0);
    for (std::size_t y = 0; y < arm.height(); ++y)
        for (std::size_t x = 0; x < arm.width(); ++x) values[(y / pixel_size) * bw + x / pixel_size] += arm(x, y);
    if (cfg.noise) {
        for (std::size_t k = 0; k < values.size(); ++k) {
            Rng rng(cfg.rng_seed, kRasterStreamBase + k);
            const double sd = std::sqrt(scale * values[k] + cfg.dark_noise_variance);
            // Measured fluxes are reported as nonnegative powers.
            values[k] = std::max(0.0, values[k] + sd * rng.normal());
        }
    }
    return BeamImage(bw, bh, std::move(values), arm.pitch() * static_cast<double>(pixel_size));
}

void write_measurements(std::ostream& out, const MeasurementVector& m) {
    out << "MEAS " << m.size() << ' ' << m.seed << ' ' << to_string(m.mode) << '\n';
    if (!m.matrix_header.empty()) out << "# matrix " << m.matrix_header << '\n';
    for (std::size_t i = 0; i < m.size(); ++i)
        out << i << ' ' << format_double(m.y[i]) << ' ' << format_double(m.noise_budget[i]) << '\n';
}

MeasurementVector read_measurements(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw Error("measurement file is empty");
    std::istringstream hs(header);
    std::string tag, mode;
    std::size_t m = 0;
    MeasurementVector out;
    if (!(hs >> tag >> m >> out.seed >> mode) || tag != "MEAS")
        throw Error("malformed measurement header '" + header + "' (expected 'MEAS M seed mode')");
    out.mode = parse_mode(mode);
    out.y.resize(m);
    out.noise_budget.resize(m);
    std::string line;
    const std::string tagline = "# matrix ";
    if (in.peek() == '#') {
        std::getline(in, line);
        if (line.rfind(tagline, 0) != 0) throw Error("malformed measurement comment '" + line + "'");
        out.matrix_header = line.substr(tagline.size());
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (!std::getline(in, line)) throw Error("measurement file ends after " + std::to_string(i) + " of " + std::to_string(m) + " entries");
        std::istringstream ls(line);
        std::size_t index;
        std::string value, variance;
        if (!(ls >> index >> value >> variance) || index != i)
            throw Error("malformed measurement line " + std::to_string(i + 2) + ": '" + line + "'");
        char* end = nullptr;
        out.y[i] = std::strtod(value.c_str(), &end);
        if (*end) throw Error("bad measurement value '" + value + "'");
        out.noise_budget[i] = std::strtod(variance.c_str(), &end);
        if (*end) throw Error("bad measurement variance '" + variance + "'");
    }
    return out;
}

void write_measurements_file(const std::string& path, const MeasurementVector& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write measurement file " + path);
    write_measurements(out, m);
}

MeasurementVector read_measurements_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open measurement file " + path);
    return read_measurements(in);
}

}  // namespace qspi
