#include "qspi/source.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <mutex>

namespace qspi {

void SourceConfig::validate() const {
    if (!(gain > 1)) throw Error("gain must be > 1");
    if (!(probe_waist_um > 0) || !(pump_waist_um > 0)) throw Error("beam waists must be positive");
    if (!(max_squeezing_db > 0)) throw Error("max_squeezing_db must be positive");
    if (!(angular_beam_diameter_mrad >= coherence_area_angle_mrad) || !(coherence_area_angle_mrad > 0))
        throw Error("angular beam diameter must be >= coherence area angle > 0");
    if (mode_count < 1) throw Error("mode_count must be >= 1");
    if (!(cutoff_cycles_per_pump_waist > 0)) throw Error("filter cutoff must be positive");
}

namespace {

std::mutex fftw_planner_mutex;

double signed_frequency(std::size_t k, std::size_t n, double pitch) {
    const double kk = (k <= n / 2) ? static_cast<double>(k) : static_cast<double>(k) - n;
    return kk / (n * pitch);
}

}  // namespace

BeamImage lowpass_fourier(const BeamImage& image, const SourceConfig& source) {
    source.validate();
    if (image.size() == 0 || !(image.total() > 0)) throw Error("empty source profile");

    const std::size_t w = image.width(), h = image.height();
    std::vector<std::complex<double>> field(w * h);
    for (std::size_t i = 0; i < field.size(); ++i) field[i] = std::sqrt(image.pixels()[i]);

    auto* data = reinterpret_cast<fftw_complex*>(field.data());
    fftw_plan forward, backward;
    {
        std::lock_guard lock(fftw_planner_mutex);
        forward = fftw_plan_dft_2d(int(h), int(w), data, data, FFTW_FORWARD, FFTW_ESTIMATE);
        backward = fftw_plan_dft_2d(int(h), int(w), data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(forward);

    // Amplitude transfer exp(-(f/fc)^2) gives a power transfer of
    // exp(-2 (f/fc)^2), i.e. 1/e^2 at the cutoff.
    const double fc = source.cutoff_frequency();
    for (std::size_t ky = 0; ky < h; ++ky) {
        const double fy = signed_frequency(ky, h, image.pitch());
        for (std::size_t kx = 0; kx < w; ++kx) {
            const double fx = signed_frequency(kx, w, image.pitch());
            field[ky * w + kx] *= std::exp(-(fx * fx + fy * fy) / (fc * fc));
        }
    }
    fftw_execute(backward);
    {
        std::lock_guard lock(fftw_planner_mutex);
        fftw_destroy_plan(forward);
        fftw_destroy_plan(backward);
    }

    const double norm = 1.0 / static_cast<double>(w * h);
    std::vector<double> out(w * h);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(0.0, std::norm(field[i] * norm));
    BeamImage result(w, h, std::move(out), image.pitch());
    if (image.total_power_mw)
        result.total_power_mw = *image.total_power_mw * result.total() / image.total();
    return result;
}

double lowpass_power_fraction(const BeamImage& image, const SourceConfig& source) {
    return lowpass_fourier(image, source).total() / image.total();
}

CoherenceGrid::CoherenceGrid(const BeamImage& probe, const BeamImage& conjugate,
                             double cell_edge_px, double center_x, double center_y)
    : width_(probe.width()), height_(probe.height()), edge_(cell_edge_px), cx_(center_x),
      cy_(center_y) {
    require_same_shape(probe, conjugate, "coherence grid");
    if (!(cell_edge_px >= 1.0)) throw Error("coherence cell edge below one pixel");

    std::map<std::pair<long, long>, std::size_t> index;
    pixel_cell_.resize(probe.size());
    for (std::size_t y = 0; y < height_; ++y)
        for (std::size_t x = 0; x < width_; ++x) {
            const auto lx = static_cast<long>(std::floor((x + 0.5 - cx_) / edge_ + 0.5));
            const auto ly = static_cast<long>(std::floor((y + 0.5 - cy_) / edge_ + 0.5));
            index.try_emplace({ly, lx}, 0);
        }
    // Row-major cell ordering (by lattice y, then x).
    std::size_t next = 0;
    for (auto& [key, id] : index) {
        id = next++;
        lattice_.push_back({key.second, key.first});
    }
    cells_.resize(index.size());
    for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i].id = i;
    for (std::size_t y = 0; y < height_; ++y)
        for (std::size_t x = 0; x < width_; ++x) {
            const auto lx = static_cast<long>(std::floor((x + 0.5 - cx_) / edge_ + 0.5));
            const auto ly = static_cast<long>(std::floor((y + 0.5 - cy_) / edge_ + 0.5));
            const std::size_t c = index.at({ly, lx});
            const std::size_t p = y * width_ + x;
            pixel_cell_[p] = c;
            cells_[c].pixels.push_back(p);
            cells_[c].probe_flux += probe.pixels()[p];
            cells_[c].conjugate_flux += conjugate.pixels()[p];
        }
    auto centre = index.find({0, 0});
    central_ = centre == index.end() ? 0 : centre->second;
}

double CoherenceGrid::probe_total() const {
    double s = 0;
    for (const auto& c : cells_) s += c.probe_flux;
    return s;
}

double CoherenceGrid::conjugate_total() const {
    double s = 0;
    for (const auto& c : cells_) s += c.conjugate_flux;
    return s;
}

TwinBeamPair build_twin_pair(const BeamImage& seed, const SourceConfig& source,
                             int cells_per_diameter) {
    if (cells_per_diameter < 1) throw Error("cells_per_diameter must be >= 1");
    BeamImage probe = lowpass_fourier(seed, source);
    for (double& v : probe.pixels()) v *= source.gain;
    if (probe.total_power_mw) *probe.total_power_mw *= source.gain;
    return pair_from_probe(probe, source, cells_per_diameter);
}

TwinBeamPair pair_from_probe(const BeamImage& probe, const SourceConfig& source, int cells_per_diameter) {
    source.validate();
    if (cells_per_diameter < 1) throw Error("cells_per_diameter must be >= 1");
    TwinBeamPair pair;
    pair.source = source;
    pair.probe = probe;
    pair.conjugate = probe;
    const double k = (source.gain - 1.0) / source.gain;
    for (double& v : pair.conjugate.pixels()) v *= k;
    if (probe.total_power_mw) pair.conjugate.total_power_mw = *probe.total_power_mw * k;

    const BeamMoments m = beam_moments(pair.probe);
    pair.beam_diameter_px = m.diameter;
    const double edge = m.diameter / cells_per_diameter;
    if (edge < 1.0)
        throw Error("cells_per_diameter " + std::to_string(cells_per_diameter) +
                    " exceeds pixel resolution (beam diameter " + std::to_string(m.diameter) +
                    " px)");
    pair.grid = CoherenceGrid(pair.probe, pair.conjugate, edge, m.cx, m.cy);
    return pair;
}

MaskTransmission mask_transmission(const BeamImage& arm, const CoherenceGrid& grid,
                                   const Mask& mask) {
    require_same_shape(arm, mask, "mask transmission");
    require_binary(mask, "mask transmission");
    if (arm.width() != grid.width() || arm.height() != grid.height())
        throw Error("mask transmission: grid does not match arm dimensions");

    MaskTransmission out;
    out.per_cell.assign(grid.size(), 0.0);
    double passed_total = 0, total = 0;
    for (std::size_t c = 0; c < grid.size(); ++c) {
        double cell_total = 0, passed = 0;
        for (std::size_t p : grid.cells()[c].pixels) {
            cell_total += arm.pixels()[p];
            passed += arm.pixels()[p] * mask.pixels()[p];
        }
        // Dark cells carry no flux; their transmission is read from the mask
        // geometry so the vector stays well-defined.
        if (cell_total > 0) {
            out.per_cell[c] = passed / cell_total;
        } else {
            double on = 0;
            for (std::size_t p : grid.cells()[c].pixels) on += mask.pixels()[p];
            out.per_cell[c] = on / static_cast<double>(grid.cells()[c].pixels.size());
        }
        passed_total += passed;
        total += cell_total;
    }
    if (!(total > 0)) throw Error("empty source profile");
    out.eta_total = passed_total / total;
    return out;
}

}  // namespace qspi
