#include "qspi/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qspi {

namespace {
void check_dims(std::size_t w, std::size_t h, double pitch) {
    if (w < 1 || h < 1) throw Error("image dimensions must be at least 1x1");
    if (!(pitch > 0) || !std::isfinite(pitch)) throw Error("pixel pitch must be positive");
}
}  // namespace

BeamImage::BeamImage(std::size_t width, std::size_t height, double pitch_um)
    : width_(width), height_(height), pitch_(pitch_um), data_(width * height, 0.0) {
    check_dims(width, height, pitch_um);
}

BeamImage::BeamImage(std::size_t width, std::size_t height, std::vector<double> intensity,
                     double pitch_um)
    : width_(width), height_(height), pitch_(pitch_um), data_(std::move(intensity)) {
    check_dims(width, height, pitch_um);
    if (data_.size() != width * height)
        throw Error("intensity has " + std::to_string(data_.size()) + " values, expected " +
                    std::to_string(width * height));
    for (double v : data_)
        if (!(v >= 0) || !std::isfinite(v)) throw Error("intensity values must be finite and >= 0");
}

void BeamImage::set_pitch(double pitch_um) {
    check_dims(width_, height_, pitch_um);
    pitch_ = pitch_um;
}

double BeamImage::total() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

double BeamImage::max() const {
    return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end());
}

void require_binary(const Mask& mask, const std::string& what) {
    for (double v : mask.pixels())
        if (v != 0.0 && v != 1.0) throw Error(what + ": mask entries must be 0 or 1");
}

void require_same_shape(const BeamImage& a, const BeamImage& b, const std::string& what) {
    if (!a.same_shape(b))
        throw Error(what + ": dimension mismatch (" + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                    std::to_string(b.height()) + ")");
}

double inner(const BeamImage& a, const BeamImage& b) {
    require_same_shape(a, b, "inner product");
    auto pa = a.pixels();
    auto pb = b.pixels();
    double s = 0;
    for (std::size_t i = 0; i < pa.size(); ++i) s += pa[i] * pb[i];
    return s;
}

BeamMoments beam_moments(const BeamImage& image) {
    const double total = image.total();
    if (!(total > 0)) throw Error("empty source profile");
    double sx = 0, sy = 0;
    for (std::size_t y = 0; y < image.height(); ++y)
        for (std::size_t x = 0; x < image.width(); ++x) {
            sx += (x + 0.5) * image(x, y);
            sy += (y + 0.5) * image(x, y);
        }
    BeamMoments m;
    m.cx = sx / total;
    m.cy = sy / total;
    double vx = 0, vy = 0;
    for (std::size_t y = 0; y < image.height(); ++y)
        for (std::size_t x = 0; x < image.width(); ++x) {
            const double dx = x + 0.5 - m.cx;
            const double dy = y + 0.5 - m.cy;
            vx += dx * dx * image(x, y);
            vy += dy * dy * image(x, y);
        }
    // I ~ exp(-2 r^2 / w^2) has sigma = w / 2 per axis, so D = 2w = 4 sigma.
    m.diameter = 2.0 * (std::sqrt(vx / total) + std::sqrt(vy / total));
    return m;
}

}  // namespace qspi
