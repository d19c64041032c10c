#include "qspi/scenes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qspi::scenes {

BeamImage gaussian(std::size_t width, std::size_t height, double pitch_um, double radius_um,
                   double truncate) {
    if (!(radius_um > 0)) throw Error("gaussian radius must be positive");
    BeamImage img(width, height, pitch_um);
    const double cx = width / 2.0, cy = height / 2.0;
    const double w = radius_um / pitch_um;
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
            const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
            const double r2 = dx * dx + dy * dy;
            if (truncate > 0 && r2 > truncate * truncate * w * w) continue;
            img(x, y) = std::exp(-2.0 * r2 / (w * w));
        }
    return img;
}

BeamImage uniform(std::size_t width, std::size_t height, double pitch_um, double value) {
    return BeamImage(width, height, std::vector<double>(width * height, value), pitch_um);
}

Mask checkerboard(std::size_t width, std::size_t height, std::size_t square, double pitch_um) {
    if (square < 1) throw Error("checkerboard square must be >= 1 pixel");
    Mask m(width, height, pitch_um);
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) m(x, y) = ((x / square + y / square) % 2 == 0) ? 1 : 0;
    return m;
}

Mask happy_face(std::size_t width, std::size_t height, double diameter_px, double pitch_um) {
    Mask m(width, height, pitch_um);
    const double cx = width / 2.0, cy = height / 2.0, r = diameter_px / 2.0;
    const double eye_r = 0.12 * r;
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
            const double dx = (x + 0.5 - cx) / r, dy = (y + 0.5 - cy) / r;
            const double rr = std::hypot(dx, dy);
            if (rr > 1.0) continue;
            bool dark = false;
            if (std::hypot(dx + 0.35, dy + 0.3) * r < eye_r) dark = true;
            if (std::hypot(dx - 0.35, dy + 0.3) * r < eye_r) dark = true;
            // Smile: lower arc of a ring.
            const double ring = std::hypot(dx, dy + 0.05);
            if (dy > 0.15 && ring > 0.5 && ring < 0.62) dark = true;
            m(x, y) = dark ? 0 : 1;
        }
    return m;
}

Mask letter_e(std::size_t width, std::size_t height, double pitch_um) {
    Mask m(width, height, pitch_um);
    const auto x0 = static_cast<std::size_t>(std::lround(width * 0.25));
    const auto x1 = static_cast<std::size_t>(std::lround(width * 0.75));
    const auto y0 = static_cast<std::size_t>(std::lround(height * 0.1875));
    const auto y1 = static_cast<std::size_t>(std::lround(height * 0.8125));
    const std::size_t stroke = std::max<std::size_t>(1, (y1 - y0) / 5);
    const std::size_t ym = (y0 + y1) / 2;
    const std::size_t xmid = x0 + (x1 - x0) * 4 / 5;
    for (std::size_t y = y0; y < y1; ++y)
        for (std::size_t x = x0; x < x1; ++x) {
            const bool spine = x < x0 + stroke;
            const bool top = y < y0 + stroke;
            const bool bottom = y >= y1 - stroke;
            const bool middle = y + stroke / 2 >= ym && y < ym + (stroke + 1) / 2 && x < xmid;
            if (spine || top || bottom || middle) m(x, y) = 1;
        }
    return m;
}

Mask cross(std::size_t width, std::size_t height, double angle_deg, double bar_width_px,
           double pitch_um) {
    Mask m(width, height, pitch_um);
    const double a = angle_deg * std::numbers::pi / 180.0;
    const double c = std::cos(a), s = std::sin(a);
    const double cx = width / 2.0, cy = height / 2.0;
    const double half = bar_width_px / 2.0;
    const double reach = 0.45 * std::min(width, height);
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
            const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
            const double u = c * dx + s * dy, v = -s * dx + c * dy;
            const bool on = (std::abs(v) <= half && std::abs(u) <= reach) ||
                            (std::abs(u) <= half && std::abs(v) <= reach);
            m(x, y) = on ? 1 : 0;
        }
    return m;
}

Mask line(std::size_t width, std::size_t height, double center_px, int width_px,
          Orientation orientation, double pitch_um) {
    if (width_px < 1) throw Error("line width must be >= 1 pixel");
    Mask m(width, height, pitch_um);
    const std::size_t extent = orientation == Orientation::vertical ? width : height;
    const long start = std::lround(center_px - width_px / 2.0);
    if (start < 0 || start + width_px > static_cast<long>(extent))
        throw Error("line at position " + std::to_string(center_px) + " does not fit in the image");
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
            const long k = static_cast<long>(orientation == Orientation::vertical ? x : y);
            m(x, y) = (k >= start && k < start + width_px) ? 1 : 0;
        }
    return m;
}

Mask block(std::size_t width, std::size_t height, std::size_t size, std::size_t bx, std::size_t by,
           double pitch_um) {
    Mask m(width, height, pitch_um);
    if (size == 0 || bx * size >= width || by * size >= height) throw Error("raster block outside image");
    // Edge blocks are clipped to the image.
    for (std::size_t y = by * size; y < std::min((by + 1) * size, height); ++y)
        for (std::size_t x = bx * size; x < std::min((bx + 1) * size, width); ++x) m(x, y) = 1;
    return m;
}

Mask left_half(std::size_t width, std::size_t height, double pitch_um) {
    Mask m(width, height, pitch_um);
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width / 2; ++x) m(x, y) = 1;
    return m;
}

Mask threshold(const BeamImage& image, double fraction) {
    Mask m(image.width(), image.height(), image.pitch());
    const double level = fraction * image.max();
    for (std::size_t i = 0; i < image.size(); ++i) m.pixels()[i] = image.pixels()[i] >= level ? 1 : 0;
    return m;
}

BeamImage apply(const BeamImage& image, const Mask& mask) {
    require_same_shape(image, mask, "apply mask");
    BeamImage out = image;
    for (std::size_t i = 0; i < out.size(); ++i) out.pixels()[i] *= mask.pixels()[i];
    out.total_power_mw.reset();
    return out;
}

}  // namespace qspi::scenes
