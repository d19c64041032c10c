#pragma once

// Test scenes and DMD mask generators.

#include <cstddef>

#include "qspi/image.hpp"

namespace qspi::scenes {

/// Gaussian I = exp(-2 r^2 / w^2) centered on the frame, zeroed beyond
/// truncate * w. The radius is in micrometers.
BeamImage gaussian(std::size_t width, std::size_t height, double pitch_um, double radius_um,
                   double truncate = 2.0);

BeamImage uniform(std::size_t width, std::size_t height, double pitch_um = 1.0, double value = 1.0);

/// On/off checkerboard with squares of `square` pixels.
Mask checkerboard(std::size_t width, std::size_t height, std::size_t square = 1,
                  double pitch_um = 1.0);

/// Bright disk with dark eyes and a dark smile; diameter in pixels.
Mask happy_face(std::size_t width, std::size_t height, double diameter_px, double pitch_um = 1.0);

/// Block letter 'E' filling the central ~5/8 of the frame.
Mask letter_e(std::size_t width, std::size_t height, double pitch_um = 1.0);

/// Two perpendicular bars crossing at the frame center, rotated by angle_deg.
Mask cross(std::size_t width, std::size_t height, double angle_deg, double bar_width_px,
           double pitch_um = 1.0);

enum class Orientation { vertical, horizontal };

/// Full-length bar `width_px` pixels wide (integer), its center at `center_px`
/// along the scan axis (continuous pixel coordinates).
Mask line(std::size_t width, std::size_t height, double center_px, int width_px,
          Orientation orientation, double pitch_um = 1.0);

/// Square raster pixel of `size` pixels at block coordinates (bx, by).
Mask block(std::size_t width, std::size_t height, std::size_t size, std::size_t bx, std::size_t by,
           double pitch_um = 1.0);

Mask left_half(std::size_t width, std::size_t height, double pitch_um = 1.0);

/// Pixels at or above `fraction` of the image peak.
Mask threshold(const BeamImage& image, double fraction);

/// Elementwise product (imprints a mask on a beam).
BeamImage apply(const BeamImage& image, const Mask& mask);

}  // namespace qspi::scenes
