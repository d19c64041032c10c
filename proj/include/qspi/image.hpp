#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qspi {

/// Error raised for any violated precondition or invalid data. The message is
/// the user-facing text (the CLI prints it verbatim).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Nonnegative 2-D intensity map, row-major, with a physical pixel pitch.
class BeamImage {
public:
    BeamImage() = default;
    BeamImage(std::size_t width, std::size_t height, double pitch_um = 1.0);
    BeamImage(std::size_t width, std::size_t height, std::vector<double> intensity,
              double pitch_um = 1.0);

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    std::size_t size() const { return data_.size(); }
    double pitch() const { return pitch_; }
    void set_pitch(double pitch_um);

    double& operator()(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
    double operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }

    std::span<const double> pixels() const { return data_; }
    std::span<double> pixels() { return data_; }

    double total() const;
    double max() const;
    bool same_shape(const BeamImage& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    /// Optional physical tag in milliwatts for the whole image.
    std::optional<double> total_power_mw;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    double pitch_ = 1.0;
    std::vector<double> data_;
};

/// Binary mask with the same layout as BeamImage; entries are 0 or 1.
using Mask = BeamImage;

void require_binary(const Mask& mask, const std::string& what);
void require_same_shape(const BeamImage& a, const BeamImage& b, const std::string& what);

double inner(const BeamImage& a, const BeamImage& b);

/// Centroid and 1/e^2 diameter (4 sigma, averaged over both axes) in pixels.
struct BeamMoments {
    double cx = 0;
    double cy = 0;
    double diameter = 0;
};
BeamMoments beam_moments(const BeamImage& image);

}  // namespace qspi
