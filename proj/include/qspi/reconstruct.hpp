#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qspi/acquisition.hpp"
#include "qspi/sampling.hpp"

namespace qspi {

struct ReconstructionProblem {
    std::vector<double> y;
    const SensingMatrix* matrix = nullptr;
    std::size_t width = 0;
    std::size_t height = 0;
    double epsilon = 0.0;        // l2 residual budget, 0 = equality constraints
    double tolerance = 1e-5;     // relative to the RMS of y
    int max_iterations = 5000;

    void validate() const;
};

/// Problem over a measurement vector with the default noise budget
/// epsilon = sqrt(sum of per-entry variances).
ReconstructionProblem make_problem(const MeasurementVector& m, const SensingMatrix& a,
                                   std::size_t width, std::size_t height);

struct ReconstructionResult {
    std::vector<double> estimate;  // signed; nonnegativity is not enforced
    std::size_t width = 0, height = 0;
    double tv_value = 0;
    double residual_norm = 0;
    int iterations = 0;
    bool converged = false;

    /// Estimate as an intensity image (negative values clipped).
    BeamImage image(double pitch_um = 1.0) const;
};

/// Anisotropic TV with forward differences and no wraparound.
double tv_norm(std::span<const double> x, std::size_t width, std::size_t height);
double tv_norm(const BeamImage& image);

/// min TV(x) subject to ||A x - y||_2 <= epsilon, by first-order primal-dual
/// splitting from zero initial iterates.
ReconstructionResult reconstruct_tv(const ReconstructionProblem& problem);

/// Minimum-norm least-squares solution of A x = y.
ReconstructionResult reconstruct_ls(const ReconstructionProblem& problem);

/// 10 log10(peak^2 / MSE) with peak = max(truth); identical inputs return
/// kPsnrCap.
inline constexpr double kPsnrCap = 99.0;
double psnr(std::span<const double> estimate, std::span<const double> truth);

}  // namespace qspi
