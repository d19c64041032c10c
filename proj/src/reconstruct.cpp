#include "qspi/reconstruct.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace qspi {

void ReconstructionProblem::validate() const {
    if (!matrix) throw Error("reconstruction problem has no sensing matrix");
    if (width * height != matrix->cols())
        throw Error("image dimensions " + std::to_string(width) + "x" + std::to_string(height) +
                    " do not match N=" + std::to_string(matrix->cols()));
    if (y.size() != matrix->rows())
        throw Error("measurement vector has " + std::to_string(y.size()) + " entries, matrix has M=" +
                    std::to_string(matrix->rows()));
    if (!(epsilon >= 0) || !std::isfinite(epsilon)) throw Error("epsilon must be finite and >= 0");
    if (!(tolerance > 0) || !std::isfinite(tolerance)) throw Error("tolerance must be finite and > 0");
    if (max_iterations < 1) throw Error("max_iterations must be >= 1");
}

ReconstructionProblem make_problem(const MeasurementVector& m, const SensingMatrix& a,
                                   std::size_t width, std::size_t height) {
    ReconstructionProblem p;
    p.y = m.y;
    p.matrix = &a;
    p.width = width;
    p.height = height;
    double budget = 0;
    for (double v : m.noise_budget) budget += v;
    p.epsilon = std::sqrt(budget);
    return p;
}

BeamImage ReconstructionResult::image(double pitch_um) const {
    std::vector<double> v(estimate.size());
    std::transform(estimate.begin(), estimate.end(), v.begin(), [](double e) { return std::max(0.0, e); });
    return BeamImage(width, height, std::move(v), pitch_um);
}

double tv_norm(std::span<const double> x, std::size_t width, std::size_t height) {
    if (x.size() != width * height) throw Error("tv_norm: size does not match dimensions");
    double tv = 0;
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c) {
            const double v = x[r * width + c];
            if (c + 1 < width) tv += std::abs(x[r * width + c + 1] - v);
            if (r + 1 < height) tv += std::abs(x[(r + 1) * width + c] - v);
        }
    return tv;
}

double tv_norm(const BeamImage& image) { return tv_norm(image.pixels(), image.width(), image.height()); }

namespace {

constexpr double kPrimalStepRatio = 0.005;

double norm2(std::span<const double> v) {
    double s = 0;
    for (double e : v) s += e * e;
    return std::sqrt(s);
}

double residual(const SensingMatrix& a, std::span<const double> x, std::span<const double> y) {
    const auto ax = a.apply(x);
    double s = 0;
    for (std::size_t i = 0; i < ax.size(); ++i) s += (ax[i] - y[i]) * (ax[i] - y[i]);
    return std::sqrt(s);
}

// K = [grad; A / L] acting on images of size w x h. The gradient part is
// stored as 2N entries: horizontal differences then vertical differences.
struct Operator {
    const SensingMatrix& a;
    std::size_t w, h;
    double inv_l;

    std::size_t n() const { return w * h; }
    std::size_t m() const { return a.rows(); }

    void forward(std::span<const double> x, std::vector<double>& grad, std::vector<double>& meas) const {
        grad.assign(2 * n(), 0.0);
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c) {
                const std::size_t i = r * w + c;
                if (c + 1 < w) grad[i] = x[i + 1] - x[i];
                if (r + 1 < h) grad[n() + i] = x[i + w] - x[i];
            }
        meas = a.apply(x);
        for (double& v : meas) v *= inv_l;
    }

    void adjoint(std::span<const double> grad, std::span<const double> meas, std::vector<double>& x) const {
        std::vector<double> scaled(meas.begin(), meas.end());
        for (double& v : scaled) v *= inv_l;
        x = a.apply_transpose(scaled);
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c) {
                const std::size_t i = r * w + c;
                if (c + 1 < w) {
                    x[i + 1] += grad[i];
                    x[i] -= grad[i];
                }
                if (r + 1 < h) {
                    x[i + w] += grad[n() + i];
                    x[i] -= grad[n() + i];
                }
            }
    }
};

}  // namespace

ReconstructionResult reconstruct_tv(const ReconstructionProblem& problem) {
    problem.validate();
    const SensingMatrix& a = *problem.matrix;
    const std::size_t n = a.cols(), m = a.rows();

    // Normalize so the measurements have unit RMS and the data operator unit
    // norm; the gradient operator norm is at most sqrt(8).
    double scale = norm2(problem.y) / std::sqrt(static_cast<double>(m));
    if (!(scale > 0)) scale = 1.0;
    const double l = a.operator_norm();
    if (!(l > 0)) throw Error("sensing matrix is zero");
    const Operator k{a, problem.width, problem.height, 1.0 / l};
    std::vector<double> yhat(problem.y);
    for (double& v : yhat) v /= scale * l;
    const double eps_hat = problem.epsilon / (scale * l);
    const double feas_tol = problem.tolerance / l;

    // tau * sigma * ||K||^2 = 0.98. The small primal step was tuned on the
    // 32x32 phantom runs; with tau = sigma the ball constraint needs ~50x
    // more iterations.
    const double step = 0.99 / std::sqrt(8.0 + 1.0);
    const double tau = step * kPrimalStepRatio, sigma = step / kPrimalStepRatio;

    std::vector<double> x(n, 0.0), xbar(n, 0.0), p(2 * n, 0.0), q(m, 0.0);
    std::vector<double> kt, gx, ax, x_prev, p_prev, q_prev;
    ReconstructionResult result;
    result.width = problem.width;
    result.height = problem.height;

    for (int it = 1; it <= problem.max_iterations; ++it) {
        const bool check = it % 10 == 0 || it == problem.max_iterations;
        if (check) {
            x_prev = x;
            p_prev = p;
            q_prev = q;
        }
        // Primal step (no primal prox: the objective lives in the dual).
        k.adjoint(p, q, kt);
        for (std::size_t i = 0; i < n; ++i) {
            const double xn = x[i] - tau * kt[i];
            xbar[i] = 2.0 * xn - x[i];
            x[i] = xn;
        }
        // Dual steps: TV part projects onto the l-inf unit ball, data part is
        // the prox of the conjugate of the l2-ball indicator.
        k.forward(xbar, gx, ax);
        for (std::size_t i = 0; i < 2 * n; ++i) p[i] = std::clamp(p[i] + sigma * gx[i], -1.0, 1.0);
        double vn = 0;
        for (std::size_t i = 0; i < m; ++i) {
            q[i] = q[i] + sigma * (ax[i] - yhat[i]);
            vn += q[i] * q[i];
        }
        vn = std::sqrt(vn);
        const double shrink = vn > sigma * eps_hat ? 1.0 - sigma * eps_hat / vn : 0.0;
        for (double& v : q) v *= shrink;
        result.iterations = it;

        if (!check) continue;
        std::vector<double> dx(n), dp(2 * n), dq(m);
        for (std::size_t i = 0; i < n; ++i) dx[i] = x_prev[i] - x[i];
        for (std::size_t i = 0; i < 2 * n; ++i) dp[i] = p_prev[i] - p[i];
        for (std::size_t i = 0; i < m; ++i) dq[i] = q_prev[i] - q[i];
        std::vector<double> ktd, kgx, kax;
        k.adjoint(dp, dq, ktd);
        k.forward(dx, kgx, kax);
        double primal = 0, dual = 0;
        for (std::size_t i = 0; i < n; ++i) primal += std::pow(dx[i] / tau - ktd[i], 2);
        for (std::size_t i = 0; i < 2 * n; ++i) dual += std::pow(dp[i] / sigma - kgx[i], 2);
        for (std::size_t i = 0; i < m; ++i) dual += std::pow(dq[i] / sigma - kax[i], 2);
        primal = std::sqrt(primal / n);
        dual = std::sqrt(dual / (2 * n + m));

        k.forward(x, kgx, kax);
        double feas = 0;
        for (std::size_t i = 0; i < m; ++i) feas += (kax[i] - yhat[i]) * (kax[i] - yhat[i]);
        feas = std::sqrt(feas);
        if (primal < problem.tolerance && dual < problem.tolerance && feas <= eps_hat + feas_tol) {
            result.converged = true;
            break;
        }
    }

    result.estimate = x;
    for (double& v : result.estimate) v *= scale;
    result.tv_value = tv_norm(result.estimate, problem.width, problem.height);
    result.residual_norm = residual(a, result.estimate, problem.y);
    if (result.residual_norm > problem.epsilon + problem.tolerance * scale) result.converged = false;
    return result;
}

ReconstructionResult reconstruct_ls(const ReconstructionProblem& problem) {
    problem.validate();
    const SensingMatrix& a = *problem.matrix;
    const auto dense = a.dense();
    Eigen::MatrixXd mat(a.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) mat(r, c) = dense[r * a.cols() + c];
    const Eigen::Map<const Eigen::VectorXd> y(problem.y.data(), static_cast<Eigen::Index>(problem.y.size()));
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(mat);
    const Eigen::VectorXd x = cod.solve(y);

    ReconstructionResult result;
    result.width = problem.width;
    result.height = problem.height;
    result.estimate.assign(x.data(), x.data() + x.size());
    result.tv_value = tv_norm(result.estimate, problem.width, problem.height);
    result.residual_norm = residual(a, result.estimate, problem.y);
    result.iterations = 1;
    double scale = norm2(problem.y) / std::sqrt(static_cast<double>(a.rows()));
    if (!(scale > 0)) scale = 1.0;
    result.converged = result.residual_norm <= problem.epsilon + problem.tolerance * scale;
    return result;
}

double psnr(std::span<const double> estimate, std::span<const double> truth) {
    if (estimate.size() != truth.size()) throw Error("psnr: dimension mismatch");
    if (truth.empty()) throw Error("psnr: empty images");
    const double peak = *std::max_element(truth.begin(), truth.end());
    if (!(peak > 0)) throw Error("psnr: truth is identically zero");
    double mse = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) mse += (estimate[i] - truth[i]) * (estimate[i] - truth[i]);
    mse /= static_cast<double>(truth.size());
    if (mse == 0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

}  // namespace qspi
