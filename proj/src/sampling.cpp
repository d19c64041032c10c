#include "qspi/sampling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "qspi/rng.hpp"

namespace qspi {

namespace {
// Independent streams derived from one user seed.
constexpr std::uint64_t kColumnStream = 1;
constexpr std::uint64_t kRowStream = 2;
constexpr std::uint64_t kSelectStream = 3;

int sylvester(std::size_t r, std::size_t c) { return (std::popcount(r & c) & 1) ? -1 : 1; }
}  // namespace

bool is_power_of_two(std::size_t n) { return n >= 1 && (n & (n - 1)) == 0; }

HadamardMatrix hadamard(std::size_t order) {
    if (!is_power_of_two(order))
        throw Error("hadamard order " + std::to_string(order) + " is not a power of 2");
    HadamardMatrix h;
    h.order = order;
    h.entries.resize(order * order);
    for (std::size_t r = 0; r < order; ++r)
        for (std::size_t c = 0; c < order; ++c) h.entries[r * order + c] = static_cast<std::int8_t>(sylvester(r, c));
    return h;
}

ScrambledBlockHadamard::ScrambledBlockHadamard(const SbhOptions& options) : opt_(options) {
    const std::size_t n = opt_.n, b = opt_.block, w = opt_.window;
    if (n < 1) throw Error("operator size must be >= 1");
    if (!is_power_of_two(b)) throw Error("block size " + std::to_string(b) + " is not a power of 2");
    if (n % b != 0) throw Error("block size " + std::to_string(b) + " does not divide N=" + std::to_string(n));
    if (w < 1) throw Error("scramble window must be >= 1");
    if (n % w != 0) throw Error("scramble window " + std::to_string(w) + " does not divide N=" + std::to_string(n));

    pixel_of_core_.resize(n);
    core_row_.resize(n);
    std::iota(pixel_of_core_.begin(), pixel_of_core_.end(), 0u);
    std::iota(core_row_.begin(), core_row_.end(), 0u);

    if (opt_.scramble) {
        Rng cols(opt_.seed, kColumnStream);
        const std::size_t windows = n / w;
        std::vector<std::vector<std::uint32_t>> local(windows, std::vector<std::uint32_t>(w));
        for (auto& perm : local) {
            std::iota(perm.begin(), perm.end(), 0u);
            cols.shuffle(perm.begin(), perm.end());
        }
        std::vector<std::uint32_t> placement(windows);
        std::iota(placement.begin(), placement.end(), 0u);
        cols.shuffle(placement.begin(), placement.end());

        const std::size_t blocks = n / b;
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t s = (j % b) * blocks + j / b;
            const std::size_t k = s / w;
            pixel_of_core_[j] = static_cast<std::uint32_t>(placement[k] * w + local[k][s % w]);
        }
        Rng rows(opt_.seed, kRowStream);
        rows.shuffle(core_row_.begin(), core_row_.end());
    }
    core_of_pixel_.resize(n);
    for (std::size_t j = 0; j < n; ++j) core_of_pixel_[pixel_of_core_[j]] = static_cast<std::uint32_t>(j);
}

int ScrambledBlockHadamard::entry(std::size_t row, std::size_t col) const {
    const std::size_t a = core_row_[row], j = core_of_pixel_[col], b = opt_.block;
    if (a / b != j / b) return 0;
    return sylvester(a % b, j % b);
}

void ScrambledBlockHadamard::row(std::size_t r, std::vector<std::uint32_t>& cols,
                                 std::vector<std::int8_t>& signs) const {
    const std::size_t a = core_row_[r], b = opt_.block, start = a / b * b;
    std::vector<std::pair<std::uint32_t, std::int8_t>> nz;
    nz.reserve(b);
    for (std::size_t i = 0; i < b; ++i)
        nz.emplace_back(pixel_of_core_[start + i], static_cast<std::int8_t>(sylvester(a % b, i)));
    std::sort(nz.begin(), nz.end());
    cols.clear();
    signs.clear();
    for (auto [c, s] : nz) {
        cols.push_back(c);
        signs.push_back(s);
    }
}

std::vector<std::int8_t> ScrambledBlockHadamard::dense() const {
    std::vector<std::int8_t> out(opt_.n * opt_.n, 0);
    std::vector<std::uint32_t> cols;
    std::vector<std::int8_t> signs;
    for (std::size_t r = 0; r < opt_.n; ++r) {
        row(r, cols, signs);
        for (std::size_t k = 0; k < cols.size(); ++k) out[r * opt_.n + cols[k]] = signs[k];
    }
    return out;
}

SensingMatrix::SensingMatrix(std::size_t rows, std::size_t cols, std::span<const int> dense)
    : cols_(cols) {
    if (dense.size() != rows * cols) throw Error("dense matrix size does not match M x N");
    rows_.resize(rows);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const int v = dense[r * cols + c];
            if (v != 0 && v != 1 && v != -1) throw Error("sensing matrix entries must be -1, 0 or +1");
            if (v != 0) {
                rows_[r].cols.push_back(static_cast<std::uint32_t>(c));
                rows_[r].signs.push_back(static_cast<std::int8_t>(v));
            }
        }
    row_ids.resize(rows);
    std::iota(row_ids.begin(), row_ids.end(), std::size_t{0});
}

int SensingMatrix::entry(std::size_t r, std::size_t c) const {
    const Row& row = rows_.at(r);
    auto it = std::lower_bound(row.cols.begin(), row.cols.end(), static_cast<std::uint32_t>(c));
    if (it == row.cols.end() || *it != c) return 0;
    return row.signs[static_cast<std::size_t>(it - row.cols.begin())];
}

std::vector<int> SensingMatrix::dense() const {
    std::vector<int> out(rows() * cols_, 0);
    for (std::size_t r = 0; r < rows(); ++r)
        for (std::size_t k = 0; k < rows_[r].cols.size(); ++k) out[r * cols_ + rows_[r].cols[k]] = rows_[r].signs[k];
    return out;
}

std::vector<double> SensingMatrix::apply(std::span<const double> x) const {
    if (x.size() != cols_) throw Error("sensing matrix expects " + std::to_string(cols_) + " values, got " + std::to_string(x.size()));
    std::vector<double> y(rows(), 0.0);
    for (std::size_t r = 0; r < rows(); ++r) {
        double s = 0;
        const Row& row = rows_[r];
        for (std::size_t k = 0; k < row.cols.size(); ++k) s += row.signs[k] * x[row.cols[k]];
        y[r] = s;
    }
    return y;
}

std::vector<double> SensingMatrix::apply_transpose(std::span<const double> y) const {
    if (y.size() != rows()) throw Error("sensing matrix transpose expects " + std::to_string(rows()) + " values");
    std::vector<double> x(cols_, 0.0);
    for (std::size_t r = 0; r < rows(); ++r) {
        const Row& row = rows_[r];
        for (std::size_t k = 0; k < row.cols.size(); ++k) x[row.cols[k]] += row.signs[k] * y[r];
    }
    return x;
}

double SensingMatrix::operator_norm() const {
    if (from_sbh) return std::sqrt(static_cast<double>(block_size));
    if (rows() == 0) return 0.0;
    std::vector<double> v(cols_, 1.0 / std::sqrt(static_cast<double>(cols_)));
    double lambda = 0;
    for (int it = 0; it < 500; ++it) {
        auto w = apply_transpose(apply(v));
        double norm = 0;
        for (double e : w) norm += e * e;
        norm = std::sqrt(norm);
        if (norm == 0) return 0.0;
        const double prev = lambda;
        lambda = norm;
        for (std::size_t i = 0; i < cols_; ++i) v[i] = w[i] / norm;
        if (it > 10 && std::abs(lambda - prev) <= 1e-12 * lambda) break;
    }
    // Power iteration approaches the norm from below.
    return std::sqrt(lambda) * 1.01;
}

std::string SensingMatrix::header() const {
    std::ostringstream os;
    os << "SBH " << cols_ << ' ' << block_size << ' ' << rows() << ' ' << seed << ' ' << window;
    return os.str();
}

SensingMatrix select_rows(const ScrambledBlockHadamard& w, std::size_t m, std::uint64_t seed) {
    const std::size_t n = w.size();
    if (m < 1 || m > n)
        throw Error("row count M=" + std::to_string(m) + " must satisfy 1 <= M <= N=" + std::to_string(n));
    std::vector<std::size_t> ids(n);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    Rng rng(seed, kSelectStream);
    // Partial Fisher-Yates: the first m entries are a uniform sample in order.
    for (std::size_t i = 0; i < m; ++i) std::swap(ids[i], ids[i + rng.below(n - i)]);
    ids.resize(m);

    SensingMatrix a;
    a.cols_ = n;
    a.rows_.resize(m);
    for (std::size_t i = 0; i < m; ++i) w.row(ids[i], a.rows_[i].cols, a.rows_[i].signs);
    a.row_ids = std::move(ids);
    a.block_size = w.block();
    a.seed = w.options().seed;
    a.window = w.options().window;
    a.from_sbh = true;
    return a;
}

SensingMatrix make_sensing_matrix(const SbhOptions& options, std::size_t m) {
    return select_rows(ScrambledBlockHadamard(options), m, options.seed);
}

MaskPair to_mask_pair(const SensingMatrix& matrix, std::size_t row, std::size_t width,
                      std::size_t height) {
    if (width * height != matrix.cols())
        throw Error("mask dimensions " + std::to_string(width) + "x" + std::to_string(height) +
                    " do not match N=" + std::to_string(matrix.cols()));
    MaskPair pair{Mask(width, height), Mask(width, height)};
    const auto& r = matrix.row(row);
    for (std::size_t k = 0; k < r.cols.size(); ++k)
        (r.signs[k] > 0 ? pair.positive : pair.negative).pixels()[r.cols[k]] = 1.0;
    return pair;
}

std::vector<MaskPair> to_mask_pairs(const SensingMatrix& matrix, std::size_t width,
                                    std::size_t height) {
    std::vector<MaskPair> out;
    out.reserve(matrix.rows());
    for (std::size_t r = 0; r < matrix.rows(); ++r) out.push_back(to_mask_pair(matrix, r, width, height));
    return out;
}

void write_matrix(std::ostream& out, const SensingMatrix& matrix) {
    out << matrix.header() << '\n';
    std::string line;
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        line.clear();
        const auto& row = matrix.row(r);
        std::size_t k = 0;
        for (std::size_t c = 0; c < matrix.cols(); ++c) {
            if (c) line += ' ';
            if (k < row.cols.size() && row.cols[k] == c) {
                line += row.signs[k] > 0 ? "+1" : "-1";
                ++k;
            } else {
                line += '0';
            }
        }
        out << line << '\n';
    }
}

SensingMatrix read_matrix(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw Error("matrix file is empty");
    std::istringstream hs(header);
    std::string tag;
    std::size_t n = 0, b = 0, m = 0, window = 0;
    std::uint64_t seed = 0;
    if (!(hs >> tag >> n >> b >> m >> seed >> window) || tag != "SBH")
        throw Error("malformed matrix header '" + header + "' (expected 'SBH N B M seed window')");
    std::vector<int> dense(m * n);
    std::string line;
    for (std::size_t r = 0; r < m; ++r) {
        if (!std::getline(in, line)) throw Error("matrix file ends after " + std::to_string(r) + " of " + std::to_string(m) + " rows");
        std::istringstream ls(line);
        std::string tok;
        std::size_t c = 0;
        while (ls >> tok) {
            if (c >= n) throw Error("matrix row " + std::to_string(r) + " has more than N entries");
            if (tok == "+1" || tok == "1") dense[r * n + c] = 1;
            else if (tok == "-1") dense[r * n + c] = -1;
            else if (tok == "0") dense[r * n + c] = 0;
            else throw Error("matrix row " + std::to_string(r) + ": bad entry '" + tok + "'");
            ++c;
        }
        if (c != n) throw Error("matrix row " + std::to_string(r) + " has " + std::to_string(c) + " entries, expected " + std::to_string(n));
    }
    SensingMatrix a(m, n, dense);
    a.block_size = b;
    a.seed = seed;
    a.window = window;

    // Recognize matrices produced by the generator so the exact norm and the
    // original row ids are recovered.
    try {
        if (m >= 1 && m <= n) {
            SensingMatrix g = make_sensing_matrix({n, b, seed, window, true}, m);
            if (g.dense() == dense) {
                a.row_ids = g.row_ids;
                a.from_sbh = true;
            }
        }
    } catch (const Error&) {
    }
    return a;
}

void write_matrix_file(const std::string& path, const SensingMatrix& matrix) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write matrix file " + path);
    write_matrix(out, matrix);
}

SensingMatrix read_matrix_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open matrix file " + path);
    return read_matrix(in);
}

}  // namespace qspi
