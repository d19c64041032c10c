#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qspi/image.hpp"

namespace qspi {

/// Sylvester Hadamard matrix, entries +-1, H H^T = n I.
struct HadamardMatrix {
    std::size_t order = 0;
    std::vector<std::int8_t> entries;  // row-major

    int operator()(std::size_t r, std::size_t c) const { return entries[r * order + c]; }
};

HadamardMatrix hadamard(std::size_t order);

/// In-place unnormalized Walsh-Hadamard transform in Sylvester (natural)
/// order; length must be a power of two.
template <class T>
void fwht(std::span<T> v) {
    for (std::size_t h = 1; h < v.size(); h <<= 1)
        for (std::size_t i = 0; i < v.size(); i += h << 1)
            for (std::size_t j = i; j < i + h; ++j) {
                const T a = v[j], b = v[j + h];
                v[j] = a + b;
                v[j + h] = a - b;
            }
}

bool is_power_of_two(std::size_t n);

struct SbhOptions {
    std::size_t n = 1024;        // signal length
    std::size_t block = 32;      // Hadamard block size
    std::uint64_t seed = 1;
    std::size_t window = 32;     // semilocal randomizer width
    bool scramble = true;        // false disables all permutations (test hook)
};

/// Full N x N scrambled block Hadamard operator
///   W = P_out * diag(H_B, ..., H_B) * P_in.
///
/// P_in routes core input j = b*B + i to a pixel: the index is first
/// stride-interleaved to s = i*(N/B) + b so every block is spread over all
/// windows, then permuted uniformly inside its window of `window` consecutive
/// positions, and finally the windows themselves are placed by one uniform
/// permutation. P_out is a uniform row permutation. Rows have B nonzero
/// entries of +-1 and are mutually orthogonal, W W^T = B I.
class ScrambledBlockHadamard {
public:
    explicit ScrambledBlockHadamard(const SbhOptions& options);

    const SbhOptions& options() const { return opt_; }
    std::size_t size() const { return opt_.n; }
    std::size_t block() const { return opt_.block; }

    int entry(std::size_t row, std::size_t col) const;
    /// Nonzero columns and signs of a row.
    void row(std::size_t r, std::vector<std::uint32_t>& cols, std::vector<std::int8_t>& signs) const;
    std::vector<std::int8_t> dense() const;

    /// y = W x via per-block fast transforms.
    template <class T>
    std::vector<T> apply(std::span<const T> x) const;

    std::size_t pixel_of_core(std::size_t j) const { return pixel_of_core_[j]; }
    std::size_t core_row(std::size_t r) const { return core_row_[r]; }

private:
    SbhOptions opt_;
    std::vector<std::uint32_t> pixel_of_core_;
    std::vector<std::uint32_t> core_of_pixel_;
    std::vector<std::uint32_t> core_row_;
};

template <class T>
std::vector<T> ScrambledBlockHadamard::apply(std::span<const T> x) const {
    if (x.size() != opt_.n) throw Error("operator input has wrong length");
    std::vector<T> core(opt_.n);
    for (std::size_t j = 0; j < opt_.n; ++j) core[j] = x[pixel_of_core_[j]];
    for (std::size_t b = 0; b < opt_.n; b += opt_.block)
        fwht(std::span<T>(core.data() + b, opt_.block));
    std::vector<T> y(opt_.n);
    for (std::size_t r = 0; r < opt_.n; ++r) y[r] = core[core_row_[r]];
    return y;
}

/// M x N sensing matrix stored by rows (column index + sign per nonzero).
class SensingMatrix {
public:
    struct Row {
        std::vector<std::uint32_t> cols;
        std::vector<std::int8_t> signs;
    };

    SensingMatrix() = default;
    /// Explicit rows from dense {-1, 0, +1} values (row-major, M x N).
    SensingMatrix(std::size_t rows, std::size_t cols, std::span<const int> dense);

    std::size_t rows() const { return rows_.size(); }
    std::size_t cols() const { return cols_; }
    const Row& row(std::size_t i) const { return rows_[i]; }
    int entry(std::size_t r, std::size_t c) const;
    std::vector<int> dense() const;

    std::vector<double> apply(std::span<const double> x) const;
    std::vector<double> apply_transpose(std::span<const double> y) const;

    /// Spectral norm: sqrt(B) for rows of a scrambled block Hadamard operator,
    /// otherwise estimated by power iteration.
    double operator_norm() const;

    // Provenance (header of the text format).
    std::size_t block_size = 0;
    std::uint64_t seed = 0;
    std::size_t window = 0;
    std::vector<std::size_t> row_ids;
    bool from_sbh = false;

    /// Header line `SBH N B M seed window`.
    std::string header() const;

private:
    friend SensingMatrix select_rows(const ScrambledBlockHadamard&, std::size_t, std::uint64_t);
    std::size_t cols_ = 0;
    std::vector<Row> rows_;
};

SensingMatrix select_rows(const ScrambledBlockHadamard& w, std::size_t m, std::uint64_t seed);

/// Convenience: build W and select M rows with the same seed.
SensingMatrix make_sensing_matrix(const SbhOptions& options, std::size_t m);

struct MaskPair {
    Mask positive;
    Mask negative;
};

/// +1 entries light the positive mask, -1 entries the negative one (row-major).
std::vector<MaskPair> to_mask_pairs(const SensingMatrix& matrix, std::size_t width,
                                    std::size_t height);
MaskPair to_mask_pair(const SensingMatrix& matrix, std::size_t row, std::size_t width,
                      std::size_t height);

void write_matrix(std::ostream& out, const SensingMatrix& matrix);
SensingMatrix read_matrix(std::istream& in);
void write_matrix_file(const std::string& path, const SensingMatrix& matrix);
SensingMatrix read_matrix_file(const std::string& path);

}  // namespace qspi
