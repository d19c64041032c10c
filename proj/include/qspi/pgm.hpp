#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qspi/image.hpp"

namespace qspi {

/// Raw content of a PGM file. Canonical files (single-space header fields,
/// no comments, P2 rows on one line each) round-trip byte for byte.
struct PgmFile {
    enum class Format { plain, binary };  // P2, P5
    Format format = Format::binary;
    std::size_t width = 0;
    std::size_t height = 0;
    unsigned maxval = 255;
    std::vector<std::uint16_t> samples;
};

/// Throws Error with the byte offset of the first malformed header token, or
/// with expected vs actual byte counts for a truncated binary payload.
PgmFile parse_pgm(const std::string& bytes);
std::string serialize_pgm(const PgmFile& file);

PgmFile read_pgm_file(const std::string& path);
void write_pgm_file(const std::string& path, const PgmFile& file);

/// Sample values become intensities unchanged (0..maxval).
BeamImage to_image(const PgmFile& file, double pitch_um = 1.0);

/// Rounds intensities to integer samples. With normalize, the image maximum
/// maps to maxval; otherwise values are clamped to [0, maxval].
PgmFile to_pgm(const BeamImage& image, unsigned maxval = 255, bool normalize = true,
               PgmFile::Format format = PgmFile::Format::binary);

BeamImage read_pgm(const std::string& path, double pitch_um = 1.0);
void write_pgm(const BeamImage& image, const std::string& path, unsigned maxval = 255,
               bool normalize = true, PgmFile::Format format = PgmFile::Format::binary);

}  // namespace qspi
