#include "qspi/pgm.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

namespace qspi {

namespace {

class Cursor {
public:
    explicit Cursor(const std::string& bytes) : bytes_(bytes) {}

    std::size_t offset() const { return pos_; }
    bool done() const { return pos_ >= bytes_.size(); }

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const char c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    unsigned long number(const char* what) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        unsigned long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
            v = v * 10 + static_cast<unsigned long>(bytes_[pos_] - '0');
            if (v > 0xFFFFFFFFul) throw fail(start, std::string(what) + " is too large");
            ++pos_;
        }
        if (pos_ == start) throw fail(start, std::string("expected ") + what);
        return v;
    }

    Error fail(std::size_t at, const std::string& msg) const {
        return Error("PGM parse error at byte " + std::to_string(at) + ": " + msg);
    }

    const std::string& bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

PgmFile parse_pgm(const std::string& bytes) {
    Cursor cur(bytes);
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
        throw cur.fail(0, "expected magic 'P2' or 'P5'");
    PgmFile f;
    f.format = bytes[1] == '2' ? PgmFile::Format::plain : PgmFile::Format::binary;
    cur.pos_ = 2;
    if (cur.done() || !std::isspace(static_cast<unsigned char>(bytes[2])))
        throw cur.fail(2, "expected whitespace after magic");
    f.width = cur.number("width");
    f.height = cur.number("height");
    const std::size_t maxval_at = cur.offset();
    f.maxval = static_cast<unsigned>(cur.number("maxval"));
    if (f.width == 0 || f.height == 0) throw cur.fail(maxval_at, "zero image dimension");
    if (f.maxval == 0 || f.maxval > 65535) throw cur.fail(maxval_at, "maxval must lie in [1, 65535]");
    const std::size_t count = f.width * f.height;
    f.samples.resize(count);

    if (f.format == PgmFile::Format::plain) {
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t at = (cur.skip_space_and_comments(), cur.offset());
            if (cur.done())
                throw cur.fail(at, "truncated payload: expected " + std::to_string(count) + " samples, got " + std::to_string(i));
            const unsigned long v = cur.number("sample");
            if (v > f.maxval) throw cur.fail(at, "sample exceeds maxval");
            f.samples[i] = static_cast<std::uint16_t>(v);
        }
        return f;
    }

    if (cur.done() || !std::isspace(static_cast<unsigned char>(bytes[cur.pos_])))
        throw cur.fail(cur.offset(), "expected single whitespace before binary payload");
    ++cur.pos_;
    const std::size_t bps = f.maxval < 256 ? 1 : 2;
    const std::size_t expected = count * bps;
    const std::size_t actual = bytes.size() - cur.pos_;
    if (actual < expected)
        throw cur.fail(cur.offset(), "truncated payload: expected " + std::to_string(expected) +
                                         " bytes, got " + std::to_string(actual));
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + cur.pos_);
    for (std::size_t i = 0; i < count; ++i) {
        const unsigned v = bps == 1 ? p[i] : (unsigned(p[2 * i]) << 8) | p[2 * i + 1];
        if (v > f.maxval) throw cur.fail(cur.pos_ + i * bps, "sample exceeds maxval");
        f.samples[i] = static_cast<std::uint16_t>(v);
    }
    return f;
}

std::string serialize_pgm(const PgmFile& f) {
    if (f.samples.size() != f.width * f.height) throw Error("PGM sample count does not match dimensions");
    std::string out = (f.format == PgmFile::Format::plain ? "P2\n" : "P5\n") + std::to_string(f.width) + " " +
                      std::to_string(f.height) + "\n" + std::to_string(f.maxval) + "\n";
    if (f.format == PgmFile::Format::plain) {
        for (std::size_t r = 0; r < f.height; ++r) {
            for (std::size_t c = 0; c < f.width; ++c) {
                if (c) out += ' ';
                out += std::to_string(f.samples[r * f.width + c]);
            }
            out += '\n';
        }
        return out;
    }
    const bool wide = f.maxval > 255;
    for (std::uint16_t v : f.samples) {
        if (wide) out += static_cast<char>(v >> 8);
        out += static_cast<char>(v & 0xFF);
    }
    return out;
}

PgmFile read_pgm_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open PGM file " + path);
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_pgm(bytes);
}

void write_pgm_file(const std::string& path, const PgmFile& file) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write PGM file " + path);
    out << serialize_pgm(file);
}

BeamImage to_image(const PgmFile& file, double pitch_um) {
    std::vector<double> v(file.samples.begin(), file.samples.end());
    return BeamImage(file.width, file.height, std::move(v), pitch_um);
}

PgmFile to_pgm(const BeamImage& image, unsigned maxval, bool normalize, PgmFile::Format format) {
    if (maxval == 0 || maxval > 65535) throw Error("maxval must lie in [1, 65535]");
    PgmFile f;
    f.format = format;
    f.width = image.width();
    f.height = image.height();
    f.maxval = maxval;
    const double peak = image.max();
    const double k = normalize && peak > 0 ? maxval / peak : 1.0;
    f.samples.reserve(image.size());
    for (double v : image.pixels())
        f.samples.push_back(static_cast<std::uint16_t>(std::clamp(std::lround(v * k), 0L, long(maxval))));
    return f;
}

BeamImage read_pgm(const std::string& path, double pitch_um) { return to_image(read_pgm_file(path), pitch_um); }

void write_pgm(const BeamImage& image, const std::string& path, unsigned maxval, bool normalize,
               PgmFile::Format format) {
    write_pgm_file(path, to_pgm(image, maxval, normalize, format));
}

}  // namespace qspi
