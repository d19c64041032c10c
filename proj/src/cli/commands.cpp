#include "qspi/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "qspi/config.hpp"
#include "qspi/pgm.hpp"
#include "qspi/reconstruct.hpp"

namespace qspi {

namespace {

namespace fs = std::filesystem;

// Thrown for bad invocations that CLI11 cannot catch on its own.
struct UsageError : Error {
    using Error::Error;
};

struct Globals {
    std::optional<std::string> config;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    std::optional<std::string> variant;
    std::optional<std::string> out_dir;

    RunConfig load() const {
        RunConfig cfg = load_config(config, {});
        try {
            cfg = load_config(config, overrides);
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
        if (seed) {
            cfg.acquisition.rng_seed = *seed;
            cfg.sampling.seed = *seed;
            cfg.spectrum.seed = *seed;
        }
        if (mode) cfg.acquisition.mode = parse_mode(*mode);
        if (variant) cfg.calibration.variant = parse_variant(*variant);
        if (out_dir) cfg.paths.out_dir = *out_dir;
        cfg.validate();
        return cfg;
    }
};

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

fs::path out_path(const RunConfig& cfg, const std::string& name) {
    fs::path dir = cfg.paths.out_dir.empty() ? fs::path(".") : fs::path(cfg.paths.out_dir);
    fs::create_directories(dir);
    return dir / name;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << text;
}

// Emits a CSV on out and, when an output directory is configured, to a file.
void emit_csv(const RunConfig& cfg, const std::string& name, const std::string& csv, std::ostream& out) {
    out << csv;
    if (!cfg.paths.out_dir.empty() && cfg.paths.out_dir != ".") write_text(out_path(cfg, name), csv);
}

Mask read_mask(const std::string& path, double pitch_um) {
    BeamImage img = read_pgm(path, pitch_um);
    for (double& v : img.pixels()) v = v > 0 ? 1.0 : 0.0;
    return img;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t") + 1;
        double x = 0;
        const auto r = std::from_chars(item.data() + b, item.data() + e, x);
        if (r.ec != std::errc() || r.ptr != item.data() + e) throw UsageError("invalid number '" + item + "'");
        v.push_back(x);
    }
    return v;
}

std::vector<double> parse_angle_range(const std::string& text, double step) {
    auto sep = text.find("..");
    std::size_t skip = 2;
    if (sep == std::string::npos) {
        sep = text.find(':');
        skip = 1;
    }
    if (sep == std::string::npos) throw UsageError("--cross-angles expects FROM..TO");
    const auto ends = parse_list(text.substr(0, sep) + "," + text.substr(sep + skip));
    if (ends.size() != 2 || ends[1] < ends[0]) throw UsageError("--cross-angles expects FROM..TO with FROM <= TO");
    std::vector<double> out;
    for (int k = 0;; ++k) {
        const double a = ends[0] + k * step;
        if (a > ends[1] + 1e-9) break;
        out.push_back(a);
    }
    return out;
}

// Intensities are written unscaled when they fit a 8 or 16 bit range.
void write_estimate_pgm(const BeamImage& img, const fs::path& path) {
    const double peak = img.max();
    if (peak <= 255.5)
        write_pgm(img, path.string(), 255, false);
    else if (peak <= 65535.5)
        write_pgm(img, path.string(), 65535, false);
    else
        write_pgm(img, path.string(), 65535, true);
}

std::string metrics_line(const char* tag, const ReconstructionResult& r, std::optional<double> p) {
    return std::string(tag) + " " + format_double(r.tv_value) + " " + format_double(r.residual_norm) + " " +
           std::to_string(r.iterations) + " " + (r.converged ? "1" : "0") + " " +
           (p ? format_double(*p) : std::string("nan")) + "\n";
}

ReconstructionProblem solver_problem(const RunConfig& cfg, const MeasurementVector& mv, const SensingMatrix& a,
                                     std::size_t w, std::size_t h) {
    ReconstructionProblem p = make_problem(mv, a, w, h);
    if (cfg.solver.epsilon >= 0) p.epsilon = cfg.solver.epsilon;
    p.tolerance = cfg.solver.tolerance;
    p.max_iterations = cfg.solver.max_iterations;
    return p;
}

// ---- mask-sweep -----------------------------------------------------------

int cmd_mask_sweep(const RunConfig& cfg, const std::vector<std::string>& masks,
                   const std::optional<std::string>& cross, std::optional<double> step, std::ostream& out,
                   std::ostream& err) {
    if (masks.empty() && !cross) throw UsageError("mask-sweep needs mask files or --cross-angles");
    if (!masks.empty() && cross) throw UsageError("mask files and --cross-angles are exclusive");
    const Calibration& cal = cfg.calibration;

    if (cross) {
        const auto angles = parse_angle_range(*cross, step.value_or(cfg.sweep.cross_step_deg));
        const auto rows = cross_angle_sweep(cal, angles, cfg.sweep.cross_bar_px);
        std::string csv = "angle_deg,eta,predicted_db,model_db\n";
        for (std::size_t i = 0; i < rows.size(); ++i)
            csv += format_csv(angles[i]) + "," + format_csv(rows[i].eta) + "," + format_csv(rows[i].predicted_db) +
                   "," + format_csv(rows[i].model.value_db) + "\n";
        emit_csv(cfg, "cross_sweep.csv", csv, out);
        return kExitOk;
    }

    const bool detect = cfg.sweep.stage == "detect";
    std::optional<TwinBeamPair> pair;
    if (detect) pair = cal.pair();
    std::string csv = "mask,eta,predicted_db,model_db\n";
    int ok = 0;
    for (const auto& path : masks) {
        try {
            const Mask m = read_mask(path, cal.pitch_um);
            if (m.width() != cal.frame_px || m.height() != cal.frame_px)
                throw Error("mask is " + std::to_string(m.width()) + "x" + std::to_string(m.height()) +
                            ", frame is " + std::to_string(cal.frame_px) + "x" + std::to_string(cal.frame_px));
            const MaskFigure f = detect ? detect_stage_figure(cal, *pair, m) : seed_stage_figure(cal, m);
            csv += csv_field(path) + "," + format_csv(f.eta) + "," + format_csv(f.predicted_db) + "," +
                   format_csv(f.model.value_db) + "\n";
            ++ok;
        } catch (const std::exception& e) {
            err << "mask-sweep: " << path << ": " << e.what() << "\n";
        }
    }
    emit_csv(cfg, "mask_sweep.csv", csv, out);
    return ok > 0 ? kExitOk : kExitFailure;
}

// ---- raster -----------------------------------------------------------------

int cmd_raster(const RunConfig& cfg, const std::optional<std::string>& positions_text, std::ostream& out) {
    const Calibration& cal = cfg.calibration;
    std::optional<std::vector<double>> positions;
    if (positions_text) {
        positions = parse_list(*positions_text);
        if (positions->empty()) throw UsageError("raster needs at least one position");
    }

    RasterResult r;
    if (cfg.raster.kind == RasterShape::Kind::line) {
        LineRasterSetup s = default_line_raster(cal, cfg.raster.steps);
        s.shape.orientation = cfg.raster.orientation;
        if (cfg.raster.width_px > 0) s.shape.width_px = cfg.raster.width_px;
        s.positions = positions ? *positions : line_positions(s.pair, s.shape, cfg.raster.steps);
        r = raster_scan(s.pair, s.model, s.shape, s.positions, cfg.raster.policy);
    } else {
        const TwinBeamPair pair = cal.pair();
        const double eta = cal.dmd_setup_transmission();
        const NoiseModel model = NoiseModel::from_pair(pair, cal.variant, eta, eta);
        RasterShape shape;
        shape.kind = RasterShape::Kind::pixel;
        shape.pixel_size = cfg.raster.pixel_size;
        std::vector<double> pos;
        if (positions) {
            pos = *positions;
        } else {
            const std::size_t bw = (pair.probe.width() + shape.pixel_size - 1) / shape.pixel_size;
            const std::size_t bh = (pair.probe.height() + shape.pixel_size - 1) / shape.pixel_size;
            for (std::size_t i = 0; i < bw * bh; ++i) pos.push_back(static_cast<double>(i));
        }
        r = raster_scan(pair, model, shape, pos, cfg.raster.policy, &cfg.acquisition);
        write_pgm(r.image, out_path(cfg, "raster.pgm").string(), 65535, true);
    }
    std::string csv = "position,nrf_db\n";
    for (std::size_t i = 0; i < r.positions.size(); ++i)
        csv += format_csv(r.positions[i]) + "," + format_csv(r.nrf_curve[i].value_db) + "\n";
    emit_csv(cfg, "raster.csv", csv, out);
    return kExitOk;
}

// ---- matrix / acquire / reconstruct --------------------------------------

int cmd_matrix(const RunConfig& cfg, const std::optional<std::string>& out_file, std::ostream& out) {
    const SensingMatrix a = make_sensing_matrix(cfg.sampling, cfg.rows);
    const fs::path path = out_file ? fs::path(*out_file) : out_path(cfg, "matrix.txt");
    write_matrix_file(path.string(), a);
    out << a.header() << "\n";
    return kExitOk;
}

SensingMatrix matrix_for(const RunConfig& cfg, const std::optional<std::string>& path) {
    if (path) return read_matrix_file(*path);
    if (!cfg.paths.matrix.empty()) return read_matrix_file(cfg.paths.matrix);
    return make_sensing_matrix(cfg.sampling, cfg.rows);
}

NoiseModel acquisition_model(const RunConfig& cfg, const TwinBeamPair& pair) {
    const double eta = transmission_for_squeezing(cfg.full_beam_squeezing_db, cfg.calibration.source.gain,
                                                  cfg.calibration.variant);
    return NoiseModel::from_pair(pair, cfg.calibration.variant, eta, eta);
}

int cmd_acquire(const RunConfig& cfg, const std::string& image_path, const std::optional<std::string>& matrix_path,
                const std::optional<std::string>& out_file, std::ostream& out) {
    const BeamImage img = read_pgm(image_path, cfg.image_pitch_um);
    const SensingMatrix a = matrix_for(cfg, matrix_path);
    if (a.cols() != img.size())
        throw Error("matrix has N=" + std::to_string(a.cols()) + " columns, image " + image_path + " has " +
                    std::to_string(img.width()) + "x" + std::to_string(img.height()) + " pixels");
    const TwinBeamPair pair = pair_from_probe(img, cfg.calibration.source, cfg.calibration.cells_per_diameter);
    const MeasurementVector mv = compressive_acquire(pair, a, acquisition_model(cfg, pair), cfg.acquisition);
    const fs::path path = out_file ? fs::path(*out_file) : out_path(cfg, "measurements.txt");
    write_measurements_file(path.string(), mv);
    out << mv.matrix_header << "\n";
    return kExitOk;
}

int cmd_reconstruct(const RunConfig& cfg, const std::string& meas_path, const std::optional<std::string>& matrix_path,
                    std::optional<std::string> truth_path, const std::string& method, std::size_t width,
                    std::size_t height, std::ostream& out) {
    std::string mpath = matrix_path ? *matrix_path : cfg.paths.matrix;
    if (mpath.empty()) throw Error("reconstruct needs the sensing matrix (--matrix or paths.matrix)");
    if (!truth_path && !cfg.paths.truth.empty()) truth_path = cfg.paths.truth;
    if (method != "tv" && method != "ls") throw UsageError("--method must be tv or ls");

    const SensingMatrix a = read_matrix_file(mpath);
    const MeasurementVector mv = read_measurements_file(meas_path);
    if (!mv.matrix_header.empty() && mv.matrix_header != a.header())
        throw Error("measurements were taken with '" + mv.matrix_header + "', matrix file is '" + a.header() + "'");

    std::optional<BeamImage> truth;
    if (truth_path) truth = read_pgm(*truth_path, cfg.image_pitch_um);
    if (width == 0 || height == 0) {
        if (truth) {
            width = truth->width();
            height = truth->height();
        } else {
            const auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(a.cols()))));
            if (side * side != a.cols())
                throw Error("N=" + std::to_string(a.cols()) + " is not square; pass --width and --height");
            width = height = side;
        }
    }
    const ReconstructionProblem p = solver_problem(cfg, mv, a, width, height);
    const ReconstructionResult r = method == "tv" ? reconstruct_tv(p) : reconstruct_ls(p);
    std::optional<double> q;
    if (truth) {
        if (truth->size() != r.estimate.size()) throw Error("truth image does not match the reconstruction size");
        q = psnr(r.estimate, truth->pixels());
    }
    write_estimate_pgm(r.image(cfg.image_pitch_um), out_path(cfg, "reconstruction.pgm"));
    const std::string line = metrics_line("TVREC", r, q);
    write_text(out_path(cfg, "reconstruction.metrics"), line);
    out << line;
    return r.converged ? kExitOk : kExitFailure;
}

// ---- spectrum / pipeline ----------------------------------------------------

int cmd_spectrum(const RunConfig& cfg, std::ostream& out) {
    const double db = cfg.spectrum_nrf_db.value_or(-cfg.calibration.source.max_squeezing_db);
    const Spectrum s = simulate_spectrum(NoiseFigure::from_db(db), cfg.spectrum);
    std::string csv = "frequency_hz,level_db\n";
    for (std::size_t i = 0; i < s.frequency_hz.size(); ++i)
        csv += format_csv(s.frequency_hz[i]) + "," + format_csv(s.level_db[i]) + "\n";
    emit_csv(cfg, "spectrum.csv", csv, out);
    return kExitOk;
}

int cmd_pipeline(const RunConfig& cfg, std::ostream& out) {
    const auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(cfg.sampling.n))));
    if (side * side != cfg.sampling.n) throw Error("pipeline needs a square image (sampling.n = side^2)");
    CompressiveSettings cs;
    cs.side = side;
    cs.pitch_um = cfg.image_pitch_um;
    cs.block = cfg.sampling.block;
    cs.window = cfg.sampling.window;
    cs.rows = cfg.rows;
    cs.seed = cfg.sampling.seed;
    cs.full_beam_squeezing_db = cfg.full_beam_squeezing_db;
    const CompressiveScenario sc = letter_e_scenario(cfg.calibration, cs);

    const MeasurementVector mv = compressive_acquire(sc.pair, sc.matrix, sc.model, cfg.acquisition);
    write_matrix_file(out_path(cfg, "matrix.txt").string(), sc.matrix);
    write_measurements_file(out_path(cfg, "measurements.txt").string(), mv);
    write_pgm(sc.pair.probe, out_path(cfg, "truth.pgm").string(), 65535, true);

    const ReconstructionProblem p = solver_problem(cfg, mv, sc.matrix, side, side);
    const ReconstructionResult tv = reconstruct_tv(p);
    const ReconstructionResult ls = reconstruct_ls(p);
    write_pgm(tv.image(cs.pitch_um), out_path(cfg, "reconstruction.pgm").string(), 65535, true);
    write_pgm(ls.image(cs.pitch_um), out_path(cfg, "least_squares.pgm").string(), 65535, true);
    const std::string tv_line = metrics_line("TVREC", tv, psnr(tv.estimate, sc.truth));
    const std::string ls_line = metrics_line("LSREC", ls, psnr(ls.estimate, sc.truth));
    write_text(out_path(cfg, "reconstruction.metrics"), tv_line);
    write_text(out_path(cfg, "least_squares.metrics"), ls_line);
    out << tv_line << ls_line;
    return tv.converged ? kExitOk : kExitFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Twin-beam quantum single-pixel imaging simulator", "qspi"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "Config file (default: $QSPI_CONFIG)");
    app.add_option("--set", g.overrides, "Config override key=value (repeatable)");
    app.add_option("--seed", g.seed, "Seed for acquisition, sampling and spectrum jitter");
    app.add_option("--mode", g.mode, "classical|quantum")->check(CLI::IsMember({"classical", "quantum"}));
    app.add_option("--variant", g.variant, "standard|paper-corrected")
        ->check(CLI::IsMember({"standard", "paper-corrected", "paper_corrected"}));
    app.add_option("--out-dir", g.out_dir, "Directory for output files");

    std::function<int()> action;

    auto* sweep = app.add_subcommand("mask-sweep", "Noise figure per mask (CSV)");
    std::vector<std::string> masks;
    std::optional<std::string> stage, cross;
    std::optional<double> angle_step;
    sweep->add_option("masks", masks, "Binary PGM masks");
    sweep->add_option("--stage", stage, "seed|detect")->check(CLI::IsMember({"seed", "detect"}));
    sweep->add_option("--cross-angles", cross, "Rotating cross sweep FROM..TO in degrees");
    sweep->add_option("--angle-step", angle_step, "Cross sweep step in degrees");
    sweep->callback([&] {
        action = [&] {
            RunConfig cfg = g.load();
            if (stage) cfg.sweep.stage = *stage;
            return cmd_mask_sweep(cfg, masks, cross, angle_step, out, err);
        };
    });

    auto* raster = app.add_subcommand("raster", "Line or pixel raster (CSV, PGM for pixel rasters)");
    std::optional<std::string> kind, positions, policy;
    std::optional<int> steps, width_px;
    raster->add_option("--kind", kind, "line|pixel")->check(CLI::IsMember({"line", "pixel"}));
    raster->add_option("--positions", positions, "Comma-separated positions");
    raster->add_option("--steps", steps, "Line steps on each side of center");
    raster->add_option("--width", width_px, "Line width in pixels");
    raster->add_option("--policy", policy, "fixed|mirrored")->check(CLI::IsMember({"fixed", "mirrored"}));
    raster->callback([&] {
        action = [&] {
            RunConfig cfg = g.load();
            if (kind) cfg.set("raster.kind", *kind);
            if (policy) cfg.set("raster.policy", *policy);
            if (steps) cfg.raster.steps = *steps;
            if (width_px) cfg.raster.width_px = *width_px;
            if (cfg.raster.steps < 0 || cfg.raster.width_px < 0) throw UsageError("steps and width must be >= 0");
            return cmd_raster(cfg, positions, out);
        };
    });

    auto* matrix = app.add_subcommand("matrix", "Write a scrambled-block-Hadamard sensing matrix");
    std::optional<std::string> matrix_out;
    std::optional<std::size_t> rows, n, block;
    matrix->add_option("--out", matrix_out, "Output file (default OUT_DIR/matrix.txt)");
    matrix->add_option("-m,--rows", rows, "Number of rows M");
    matrix->add_option("-n,--pixels", n, "Number of pixels N");
    matrix->add_option("--block", block, "Hadamard block size B");
    matrix->callback([&] {
        action = [&] {
            RunConfig cfg = g.load();
            if (rows) cfg.rows = *rows;
            if (n) cfg.sampling.n = *n;
            if (block) cfg.sampling.block = *block;
            return cmd_matrix(cfg, matrix_out, out);
        };
    });

    auto* acquire = app.add_subcommand("acquire", "Simulate differential single-pixel measurements");
    std::string image_path;
    std::optional<std::string> acq_matrix, acq_out;
    acquire->add_option("image", image_path, "Probe intensity image (PGM)")->required();
    acquire->add_option("--matrix", acq_matrix, "Sensing matrix file");
    acquire->add_option("--out", acq_out, "Output file (default OUT_DIR/measurements.txt)");
    acquire->callback([&] { action = [&] { return cmd_acquire(g.load(), image_path, acq_matrix, acq_out, out); }; });

    auto* recon = app.add_subcommand("reconstruct", "TV (or least-squares) reconstruction");
    std::string meas_path, method = "tv";
    std::optional<std::string> rec_matrix, truth;
    std::size_t width = 0, height = 0;
    recon->add_option("measurements", meas_path, "Measurement file")->required();
    recon->add_option("--matrix", rec_matrix, "Sensing matrix file");
    recon->add_option("--truth", truth, "Ground-truth PGM for PSNR");
    recon->add_option("--method", method, "tv|ls");
    recon->add_option("--width", width, "Image width");
    recon->add_option("--height", height, "Image height");
    recon->callback([&] {
        action = [&] { return cmd_reconstruct(g.load(), meas_path, rec_matrix, truth, method, width, height, out); };
    });

    auto* spectrum = app.add_subcommand("spectrum", "Synthetic analyzer trace (CSV)");
    std::optional<double> nrf_db, jitter_db;
    bool jitter = false;
    spectrum->add_option("--nrf-db", nrf_db, "Noise figure in dB (default: minus the source ceiling)");
    spectrum->add_flag("--jitter", jitter, "Add Gaussian trace jitter");
    spectrum->add_option("--jitter-db", jitter_db, "Jitter sigma in dB");
    spectrum->callback([&] {
        action = [&] {
            RunConfig cfg = g.load();
            if (nrf_db) cfg.spectrum_nrf_db = *nrf_db;
            if (jitter) cfg.spectrum.jitter = true;
            if (jitter_db) cfg.spectrum.jitter_sigma_db = *jitter_db;
            cfg.spectrum.validate();
            return cmd_spectrum(cfg, out);
        };
    });

    auto* pipeline = app.add_subcommand("pipeline", "Compressive 'E' phantom end to end");
    pipeline->callback([&] { action = [&] { return cmd_pipeline(g.load(), out); }; });

    auto* config = app.add_subcommand("config", "Print the effective configuration");
    config->callback([&] { action = [&] { return (out << g.load().dump(), kExitOk); }; });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }
    try {
        return action();
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace qspi
