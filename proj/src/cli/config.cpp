#include "qspi/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace qspi {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
    T v{};
    const char* end = text.data() + text.size();
    const auto r = std::from_chars(text.data(), end, v);
    if (r.ec != std::errc() || r.ptr != end)
        throw Error("invalid value '" + text + "' for " + key);
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "on" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "off" || text == "no") return false;
    throw Error("invalid value '" + text + "' for " + key + " (expected true or false)");
}

struct Entry {
    std::string key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <class T>
std::string show(const T& v) {
    if constexpr (std::is_same_v<T, bool>)
        return v ? "true" : "false";
    else if constexpr (std::is_floating_point_v<T>)
        return format_double(v);
    else if constexpr (std::is_same_v<T, std::string>)
        return v;
    else
        return std::to_string(v);
}

template <class F>
Entry field(std::string key, F ref) {
    using T = std::remove_reference_t<decltype(ref(std::declval<RunConfig&>()))>;
    Entry e;
    e.key = key;
    e.set = [key, ref](RunConfig& c, const std::string& text) {
        if constexpr (std::is_same_v<T, bool>)
            ref(c) = parse_bool(key, text);
        else if constexpr (std::is_same_v<T, std::string>)
            ref(c) = text;
        else
            ref(c) = parse_number<T>(key, text);
    };
    e.get = [ref](const RunConfig& c) { return show(ref(const_cast<RunConfig&>(c))); };
    return e;
}

template <class Ref, class Parse, class Show>
Entry choice(std::string key, Ref ref, Parse parse, Show name) {
    Entry e;
    e.key = key;
    e.set = [ref, parse](RunConfig& c, const std::string& text) { ref(c) = parse(text); };
    e.get = [ref, name](const RunConfig& c) { return name(ref(const_cast<RunConfig&>(c))); };
    return e;
}

RasterShape::Kind parse_kind(const std::string& t) {
    if (t == "line") return RasterShape::Kind::line;
    if (t == "pixel") return RasterShape::Kind::pixel;
    throw Error("unknown raster kind '" + t + "' (expected line or pixel)");
}

scenes::Orientation parse_orientation(const std::string& t) {
    if (t == "vertical") return scenes::Orientation::vertical;
    if (t == "horizontal") return scenes::Orientation::horizontal;
    throw Error("unknown orientation '" + t + "' (expected vertical or horizontal)");
}

ConjugateMaskPolicy parse_policy(const std::string& t) {
    if (t == "fixed" || t == "fixed_centered") return ConjugateMaskPolicy::fixed_centered;
    if (t == "mirrored") return ConjugateMaskPolicy::mirrored;
    throw Error("unknown conjugate policy '" + t + "' (expected fixed or mirrored)");
}

const std::vector<Entry>& table() {
    static const std::vector<Entry> entries = [] {
        std::vector<Entry> t;
        t.push_back(field("source.gain", [](RunConfig& c) -> auto& { return c.calibration.source.gain; }));
        t.push_back(field("source.probe_waist_um", [](RunConfig& c) -> auto& { return c.calibration.source.probe_waist_um; }));
        t.push_back(field("source.pump_waist_um", [](RunConfig& c) -> auto& { return c.calibration.source.pump_waist_um; }));
        t.push_back(field("source.max_squeezing_db", [](RunConfig& c) -> auto& { return c.calibration.source.max_squeezing_db; }));
        t.push_back(field("source.angular_beam_diameter_mrad",
                          [](RunConfig& c) -> auto& { return c.calibration.source.angular_beam_diameter_mrad; }));
        t.push_back(field("source.coherence_area_angle_mrad",
                          [](RunConfig& c) -> auto& { return c.calibration.source.coherence_area_angle_mrad; }));
        t.push_back(field("source.mode_count", [](RunConfig& c) -> auto& { return c.calibration.source.mode_count; }));
        t.push_back(field("source.cutoff_cycles_per_pump_waist",
                          [](RunConfig& c) -> auto& { return c.calibration.source.cutoff_cycles_per_pump_waist; }));
        t.push_back(choice(
            "noise.variant", [](RunConfig& c) -> auto& { return c.calibration.variant; }, parse_variant,
            [](NoiseVariant v) { return to_string(v); }));
        t.push_back(field("grid.cells_per_diameter", [](RunConfig& c) -> auto& { return c.calibration.cells_per_diameter; }));
        t.push_back(field("calibration.frame_px", [](RunConfig& c) -> auto& { return c.calibration.frame_px; }));
        t.push_back(field("calibration.pitch_um", [](RunConfig& c) -> auto& { return c.calibration.pitch_um; }));
        t.push_back(field("calibration.seed_truncate", [](RunConfig& c) -> auto& { return c.calibration.seed_truncate; }));
        t.push_back(field("calibration.mirrors_baseline_db", [](RunConfig& c) -> auto& { return c.calibration.mirrors_baseline_db; }));
        t.push_back(field("calibration.dmd_transmission", [](RunConfig& c) -> auto& { return c.calibration.dmd_transmission; }));
        t.push_back(choice(
            "acquisition.mode", [](RunConfig& c) -> auto& { return c.acquisition.mode; }, parse_mode,
            [](AcquisitionMode m) { return to_string(m); }));
        t.push_back(field("acquisition.photons_per_exposure", [](RunConfig& c) -> auto& { return c.acquisition.photons_per_exposure; }));
        t.push_back(field("acquisition.dark_noise_variance", [](RunConfig& c) -> auto& { return c.acquisition.dark_noise_variance; }));
        t.push_back(field("acquisition.seed", [](RunConfig& c) -> auto& { return c.acquisition.rng_seed; }));
        t.push_back(field("acquisition.exposures_per_row", [](RunConfig& c) -> auto& { return c.acquisition.exposures_per_row; }));
        t.push_back(field("acquisition.noise", [](RunConfig& c) -> auto& { return c.acquisition.noise; }));
        t.push_back(field("acquisition.full_beam_squeezing_db", [](RunConfig& c) -> auto& { return c.full_beam_squeezing_db; }));
        t.push_back(field("image.pitch_um", [](RunConfig& c) -> auto& { return c.image_pitch_um; }));
        t.push_back(field("sampling.n", [](RunConfig& c) -> auto& { return c.sampling.n; }));
        t.push_back(field("sampling.block", [](RunConfig& c) -> auto& { return c.sampling.block; }));
        t.push_back(field("sampling.rows", [](RunConfig& c) -> auto& { return c.rows; }));
        t.push_back(field("sampling.seed", [](RunConfig& c) -> auto& { return c.sampling.seed; }));
        t.push_back(field("sampling.window", [](RunConfig& c) -> auto& { return c.sampling.window; }));
        t.push_back(field("sampling.scramble", [](RunConfig& c) -> auto& { return c.sampling.scramble; }));
        t.push_back(field("solver.epsilon", [](RunConfig& c) -> auto& { return c.solver.epsilon; }));
        t.push_back(field("solver.tolerance", [](RunConfig& c) -> auto& { return c.solver.tolerance; }));
        t.push_back(field("solver.max_iterations", [](RunConfig& c) -> auto& { return c.solver.max_iterations; }));
        t.push_back(choice(
            "raster.kind", [](RunConfig& c) -> auto& { return c.raster.kind; }, parse_kind,
            [](RasterShape::Kind k) { return std::string(k == RasterShape::Kind::line ? "line" : "pixel"); }));
        t.push_back(field("raster.width_px", [](RunConfig& c) -> auto& { return c.raster.width_px; }));
        t.push_back(field("raster.steps", [](RunConfig& c) -> auto& { return c.raster.steps; }));
        t.push_back(field("raster.pixel_size", [](RunConfig& c) -> auto& { return c.raster.pixel_size; }));
        t.push_back(choice(
            "raster.orientation", [](RunConfig& c) -> auto& { return c.raster.orientation; }, parse_orientation,
            [](scenes::Orientation o) {
                return std::string(o == scenes::Orientation::vertical ? "vertical" : "horizontal");
            }));
        t.push_back(choice(
            "raster.policy", [](RunConfig& c) -> auto& { return c.raster.policy; }, parse_policy,
            [](ConjugateMaskPolicy p) {
                return std::string(p == ConjugateMaskPolicy::fixed_centered ? "fixed" : "mirrored");
            }));
        t.push_back(field("sweep.stage", [](RunConfig& c) -> auto& { return c.sweep.stage; }));
        t.push_back(field("sweep.cross_step_deg", [](RunConfig& c) -> auto& { return c.sweep.cross_step_deg; }));
        t.push_back(field("sweep.cross_bar_px", [](RunConfig& c) -> auto& { return c.sweep.cross_bar_px; }));
        t.push_back(field("spectrum.start_hz", [](RunConfig& c) -> auto& { return c.spectrum.start_hz; }));
        t.push_back(field("spectrum.stop_hz", [](RunConfig& c) -> auto& { return c.spectrum.stop_hz; }));
        t.push_back(field("spectrum.points", [](RunConfig& c) -> auto& { return c.spectrum.points; }));
        t.push_back(field("spectrum.rbw_hz", [](RunConfig& c) -> auto& { return c.spectrum.resolution_bandwidth_hz; }));
        t.push_back(field("spectrum.vbw_hz", [](RunConfig& c) -> auto& { return c.spectrum.video_bandwidth_hz; }));
        t.push_back(field("spectrum.band_low_hz", [](RunConfig& c) -> auto& { return c.spectrum.band_low_hz; }));
        t.push_back(field("spectrum.band_high_hz", [](RunConfig& c) -> auto& { return c.spectrum.band_high_hz; }));
        t.push_back(field("spectrum.technical_db_per_decade",
                          [](RunConfig& c) -> auto& { return c.spectrum.technical_noise_db_per_decade; }));
        t.push_back(field("spectrum.jitter", [](RunConfig& c) -> auto& { return c.spectrum.jitter; }));
        t.push_back(field("spectrum.jitter_db", [](RunConfig& c) -> auto& { return c.spectrum.jitter_sigma_db; }));
        t.push_back(field("spectrum.seed", [](RunConfig& c) -> auto& { return c.spectrum.seed; }));
        {
            Entry e;
            e.key = "spectrum.nrf_db";
            e.set = [](RunConfig& c, const std::string& text) {
                if (text == "auto")
                    c.spectrum_nrf_db.reset();
                else
                    c.spectrum_nrf_db = parse_number<double>("spectrum.nrf_db", text);
            };
            e.get = [](const RunConfig& c) {
                return c.spectrum_nrf_db ? format_double(*c.spectrum_nrf_db) : std::string("auto");
            };
            t.push_back(e);
        }
        t.push_back(field("paths.matrix", [](RunConfig& c) -> auto& { return c.paths.matrix; }));
        t.push_back(field("paths.truth", [](RunConfig& c) -> auto& { return c.paths.truth; }));
        t.push_back(field("paths.out_dir", [](RunConfig& c) -> auto& { return c.paths.out_dir; }));
        return t;
    }();
    return entries;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    for (const auto& e : table())
        if (e.key == key) {
            e.set(*this, trim(value));
            return;
        }
    throw Error("unknown config key '" + key + "'");
}

void RunConfig::apply_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        try {
            if (eq == std::string::npos) throw Error("expected 'key = value'");
            set(trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const Error& e) {
            throw Error(origin + ":" + std::to_string(number) + ": " + e.what());
        }
    }
}

void RunConfig::apply_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read config file " + path);
    std::ostringstream text;
    text << in.rdbuf();
    apply_text(text.str(), path);
}

void RunConfig::validate() const {
    calibration.source.validate();
    if (calibration.cells_per_diameter < 1) throw Error("grid.cells_per_diameter must be >= 1");
    if (calibration.frame_px < 2) throw Error("calibration.frame_px must be >= 2");
    if (!(calibration.pitch_um > 0)) throw Error("calibration.pitch_um must be positive");
    if (!(calibration.dmd_transmission > 0 && calibration.dmd_transmission <= 1))
        throw Error("calibration.dmd_transmission must lie in (0, 1]");
    acquisition.validate();
    if (!(image_pitch_um > 0)) throw Error("image.pitch_um must be positive");
    if (!(full_beam_squeezing_db > 0)) throw Error("acquisition.full_beam_squeezing_db must be positive");
    if (!std::isfinite(solver.epsilon)) throw Error("solver.epsilon must be finite");
    if (!(solver.tolerance > 0) || !std::isfinite(solver.tolerance)) throw Error("solver.tolerance must be > 0");
    if (solver.max_iterations < 1) throw Error("solver.max_iterations must be >= 1");
    if (raster.width_px < 0) throw Error("raster.width_px must be >= 0");
    if (raster.steps < 0) throw Error("raster.steps must be >= 0");
    if (raster.pixel_size < 1) throw Error("raster.pixel_size must be >= 1");
    if (sweep.stage != "seed" && sweep.stage != "detect") throw Error("sweep.stage must be seed or detect");
    if (!(sweep.cross_step_deg > 0)) throw Error("sweep.cross_step_deg must be positive");
    if (!(sweep.cross_bar_px > 0)) throw Error("sweep.cross_bar_px must be positive");
    spectrum.validate();
}

std::string RunConfig::dump() const {
    std::string out;
    for (const auto& e : table()) out += e.key + " = " + e.get(*this) + "\n";
    return out;
}

std::vector<std::string> RunConfig::keys() {
    std::vector<std::string> k;
    for (const auto& e : table()) k.push_back(e.key);
    return k;
}

RunConfig load_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides) {
    RunConfig cfg;
    if (path) {
        cfg.apply_file(*path);
    } else if (const char* env = std::getenv(kConfigEnv); env && *env) {
        cfg.apply_file(env);
    }
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw Error("override '" + o + "' is not key=value");
        cfg.set(trim(o.substr(0, eq)), o.substr(eq + 1));
    }
    return cfg;
}

}  // namespace qspi
