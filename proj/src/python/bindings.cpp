#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "qspi/experiments.hpp"
#include "qspi/reconstruct.hpp"
#include "qspi/spectrum.hpp"

namespace py = pybind11;
using namespace qspi;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

BeamImage to_image(const Array& a, double pitch_um) {
    if (a.ndim() != 2) throw Error("expected a 2-D array (height, width)");
    const auto h = static_cast<std::size_t>(a.shape(0)), w = static_cast<std::size_t>(a.shape(1));
    return BeamImage(w, h, std::vector<double>(a.data(), a.data() + w * h), pitch_um);
}

Array to_array(const BeamImage& img) {
    Array out({img.height(), img.width()});
    std::copy(img.pixels().begin(), img.pixels().end(), out.mutable_data());
    return out;
}

Array to_array(const std::vector<double>& v) { return Array(static_cast<py::ssize_t>(v.size()), v.data()); }

Array to_array(const std::vector<double>& v, std::size_t width, std::size_t height) {
    Array out({height, width});
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::vector<double> flat(const Array& a) { return std::vector<double>(a.data(), a.data() + a.size()); }

SensingMatrix matrix_from_dense(const IntArray& d) {
    if (d.ndim() != 2) throw Error("expected a 2-D integer array (rows, cols)");
    return SensingMatrix(static_cast<std::size_t>(d.shape(0)), static_cast<std::size_t>(d.shape(1)),
                         std::span<const int>(d.data(), static_cast<std::size_t>(d.size())));
}

ReconstructionProblem problem(const SensingMatrix& a, const Array& y, std::size_t width, std::size_t height,
                              double epsilon, double tolerance, int max_iterations) {
    ReconstructionProblem p;
    p.y = flat(y);
    p.matrix = &a;
    p.width = width;
    p.height = height;
    p.epsilon = epsilon;
    p.tolerance = tolerance;
    p.max_iterations = max_iterations;
    return p;
}

}  // namespace

PYBIND11_MODULE(_qspi, m) {
    m.doc() = "Twin-beam quantum single-pixel imaging simulator";
    py::register_exception<Error>(m, "QspiError", PyExc_ValueError);

    py::enum_<NoiseVariant>(m, "NoiseVariant")
        .value("standard", NoiseVariant::standard)
        .value("paper_corrected", NoiseVariant::paper_corrected);
    py::enum_<AcquisitionMode>(m, "AcquisitionMode")
        .value("classical", AcquisitionMode::classical)
        .value("quantum", AcquisitionMode::quantum);

    py::class_<NoiseFigure>(m, "NoiseFigure")
        .def_readonly("nrf_linear", &NoiseFigure::nrf_linear)
        .def_readonly("value_db", &NoiseFigure::value_db)
        .def_readonly("shot_noise_reference", &NoiseFigure::shot_noise_reference)
        .def_property_readonly("squeezed", &NoiseFigure::squeezed)
        .def_static("from_db", &NoiseFigure::from_db, py::arg("db"), py::arg("snl") = 0.0)
        .def_static("from_linear", &NoiseFigure::from_linear, py::arg("nrf"), py::arg("snl") = 0.0)
        .def("__repr__", [](const NoiseFigure& f) {
            return "NoiseFigure(nrf_linear=" + std::to_string(f.nrf_linear) + ", value_db=" + std::to_string(f.value_db) + ")";
        });

    m.def("ideal_nrf", &ideal_nrf, py::arg("gain"), py::arg("variant") = NoiseVariant::standard);
    m.def("fano_factor", &fano_factor, py::arg("gain"));
    m.def("compose_loss", &compose_loss, py::arg("base"), py::arg("extra_transmission"));
    m.def("transmission_for_squeezing", &transmission_for_squeezing, py::arg("squeezing_db"), py::arg("gain") = 4.0,
          py::arg("variant") = NoiseVariant::standard);
    m.def("predicted_squeezing_single_mode", &predicted_squeezing_single_mode, py::arg("eta"), py::arg("gain") = 4.0,
          py::arg("variant") = NoiseVariant::standard);

    py::class_<NoiseModel>(m, "NoiseModel")
        .def_static("single_cell", &NoiseModel::single_cell, py::arg("gain"), py::arg("variant"), py::arg("t_probe"),
                    py::arg("t_conjugate"))
        .def_readonly("gain", &NoiseModel::gain)
        .def_readonly("probe_flux", &NoiseModel::probe_flux)
        .def_readonly("conjugate_flux", &NoiseModel::conjugate_flux)
        .def_readonly("t_probe", &NoiseModel::t_probe)
        .def_readonly("t_conjugate", &NoiseModel::t_conjugate)
        .def("covariance", &NoiseModel::covariance)
        .def_property_readonly("cells", &NoiseModel::cells);
    m.def("nrf", &nrf, py::arg("model"));

    py::class_<MonteCarloResult>(m, "MonteCarloResult")
        .def_readonly("estimate", &MonteCarloResult::estimate)
        .def_readonly("std_error", &MonteCarloResult::std_error);
    m.def("monte_carlo_nrf", py::overload_cast<const NoiseModel&, long, std::uint64_t>(&monte_carlo_nrf),
          py::arg("model"), py::arg("shots"), py::arg("seed") = 1);

    m.def(
        "lowpass_power_fraction",
        [](const Array& image, double pitch_um) { return lowpass_power_fraction(to_image(image, pitch_um), SourceConfig{}); },
        py::arg("image"), py::arg("pitch_um") = 40.0);
    m.def(
        "lowpass_fourier",
        [](const Array& image, double pitch_um) { return to_array(lowpass_fourier(to_image(image, pitch_um), SourceConfig{})); },
        py::arg("image"), py::arg("pitch_um") = 40.0);

    m.def(
        "hadamard",
        [](std::size_t n) {
            const HadamardMatrix h = hadamard(n);
            py::array_t<std::int8_t> out({n, n});
            std::copy(h.entries.begin(), h.entries.end(), out.mutable_data());
            return out;
        },
        py::arg("n"));

    py::class_<SensingMatrix>(m, "SensingMatrix")
        .def(py::init(&matrix_from_dense), py::arg("dense"))
        .def_property_readonly("shape", [](const SensingMatrix& a) { return py::make_tuple(a.rows(), a.cols()); })
        .def_property_readonly("header", &SensingMatrix::header)
        .def_readonly("row_ids", &SensingMatrix::row_ids)
        .def("dense",
             [](const SensingMatrix& a) {
                 const auto d = a.dense();
                 IntArray out({a.rows(), a.cols()});
                 std::copy(d.begin(), d.end(), out.mutable_data());
                 return out;
             })
        .def("apply", [](const SensingMatrix& a, const Array& x) { return to_array(a.apply(flat(x))); })
        .def("apply_transpose", [](const SensingMatrix& a, const Array& y) { return to_array(a.apply_transpose(flat(y))); })
        .def("operator_norm", &SensingMatrix::operator_norm)
        .def("save", [](const SensingMatrix& a, const std::string& path) { write_matrix_file(path, a); })
        .def_static("load", &read_matrix_file);
    m.def(
        "make_sensing_matrix",
        [](std::size_t n, std::size_t block, std::size_t rows, std::uint64_t seed, std::size_t window, bool scramble) {
            return make_sensing_matrix({n, block, seed, window, scramble}, rows);
        },
        py::arg("n") = 1024, py::arg("block") = 32, py::arg("rows") = 300, py::arg("seed") = 1, py::arg("window") = 32,
        py::arg("scramble") = true);

    py::class_<ReconstructionResult>(m, "ReconstructionResult")
        .def_property_readonly("estimate", [](const ReconstructionResult& r) { return to_array(r.estimate, r.width, r.height); })
        .def_readonly("tv_value", &ReconstructionResult::tv_value)
        .def_readonly("residual_norm", &ReconstructionResult::residual_norm)
        .def_readonly("iterations", &ReconstructionResult::iterations)
        .def_readonly("converged", &ReconstructionResult::converged);

    m.def(
        "reconstruct_tv",
        [](const SensingMatrix& a, const Array& y, std::size_t width, std::size_t height, double epsilon, double tolerance,
           int max_iterations) {
            const auto p = problem(a, y, width, height, epsilon, tolerance, max_iterations);
            py::gil_scoped_release release;
            return reconstruct_tv(p);
        },
        py::arg("matrix"), py::arg("y"), py::arg("width"), py::arg("height"), py::arg("epsilon") = 0.0,
        py::arg("tolerance") = 1e-5, py::arg("max_iterations") = 5000);
    m.def(
        "reconstruct_ls",
        [](const SensingMatrix& a, const Array& y, std::size_t width, std::size_t height) {
            return reconstruct_ls(problem(a, y, width, height, 0.0, 1e-5, 1));
        },
        py::arg("matrix"), py::arg("y"), py::arg("width"), py::arg("height"));
    m.def(
        "tv_norm",
        [](const Array& image) {
            if (image.ndim() != 2) throw Error("expected a 2-D array (height, width)");
            return tv_norm(std::span<const double>(image.data(), static_cast<std::size_t>(image.size())),
                           static_cast<std::size_t>(image.shape(1)), static_cast<std::size_t>(image.shape(0)));
        },
        py::arg("image"));
    m.def(
        "psnr", [](const Array& estimate, const Array& truth) { return psnr(flat(estimate), flat(truth)); },
        py::arg("estimate"), py::arg("truth"));
    m.attr("PSNR_CAP") = kPsnrCap;

    py::class_<CompressiveScenario>(m, "LetterEScenario")
        .def_readonly("matrix", &CompressiveScenario::matrix)
        .def_property_readonly("truth",
                               [](const CompressiveScenario& s) {
                                   const std::size_t side = s.pair.probe.width();
                                   return to_array(s.truth, side, side);
                               })
        .def_property_readonly("nrf", [](const CompressiveScenario& s) { return nrf(s.model); })
        .def(
            "acquire",
            [](const CompressiveScenario& s, AcquisitionMode mode, std::uint64_t seed, bool noise, double photons) {
                AcquisitionConfig c;
                c.mode = mode;
                c.rng_seed = seed;
                c.noise = noise;
                c.photons_per_exposure = photons;
                const MeasurementVector mv = compressive_acquire(s.pair, s.matrix, s.model, c);
                double budget = 0;
                for (double v : mv.noise_budget) budget += v;
                return py::make_tuple(to_array(mv.y), to_array(mv.noise_budget), std::sqrt(budget));
            },
            py::arg("mode") = AcquisitionMode::quantum, py::arg("seed") = 1, py::arg("noise") = true,
            py::arg("photons_per_exposure") = 1e6);
    m.def(
        "letter_e_scenario",
        [](std::size_t rows, std::uint64_t seed, double squeezing_db) {
            CompressiveSettings s;
            s.rows = rows;
            s.seed = seed;
            s.full_beam_squeezing_db = squeezing_db;
            return letter_e_scenario(Calibration{}, s);
        },
        py::arg("rows") = 300, py::arg("seed") = 1, py::arg("squeezing_db") = 3.1);

    m.def(
        "seed_stage_squeezing_db",
        [](const Array& mask) {
            const Calibration cal;
            return -seed_stage_figure(cal, to_image(mask, cal.pitch_um)).model.value_db;
        },
        py::arg("mask"), "Model squeezing (positive dB) for a 64x64 binary mask imprinted on the seed.");

    m.def(
        "simulate_spectrum",
        [](double nrf_db, int points, bool jitter, double jitter_db, std::uint64_t seed) {
            SpectrumSettings s;
            s.points = points;
            s.jitter = jitter;
            s.jitter_sigma_db = jitter_db;
            s.seed = seed;
            const Spectrum sp = simulate_spectrum(NoiseFigure::from_db(nrf_db), s);
            return py::make_tuple(to_array(sp.frequency_hz), to_array(sp.level_db));
        },
        py::arg("nrf_db"), py::arg("points") = 401, py::arg("jitter") = false, py::arg("jitter_db") = 0.1,
        py::arg("seed") = 1);
}
