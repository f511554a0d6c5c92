// Copyright 2026 The qphot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"
#include "qphot/data_io.hpp"
#include "qphot/errors.hpp"
#include "qphot/fock.hpp"
#include "qphot/gaussian.hpp"
#include "qphot/log.hpp"
#include "qphot/qam.hpp"
#include "qphot/qrc.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace qphot;

namespace {

py::dict forecastDict(const qrc::ForecastResult& r) {
  py::dict d;
  d["train_nmse"] = r.trainNMSE;
  d["test_nmse"] = r.testNMSE;
  d["constant_test_nmse"] = r.constantTestNMSE;
  d["raw_test_nmse"] = r.rawTestNMSE ? py::cast(*r.rawTestNMSE) : py::none();
  d["test_predictions"] = r.testPredictions;
  d["test_targets"] = r.testTargets;
  d["network_draw"] = r.networkDraw;
  d["lambda"] = r.lambda;
  return d;
}

py::dict windowDict(const qam::MetastableWindow& w) {
  py::dict d;
  d["t_start"] = w.tStart;
  d["t_end"] = w.tEnd;
  d["gap_ratio"] = w.gapRatio;
  d["eigenvalues"] = w.eigenvalues;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gaussian reservoir computing and driven-resonator associative memory";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<PhysicsError>(m, "PhysicsError", base.ptr());

  m.def(
      "set_log_level",
      [](const std::string& level) {
        if (level == "debug") log::setLevel(log::Level::Debug);
        else if (level == "info") log::setLevel(log::Level::Info);
        else if (level == "warn") log::setLevel(log::Level::Warn);
        else if (level == "error") log::setLevel(log::Level::Error);
        else if (level == "off") log::setLevel(log::Level::Off);
        else throw ConfigError("log level must be debug, info, warn, error or off");
      },
      py::arg("level"));

  // Gaussian layer.
  m.def("squeezing_db", &gaussian::squeezingDecibels, py::arg("strength"));
  m.def("strength_from_db", &gaussian::strengthFromDecibels, py::arg("decibels"));
  m.def(
      "crystal_symplectic",
      [](int modes, double squeezing, std::uint64_t seed, std::uint64_t draw) {
        return gaussian::crystalSymplectic(modes, squeezing, seed, draw).matrix();
      },
      py::arg("modes"), py::arg("cavity_squeezing"), py::arg("seed"), py::arg("draw") = 0);
  m.def("observable_count", &gaussian::observableCount, py::arg("modes"));

  // Reservoir.
  py::class_<qrc::ReservoirConfig>(m, "ReservoirConfig")
      .def(py::init<>())
      .def_readwrite("modes", &qrc::ReservoirConfig::modes)
      .def_readwrite("input_squeezing", &qrc::ReservoirConfig::inputSqueezing)
      .def_readwrite("cavity_squeezing", &qrc::ReservoirConfig::cavitySqueezing)
      .def_readwrite("encoding", &qrc::ReservoirConfig::encoding)
      .def_readwrite("network_seed", &qrc::ReservoirConfig::networkSeed)
      .def_readwrite("noise_variance", &qrc::ReservoirConfig::noiseVariance)
      .def_readwrite("noise_seed", &qrc::ReservoirConfig::noiseSeed)
      .def_readwrite("max_loop_gain", &qrc::ReservoirConfig::maxLoopGain)
      .def("validate", &qrc::ReservoirConfig::validate);
  m.def("noise_variance_from_relative", &qrc::noiseVarianceFromRelative, py::arg("relative_intensity"));
  m.def("encode_phase", &qrc::encodePhase, py::arg("preset"), py::arg("input"));
  m.def(
      "run_sequence", [](const qrc::ReservoirConfig& cfg, const std::vector<double>& inputs) {
        return qrc::runSequence(cfg, inputs);
      },
      py::arg("config"), py::arg("inputs"), "Observable rows, one per input.");
  m.def(
      "train_readout",
      [](const gaussian::Matrix& rows, const std::vector<double>& targets, int washout, std::optional<double> lambda) {
        const auto r = qrc::trainReadout(rows, targets, washout, lambda);
        return py::make_tuple(r.weights, r.bias, r.lambda);
      },
      py::arg("rows"), py::arg("targets"), py::arg("washout"), py::arg("ridge") = py::none(),
      "Returns (weights, bias, ridge).");
  m.def(
      "nmse", [](const std::vector<double>& p, const std::vector<double>& t) { return qrc::nmse(p, t); },
      py::arg("predictions"), py::arg("targets"));
  m.def(
      "forecast",
      [](const qrc::ReservoirConfig& cfg, const std::vector<double>& series, int washout, int train, int test,
         std::optional<double> lambda) {
        io::Split split{washout, train, test};
        return forecastDict(qrc::santaFeExperiment(cfg, series, split, lambda));
      },
      py::arg("config"), py::arg("series"), py::arg("washout") = 300, py::arg("train") = 3000, py::arg("test") = 700,
      py::arg("ridge") = py::none(), "One-step-ahead forecast of a series already scaled to [0, 1].");
  m.def(
      "synthetic_series",
      [](std::size_t length, std::uint64_t seed) { return io::syntheticChaoticSeries(length, seed).values; },
      py::arg("length"), py::arg("seed") = 0);
  m.def(
      "normalize_min_max",
      [](const std::vector<double>& values, std::size_t fitBegin, std::size_t fitEnd) {
        io::TimeSeries s;
        s.values = values;
        const auto n = io::normalizeMinMax01(s, fitBegin, fitEnd);
        return py::make_tuple(n.series.values, n.fit.lo, n.fit.hi);
      },
      py::arg("values"), py::arg("fit_begin"), py::arg("fit_end"), "Returns (scaled, lo, hi).");

  // Resonator.
  py::class_<fock::ResonatorParams>(m, "ResonatorParams")
      .def(py::init([](int n, int mm, double detuning, double drive, double gammaM) {
             fock::ResonatorParams p{n, mm, detuning, drive, gammaM};
             p.validate();
             return p;
           }),
           py::arg("n") = 3, py::arg("m") = 4, py::arg("detuning") = 0.4, py::arg("drive") = 0.0,
           py::arg("gamma_m") = 0.2)
      .def_readwrite("n", &fock::ResonatorParams::n)
      .def_readwrite("m", &fock::ResonatorParams::m)
      .def_readwrite("detuning", &fock::ResonatorParams::detuning)
      .def_readwrite("drive", &fock::ResonatorParams::drive)
      .def_readwrite("gamma_m", &fock::ResonatorParams::gammaM)
      .def("__repr__", [](const fock::ResonatorParams& p) {
        return "ResonatorParams(" + p.toJson().dump() + ")";
      });
  m.def("lobe_amplitude", &qam::lobeAmplitude, py::arg("params"));
  m.def("drive_for_mean_photon", &qam::driveForMeanPhoton, py::arg("n"), py::arg("m"), py::arg("gamma_m"),
        py::arg("mean_photon"));
  m.def(
      "steady_state",
      [](const fock::ResonatorParams& p, int cutoff) {
        return fock::steadyState(fock::Liouvillian(p, fock::FockSpace(cutoff)));
      },
      py::arg("params"), py::arg("cutoff"));
  m.def(
      "spectrum",
      [](const fock::ResonatorParams& p, int cutoff, int count) {
        std::vector<std::pair<fock::Complex, int>> out;
        for (const auto& e : fock::spectrum(fock::Liouvillian(p, fock::FockSpace(cutoff)), count)) {
          out.emplace_back(e.value, e.sector);
        }
        return out;
      },
      py::arg("params"), py::arg("cutoff"), py::arg("count"), "Slowest eigenvalues as (value, sector) pairs.");
  m.def(
      "metastable_window",
      [](const fock::ResonatorParams& p, int cutoff) {
        return windowDict(qam::metastableWindow(fock::Liouvillian(p, fock::FockSpace(cutoff))));
      },
      py::arg("params"), py::arg("cutoff"));
  m.def(
      "evolve",
      [](const fock::CMatrix& rho0, const fock::ResonatorParams& p, const std::vector<double>& times) {
        return fock::evolve(rho0, fock::Liouvillian(p, fock::FockSpace(static_cast<int>(rho0.rows()))), times);
      },
      py::arg("rho0"), py::arg("params"), py::arg("times"));
  m.def(
      "select_cutoff",
      [](const fock::ResonatorParams& p, int minCutoff, int maxCutoff, double tolerance) {
        fock::CutoffOptions o;
        o.minCutoff = minCutoff;
        o.maxCutoff = maxCutoff;
        o.tolerance = tolerance;
        double estimate = 0.0;
        if (p.drive != 0.0 && p.gammaM > 0 && 2 * p.m > p.n) estimate = std::pow(qam::lobeAmplitude(p), 2);
        const auto r = fock::selectCutoff(p, estimate, o);
        return py::make_tuple(r.cutoff, r.drift, r.converged);
      },
      py::arg("params"), py::arg("min_cutoff") = 32, py::arg("max_cutoff") = 160, py::arg("tolerance") = 1e-6,
      "Returns (cutoff, drift, converged).");
  m.def(
      "squeezed_coherent",
      [](fock::Complex beta, fock::Complex xi, int cutoff) {
        return fock::squeezedCoherent(beta, xi, fock::FockSpace(cutoff));
      },
      py::arg("beta"), py::arg("xi"), py::arg("cutoff"));
  m.def(
      "coherent", [](fock::Complex beta, int cutoff) { return fock::coherent(beta, fock::FockSpace(cutoff)); },
      py::arg("beta"), py::arg("cutoff"));
  m.def("projector", &fock::projector, py::arg("psi"));
  m.def("mean_photon", py::overload_cast<const fock::CMatrix&>(&fock::meanPhoton), py::arg("rho"));
  m.def("mandel_q", py::overload_cast<const fock::CMatrix&>(&fock::mandelQ), py::arg("rho"));
  m.def("expect_a", py::overload_cast<const fock::CMatrix&>(&fock::expectA), py::arg("rho"));
  m.def("populations", &fock::populations, py::arg("rho"));
  m.def("rotate", py::overload_cast<const fock::CMatrix&, double>(&fock::rotate), py::arg("rho"), py::arg("angle"));
  m.def(
      "wigner",
      [](const fock::CMatrix& rho, double extent, int points) {
        const fock::WignerGrid g{-extent, extent, -extent, extent, points, points};
        return py::make_tuple(g.xs(), g.ps(), fock::wigner(rho, g));
      },
      py::arg("rho"), py::arg("extent") = 5.0, py::arg("points") = 101, "Returns (xs, ps, W[x, p]).");

  // Trajectories and retrieval.
  m.def(
      "mc_trajectory",
      [](const fock::CVector& psi0, const fock::ResonatorParams& p, double tMax, std::uint64_t seed, double dt) {
        qam::TrajectoryOptions o;
        o.dt = dt;
        const auto r = qam::mcTrajectory(psi0, p, fock::FockSpace(static_cast<int>(psi0.size())), tMax, seed, o);
        py::dict d;
        d["times"] = r.times;
        d["mean_a"] = r.meanA;
        d["mean_n"] = r.meanN;
        d["mandel_q"] = r.mandelQ;
        std::vector<std::pair<double, int>> jumps;
        for (const auto& j : r.jumps) jumps.emplace_back(j.time, j.channel);
        d["jumps"] = jumps;
        return d;
      },
      py::arg("psi0"), py::arg("params"), py::arg("t_max"), py::arg("seed"), py::arg("dt") = 0.05);
  m.def(
      "success",
      [](int n, const std::vector<int>& ms, const std::vector<double>& meanPhotons, int trajectories,
         std::uint64_t seed, int minCutoff, int threads) {
        qam::SuccessSpec spec;
        spec.n = n;
        spec.ms = ms;
        spec.meanPhotons = meanPhotons;
        spec.trajectories = trajectories;
        spec.seed = seed;
        spec.threads = threads;
        spec.prepare.cutoff.minCutoff = minCutoff;
        py::list rows;
        std::vector<qam::SuccessResult> results;
        {
          py::gil_scoped_release release;
          results = qam::successExperiment(spec);
        }
        for (const auto& r : results) {
          py::dict d;
          d["n"] = r.params.n;
          d["m"] = r.params.m;
          d["mean_photon"] = r.meanPhoton;
          d["trajectories"] = r.trajectories;
          d["p_hat"] = r.pHat;
          d["stderr"] = r.standardError;
          d["baseline"] = r.baseline;
          d["window"] = windowDict(r.window);
          d["skipped"] = r.skipped ? py::cast(*r.skipped) : py::none();
          rows.append(d);
        }
        return rows;
      },
      py::arg("n") = 3, py::arg("ms") = std::vector<int>{3, 4}, py::arg("mean_photons") = std::vector<double>{8.0},
      py::arg("trajectories") = 200, py::arg("seed") = 1, py::arg("min_cutoff") = 32, py::arg("threads") = 1);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        py::gil_scoped_release release;
        return cli::run(args);
      },
      py::arg("args"), "Runs the command-line front end in process; returns its exit code.");
  m.attr("__version__") = QPHOT_VERSION;
}
