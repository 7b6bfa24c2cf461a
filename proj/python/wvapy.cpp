#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wva/error.hpp"
#include "wva/estimator.hpp"
#include "wva/forward.hpp"
#include "wva/noise.hpp"
#include "wva/regimes.hpp"
#include "wva/spectra.hpp"

namespace py = pybind11;
using namespace wva;

namespace {

py::array_t<double> to_array(std::span<const double> v) { return py::array_t<double>(v.size(), v.data()); }

std::vector<double> nodes_of(const FrequencyGrid& g) {
  std::vector<double> out(g.count());
  for (std::size_t i = 0; i < g.count(); ++i) out[i] = g.node(i);
  return out;
}

PulseModel to_model(const py::object& obj) {
  if (py::isinstance<GaussianPulse>(obj)) return obj.cast<GaussianPulse>();
  if (py::isinstance<Spectrum>(obj)) return obj.cast<Spectrum>();
  throw py::type_error("model must be a GaussianPulse or a Spectrum");
}

}  // namespace

PYBIND11_MODULE(wvapy, m) {
  m.doc() = "Weak-value spectral interferometry: forward model, working regimes and delay estimation";

  auto base = py::register_exception<Error>(m, "WvaError");
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
  py::register_exception<EnergyBelowFloor>(m, "EnergyBelowFloor", base.ptr());
  py::register_exception<DenominatorBelowFloor>(m, "DenominatorBelowFloor", base.ptr());
  py::register_exception<InfeasibleBudget>(m, "InfeasibleBudget", base.ptr());
  py::register_exception<AllSamplesSingular>(m, "AllSamplesSingular", base.ptr());
  py::register_exception<DegenerateBracket>(m, "DegenerateBracket", base.ptr());
  py::register_exception<NonlinearRegime>(m, "NonlinearRegime", base.ptr());

  py::class_<FrequencyGrid>(m, "FrequencyGrid")
      .def(py::init<double, double, std::size_t>(), py::arg("start_thz"), py::arg("step_thz"), py::arg("count"))
      .def_property_readonly("start", &FrequencyGrid::start)
      .def_property_readonly("step", &FrequencyGrid::step)
      .def_property_readonly("count", &FrequencyGrid::count)
      .def("node", &FrequencyGrid::node)
      .def("nodes", [](const FrequencyGrid& g) { auto n = nodes_of(g); return to_array(n); });

  py::class_<Spectrum>(m, "Spectrum")
      .def(py::init([](const FrequencyGrid& g, std::vector<double> v) { return Spectrum(g, std::move(v)); }),
           py::arg("grid"), py::arg("values"))
      .def_property_readonly("grid", &Spectrum::grid)
      .def_property_readonly("values", [](const Spectrum& s) { return to_array(s.values()); })
      .def("__len__", &Spectrum::size);

  py::class_<GaussianPulse>(m, "GaussianPulse")
      .def(py::init<double, double>(), py::arg("center_thz"), py::arg("fwhm_fs"))
      .def_property_readonly("center", &GaussianPulse::center)
      .def_property_readonly("duration", &GaussianPulse::duration)
      .def("spectral_sigma", &GaussianPulse::spectral_sigma)
      .def("spectral_fwhm", &GaussianPulse::spectral_fwhm)
      .def("default_grid", &GaussianPulse::default_grid, py::arg("count") = GaussianPulse::kDefaultGridCount,
           py::arg("half_width_sigmas") = GaussianPulse::kDefaultHalfWidthSigmas);

  py::class_<InstrumentModel>(m, "InstrumentModel")
      .def(py::init([](double fwhm, int scans) { return InstrumentModel{fwhm, scans}; }),
           py::arg("resolution_fwhm") = 0.0, py::arg("scans_to_average") = 1)
      .def_readwrite("resolution_fwhm", &InstrumentModel::resolution_fwhm)
      .def_readwrite("scans_to_average", &InstrumentModel::scans_to_average);

  py::class_<InterferometerConfig>(m, "InterferometerConfig")
      .def(py::init<double, double, double>(), py::arg("delay_1_fs"), py::arg("delay_2_fs"),
           py::arg("post_selection_rad"))
      .def_property_readonly("delay", &InterferometerConfig::delay)
      .def_property_readonly("post_selection", &InterferometerConfig::post_selection);

  py::class_<Observables>(m, "Observables")
      .def_readonly("delta_f", &Observables::delta_f)
      .def_readonly("loss_db", &Observables::loss_db)
      .def_readonly("f_in", &Observables::f_in)
      .def_readonly("f_out", &Observables::f_out);

  m.def("gaussian_spectrum", &gaussian_spectrum, py::arg("pulse"), py::arg("grid"));
  m.def(
      "load_spectrum",
      [](const std::vector<std::pair<double, double>>& rows) {
        auto r = load_spectrum(rows);
        return py::make_tuple(r.spectrum, r.clamped);
      },
      py::arg("rows"));
  m.def("energy", &energy);
  m.def("centroid", &centroid, py::arg("spectrum"), py::arg("floor") = kDefaultEnergyFloor);
  m.def("convolve_instrument", &convolve_instrument);
  m.def("wavelength_to_frequency", &wavelength_to_frequency);
  m.def("frequency_to_wavelength", &frequency_to_wavelength);
  m.def("wavelength_width_to_frequency", &wavelength_width_to_frequency);

  m.def("output_spectrum", &output_spectrum);
  m.def("observables_numeric", &observables_numeric, py::arg("s_in"), py::arg("config"),
        py::arg("floor") = kDefaultEnergyFloor);
  m.def("gamma_factor", &gamma_factor, py::arg("delay_fs"), py::arg("duration_fs"));
  m.def("delta_f_gaussian", &delta_f_gaussian, py::arg("pulse"), py::arg("delay_fs"), py::arg("gamma"),
        py::arg("floor") = kDefaultDenominatorFloor);
  m.def("loss_gaussian", &loss_gaussian, py::arg("pulse"), py::arg("delay_fs"), py::arg("gamma"));
  m.def("interference_phase", &interference_phase);
  m.def("post_selection_for_phase", &post_selection_for_phase);
  m.def("delay_from_arm_lengths", &delay_from_arm_lengths, py::arg("d1_mm"), py::arg("d2_mm"));

  py::class_<SweepResult>(m, "SweepResult")
      .def_readonly("gammas", &SweepResult::gammas)
      .def_readonly("shifts", &SweepResult::shifts)
      .def_readonly("losses", &SweepResult::losses)
      .def_property_readonly("model_tag", [](const SweepResult& s) { return std::string(to_string(s.model_tag)); });

  py::class_<WorkingPoint>(m, "WorkingPoint")
      .def_readonly("gamma", &WorkingPoint::gamma)
      .def_readonly("shift", &WorkingPoint::shift)
      .def_readonly("loss", &WorkingPoint::loss)
      .def_property_readonly("regime", [](const WorkingPoint& w) { return std::string(to_string(w.regime)); });

  m.def(
      "gamma_sweep",
      [](const py::object& model, double t, double lo, double hi, std::size_t n, double floor) {
        return gamma_sweep(to_model(model), t, lo, hi, n, floor);
      },
      py::arg("model"), py::arg("delay_fs"), py::arg("gamma_lo"), py::arg("gamma_hi"),
        py::arg("n"), py::arg("floor") = kDefaultDenominatorFloor);
  m.def(
      "max_shift_at_loss_budget",
      [](const py::object& model, double t, double budget) { return max_shift_at_loss_budget(to_model(model), t, budget); },
      py::arg("model"),
        py::arg("delay_fs"), py::arg("budget_db"));
  m.def(
      "global_max_shift", [](const py::object& model, double t) { return global_max_shift(to_model(model), t); },
      py::arg("model"), py::arg("delay_fs"));
  m.def(
      "classify_regime",
      [](double loss, double threshold) { return std::string(to_string(classify_regime(loss, threshold))); },
      py::arg("loss_db"), py::arg("threshold_db") = kDefaultRegimeThresholdDb);

  py::class_<UncertainValue>(m, "UncertainValue")
      .def_readonly("mean", &UncertainValue::mean)
      .def_readonly("std", &UncertainValue::std)
      .def_readonly("sample_count", &UncertainValue::sample_count);

  py::class_<NoiseModel>(m, "NoiseModel")
      .def(py::init([](double sigma, InstrumentModel inst, std::uint64_t seed, std::size_t samples) {
             return NoiseModel{sigma, inst, seed, samples};
           }),
           py::arg("gamma_jitter_sigma") = 0.0, py::arg("instrument") = InstrumentModel{}, py::arg("seed") = 0,
           py::arg("samples") = 1);

  py::class_<MonteCarloResult>(m, "MonteCarloResult")
      .def_readonly("delta_f", &MonteCarloResult::delta_f)
      .def_readonly("loss", &MonteCarloResult::loss)
      .def_readonly("excluded", &MonteCarloResult::excluded);

  m.def("sample_gamma", &sample_gamma, py::arg("gamma_nominal"), py::arg("noise"));
  m.def(
      "monte_carlo_observables",
      [](const py::object& obj, double delay, double gamma, const NoiseModel& nm, unsigned threads,
         std::size_t grid_count) {
        const PulseModel model = to_model(obj);
        MonteCarloOptions opts;
        opts.threads = threads;
        opts.grid_count = grid_count;
        py::gil_scoped_release release;
        return monte_carlo_observables(model, delay, gamma, nm, opts);
      },
      py::arg("model"), py::arg("delay_fs"), py::arg("gamma"), py::arg("noise"), py::arg("threads") = 0,
      py::arg("grid_count") = GaussianPulse::kDefaultGridCount);

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("t_hat", &FitResult::t_hat)
      .def_readonly("gamma_offset_hat", &FitResult::gamma_offset_hat)
      .def_readonly("residual_norm", &FitResult::residual_norm)
      .def_readonly("iterations", &FitResult::iterations)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("alternates", &FitResult::alternates)
      .def_readonly("uncertainty", &FitResult::uncertainty)
      .def_property_readonly("shift_rms", [](const FitResult& r) { return r.per_channel_rms.shift; })
      .def_property_readonly("loss_rms", [](const FitResult& r) { return r.per_channel_rms.loss; });

  m.def(
      "fit_delay",
      [](const py::object& model, std::vector<double> gammas, std::optional<std::vector<double>> shifts,
         std::optional<std::vector<double>> losses, double t_min, double t_max, bool fit_offset,
         std::size_t grid_nodes, std::optional<double> gamma_jitter) {
        FitProblem p{to_model(model), std::move(gammas), std::move(shifts), std::move(losses)};
        p.t_min = t_min;
        p.t_max = t_max;
        p.fit_gamma_offset = fit_offset;
        p.grid_nodes = grid_nodes;
        p.gamma_jitter = gamma_jitter;
        py::gil_scoped_release release;
        return fit_delay(p);
      },
      py::arg("model"), py::arg("data_gamma"), py::arg("data_shift") = py::none(),
      py::arg("data_loss") = py::none(), py::arg("t_min"), py::arg("t_max"), py::arg("fit_gamma_offset") = false,
      py::arg("grid_nodes") = 512, py::arg("gamma_jitter") = py::none());

  m.def("invert_small_shift", &invert_small_shift, py::arg("delta_f_thz"), py::arg("pulse"), py::arg("gamma"),
        py::arg("zero_shift_gamma"));
}
