#include "wva/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <string_view>

#include "wva/estimator.hpp"
#include "wva/io.hpp"
#include "wva/noise.hpp"
#include "wva/regimes.hpp"
#include "wva/svg.hpp"
#include "wva/units.hpp"

namespace wva::cli {

using nlohmann::json;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return kInvalidArgument;
    case ErrorKind::InvalidInput: return kInvalidInput;
    case ErrorKind::EnergyBelowFloor: return kEnergyBelowFloor;
    case ErrorKind::DenominatorBelowFloor: return kDenominatorBelowFloor;
    case ErrorKind::InfeasibleBudget: return kInfeasibleBudget;
    case ErrorKind::AllSamplesSingular: return kAllSamplesSingular;
    case ErrorKind::DegenerateBracket: return kDegenerateBracket;
    case ErrorKind::NonlinearRegime: return kNonlinearRegime;
    case ErrorKind::Io: return kIoError;
  }
  return kInternal;
}

std::string to_string(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Sweep: return "sweep";
    case Command::Fit: return "fit";
    case Command::MonteCarlo: return "montecarlo";
    case Command::Regimes: return "regimes";
  }
  return "?";
}

namespace {

// Flag stems that need a unit suffix (e.g. --delay-fs, --tau-fs).
constexpr std::array<std::string_view, 11> kUnitlessStems = {
    "delay", "tau", "nu0", "gamma", "resolution", "budget", "jitter", "threshold", "t-min", "t-max", "arm1"};

bool is_unitless_stem(std::string_view key) {
  return key == "arm2" || std::find(kUnitlessStems.begin(), kUnitlessStems.end(), key) != kUnitlessStems.end();
}

void reject_unitless_flags(const std::vector<std::string>& args) {
  for (const auto& a : args) {
    if (!a.starts_with("--")) continue;
    std::string_view key(a);
    key.remove_prefix(2);
    key = key.substr(0, key.find('='));
    if (is_unitless_stem(key)) {
      throw CliError(kAmbiguousUnit, "flag --" + std::string(key) + " needs an explicit unit (e.g. --" +
                                         std::string(key) + (key == "nu0" ? "-thz" : "-fs") + ")");
    }
  }
}

void reject_unitless_config_keys(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const Error& e) {
    throw CliError(kIoError, e.what());
  }
  std::string_view rest(text);
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) continue;
    std::string_view key = line.substr(0, eq);
    while (!key.empty() && (key.front() == ' ' || key.front() == '\t')) key.remove_prefix(1);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.remove_suffix(1);
    if (is_unitless_stem(key)) {
      throw CliError(kAmbiguousUnit, "config key '" + std::string(key) + "' needs an explicit unit");
    }
  }
}

}  // namespace

RunConfig parse_config(const std::vector<std::string>& args) {
  reject_unitless_flags(args);
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) reject_unitless_config_keys(args[i + 1]);
    if (args[i].starts_with("--config=")) reject_unitless_config_keys(args[i].substr(9));
  }

  CLI::App app{"Weak-value spectral interferometry: simulation, sweeps, delay fitting", "wva"};
  app.set_config("--config", "", "File of key = value defaults (same keys as the flags)");
  app.allow_config_extras(CLI::config_extras_mode::error);

  RunConfig cfg;
  std::string command;
  double tau = 0, nu0 = 0, delay_fs = 0, delay_as = 0, arm1 = 0, arm2 = 0, gamma = 0;
  std::string spectrum_file, data_file, out_dir = ".";
  std::size_t grid_count = 0, gamma_steps = 0;

  app.add_option("command", command, "simulate | sweep | fit | montecarlo | regimes")
      ->required()
      ->check(CLI::IsMember({"simulate", "sweep", "fit", "montecarlo", "regimes"}));
  auto* o_tau = app.add_option("--tau-fs", tau, "Gaussian pulse FWHM duration (fs)");
  auto* o_nu0 = app.add_option("--nu0-thz", nu0, "Gaussian pulse centre frequency (THz)");
  auto* o_spec = app.add_option("--spectrum-file", spectrum_file, "Input spectrum CSV (frequency_thz,density)");
  app.add_option("--spectrum-column", cfg.spectrum_column, "Density column of the spectrum CSV");
  auto* o_grid = app.add_option("--grid-count", grid_count, "Nodes of the simulation grid for Gaussian pulses");
  app.add_flag("--numeric", cfg.numeric, "Evaluate Gaussian pulses numerically on a grid");
  auto* o_dfs = app.add_option("--delay-fs", delay_fs, "Delay T = T1 - T2 (fs)");
  auto* o_das = app.add_option("--delay-as", delay_as, "Delay T = T1 - T2 (as)");
  auto* o_arm1 = app.add_option("--arm1-mm", arm1, "Arm length d1 (mm)");
  auto* o_arm2 = app.add_option("--arm2-mm", arm2, "Arm length d2 (mm)");
  auto* o_gamma = app.add_option("--gamma-rad", gamma, "Post-selection angle (rad)");
  app.add_option("--gamma-min-rad", cfg.gamma_min_rad, "Sweep start angle (rad)");
  app.add_option("--gamma-max-rad", cfg.gamma_max_rad, "Sweep end angle (rad)");
  auto* o_steps = app.add_option("--gamma-steps", gamma_steps, "Number of sweep angles");
  app.add_option("--jitter-rad", cfg.jitter_rad,
                 "Post-selection jitter sigma (rad); in fit, weights points by the spread it induces")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--resolution-nm", cfg.resolution_nm, "Analyzer resolution FWHM (nm)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--scans", cfg.scans, "Scans averaged per spectrum")->check(CLI::PositiveNumber);
  app.add_option("--samples", cfg.samples, "Monte-Carlo samples")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "Random seed");
  app.add_option("--threads", cfg.threads, "Worker threads (0 = all cores)");
  app.add_option("--floor", cfg.floor, "Relative energy/denominator floor")->check(CLI::NonNegativeNumber);
  app.add_option("--budget-db", cfg.budget_db, "Insertion-loss budget (dB)");
  app.add_option("--threshold-db", cfg.threshold_db, "Low/high-loss threshold (dB)");
  auto* o_data = app.add_option("--data-file", data_file, "Fit data CSV (gamma_rad,delta_f_thz,loss_db)");
  app.add_option("--t-min-fs", cfg.t_min_fs, "Fit bracket lower bound (fs)");
  app.add_option("--t-max-fs", cfg.t_max_fs, "Fit bracket upper bound (fs)");
  app.add_flag("--fit-gamma-offset", cfg.fit_gamma_offset, "Also fit a post-selection angle offset");
  app.add_option("--grid-nodes", cfg.fit_grid_nodes, "Coarse-grid nodes of the delay search");
  app.add_option("--refits", cfg.refits, "Monte-Carlo refits for the delay uncertainty");
  app.add_option("--out-dir", out_dir, "Output directory");
  app.add_flag("--svg", cfg.svg, "Also write plot.svg");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ExtrasError& e) {
    throw CliError(kUnknownFlag, e.what());
  } catch (const CLI::ConfigError& e) {
    // Unreadable files were reported by the pre-scan; what remains are keys
    // that match no flag.
    throw CliError(kUnknownFlag, e.what());
  } catch (const CLI::CallForHelp&) {
    throw CliError(kOk, app.help());
  } catch (const CLI::ParseError& e) {
    throw CliError(kUsage, e.what());
  }

  if (command == "simulate") cfg.command = Command::Simulate;
  if (command == "sweep") cfg.command = Command::Sweep;
  if (command == "fit") cfg.command = Command::Fit;
  if (command == "montecarlo") cfg.command = Command::MonteCarlo;
  if (command == "regimes") cfg.command = Command::Regimes;

  // Pulse source.
  const bool gaussian = o_tau->count() > 0 || o_nu0->count() > 0;
  const bool from_file = o_spec->count() > 0;
  if (gaussian && from_file) throw CliError(kConflictingOptions, "give either --spectrum-file or --tau-fs/--nu0-thz");
  if (!gaussian && !from_file) throw CliError(kUsage, "a pulse is required: --tau-fs and --nu0-thz, or --spectrum-file");
  if (gaussian) {
    if (o_tau->count() == 0 || o_nu0->count() == 0) {
      throw CliError(kUsage, "a Gaussian pulse needs both --tau-fs and --nu0-thz");
    }
    cfg.tau_fs = tau;
    cfg.nu0_thz = nu0;
  } else {
    cfg.spectrum_file = spectrum_file;
  }
  if (o_grid->count() > 0) cfg.grid_count = grid_count;

  // Delay.
  const int delay_specs = (o_dfs->count() > 0) + (o_das->count() > 0) + (o_arm1->count() > 0 || o_arm2->count() > 0);
  if (delay_specs > 1) throw CliError(kConflictingOptions, "give exactly one of --delay-fs, --delay-as, --arm1-mm/--arm2-mm");
  if (delay_specs == 0 && cfg.command != Command::Fit) {
    throw CliError(kUsage, "a delay is required: --delay-fs, --delay-as or --arm1-mm with --arm2-mm");
  }
  if (o_dfs->count() > 0) {
    cfg.delay_source = DelaySource::Femtoseconds;
    cfg.delay_1_fs = delay_fs;
  } else if (o_das->count() > 0) {
    cfg.delay_source = DelaySource::Attoseconds;
    cfg.delay_1_fs = delay_as * units::kFsPerAs;
  } else if (o_arm1->count() > 0 || o_arm2->count() > 0) {
    if (o_arm1->count() == 0 || o_arm2->count() == 0) throw CliError(kUsage, "arm lengths need both --arm1-mm and --arm2-mm");
    try {
      const auto [t1, t2] = delay_from_arm_lengths(arm1, arm2);
      cfg.delay_1_fs = t1;
      cfg.delay_2_fs = t2;
    } catch (const Error& e) {
      throw CliError(kUsage, e.what());
    }
    cfg.delay_source = DelaySource::ArmLengths;
  }
  if (!std::isfinite(cfg.delay_1_fs) || !std::isfinite(cfg.delay_2_fs)) throw CliError(kUsage, "delay must be finite");

  if (o_gamma->count() > 0) cfg.gamma_rad = gamma;
  if (o_steps->count() > 0) {
    if (gamma_steps < 2) throw CliError(kUsage, "--gamma-steps must be >= 2");
    cfg.gamma_steps = gamma_steps;
  }
  if (!(cfg.gamma_min_rad < cfg.gamma_max_rad)) throw CliError(kUsage, "--gamma-min-rad must be below --gamma-max-rad");

  if (o_data->count() > 0) cfg.data_file = data_file;
  cfg.out_dir = out_dir;

  switch (cfg.command) {
    case Command::Simulate:
    case Command::MonteCarlo:
      if (!cfg.gamma_rad && !cfg.gamma_steps) throw CliError(kUsage, "give --gamma-rad or --gamma-steps");
      if (cfg.gamma_rad && cfg.gamma_steps) throw CliError(kConflictingOptions, "give --gamma-rad or --gamma-steps, not both");
      break;
    case Command::Fit:
      if (!cfg.data_file) throw CliError(kUsage, "fit needs --data-file");
      break;
    case Command::Sweep:
    case Command::Regimes:
      break;
  }
  return cfg;
}

json RunConfig::to_json() const {
  json j;
  j["command"] = to_string(command);
  if (tau_fs) j["tau_fs"] = *tau_fs;
  if (nu0_thz) j["nu0_thz"] = *nu0_thz;
  if (spectrum_file) {
    j["spectrum_file"] = *spectrum_file;
    j["spectrum_column"] = spectrum_column;
  }
  if (grid_count) j["grid_count"] = *grid_count;
  j["numeric"] = numeric;
  j["delay_1_fs"] = delay_1_fs;
  j["delay_2_fs"] = delay_2_fs;
  if (gamma_rad) j["gamma_rad"] = *gamma_rad;
  j["gamma_min_rad"] = gamma_min_rad;
  j["gamma_max_rad"] = gamma_max_rad;
  if (gamma_steps) j["gamma_steps"] = *gamma_steps;
  j["jitter_rad"] = jitter_rad;
  j["resolution_nm"] = resolution_nm;
  j["scans"] = scans;
  j["samples"] = samples;
  j["seed"] = seed;
  j["floor"] = floor;
  j["budget_db"] = budget_db;
  j["threshold_db"] = threshold_db;
  if (data_file) j["data_file"] = *data_file;
  j["t_min_fs"] = t_min_fs;
  j["t_max_fs"] = t_max_fs;
  j["fit_gamma_offset"] = fit_gamma_offset;
  j["grid_nodes"] = fit_grid_nodes;
  j["refits"] = refits;
  j["svg"] = svg;
  return j;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
json number_or_null(const std::optional<double>& v) { return v ? number_or_null(*v) : json(nullptr); }

class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, std::string_view text) {
    const auto path = dir_ / name;
    io::write_text(path, text);
    written_.push_back(path);
  }
  void rollback() noexcept {
    for (const auto& p : written_) {
      std::error_code ec;
      std::filesystem::remove(p, ec);
    }
    written_.clear();
  }
  const std::vector<std::filesystem::path>& files() const noexcept { return written_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> written_;
};

struct Context {
  const RunConfig& cfg;
  PulseModel model;
  std::optional<Spectrum> grid_spectrum;  // tabulated input on a grid (file or sampled Gaussian)
  std::vector<std::string> warnings;
  json derived;

  const GaussianPulse* gaussian() const { return std::get_if<GaussianPulse>(&model); }

  const Spectrum& spectrum() {
    if (!grid_spectrum) {
      const auto& p = std::get<GaussianPulse>(model);
      grid_spectrum = gaussian_spectrum(
          p, p.default_grid(cfg.grid_count.value_or(GaussianPulse::kDefaultGridCount)));
    }
    return *grid_spectrum;
  }

  /// Model used for sweeps/regimes/fits: closed form unless --numeric.
  PulseModel evaluation_model() {
    if (gaussian() && !cfg.numeric) return model;
    return spectrum();
  }

  InstrumentModel instrument() {
    InstrumentModel m;
    m.scans_to_average = cfg.scans;
    if (cfg.resolution_nm > 0.0) {
      const double nu_ref = gaussian() ? gaussian()->center() : centroid(spectrum());
      m.resolution_fwhm = wavelength_width_to_frequency(cfg.resolution_nm, frequency_to_wavelength(nu_ref));
    }
    return m;
  }

  std::vector<double> gammas() const {
    if (cfg.gamma_rad && !cfg.gamma_steps) return {*cfg.gamma_rad};
    const std::size_t n = cfg.gamma_steps.value_or(361);
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = i + 1 == n ? cfg.gamma_max_rad
                        : cfg.gamma_min_rad + (cfg.gamma_max_rad - cfg.gamma_min_rad) * static_cast<double>(i) /
                                                  static_cast<double>(n - 1);
    }
    return g;
  }
};

Context make_context(const RunConfig& cfg) {
  if (cfg.tau_fs) {
    Context ctx{cfg, GaussianPulse(*cfg.nu0_thz, *cfg.tau_fs), std::nullopt, {}, json::object()};
    ctx.derived["gamma_factor"] = gamma_factor(cfg.delay_fs(), *cfg.tau_fs);
    ctx.derived["spectral_fwhm_thz"] = std::get<GaussianPulse>(ctx.model).spectral_fwhm();
    return ctx;
  }
  auto loaded = io::read_spectrum_csv(*cfg.spectrum_file, cfg.spectrum_column);
  Context ctx{cfg, loaded.spectrum, loaded.spectrum, {}, json::object()};
  if (loaded.clamped > 0) {
    ctx.warnings.push_back(std::to_string(loaded.clamped) + " negative densities clamped to zero");
  }
  ctx.derived["clamped_densities"] = loaded.clamped;
  return ctx;
}

json grid_json(const FrequencyGrid& g) {
  return {{"start_thz", g.start()}, {"step_thz", g.step()}, {"count", g.count()}};
}

json observables_json(const PointObservables& p) {
  return {{"delta_f_thz", number_or_null(p.delta_f)}, {"loss_db", number_or_null(p.loss_db)}, {"singular", p.singular()}};
}

json working_point_json(const WorkingPoint& wp, double threshold_db) {
  return {{"gamma_rad", wp.gamma},
          {"delta_f_thz", wp.shift},
          {"loss_db", wp.loss},
          {"regime", std::string(to_string(classify_regime(wp, threshold_db)))}};
}

std::string format_row(std::initializer_list<std::string> cells) {
  std::string out;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out += ',';
    out += c;
    first = false;
  }
  out += '\n';
  return out;
}

svg::Series sweep_series(const std::string& label, const SweepResult& s, bool shift) {
  svg::Series series{label, s.gammas, {}};
  for (std::size_t i = 0; i < s.size(); ++i) {
    series.y.push_back(shift ? s.shifts[i].value_or(std::nan("")) : s.losses[i]);
  }
  return series;
}

std::vector<svg::Panel> sweep_panels(const SweepResult& s) {
  return {{"Centroid shift vs post-selection angle", "Gamma (rad)", "shift (THz)", {sweep_series("delta f", s, true)}},
          {"Insertion loss vs post-selection angle", "Gamma (rad)", "loss (dB)", {sweep_series("L", s, false)}}};
}

json run_simulate(Context& ctx, OutputSet& out) {
  const auto& cfg = ctx.cfg;
  const InstrumentModel inst = ctx.instrument();
  const Spectrum input = convolve_instrument(ctx.spectrum(), inst);
  const auto gammas = ctx.gammas();

  std::vector<Spectrum> outputs;
  json points = json::array();
  for (double g : gammas) {
    const InterferometerConfig ic(cfg.delay_1_fs, cfg.delay_2_fs, g);
    outputs.push_back(convolve_instrument(output_spectrum(ctx.spectrum(), ic), inst));
    json p = observables_json(try_compare_spectra(input, outputs.back(), cfg.floor));
    p["gamma_rad"] = g;
    if (const auto* gp = ctx.gaussian()) p["closed_form"] = observables_json(observables_gaussian(*gp, cfg.delay_fs(), g, cfg.floor));
    points.push_back(std::move(p));
  }

  std::string table = "frequency_thz,input";
  for (std::size_t k = 0; k < outputs.size(); ++k) table += ",out_" + std::to_string(k);
  table += '\n';
  for (std::size_t i = 0; i < input.size(); ++i) {
    table += io::format_double(input.grid().node(i));
    table += ',';
    table += io::format_double(input[i]);
    for (const auto& s : outputs) {
      table += ',';
      table += io::format_double(s[i]);
    }
    table += '\n';
  }

  std::string single = "frequency_thz,density\n";
  for (std::size_t i = 0; i < outputs.front().size(); ++i) {
    single += io::format_double(outputs.front().grid().node(i)) + "," + io::format_double(outputs.front()[i]) + "\n";
  }
  std::string in_csv = "frequency_thz,density\n";
  for (std::size_t i = 0; i < input.size(); ++i) {
    in_csv += io::format_double(input.grid().node(i)) + "," + io::format_double(input[i]) + "\n";
  }
  out.write("input_spectrum.csv", in_csv);
  out.write("output_spectrum.csv", single);
  out.write("spectra.csv", table);

  if (cfg.svg) {
    svg::Panel panel{"Spectral density", "frequency (THz)", "density (a.u.)", {}};
    std::vector<double> x(input.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = input.grid().node(i);
    panel.series.push_back({"input", x, {input.values().begin(), input.values().end()}});
    for (std::size_t k = 0; k < std::min<std::size_t>(outputs.size(), 5); ++k) {
      panel.series.push_back({"Gamma = " + io::format_double(gammas[k]) + " rad", x,
                              {outputs[k].values().begin(), outputs[k].values().end()}});
    }
    out.write("plot.svg", svg::render({panel}));
  }
  ctx.derived["grid"] = grid_json(input.grid());
  ctx.derived["instrument_fwhm_thz"] = inst.resolution_fwhm;
  return {{"points", points}, {"spectra_columns", gammas}};
}

json run_sweep(Context& ctx, OutputSet& out) {
  const auto& cfg = ctx.cfg;
  const auto model = ctx.evaluation_model();
  const SweepResult s = gamma_sweep(model, cfg.delay_fs(), cfg.gamma_min_rad, cfg.gamma_max_rad,
                                    cfg.gamma_steps.value_or(361), cfg.floor);
  out.write("sweep.csv", io::format_sweep_csv(s));
  if (cfg.svg) out.write("plot.svg", svg::render(sweep_panels(s)));
  if (s.singular_count() > 0) ctx.warnings.push_back(std::to_string(s.singular_count()) + " singular sweep points");
  if (const auto* sp = std::get_if<Spectrum>(&model)) ctx.derived["grid"] = grid_json(sp->grid());

  double max_abs = 0.0;
  double min_loss = kInf;
  double max_loss = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.shifts[i]) max_abs = std::max(max_abs, std::abs(*s.shifts[i]));
    min_loss = std::min(min_loss, s.losses[i]);
    if (std::isfinite(s.losses[i])) max_loss = std::max(max_loss, s.losses[i]);
  }
  return {{"model", std::string(to_string(s.model_tag))},
          {"points", s.size()},
          {"singular_points", s.singular_count()},
          {"max_abs_delta_f_thz", max_abs},
          {"min_loss_db", number_or_null(min_loss)},
          {"max_finite_loss_db", max_loss}};
}

json run_fit(Context& ctx, OutputSet& out) {
  const auto& cfg = ctx.cfg;
  const io::FitData data = io::read_fit_csv(*cfg.data_file);
  FitProblem problem{ctx.evaluation_model(), data.gamma, data.shift, data.loss};
  problem.t_min = cfg.t_min_fs;
  problem.t_max = cfg.t_max_fs;
  problem.fit_gamma_offset = cfg.fit_gamma_offset;
  problem.grid_nodes = cfg.fit_grid_nodes;
  problem.floor = cfg.floor;
  problem.threads = cfg.threads;
  if (cfg.jitter_rad > 0.0) problem.gamma_jitter = cfg.jitter_rad;

  FitResult r = fit_delay(problem);
  if (cfg.refits > 0) r.uncertainty = refit_uncertainty(problem, r, cfg.jitter_rad, cfg.refits, cfg.seed);
  if (!r.converged) ctx.warnings.push_back("delay fit did not converge; best iterate reported");
  if (r.singular_points > 0) ctx.warnings.push_back(std::to_string(r.singular_points) + " singular model points in fit");

  json result = {{"t_hat_fs", r.t_hat},
                 {"gamma_offset_hat_rad", r.gamma_offset_hat},
                 {"residual_norm", r.residual_norm},
                 {"shift_rms_thz", number_or_null(r.per_channel_rms.shift)},
                 {"loss_rms_db", number_or_null(r.per_channel_rms.loss)},
                 {"iterations", r.iterations},
                 {"converged", r.converged},
                 {"alternates_fs", r.alternates},
                 {"singular_points", r.singular_points},
                 {"data_points", data.gamma.size()}};
  if (r.uncertainty) {
    result["uncertainty"] = {{"mean_fs", r.uncertainty->mean},
                             {"std_fs", r.uncertainty->std},
                             {"samples", r.uncertainty->sample_count}};
  }
  out.write("fit.json", result.dump(2) + "\n");

  SweepResult curve;
  curve.model_tag = std::holds_alternative<GaussianPulse>(problem.model) ? ModelTag::GaussianClosedForm
                                                                         : ModelTag::NumericSpectrum;
  for (double g : data.gamma) {
    curve.gammas.push_back(g);
    PointObservables p = std::visit(
        [&](const auto& m) -> PointObservables {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, GaussianPulse>) {
            return observables_gaussian(m, r.t_hat, g + r.gamma_offset_hat, cfg.floor);
          } else {
            return ModulationMoments(m, r.t_hat).evaluate(g + r.gamma_offset_hat, cfg.floor);
          }
        },
        problem.model);
    curve.shifts.push_back(p.delta_f);
    curve.losses.push_back(p.loss_db);
  }
  out.write("fit_curve.csv", io::format_sweep_csv(curve));
  if (cfg.svg) {
    auto panels = sweep_panels(curve);
    if (data.shift) panels[0].series.push_back({"data", data.gamma, *data.shift});
    if (data.loss) panels[1].series.push_back({"data", data.gamma, *data.loss});
    out.write("plot.svg", svg::render(panels));
  }
  return result;
}

json run_montecarlo(Context& ctx, OutputSet& out) {
  const auto& cfg = ctx.cfg;
  NoiseModel nm;
  nm.gamma_jitter_sigma = cfg.jitter_rad;
  nm.instrument = ctx.instrument();
  nm.seed = cfg.seed;
  nm.samples = cfg.samples;
  MonteCarloOptions opts;
  opts.floor = cfg.floor;
  opts.threads = cfg.threads;
  const Spectrum& s_in = ctx.spectrum();

  const auto gammas = ctx.gammas();
  std::string csv = "gamma_rad,delta_f_thz,loss_db,delta_f_std_thz,loss_std_db,samples,excluded\n";
  json points = json::array();
  for (double g : gammas) {
    try {
      const auto r = monte_carlo_observables(s_in, cfg.delay_fs(), g, nm, opts);
      csv += format_row({io::format_double(g), io::format_double(r.delta_f.mean), io::format_double(r.loss.mean),
                         io::format_double(r.delta_f.std), io::format_double(r.loss.std),
                         std::to_string(r.delta_f.sample_count), std::to_string(r.excluded)});
      points.push_back({{"gamma_rad", g},
                        {"delta_f_mean_thz", r.delta_f.mean},
                        {"delta_f_std_thz", r.delta_f.std},
                        {"loss_mean_db", r.loss.mean},
                        {"loss_std_db", r.loss.std},
                        {"samples", r.delta_f.sample_count},
                        {"excluded", r.excluded}});
      if (r.excluded > 0) {
        ctx.warnings.push_back(std::to_string(r.excluded) + " singular samples excluded at Gamma = " +
                               io::format_double(g));
      }
    } catch (const AllSamplesSingular&) {
      if (gammas.size() == 1) throw;
      csv += format_row({io::format_double(g), "", "", "", "", "0", std::to_string(cfg.samples)});
      points.push_back({{"gamma_rad", g}, {"excluded", cfg.samples}, {"samples", 0}});
      ctx.warnings.push_back("all samples singular at Gamma = " + io::format_double(g));
    }
  }
  out.write("montecarlo.csv", csv);
  ctx.derived["grid"] = grid_json(s_in.grid());
  ctx.derived["instrument_fwhm_thz"] = nm.instrument.resolution_fwhm;
  return {{"points", points}};
}

json run_regimes(Context& ctx, OutputSet& out) {
  const auto& cfg = ctx.cfg;
  const auto model = ctx.evaluation_model();
  const double t = cfg.delay_fs();
  const WorkingPoint global = global_max_shift(model, t);
  json result = {{"global_max", working_point_json(global, cfg.threshold_db)}};
  result["budget_db"] = cfg.budget_db;
  result["threshold_db"] = cfg.threshold_db;
  const WorkingPoint budget = max_shift_at_loss_budget(model, t, cfg.budget_db);
  result["budget_point"] = working_point_json(budget, cfg.threshold_db);
  if (const auto* p = std::get_if<GaussianPulse>(&model)) {
    const double g = gamma_factor(t, p->duration());
    result["min_loss_db"] = -10.0 * std::log10(0.5 * (1.0 + g));
    result["high_loss_point"] = {
        {"gamma_rad", wrap_angle(post_selection_for_phase(p->center(), t, units::kPi))},
        {"loss_db", number_or_null(loss_gaussian(*p, t, post_selection_for_phase(p->center(), t, units::kPi)))}};
    result["low_loss_zero_shift_gamma_rad"] = wrap_angle(post_selection_for_phase(p->center(), t, 0.0));
  }
  const SweepResult s =
      gamma_sweep(model, t, cfg.gamma_min_rad, cfg.gamma_max_rad, cfg.gamma_steps.value_or(361), cfg.floor);
  out.write("sweep.csv", io::format_sweep_csv(s));
  if (cfg.svg) out.write("plot.svg", svg::render(sweep_panels(s)));
  return result;
}

}  // namespace

RunReport run(const RunConfig& config) {
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec || !std::filesystem::is_directory(config.out_dir)) {
    throw Io("cannot create output directory " + config.out_dir.string());
  }
  OutputSet out(config.out_dir);
  try {
    Context ctx = make_context(config);
    ctx.derived["delay_fs"] = config.delay_fs();
    ctx.derived["delay_1_fs"] = config.delay_1_fs;
    ctx.derived["delay_2_fs"] = config.delay_2_fs;

    json results;
    switch (config.command) {
      case Command::Simulate: results = run_simulate(ctx, out); break;
      case Command::Sweep: results = run_sweep(ctx, out); break;
      case Command::Fit: results = run_fit(ctx, out); break;
      case Command::MonteCarlo: results = run_montecarlo(ctx, out); break;
      case Command::Regimes: results = run_regimes(ctx, out); break;
    }

    RunReport report;
    report.warnings = ctx.warnings;
    json outputs = json::array();
    for (const auto& f : out.files()) outputs.push_back(f.filename().string());
    outputs.push_back("report.json");
    report.json = {{"config", config.to_json()},
                   {"derived", ctx.derived},
                   {"results", results},
                   {"warnings", ctx.warnings},
                   {"outputs", outputs}};
    out.write("report.json", report.json.dump(2) + "\n");
    report.outputs = out.files();
    return report;
  } catch (...) {
    out.rollback();
    throw;
  }
}

int main_entry(const std::vector<std::string>& args) {
  try {
    const RunConfig cfg = parse_config(args);
    const RunReport report = run(cfg);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << report.json["results"].dump(2) << "\n";
    return kOk;
  } catch (const CliError& e) {
    (e.code() == kOk ? std::cout : std::cerr) << (e.code() == kOk ? "" : "error: ") << e.what() << "\n";
    return e.code();
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace wva::cli
