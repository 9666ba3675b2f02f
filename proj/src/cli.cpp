#include "triad/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "triad/correlations.hpp"
#include "triad/dynamics.hpp"
#include "triad/errors.hpp"
#include "triad/inference.hpp"
#include "triad/io.hpp"
#include "triad/random.hpp"

namespace triad::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::string> powers;
  bool fix_gamma1 = false;
  bool tie_gamma2 = false;
  std::string templates;
  std::string objective = "ml";
  std::string dataset;
  std::vector<std::string> reports;
};

RunConfig config_from(const Flags& f) {
  RunConfig cfg = f.config.empty() ? parse_config(json::object()) : load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (!f.out.empty()) cfg.output_dir = f.out;
  return cfg;
}

std::vector<double> parse_powers(const std::optional<std::string>& text) {
  if (!text) return {0.110, 0.140, 0.170, 0.200};
  std::vector<double> out;
  std::stringstream ss(*text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    std::size_t used = 0;
    double mw = 0;
    try {
      mw = std::stod(cell, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("--powers: '" + cell + "' is not a number");
    }
    if (used != cell.size() || !(mw > 0))
      throw std::invalid_argument("--powers: '" + cell + "' is not a positive power in mW");
    out.push_back(mw * 1e-3);
  }
  if (out.empty()) throw std::invalid_argument("--powers: empty power list");
  return out;
}

fs::path ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json provenance(const std::string& digest) {
  return {{"tool", std::string(kToolName)}, {"version", std::string(kToolVersion)},
          {"input_sha256", digest}};
}

// Digest input for a config; where the outputs go is not an input.
std::string config_fingerprint(const RunConfig& cfg) {
  json j = config_to_json(cfg);
  j.erase("output_dir");
  return j.dump();
}

std::string mw_label(double power) {
  return std::to_string(std::lround(power * 1e3)) + "mW";
}

// --- predict ---------------------------------------------------------------

fs::path do_predict(const RunConfig& cfg, const std::vector<double>& powers, std::ostream& out) {
  std::string inputs = config_fingerprint(cfg);
  for (double p : powers) inputs += "," + format_double(p);
  const std::string digest = sha256_hex(inputs);

  const double omega_ref = frequencies_at_power(cfg.trap, cfg.trap.ref_power_freq).x();
  const int m = cfg.gamma2_model.m;
  const double amplitude = cfg.gamma2_model.gamma2_at_ref / std::pow(omega_ref, gamma2_exponent(m));

  std::ostringstream csv;
  csv << provenance_comment(digest) << '\n';
  csv << "power_mW,omega_perp_kHz,gamma3_thermal,gamma3_stg,gamma3_1d,gamma2_scaling,g3_peak,"
         "gamma_ll,peak_density_cm3,strong_coupling\n";
  for (double p : powers) {
    const Gamma3Prediction pr = predict_gamma3(cfg.trap, cfg.microscopic, p);
    csv << format_double(p * 1e3) << ',' << format_double(pr.omega_perp / (2.0 * kPi) * 1e-3)
        << ',' << format_double(pr.thermal) << ',' << format_double(pr.stg) << ','
        << format_double(pr.ground_state_1d) << ','
        << format_double(gamma2_scaling(amplitude, m, pr.omega_perp)) << ','
        << format_double(pr.g3.value) << ',' << format_double(pr.gamma_ll) << ','
        << format_double(pr.peak_density * 1e-6) << ',' << (pr.g3.strong_coupling ? 1 : 0)
        << '\n';
    out << std::setprecision(4) << "P = " << p * 1e3 << " mW: Gamma3 thermal " << pr.thermal
        << " /s, STG " << pr.stg << " /s, 1D " << pr.ground_state_1d << " /s\n";
  }
  const fs::path path = ensure_dir(cfg.output_dir) / "predict.csv";
  write_text(path, csv.str());
  out << "wrote " << path.string() << '\n';
  return path;
}

// --- simulate --------------------------------------------------------------

RateCoefficients rates_at_power(const RunConfig& cfg, double power) {
  if (!cfg.rates) throw std::invalid_argument("config: 'rates_per_s' is required for simulation");
  if (power == cfg.design.power) return *cfg.rates;
  // Pair-loss rates follow the configured intensity law; the others stay put.
  const double e = gamma2_exponent(cfg.gamma2_model.m);
  const double ratio = std::pow(frequencies_at_power(cfg.trap, power).x() /
                                    frequencies_at_power(cfg.trap, cfg.design.power).x(),
                                e);
  RateCoefficients r = *cfg.rates;
  r.gamma2 *= ratio;
  r.gamma2_tilde *= ratio;
  return r;
}

DatasetFiles do_simulate(const RunConfig& cfg, double power, std::uint64_t seed,
                         const std::string& stem, std::ostream& out) {
  ExperimentDesign design = cfg.design;
  design.power = power;
  const RateCoefficients rates = rates_at_power(cfg, power);
  const ShotDataset ds = simulate_dataset(design, rates, cfg.readout, seed);
  const TrapState state = trap_state(cfg.trap, power);
  json extra = {{"trap", trap_to_json(cfg.trap)},
                {"power_mW", power * 1e3},
                {"omega_perp_rad_s", state.omega_perp()},
                {"provenance", provenance(sha256_hex(config_fingerprint(cfg)))}};
  const DatasetFiles files = write_dataset(ds, ensure_dir(cfg.output_dir), stem, extra);
  out << "wrote " << files.envelope.string() << " ("
      << design.wait_times.size() * std::size_t(design.shots_per_time) << " shots)\n";
  return files;
}

// --- fit -------------------------------------------------------------------

fs::path do_fit(const fs::path& dataset, const fs::path& out_dir, const FitOptions& options,
                const std::string& templates_path, MixtureObjective objective, std::ostream& out) {
  json env;
  const ShotDataset ds = read_dataset(dataset, &env);

  std::optional<ReadoutTemplates> empirical;
  if (!templates_path.empty()) {
    std::ifstream in(templates_path);
    if (!in) throw IoError("cannot open " + templates_path);
    empirical = read_templates_csv(in);
  }
  int max_count = 0;
  for (const auto& row : ds.photon_counts)
    for (int c : row) max_count = std::max(max_count, c);
  const ReadoutTemplates templates =
      empirical ? *empirical : readout_templates(ds.readout, max_count + 1);

  std::vector<TimedOccupancy> series;
  std::ostringstream occ;
  std::string digest_input = read_text(dataset) + (templates_path.empty() ? "" : read_text(templates_path));
  digest_input += options.fix_gamma1 ? "|fix" : "|free";
  digest_input += options.tie_gamma2 ? "|tie" : "|untied";
  digest_input += objective == MixtureObjective::LeastSquares ? "|ls" : "|ml";
  const std::string digest = sha256_hex(digest_input);
  occ << provenance_comment(digest) << '\n' << "t_s,w3,w2,w1,w0,se3,se2,se1,se0,shots\n";
  for (std::size_t i = 0; i < ds.photon_counts.size(); ++i) {
    const auto hist = PhotonHistogram::from_counts(ds.photon_counts[i], templates.bins());
    OccupancyEstimate est = decompose_histogram(hist, templates, objective);
    if (est.ill_conditioned)
      out << "warning: ill-conditioned decomposition at t = " << ds.design.wait_times[i] << " s\n";
    occ << format_double(ds.design.wait_times[i]);
    for (int k = 3; k >= 0; --k) occ << ',' << format_double(est.weights[k]);
    for (int k = 3; k >= 0; --k) occ << ',' << format_double(est.standard_errors[k]);
    occ << ',' << est.shots << '\n';
    series.push_back({ds.design.wait_times[i], std::move(est)});
  }

  const RateFit fit = fit_rates(series, options);
  json report = fit_report_json(fit);
  report["dataset"] = dataset.filename().string();
  report["provenance"] = provenance(digest);
  if (env.contains("omega_perp_rad_s")) report["omega_perp_rad_s"] = env["omega_perp_rad_s"];
  if (env.contains("power_mW")) report["power_mW"] = env["power_mW"];
  if (ds.true_rates) report["true_rates"] = rates_to_json(*ds.true_rates);

  // Fitted curves on a fine grid.
  const double t_end = ds.design.wait_times.back();
  std::vector<double> grid;
  for (int i = 0; i <= 200; ++i) grid.push_back(t_end * i / 200.0);
  if (t_end == 0.0) grid = {0.0};
  const Trajectory curve = evolve_analytic(fit.fitted_initials, fit.rates, grid);
  std::ostringstream pops;
  pops << provenance_comment(digest) << '\n';
  write_trajectory_csv(pops, curve);

  ensure_dir(out_dir);
  const std::string stem = dataset.stem().string();
  const fs::path report_path = out_dir / (stem + "_fit.json");
  write_text(report_path, report.dump(2) + "\n");
  write_text(out_dir / (stem + "_populations.csv"), pops.str());
  write_text(out_dir / (stem + "_occupancy.csv"), occ.str());

  out << std::setprecision(5) << "Gamma3 = " << fit.rates.gamma3 << " +- "
      << fit.rate_errors[int(RateParam::Gamma3)] << " /s, Gamma2~ = " << fit.rates.gamma2_tilde
      << " +- " << fit.rate_errors[int(RateParam::Gamma2Tilde)] << " /s, Gamma2 = "
      << fit.rates.gamma2 << " +- " << fit.rate_errors[int(RateParam::Gamma2)] << " /s\n";
  if (!fit.identifiable[int(RateParam::Gamma3)])
    out << "Gamma3 is unidentifiable from this dataset (no triad population)\n";
  out << "wrote " << report_path.string() << '\n';
  return report_path;
}

// --- scan ------------------------------------------------------------------

fs::path do_scan(const std::vector<std::string>& reports, const fs::path& out_dir,
                 std::ostream& out) {
  if (reports.size() < 2) throw std::invalid_argument("scan: need at least two fit reports");
  std::vector<ScalingPoint> points;
  std::string digest_input;
  json used = json::array();
  for (const auto& path : reports) {
    const std::string text = read_text(path);
    digest_input += text;
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(path + ": " + e.what());
    }
    const ScalingPoint p = scaling_point_from_report(doc);
    points.push_back(p);
    used.push_back({{"report", fs::path(path).filename().string()},
                    {"rate", scaling_rate_key(doc)},
                    {"omega_perp_rad_s", p.omega_perp},
                    {"gamma2", p.gamma2},
                    {"sigma", p.sigma}});
  }
  const ScalingFit fit = fit_scaling(points);
  json report = scaling_report_json(fit);
  report["points"] = used;
  report["provenance"] = provenance(sha256_hex(digest_input));
  const fs::path path = ensure_dir(out_dir) / "scaling_report.json";
  write_text(path, report.dump(2) + "\n");
  out << "selected m = " << fit.selected_m << " (Gamma2 ~ omega^" << exponent_label(fit.selected_m)
      << ")\nwrote " << path.string() << '\n';
  return path;
}

std::uint64_t power_seed(std::uint64_t seed, std::size_t index) {
  RandomStream s(seed, 0xFFFFFFFFu, std::uint32_t(index));
  return s();
}

FitOptions fit_options(const Flags& f) {
  FitOptions o;
  o.fix_gamma1 = f.fix_gamma1;
  o.tie_gamma2 = f.tie_gamma2;
  return o;
}

MixtureObjective objective_of(const std::string& s) {
  if (s == "ml") return MixtureObjective::MaximumLikelihood;
  if (s == "ls") return MixtureObjective::LeastSquares;
  throw std::invalid_argument("--objective must be 'ml' or 'ls'");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Few-atom loss kinetics: predict, simulate, fit and scan", "triadloss"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&f](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON run configuration");
    sub->add_option("--out", f.out, "output directory (overrides config output_dir)");
  };
  auto add_fit_flags = [&f](CLI::App* sub) {
    sub->add_flag("--fix-gamma1", f.fix_gamma1, "hold the single-atom loss rate at zero");
    sub->add_flag("--tie-gamma2", f.tie_gamma2, "constrain gamma2_tilde == gamma2");
    sub->add_option("--templates", f.templates, "empirical photon templates CSV");
    sub->add_option("--objective", f.objective, "histogram decomposition: ml or ls");
  };

  auto* predict = app.add_subcommand("predict", "Gamma3 theory curves and Gamma2 scaling");
  add_common(predict);
  predict->add_option("--powers", f.powers, "comma-separated beam powers in mW");

  auto* simulate = app.add_subcommand("simulate", "generate a synthetic shot dataset");
  add_common(simulate);
  simulate->add_option("--seed", f.seed, "master seed (overrides config)");

  auto* fit = app.add_subcommand("fit", "decompose histograms and fit rate coefficients");
  fit->add_option("dataset", f.dataset, "dataset envelope (.json)")->required();
  fit->add_option("--out", f.out, "output directory");
  add_fit_flags(fit);

  auto* scan = app.add_subcommand("scan", "select the Gamma2 intensity power law");
  scan->add_option("reports", f.reports, "fit reports at different powers")->required();
  scan->add_option("--out", f.out, "output directory");

  auto* pipeline = app.add_subcommand("pipeline", "simulate, fit and scan over powers");
  add_common(pipeline);
  pipeline->add_option("--seed", f.seed, "master seed (overrides config)");
  pipeline->add_option("--powers", f.powers, "comma-separated beam powers in mW");
  add_fit_flags(pipeline);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }

  try {
    if (predict->parsed()) {
      const RunConfig cfg = config_from(f);
      do_predict(cfg, parse_powers(f.powers), out);
    } else if (simulate->parsed()) {
      const RunConfig cfg = config_from(f);
      if (!cfg.seed) throw std::invalid_argument("simulate: a seed is required (--seed or config)");
      do_simulate(cfg, cfg.design.power, *cfg.seed, "dataset", out);
    } else if (fit->parsed()) {
      do_fit(f.dataset, f.out.empty() ? fs::path(".") : fs::path(f.out), fit_options(f),
             f.templates, objective_of(f.objective), out);
    } else if (scan->parsed()) {
      do_scan(f.reports, f.out.empty() ? fs::path(".") : fs::path(f.out), out);
    } else if (pipeline->parsed()) {
      const RunConfig cfg = config_from(f);
      if (!cfg.seed) throw std::invalid_argument("pipeline: a seed is required (--seed or config)");
      const auto powers = parse_powers(f.powers);
      const MixtureObjective objective = objective_of(f.objective);
      std::vector<std::string> reports;
      for (std::size_t i = 0; i < powers.size(); ++i) {
        const auto files = do_simulate(cfg, powers[i], power_seed(*cfg.seed, i),
                                       "dataset_" + mw_label(powers[i]), out);
        reports.push_back(
            do_fit(files.envelope, cfg.output_dir, fit_options(f), f.templates, objective, out)
                .string());
      }
      do_scan(reports, cfg.output_dir, out);
    }
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const FitFailure& e) {
    err << "fit failed: " << e.what() << " (best residual " << e.best_residual() << ")\n";
    return kFailure;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kValidation;
  } catch (const std::domain_error& e) {
    err << "invalid input: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kSuccess;
}

}  // namespace triad::cli
