#include "triad/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <openssl/evp.h>

#include "triad/errors.hpp"

namespace triad {

using nlohmann::json;

namespace {

/// Reads an optional numeric field, raising std::invalid_argument on a type
/// mismatch so callers report it as a validation error.
double number_or(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw std::invalid_argument(std::string("config: '") + key + "' must be a number");
  return v.get<double>();
}

const json& object_or_empty(const json& j, const char* key) {
  static const json empty = json::object();
  if (!j.contains(key)) return empty;
  if (!j.at(key).is_object())
    throw std::invalid_argument(std::string("config: '") + key + "' must be an object");
  return j.at(key);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
bool parse_exact(const std::string& text, T& out) {
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

// ---------------------------------------------------------------------------

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string provenance_comment(std::string_view input_digest) {
  return "# " + std::string(kToolName) + " " + std::string(kToolVersion) + " input-sha256 " +
         std::string(input_digest);
}

// ---------------------------------------------------------------------------
// Config sections
// ---------------------------------------------------------------------------

json trap_to_json(const TrapConfig& t) {
  return {{"ref_power_freq_mW", t.ref_power_freq * 1e3},
          {"ref_freqs_kHz",
           {t.ref_frequencies.x() * 1e-3, t.ref_frequencies.y() * 1e-3, t.ref_frequencies.z() * 1e-3}},
          {"ref_power_temp_mW", t.ref_power_temp * 1e3},
          {"ref_temp_uK", t.ref_temperature * 1e6},
          {"wavelength_nm", t.wavelength * 1e9},
          {"waist_um", t.waist * 1e6}};
}

TrapConfig trap_from_json(const json& j) {
  TrapConfig t;
  t.ref_power_freq = number_or(j, "ref_power_freq_mW", t.ref_power_freq * 1e3) * 1e-3;
  if (j.contains("ref_freqs_kHz")) {
    const json& f = j.at("ref_freqs_kHz");
    if (!f.is_array() || f.size() != 3)
      throw std::invalid_argument("config: 'ref_freqs_kHz' must be a list of three numbers");
    for (int i = 0; i < 3; ++i) {
      if (!f[std::size_t(i)].is_number())
        throw std::invalid_argument("config: 'ref_freqs_kHz' entries must be numbers");
      t.ref_frequencies[i] = f[std::size_t(i)].get<double>() * 1e3;
    }
  }
  t.ref_power_temp = number_or(j, "ref_power_temp_mW", t.ref_power_temp * 1e3) * 1e-3;
  t.ref_temperature = number_or(j, "ref_temp_uK", t.ref_temperature * 1e6) * 1e-6;
  t.wavelength = number_or(j, "wavelength_nm", t.wavelength * 1e9) * 1e-9;
  t.waist = number_or(j, "waist_um", t.waist * 1e6) * 1e-6;
  return t;
}

namespace {

json micro_to_json(const MicroscopicConstants& m, const PhysicalConstants& pc) {
  return {{"kappa1_per_s", m.kappa1},
          {"kappa2_cm3_per_s", m.kappa2 * 1e6},
          {"kappa3_cm6_per_s", m.kappa3 * 1e12},
          {"scattering_length_a0", m.scattering_length / pc.bohr_radius},
          {"lieb_liniger_C", m.lieb_liniger_C},
          {"g3_mode", m.g3_mode == G3Mode::Local ? "local" : "peak"},
          {"strong_coupling_bound", m.strong_coupling_bound}};
}

MicroscopicConstants micro_from_json(const json& j, const PhysicalConstants& pc) {
  MicroscopicConstants m;
  m.kappa1 = number_or(j, "kappa1_per_s", m.kappa1);
  m.kappa2 = number_or(j, "kappa2_cm3_per_s", m.kappa2 * 1e6) * 1e-6;
  m.kappa3 = number_or(j, "kappa3_cm6_per_s", m.kappa3 * 1e12) * 1e-12;
  m.scattering_length =
      number_or(j, "scattering_length_a0", m.scattering_length / pc.bohr_radius) * pc.bohr_radius;
  m.lieb_liniger_C = number_or(j, "lieb_liniger_C", m.lieb_liniger_C);
  m.strong_coupling_bound = number_or(j, "strong_coupling_bound", m.strong_coupling_bound);
  if (j.contains("g3_mode")) {
    const json& v = j.at("g3_mode");
    if (v == "local")
      m.g3_mode = G3Mode::Local;
    else if (v == "peak")
      m.g3_mode = G3Mode::Peak;
    else
      throw std::invalid_argument("config: 'g3_mode' must be \"local\" or \"peak\"");
  }
  return m;
}

json populations_to_json(const PopulationVector& p) {
  return {{"r3", p.r3()}, {"r2", p.r2()}, {"r1", p.r1()}, {"r0", p.r0()}};
}

PopulationVector populations_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: populations must be an object");
  return {number_or(j, "r3", 0.0), number_or(j, "r2", 0.0), number_or(j, "r1", 0.0),
          number_or(j, "r0", 0.0)};
}

}  // namespace

json design_to_json(const ExperimentDesign& d) {
  return {{"wait_times_s", d.wait_times},
          {"shots_per_time", d.shots_per_time},
          {"initial_populations", populations_to_json(d.initial_populations)},
          {"power_W", d.power}};
}

ExperimentDesign design_from_json(const json& j) {
  ExperimentDesign d;
  if (j.contains("wait_times_s")) {
    const json& w = j.at("wait_times_s");
    if (!w.is_array()) throw std::invalid_argument("config: 'wait_times_s' must be a list");
    d.wait_times.clear();
    for (const auto& x : w) {
      if (!x.is_number()) throw std::invalid_argument("config: wait times must be numbers");
      d.wait_times.push_back(x.get<double>());
    }
  } else {
    d.wait_times = {0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.5};
  }
  if (j.contains("shots_per_time")) {
    if (!j.at("shots_per_time").is_number_integer())
      throw std::invalid_argument("config: 'shots_per_time' must be an integer");
    d.shots_per_time = j.at("shots_per_time").get<int>();
  }
  if (j.contains("initial_populations"))
    d.initial_populations = populations_from_json(j.at("initial_populations"));
  if (j.contains("power_W"))
    d.power = number_or(j, "power_W", d.power);
  else
    d.power = number_or(j, "power_mW", d.power * 1e3) * 1e-3;
  return d;
}

json readout_to_json(const ReadoutModel& r) {
  return {{"family", r.family == ReadoutFamily::Poisson ? "poisson" : "gaussian"},
          {"mean_background", r.mean_background},
          {"mean_per_atom", r.mean_per_atom},
          {"variance_background", r.variance_background},
          {"variance_per_atom", r.variance_per_atom}};
}

ReadoutModel readout_from_json(const json& j) {
  ReadoutModel r;
  if (j.contains("family")) {
    const json& f = j.at("family");
    if (f == "poisson")
      r.family = ReadoutFamily::Poisson;
    else if (f == "gaussian")
      r.family = ReadoutFamily::Gaussian;
    else
      throw std::invalid_argument("config: readout family must be \"poisson\" or \"gaussian\"");
  }
  r.mean_background = number_or(j, "mean_background", r.mean_background);
  r.mean_per_atom = number_or(j, "mean_per_atom", r.mean_per_atom);
  r.variance_background = number_or(j, "variance_background", r.variance_background);
  r.variance_per_atom = number_or(j, "variance_per_atom", r.variance_per_atom);
  return r;
}

json rates_to_json(const RateCoefficients& r) {
  return {{"gamma1", r.gamma1}, {"gamma2", r.gamma2}, {"gamma2_tilde", r.gamma2_tilde},
          {"gamma3", r.gamma3}};
}

RateCoefficients rates_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("rates must be an object");
  RateCoefficients r{number_or(j, "gamma1", 0.0), number_or(j, "gamma2", 0.0),
                     number_or(j, "gamma2_tilde", 0.0), number_or(j, "gamma3", 0.0)};
  if (!r.valid()) throw std::invalid_argument("rates must be finite and non-negative");
  return r;
}

void RunConfig::validate() const {
  trap.validate();
  microscopic.validate();
  design.validate();
  readout.validate();
  if (rates && !rates->valid()) throw std::invalid_argument("config: invalid rates");
  gamma2_exponent(gamma2_model.m);
  if (!(gamma2_model.gamma2_at_ref >= 0))
    throw std::invalid_argument("config: gamma2_at_ref_per_s must be >= 0");
}

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config: top level must be an object");
  RunConfig c;
  c.trap = trap_from_json(object_or_empty(doc, "trap"));
  c.microscopic = micro_from_json(object_or_empty(doc, "microscopic"), kRb85);
  c.design = design_from_json(object_or_empty(doc, "design"));
  c.readout = readout_from_json(object_or_empty(doc, "readout"));
  if (doc.contains("rates_per_s")) c.rates = rates_from_json(doc.at("rates_per_s"));
  const json& g2 = object_or_empty(doc, "gamma2_model");
  if (g2.contains("m")) {
    if (!g2.at("m").is_number_integer())
      throw std::invalid_argument("config: gamma2_model.m must be an integer");
    c.gamma2_model.m = g2.at("m").get<int>();
  }
  c.gamma2_model.gamma2_at_ref = number_or(g2, "gamma2_at_ref_per_s", c.gamma2_model.gamma2_at_ref);
  if (doc.contains("seed")) {
    const json& s = doc.at("seed");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<long long>() < 0))
      throw std::invalid_argument("config: seed must be a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  if (doc.contains("output_dir")) {
    if (!doc.at("output_dir").is_string())
      throw std::invalid_argument("config: output_dir must be a string");
    c.output_dir = doc.at("output_dir").get<std::string>();
  }
  c.validate();
  return c;
}

json config_to_json(const RunConfig& c) {
  json j = {{"trap", trap_to_json(c.trap)},
            {"microscopic", micro_to_json(c.microscopic, kRb85)},
            {"design", design_to_json(c.design)},
            {"readout", readout_to_json(c.readout)},
            {"gamma2_model", {{"m", c.gamma2_model.m}, {"gamma2_at_ref_per_s", c.gamma2_model.gamma2_at_ref}}},
            {"output_dir", c.output_dir.string()}};
  if (c.rates) j["rates_per_s"] = rates_to_json(*c.rates);
  if (c.seed) j["seed"] = *c.seed;
  return j;
}

RunConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

void write_dataset_body(std::ostream& os, const ShotDataset& ds) {
  os << "wait_time_s,shot_index,photon_count\n";
  for (std::size_t i = 0; i < ds.photon_counts.size(); ++i) {
    const std::string t = format_double(ds.design.wait_times[i]);
    for (std::size_t j = 0; j < ds.photon_counts[i].size(); ++j)
      os << t << ',' << j << ',' << ds.photon_counts[i][j] << '\n';
  }
}

void read_dataset_body(std::istream& is, ShotDataset& ds) {
  const auto& times = ds.design.wait_times;
  const auto shots = std::size_t(ds.design.shots_per_time);
  std::map<double, std::size_t> index;
  for (std::size_t i = 0; i < times.size(); ++i) index[times[i]] = i;
  ds.photon_counts.assign(times.size(), std::vector<int>(shots, -1));

  std::string line;
  long lineno = 0;
  if (!std::getline(is, line)) throw ParseError("dataset body is empty", 1);
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "wait_time_s,shot_index,photon_count")
    throw ParseError("expected header 'wait_time_s,shot_index,photon_count'", lineno);

  std::size_t records = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 3) throw ParseError("expected 3 columns", lineno);
    double t;
    long long shot, photons;
    if (!parse_exact(cells[0], t)) throw ParseError("bad wait_time_s '" + cells[0] + "'", lineno);
    if (!parse_exact(cells[1], shot)) throw ParseError("bad shot_index '" + cells[1] + "'", lineno);
    if (!parse_exact(cells[2], photons) || photons < 0)
      throw ParseError("bad photon_count '" + cells[2] + "'", lineno);
    const auto it = index.find(t);
    if (it == index.end()) throw ParseError("wait time not in the design", lineno);
    if (shot < 0 || std::size_t(shot) >= shots)
      throw ParseError("shot_index out of range", lineno);
    int& slot = ds.photon_counts[it->second][std::size_t(shot)];
    if (slot >= 0) throw ParseError("duplicate record", lineno);
    slot = int(photons);
    ++records;
  }
  if (records != times.size() * shots)
    throw ParseError("expected " + std::to_string(times.size() * shots) + " records, found " +
                     std::to_string(records) + " at end of input",
                     lineno + 1);
}

DatasetFiles write_dataset(const ShotDataset& ds, const std::filesystem::path& dir,
                           std::string_view stem, const json& extra) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  DatasetFiles files{dir / (std::string(stem) + ".json"), dir / (std::string(stem) + ".csv")};

  std::ostringstream body;
  write_dataset_body(body, ds);
  const std::string body_text = body.str();

  json env = extra.is_object() ? extra : json::object();
  env["format"] = "triadloss-dataset/1";
  env["seed"] = ds.seed;
  env["design"] = design_to_json(ds.design);
  env["readout"] = readout_to_json(ds.readout);
  if (ds.true_rates) env["true_rates"] = rates_to_json(*ds.true_rates);
  env["body"] = files.body.filename().string();
  env["body_sha256"] = sha256_hex(body_text);

  std::ofstream b(files.body, std::ios::binary);
  if (!b) throw IoError("cannot write " + files.body.string());
  b << body_text;
  std::ofstream e(files.envelope, std::ios::binary);
  if (!e) throw IoError("cannot write " + files.envelope.string());
  e << env.dump(2) << '\n';
  if (!b || !e) throw IoError("write failed in " + dir.string());
  return files;
}

ShotDataset read_dataset(const std::filesystem::path& envelope, json* extra) {
  const std::string text = read_file(envelope);
  json env;
  try {
    env = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(envelope.string() + ": " + e.what());
  }
  ShotDataset ds;
  std::filesystem::path body_path;
  try {
    if (!env.is_object() || env.value("format", "") != "triadloss-dataset/1")
      throw ParseError("not a triadloss dataset envelope");
    ds.seed = env.at("seed").get<std::uint64_t>();
    ds.design = design_from_json(env.at("design"));
    ds.design.validate();
    ds.readout = readout_from_json(env.at("readout"));
    ds.readout.validate();
    if (env.contains("true_rates")) ds.true_rates = rates_from_json(env.at("true_rates"));
    body_path = envelope.parent_path() / env.at("body").get<std::string>();
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(envelope.string() + ": " + e.what());
  }

  const std::string body = read_file(body_path);
  if (env.contains("body_sha256") && env.at("body_sha256") != sha256_hex(body))
    throw ParseError(body_path.string() + ": body digest does not match the envelope");
  std::istringstream in(body);
  try {
    read_dataset_body(in, ds);
  } catch (const ParseError& e) {
    throw ParseError(body_path.string() + ": " + e.what());
  }
  if (extra) *extra = env;
  return ds;
}

ReadoutTemplates read_templates_csv(std::istream& is) {
  std::string line;
  long lineno = 0;
  if (!std::getline(is, line)) throw ParseError("template file is empty", 1);
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "photon_count,p0,p1,p2,p3")
    throw ParseError("expected header 'photon_count,p0,p1,p2,p3'", lineno);
  std::vector<std::array<double, 4>> rows;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 5) throw ParseError("expected 5 columns", lineno);
    long long c;
    if (!parse_exact(cells[0], c) || c != (long long)rows.size())
      throw ParseError("photon_count must run 0, 1, 2, ...", lineno);
    std::array<double, 4> row{};
    for (int k = 0; k < 4; ++k)
      if (!parse_exact(cells[std::size_t(k + 1)], row[std::size_t(k)]))
        throw ParseError("bad probability '" + cells[std::size_t(k + 1)] + "'", lineno);
    rows.push_back(row);
  }
  ReadoutTemplates t{Eigen::MatrixXd(Eigen::Index(rows.size()), 4)};
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int k = 0; k < 4; ++k) t.pmf(Eigen::Index(i), k) = rows[i][std::size_t(k)];
  try {
    t.validate(1e-6);
  } catch (const std::exception& e) {
    throw ParseError(e.what());
  }
  return t;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

json fit_report_json(const RateFit& fit) {
  static constexpr const char* names[4] = {"gamma1", "gamma2", "gamma2_tilde", "gamma3"};
  json rates, errors, intervals, identifiable, fixed;
  for (int k = 0; k < 4; ++k) {
    rates[names[k]] = fit.rate(RateParam(k));
    errors[names[k]] = number_or_null(fit.rate_errors[std::size_t(k)]);
    const auto& iv = fit.rate_intervals[std::size_t(k)];
    intervals[names[k]] = {number_or_null(iv.lower), number_or_null(iv.upper)};
    identifiable[names[k]] = fit.identifiable[std::size_t(k)];
    fixed[names[k]] = fit.fixed[std::size_t(k)];
  }
  json options = {{"fix_gamma1", fit.options.fix_gamma1}, {"tie_gamma2", fit.options.tie_gamma2}};
  if (fit.options.fixed_initials) options["fixed_initials"] = populations_to_json(*fit.options.fixed_initials);
  const auto& ie = fit.initial_errors;
  return {{"rates", rates},
          {"errors", errors},
          {"confidence_intervals_95", intervals},
          {"identifiable", identifiable},
          {"fixed", fixed},
          {"initials", populations_to_json(fit.fitted_initials)},
          {"initial_errors", {{"r3", ie[0]}, {"r2", ie[1]}, {"r1", ie[2]}, {"r0", ie[3]}}},
          {"residual_norm", fit.residual_norm},
          {"residual_count", fit.residual_count},
          {"free_parameters", fit.free_parameters},
          {"starts", {{"tried", fit.starts_tried}, {"converged", fit.starts_converged}}},
          {"options", options}};
}

std::string scaling_rate_key(const json& report) {
  try {
    auto usable = [&](const char* key) {
      return report.at("identifiable").at(key).get<bool>() && report.at("errors").at(key).is_number();
    };
    const bool pair = usable("gamma2");
    const bool triad = usable("gamma2_tilde");
    if (pair && triad)
      return report.at("errors").at("gamma2_tilde").get<double>() <
                     report.at("errors").at("gamma2").get<double>()
                 ? "gamma2_tilde"
                 : "gamma2";
    if (pair) return "gamma2";
    if (triad) return "gamma2_tilde";
  } catch (const json::exception& e) {
    throw ParseError(std::string("fit report: ") + e.what());
  }
  throw std::invalid_argument("fit report: no pair-loss rate with a finite error");
}

ScalingPoint scaling_point_from_report(const json& report) {
  const std::string key = scaling_rate_key(report);
  try {
    ScalingPoint p;
    p.omega_perp = report.at("omega_perp_rad_s").get<double>();
    p.gamma2 = report.at("rates").at(key).get<double>();
    p.sigma = report.at("errors").at(key).get<double>();
    return p;
  } catch (const json::exception& e) {
    throw ParseError(std::string("fit report: ") + e.what());
  }
}

json scaling_report_json(const ScalingFit& fit) {
  json residuals, aic, amplitudes, exponents;
  for (const auto& c : fit.candidates) {
    const std::string m = std::to_string(c.m);
    residuals[m] = c.rss;
    aic[m] = c.aic;
    amplitudes[m] = c.amplitude;
    exponents[m] = exponent_label(c.m);
  }
  return {{"selected_m", fit.selected_m},
          {"A", fit.amplitude},
          {"exponent", exponent_label(fit.selected_m)},
          {"exponent_value", gamma2_exponent(fit.selected_m)},
          {"residuals_per_m", residuals},
          {"aic_per_m", aic},
          {"amplitude_per_m", amplitudes},
          {"exponent_per_m", exponents}};
}

}  // namespace triad
