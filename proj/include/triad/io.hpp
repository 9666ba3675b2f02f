#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "triad/correlations.hpp"
#include "triad/inference.hpp"
#include "triad/stochastic.hpp"
#include "triad/trap.hpp"

namespace triad {

inline constexpr std::string_view kToolName = "triadloss";
inline constexpr std::string_view kToolVersion = "0.1.0";

/// Gamma2 intensity law used to scale simulated pair-loss rates with power
/// and to draw the predicted Gamma2 curve.
struct Gamma2Model {
  int m = 2;
  /// Gamma2 at the trap's frequency reference power (s^-1).
  double gamma2_at_ref = 0.3;
};

/// Everything a command needs, read from one JSON document. Units live in key
/// names (..._mW, ..._kHz, ..._uK, ..._nm, ..._um, ..._s).
struct RunConfig {
  TrapConfig trap;
  MicroscopicConstants microscopic;
  ExperimentDesign design;
  ReadoutModel readout;
  /// Rates at design.power, for simulation.
  std::optional<RateCoefficients> rates;
  Gamma2Model gamma2_model;
  std::optional<std::uint64_t> seed;
  std::filesystem::path output_dir = ".";

  void validate() const;
};

RunConfig parse_config(const nlohmann::json& doc);
nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig load_config(const std::filesystem::path& path);

nlohmann::json trap_to_json(const TrapConfig& trap);
TrapConfig trap_from_json(const nlohmann::json& j);
nlohmann::json design_to_json(const ExperimentDesign& design);
ExperimentDesign design_from_json(const nlohmann::json& j);
nlohmann::json readout_to_json(const ReadoutModel& readout);
ReadoutModel readout_from_json(const nlohmann::json& j);
nlohmann::json rates_to_json(const RateCoefficients& rates);
RateCoefficients rates_from_json(const nlohmann::json& j);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

/// Header comment line for output tables.
std::string provenance_comment(std::string_view input_digest);

/// Dataset on disk: a JSON envelope (`<stem>.json`) naming a CSV body
/// (`<stem>.csv`, columns wait_time_s,shot_index,photon_count). Extra envelope
/// fields (trap config) are carried in `extra`.
struct DatasetFiles {
  std::filesystem::path envelope;
  std::filesystem::path body;
};

DatasetFiles write_dataset(const ShotDataset& ds, const std::filesystem::path& dir,
                           std::string_view stem, const nlohmann::json& extra = {});
ShotDataset read_dataset(const std::filesystem::path& envelope, nlohmann::json* extra = nullptr);

void write_dataset_body(std::ostream& os, const ShotDataset& ds);
/// Parses a body into ds.photon_counts against ds.design; throws ParseError
/// with the offending line.
void read_dataset_body(std::istream& is, ShotDataset& ds);

/// Empirical templates: CSV photon_count,p0,p1,p2,p3.
ReadoutTemplates read_templates_csv(std::istream& is);

nlohmann::json fit_report_json(const RateFit& fit);
/// Which pair-loss rate of a fit report enters the scaling fit: of gamma2 and
/// gamma2_tilde, the identifiable one with the smaller finite error.
std::string scaling_rate_key(const nlohmann::json& report);
/// (omega_perp, rate, sigma) from a fit report carrying omega_perp_rad_s.
ScalingPoint scaling_point_from_report(const nlohmann::json& report);
nlohmann::json scaling_report_json(const ScalingFit& fit);

}  // namespace triad
