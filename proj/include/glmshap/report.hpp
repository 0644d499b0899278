#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "glmshap/hurdle.hpp"
#include "glmshap/rootogram.hpp"
#include "glmshap/shapley.hpp"

namespace glmshap {

inline constexpr const char* kToolVersion = "0.1.0";

/// Values of bounded measures in [-1e-8, 0) are shown as 0; `*_raw` keeps
/// the computed value.
inline constexpr double kClampTolerance = 1e-8;

struct PlayerRow {
  std::string name;
  double phi = 0.0;
  double phi_raw = 0.0;
  std::optional<double> imp_fm;
  std::optional<double> imp_bm;
  std::optional<double> mc_stderr;

  friend bool operator==(const PlayerRow&, const PlayerRow&) = default;
};

/// One measure's decomposition, rows sorted by phi (descending).
struct MeasureTable {
  std::string measure;
  double v_grand = 0.0;
  double v_grand_raw = 0.0;
  double v_empty = 0.0;
  bool is_pseudo = false;
  bool has_lower_bound = false;
  bool has_upper_bound_one = false;
  std::size_t samples = 0;
  std::vector<PlayerRow> rows;

  friend bool operator==(const MeasureTable&, const MeasureTable&) = default;
};

struct ConstantsBlock {
  double loglik_null = 0.0;
  double loglik_sat = 0.0;
  double loglik_full = 0.0;
  double null_deviance = 0.0;
  std::optional<double> zeta;
  double zeta_a = 0.0;
  double c = 0.0;
  double c_inverse = 0.0;
  double lr = 0.0;
  std::string null_convention;

  friend bool operator==(const ConstantsBlock&, const ConstantsBlock&) = default;
};

struct CacheRecord {
  std::uint64_t bits = 0;
  std::vector<std::string> players;
  double loglik = 0.0;
  double deviance = 0.0;
  std::vector<double> values;  // one per measure, in table order

  friend bool operator==(const CacheRecord&, const CacheRecord&) = default;
};

struct PartReport {
  std::string label;
  std::string family;
  std::size_t n = 0;
  std::vector<std::string> players;  // game order
  ConstantsBlock constants;
  std::vector<MeasureTable> tables;
  std::vector<std::string> warnings;
  std::optional<std::vector<CacheRecord>> cache;

  friend bool operator==(const PartReport&, const PartReport&) = default;
};

struct HurdleSummary {
  std::size_t n = 0;
  std::size_t n_plus = 0;
  double total_loglik = 0.0;

  friend bool operator==(const HurdleSummary&, const HurdleSummary&) = default;
};

struct ReportDocument {
  nlohmann::json config;
  std::string tool_version = kToolVersion;
  std::string timestamp;             // timing field
  double wall_clock_seconds = 0.0;   // timing field
  std::vector<PartReport> parts;
  std::optional<HurdleSummary> hurdle;

  friend bool operator==(const ReportDocument&, const ReportDocument&) = default;
};

PartReport make_part_report(const std::string& label, const Analysis& analysis,
                            bool include_cache);

std::vector<CacheRecord> cache_records(const Analysis& analysis);

void to_json(nlohmann::json& j, const PlayerRow& v);
void from_json(const nlohmann::json& j, PlayerRow& v);
void to_json(nlohmann::json& j, const MeasureTable& v);
void from_json(const nlohmann::json& j, MeasureTable& v);
void to_json(nlohmann::json& j, const ConstantsBlock& v);
void from_json(const nlohmann::json& j, ConstantsBlock& v);
void to_json(nlohmann::json& j, const CacheRecord& v);
void from_json(const nlohmann::json& j, CacheRecord& v);
void to_json(nlohmann::json& j, const PartReport& v);
void from_json(const nlohmann::json& j, PartReport& v);
void to_json(nlohmann::json& j, const HurdleSummary& v);
void from_json(const nlohmann::json& j, HurdleSummary& v);
void to_json(nlohmann::json& j, const ReportDocument& v);
void from_json(const nlohmann::json& j, ReportDocument& v);
void to_json(nlohmann::json& j, const RootogramData& v);

std::string serialize(const ReportDocument& doc);
ReportDocument parse_report(const std::string& text);

/// Aligned text table: one row per measure, players ordered by the first
/// measure's phi, values to 4 decimals, plus the run constants.
void print_part(std::ostream& out, const PartReport& part);

/// Per-subset records as CSV: bits, players ('|'-joined), loglik,
/// deviance, then one column per measure. Full double precision.
void write_cache_csv(std::ostream& out, const PartReport& part);

}  // namespace glmshap
