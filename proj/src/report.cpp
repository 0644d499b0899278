#include "glmshap/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace glmshap {

using nlohmann::json;

namespace {

double clamp_small_negative(double v, bool lower_bounded) {
  return lower_bounded && v < 0.0 && v >= -kClampTolerance ? 0.0 : v;
}

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  j[key] = v ? json(*v) : json(nullptr);
}

template <typename T>
void get_optional(const json& j, const char* key, std::optional<T>& v) {
  if (j.contains(key) && !j.at(key).is_null()) {
    v = j.at(key).get<T>();
  } else {
    v.reset();
  }
}

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string full_precision(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<CacheRecord> cache_records(const Analysis& analysis) {
  std::vector<CacheRecord> out;
  if (!analysis.cache) return out;
  const SubsetFitCache& cache = *analysis.cache;
  out.reserve(cache.size());
  for (std::uint64_t bits = 0; bits < cache.size(); ++bits) {
    const SubsetKey key{bits};
    const SubsetStats& s = cache.at(key);
    CacheRecord rec;
    rec.bits = bits;
    for (std::size_t i = 0; i < analysis.players.size(); ++i) {
      if (key.contains(i)) rec.players.push_back(analysis.players[i]);
    }
    rec.loglik = s.loglik;
    rec.deviance = s.deviance;
    for (const auto& r : analysis.results) rec.values.push_back(evaluate(r.measure, s, analysis.consts));
    out.push_back(std::move(rec));
  }
  return out;
}

PartReport make_part_report(const std::string& label, const Analysis& analysis,
                            bool include_cache) {
  PartReport part;
  part.label = label;
  part.family = analysis.family.name();
  part.n = analysis.n;
  part.players = analysis.players;
  part.warnings = analysis.warnings;

  const RunConstants& rc = analysis.consts;
  ConstantsBlock& cb = part.constants;
  cb.loglik_null = rc.loglik_null;
  cb.loglik_sat = rc.loglik_sat;
  cb.loglik_full = analysis.full.loglik;
  cb.null_deviance = rc.null_deviance;
  if (std::isfinite(rc.zeta)) cb.zeta = rc.zeta;
  cb.zeta_a = rc.zeta_a();
  cb.c = rc.c;
  cb.c_inverse = 1.0 / rc.c;
  cb.lr = lr_statistic(analysis.full, rc);
  cb.null_convention = to_string(rc.convention);

  for (const ShapleyResult& res : analysis.results) {
    MeasureTable t;
    t.measure = res.measure.name();
    t.has_lower_bound = res.measure.has_lower_bound;
    t.has_upper_bound_one = res.measure.has_upper_bound_one;
    t.v_grand_raw = res.v_grand;
    t.v_grand = clamp_small_negative(res.v_grand, t.has_lower_bound);
    t.v_empty = res.v_empty;
    t.is_pseudo = res.is_pseudo;
    t.samples = res.samples;
    std::vector<std::size_t> order(res.phi.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return res.phi[a] > res.phi[b]; });
    for (std::size_t i : order) {
      PlayerRow row;
      row.name = res.players[i];
      row.phi_raw = res.phi[i];
      row.phi = clamp_small_negative(res.phi[i], t.has_lower_bound);
      if (res.imp_fm) row.imp_fm = (*res.imp_fm)[i];
      if (res.imp_bm) row.imp_bm = (*res.imp_bm)[i];
      if (res.mc_stderr) row.mc_stderr = (*res.mc_stderr)[i];
      t.rows.push_back(std::move(row));
    }
    part.tables.push_back(std::move(t));
  }
  if (include_cache && analysis.cache) part.cache = cache_records(analysis);
  return part;
}

void to_json(json& j, const PlayerRow& v) {
  j = json{{"name", v.name}, {"phi", v.phi}, {"phi_raw", v.phi_raw}};
  put_optional(j, "imp_fm", v.imp_fm);
  put_optional(j, "imp_bm", v.imp_bm);
  put_optional(j, "mc_stderr", v.mc_stderr);
}

void from_json(const json& j, PlayerRow& v) {
  j.at("name").get_to(v.name);
  j.at("phi").get_to(v.phi);
  j.at("phi_raw").get_to(v.phi_raw);
  get_optional(j, "imp_fm", v.imp_fm);
  get_optional(j, "imp_bm", v.imp_bm);
  get_optional(j, "mc_stderr", v.mc_stderr);
}

void to_json(json& j, const MeasureTable& v) {
  j = json{{"measure", v.measure},
           {"v_grand", v.v_grand},
           {"v_grand_raw", v.v_grand_raw},
           {"v_empty", v.v_empty},
           {"is_pseudo", v.is_pseudo},
           {"has_lower_bound", v.has_lower_bound},
           {"has_upper_bound_one", v.has_upper_bound_one},
           {"samples", v.samples},
           {"players", v.rows}};
}

void from_json(const json& j, MeasureTable& v) {
  j.at("measure").get_to(v.measure);
  j.at("v_grand").get_to(v.v_grand);
  j.at("v_grand_raw").get_to(v.v_grand_raw);
  j.at("v_empty").get_to(v.v_empty);
  j.at("is_pseudo").get_to(v.is_pseudo);
  j.at("has_lower_bound").get_to(v.has_lower_bound);
  j.at("has_upper_bound_one").get_to(v.has_upper_bound_one);
  j.at("samples").get_to(v.samples);
  j.at("players").get_to(v.rows);
}

void to_json(json& j, const ConstantsBlock& v) {
  j = json{{"loglik_null", v.loglik_null},
           {"loglik_sat", v.loglik_sat},
           {"loglik_full", v.loglik_full},
           {"null_deviance", v.null_deviance},
           {"zeta_a", v.zeta_a},
           {"c", v.c},
           {"c_inverse", v.c_inverse},
           {"lr", v.lr},
           {"null_convention", v.null_convention}};
  put_optional(j, "zeta", v.zeta);
}

void from_json(const json& j, ConstantsBlock& v) {
  j.at("loglik_null").get_to(v.loglik_null);
  j.at("loglik_sat").get_to(v.loglik_sat);
  j.at("loglik_full").get_to(v.loglik_full);
  j.at("null_deviance").get_to(v.null_deviance);
  j.at("zeta_a").get_to(v.zeta_a);
  j.at("c").get_to(v.c);
  j.at("c_inverse").get_to(v.c_inverse);
  j.at("lr").get_to(v.lr);
  j.at("null_convention").get_to(v.null_convention);
  get_optional(j, "zeta", v.zeta);
}

void to_json(json& j, const CacheRecord& v) {
  j = json{{"bits", v.bits},
           {"players", v.players},
           {"loglik", v.loglik},
           {"deviance", v.deviance},
           {"values", v.values}};
}

void from_json(const json& j, CacheRecord& v) {
  j.at("bits").get_to(v.bits);
  j.at("players").get_to(v.players);
  j.at("loglik").get_to(v.loglik);
  j.at("deviance").get_to(v.deviance);
  j.at("values").get_to(v.values);
}

void to_json(json& j, const PartReport& v) {
  j = json{{"label", v.label},       {"family", v.family},
           {"n", v.n},               {"players", v.players},
           {"constants", v.constants}, {"tables", v.tables},
           {"warnings", v.warnings}};
  put_optional(j, "cache", v.cache);
}

void from_json(const json& j, PartReport& v) {
  j.at("label").get_to(v.label);
  j.at("family").get_to(v.family);
  j.at("n").get_to(v.n);
  j.at("players").get_to(v.players);
  j.at("constants").get_to(v.constants);
  j.at("tables").get_to(v.tables);
  j.at("warnings").get_to(v.warnings);
  get_optional(j, "cache", v.cache);
}

void to_json(json& j, const HurdleSummary& v) {
  j = json{{"n", v.n}, {"n_plus", v.n_plus}, {"total_loglik", v.total_loglik}};
}

void from_json(const json& j, HurdleSummary& v) {
  j.at("n").get_to(v.n);
  j.at("n_plus").get_to(v.n_plus);
  j.at("total_loglik").get_to(v.total_loglik);
}

void to_json(json& j, const ReportDocument& v) {
  j = json{{"config", v.config},
           {"tool_version", v.tool_version},
           {"timestamp", v.timestamp},
           {"wall_clock_seconds", v.wall_clock_seconds},
           {"parts", v.parts}};
  put_optional(j, "hurdle", v.hurdle);
}

void from_json(const json& j, ReportDocument& v) {
  v.config = j.at("config");
  j.at("tool_version").get_to(v.tool_version);
  j.at("timestamp").get_to(v.timestamp);
  j.at("wall_clock_seconds").get_to(v.wall_clock_seconds);
  j.at("parts").get_to(v.parts);
  get_optional(j, "hurdle", v.hurdle);
}

void to_json(json& j, const RootogramData& v) {
  j = json{{"n", v.n},
           {"count", v.counts},
           {"observed", v.observed},
           {"expected", v.expected},
           {"sqrt_observed", v.sqrt_observed},
           {"sqrt_expected", v.sqrt_expected},
           {"hanging_bottom", v.hanging_bottom},
           {"expected_beyond_max", v.expected_beyond_max}};
}

std::string serialize(const ReportDocument& doc) { return json(doc).dump(2); }

ReportDocument parse_report(const std::string& text) {
  return json::parse(text).get<ReportDocument>();
}

void print_part(std::ostream& out, const PartReport& part) {
  out << "== " << part.label << " (" << part.family << ", n = " << part.n << ")\n";
  if (part.tables.empty()) return;

  // Column order follows the first measure's ranking.
  std::vector<std::string> columns;
  for (const auto& row : part.tables.front().rows) columns.push_back(row.name);

  std::size_t label_width = 16;
  for (const auto& t : part.tables) label_width = std::max(label_width, t.measure.size() + 2);
  std::vector<std::size_t> widths;
  for (const auto& c : columns) widths.push_back(std::max<std::size_t>(c.size(), 10) + 2);
  const std::size_t vw = 12;

  out << std::left << std::setw(static_cast<int>(label_width)) << "";
  for (std::size_t k = 0; k < columns.size(); ++k) {
    out << std::right << std::setw(static_cast<int>(widths[k])) << columns[k];
  }
  out << std::setw(static_cast<int>(vw)) << "v(P)" << '\n';

  auto value_row = [&](const std::string& label, auto&& cell, const std::string& last) {
    out << std::left << std::setw(static_cast<int>(label_width)) << label;
    for (std::size_t k = 0; k < columns.size(); ++k) {
      out << std::right << std::setw(static_cast<int>(widths[k])) << cell(columns[k]);
    }
    out << std::setw(static_cast<int>(vw)) << last << '\n';
  };
  for (const auto& t : part.tables) {
    auto find = [&](const std::string& name) -> const PlayerRow& {
      return *std::find_if(t.rows.begin(), t.rows.end(),
                           [&](const PlayerRow& r) { return r.name == name; });
    };
    value_row(t.measure, [&](const std::string& c) { return fixed4(find(c).phi); },
              fixed4(t.v_grand));
  }
  const MeasureTable& first = part.tables.front();
  if (!first.rows.empty() && first.rows.front().imp_fm) {
    auto find = [&](const std::string& name) -> const PlayerRow& {
      return *std::find_if(first.rows.begin(), first.rows.end(),
                           [&](const PlayerRow& r) { return r.name == name; });
    };
    value_row("impFM " + first.measure,
              [&](const std::string& c) {
                const auto& r = find(c);
                return r.imp_fm ? fixed4(*r.imp_fm) : std::string("-");
              },
              "");
  }
  if (!first.rows.empty() && first.rows.front().mc_stderr && first.samples > 0) {
    auto find = [&](const std::string& name) -> const PlayerRow& {
      return *std::find_if(first.rows.begin(), first.rows.end(),
                           [&](const PlayerRow& r) { return r.name == name; });
    };
    value_row("s.e. " + first.measure,
              [&](const std::string& c) { return fixed4(*find(c).mc_stderr); }, "");
  }

  const ConstantsBlock& cb = part.constants;
  out << "l(empty) = " << fixed4(cb.loglik_null) << "  l(P) = " << fixed4(cb.loglik_full)
      << "  l(y,y) = " << fixed4(cb.loglik_sat) << '\n';
  out << "null deviance = " << fixed4(cb.null_deviance) << "  LR = " << fixed4(cb.lr)
      << "  C^-1 = " << fixed4(cb.c_inverse)
      << "  zeta = " << (cb.zeta ? fixed4(*cb.zeta) : std::string("undefined"))
      << "  null = " << cb.null_convention << '\n';
  for (const auto& t : part.tables) {
    if (t.is_pseudo) {
      out << "note: " << t.measure << " has v(empty) = " << fixed4(t.v_empty)
          << "; values are pseudo-Shapley values\n";
    }
  }
}

void write_cache_csv(std::ostream& out, const PartReport& part) {
  out << "bits,players,loglik,deviance";
  for (const auto& t : part.tables) out << ',' << t.measure;
  out << '\n';
  if (!part.cache) return;
  for (const CacheRecord& rec : *part.cache) {
    std::string names;
    for (const auto& p : rec.players) names += (names.empty() ? "" : "|") + p;
    out << rec.bits << ',' << names << ',' << full_precision(rec.loglik) << ','
        << full_precision(rec.deviance);
    for (double v : rec.values) out << ',' << full_precision(v);
    out << '\n';
  }
}

}  // namespace glmshap
