#include "glmshap/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "glmshap/error.hpp"
#include "glmshap/hurdle.hpp"
#include "glmshap/report.hpp"
#include "glmshap/rootogram.hpp"
#include "glmshap/shapley.hpp"

namespace glmshap::cli {

namespace {

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    if (first != std::string::npos) out.push_back(item.substr(first, last - first + 1));
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write output file '" + path + "'");
  f << contents;
}

std::string with_label(const std::string& path, const std::string& label) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return path + "." + label;
  }
  return path.substr(0, dot) + "." + label + path.substr(dot);
}

// Raw strings from the command line, converted into a RunConfig after
// parsing.
struct RawOptions {
  std::string data;
  std::string delimiter = ",";
  std::string response;
  std::string players;
  std::string factors;
  std::string filter;
  std::string family;
  std::string measure = "kl-r2";
  std::string null_convention = "ml";
  bool hurdle = false;
  std::string binary_players;
  std::string count_players;
  std::size_t mc_samples = 0;
  std::uint64_t seed = 42;
  unsigned workers = 0;
  bool permissive = false;
  int max_iter = 100;
  double tol = 1e-10;
  std::string out;
  std::string cache_out;
  bool include_cache = false;
};

void add_model_options(CLI::App& sub, RawOptions& o) {
  sub.add_option("--config", "Flat key = value file; command-line flags take precedence");
  sub.add_option("--data", o.data, "CSV file with a header row")->required();
  sub.add_option("--delimiter", o.delimiter, "CSV field delimiter");
  sub.add_option("--response", o.response, "Response column")->required();
  sub.add_option("--players", o.players,
                 "Comma-separated players; name=colA+colB groups columns");
  sub.add_option("--factors", o.factors, "Numeric columns to treat as categorical");
  sub.add_option("--filter", o.filter, "Keep rows where column=value1|value2");
  sub.add_option("--family", o.family, "gaussian|logit|poisson|zt-poisson|geometric");
  sub.add_flag("--hurdle", o.hurdle, "Two-part logit + zero-truncated Poisson model");
  sub.add_option("--binary-players", o.binary_players, "Hurdle binary-part players");
  sub.add_option("--count-players", o.count_players, "Hurdle count-part players");
  sub.add_option("--max-iter", o.max_iter, "Newton iteration limit");
  sub.add_option("--tol", o.tol, "Relative log-likelihood convergence tolerance");
  sub.add_option("--out", o.out, "Output path");
}

void add_analysis_options(CLI::App& sub, RawOptions& o) {
  sub.add_option("--measure", o.measure, "kl-r2,mcfadden-r2,loglik,shifted-loglik");
  sub.add_option("--null", o.null_convention, "ml|plugin (plugin: zt-poisson and hurdle count part)");
  sub.add_option("--mc-samples", o.mc_samples, "Permutation samples (0: exact)");
  sub.add_option("--seed", o.seed, "Sampling seed");
  sub.add_option("--workers", o.workers, "Fit worker threads (0: all cores)");
  sub.add_flag("--permissive", o.permissive,
               "Use the best iterate of non-converged subset fits");
}

RunConfig to_config(const RawOptions& o) {
  RunConfig cfg;
  cfg.data_path = o.data;
  if (o.delimiter.size() != 1) throw ConfigError("delimiter must be a single character");
  cfg.delimiter = o.delimiter == "\\t" ? '\t' : o.delimiter[0];
  cfg.response = o.response;
  cfg.players = parse_player_specs(o.players);
  cfg.factors = split_list(o.factors, ',');
  cfg.filter = o.filter;
  if (o.hurdle && !o.family.empty()) {
    throw ConfigError("--hurdle and --family are mutually exclusive");
  }
  cfg.family = o.hurdle ? "hurdle" : (o.family.empty() ? "poisson" : o.family);
  if (!o.hurdle) Family::parse(cfg.family);
  cfg.measures = split_list(o.measure, ',');
  if (cfg.measures.empty()) throw ConfigError("measure list is empty");
  for (const auto& m : cfg.measures) FitMeasure::parse(m, FamilyKind::kPoissonLog);
  cfg.null_convention = o.null_convention;
  const NullConvention nc = parse_null_convention(o.null_convention);
  if (nc == NullConvention::kPluginNull && !o.hurdle && cfg.family != "zt-poisson") {
    throw ConfigError("--null plugin is only available for zt-poisson and hurdle runs");
  }
  cfg.hurdle = o.hurdle;
  cfg.binary_players = split_list(o.binary_players, ',');
  cfg.count_players = split_list(o.count_players, ',');
  if (!o.hurdle && (!cfg.binary_players.empty() || !cfg.count_players.empty())) {
    throw ConfigError("--binary-players/--count-players require --hurdle");
  }
  cfg.mc_samples = o.mc_samples;
  cfg.seed = o.seed;
  cfg.workers = o.workers;
  cfg.permissive = o.permissive;
  cfg.max_iter = o.max_iter;
  cfg.tol = o.tol;
  cfg.out = o.out;
  cfg.cache_out = o.cache_out;
  return cfg;
}

EngineOptions engine_options(const RunConfig& cfg) {
  EngineOptions opts;
  opts.ctl.max_iter = cfg.max_iter;
  opts.ctl.tol = cfg.tol;
  opts.ctl.validate();
  opts.workers = cfg.workers;
  opts.permissive = cfg.permissive;
  opts.null_convention = parse_null_convention(cfg.null_convention);
  return opts;
}

ReportDocument build_report(const RunConfig& cfg, bool include_cache) {
  const auto start = std::chrono::steady_clock::now();
  const Dataset ds = load_dataset(cfg);
  const EngineOptions opts = engine_options(cfg);
  const SamplingOptions sampling{cfg.mc_samples, cfg.seed};

  ReportDocument doc;
  doc.config = to_json(cfg);
  doc.timestamp = utc_timestamp();
  if (cfg.hurdle) {
    std::vector<MeasureKind> kinds;
    for (const auto& m : cfg.measures) kinds.push_back(FitMeasure::parse(m, FamilyKind::kPoissonLog).kind);
    const HurdleReport hr =
        analyze_hurdle(ds, {cfg.binary_players, cfg.count_players}, kinds, opts, sampling);
    doc.parts.push_back(make_part_report("binary", hr.binary, include_cache));
    doc.parts.push_back(make_part_report("count", hr.count, include_cache));
    doc.hurdle = HurdleSummary{hr.n, hr.n_plus, hr.total_loglik};
  } else {
    const Family family = calibrated_family(Family::parse(cfg.family).kind(), ds);
    std::vector<FitMeasure> measures;
    for (const auto& m : cfg.measures) measures.push_back(FitMeasure::parse(m, family.kind()));
    const Analysis a = analyze(ds, family, measures, opts, sampling);
    doc.parts.push_back(make_part_report(family.name(), a, include_cache));
  }
  doc.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return doc;
}

void write_caches(const ReportDocument& doc, const std::string& path, std::ostream& out) {
  for (const PartReport& part : doc.parts) {
    if (!part.cache) {
      throw ConfigError("cache export requires exact enumeration (no --mc-samples)");
    }
  }
  if (path.empty()) {
    for (const PartReport& part : doc.parts) write_cache_csv(out, part);
    return;
  }
  for (const PartReport& part : doc.parts) {
    std::ostringstream csv;
    write_cache_csv(csv, part);
    write_file(doc.parts.size() == 1 ? path : with_label(path, part.label), csv.str());
  }
}

int cmd_analyze(const RunConfig& cfg, bool include_cache, std::ostream& out,
                std::ostream& err) {
  const ReportDocument doc = build_report(cfg, include_cache || !cfg.cache_out.empty());
  for (const PartReport& part : doc.parts) {
    for (const auto& w : part.warnings) err << w << '\n';
  }
  ReportDocument written = doc;
  if (!include_cache) {
    for (auto& part : written.parts) part.cache.reset();
  }
  for (std::size_t k = 0; k < doc.parts.size(); ++k) {
    if (k > 0) out << '\n';
    print_part(out, doc.parts[k]);
  }
  if (doc.hurdle) {
    out << "\nhurdle: n = " << doc.hurdle->n << ", n+ = " << doc.hurdle->n_plus
        << ", l_hurdle = l_binary + l_zt-count = " << std::fixed << std::setprecision(4)
        << doc.hurdle->total_loglik << '\n';
    out << "KL R^2: binary part " << doc.parts[0].tables.front().v_grand
        << " vs count part " << doc.parts[1].tables.front().v_grand << '\n';
    out.unsetf(std::ios::floatfield);
  }
  if (!cfg.out.empty()) write_file(cfg.out, serialize(written) + "\n");
  if (!cfg.cache_out.empty()) write_caches(doc, cfg.cache_out, out);
  return 0;
}

int cmd_cache_export(const RunConfig& cfg, std::ostream& out) {
  const ReportDocument doc = build_report(cfg, true);
  write_caches(doc, cfg.out, out);
  return 0;
}

int cmd_rootogram(const RunConfig& cfg, std::ostream& out) {
  const Dataset ds = load_dataset(cfg);
  const EngineOptions opts = engine_options(cfg);
  RootogramData r;
  if (cfg.hurdle) {
    r = rootogram_hurdle(ds, {cfg.binary_players, cfg.count_players}, opts.ctl);
  } else {
    r = rootogram_glm(ds, calibrated_family(Family::parse(cfg.family).kind(), ds), opts.ctl);
  }
  out << std::setw(6) << "count" << std::setw(12) << "observed" << std::setw(14) << "expected"
      << std::setw(12) << "hanging" << '\n';
  out << std::fixed << std::setprecision(4);
  for (std::size_t j = 0; j < r.counts.size(); ++j) {
    out << std::setw(6) << r.counts[j] << std::setw(12) << std::setprecision(0) << r.observed[j]
        << std::setw(14) << std::setprecision(4) << r.expected[j] << std::setw(12)
        << r.hanging_bottom[j] << '\n';
  }
  out << "expected beyond " << r.counts.back() << ": " << r.expected_beyond_max
      << "; total expected " << r.expected_total() << " of n = " << r.n << '\n';
  out.unsetf(std::ios::floatfield);
  if (!cfg.out.empty()) write_file(cfg.out, nlohmann::json(r).dump(2) + "\n");
  return 0;
}

// Config-file entries become leading arguments so that later command-line
// occurrences win (single-value options keep the last value). Keys that
// belong to another subcommand are skipped.
std::vector<std::string> expand_config(const std::vector<std::string>& args, CLI::App& app) {
  std::string path;
  std::vector<std::string> rest;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) {
      path = args[++k];
    } else if (args[k].rfind("--config=", 0) == 0) {
      path = args[k].substr(9);
    } else {
      rest.push_back(args[k]);
    }
  }
  if (path.empty() || rest.empty()) return rest;
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << f.rdbuf();
  CLI::App* sub = app.get_subcommand_no_throw(rest.front());
  if (sub == nullptr) return rest;
  std::vector<std::string> expanded{rest.front()};
  for (const auto& [key, value] : parse_config_text(buffer.str())) {
    if (sub->get_option_no_throw("--" + key) == nullptr) {
      bool known = false;
      for (const CLI::App* other : app.get_subcommands({})) {
        known = known || other->get_option_no_throw("--" + key) != nullptr;
      }
      if (!known) throw ConfigError("unknown config key '" + key + "'");
      continue;
    }
    static const std::set<std::string> flags{"hurdle", "permissive", "include-cache"};
    if (flags.count(key)) {
      if (value == "true" || value == "1" || value == "yes") expanded.push_back("--" + key);
      continue;
    }
    expanded.push_back("--" + key);
    expanded.push_back(value);
  }
  expanded.insert(expanded.end(), rest.begin() + 1, rest.end());
  return expanded;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return 2;
    case ErrorKind::kData: return 3;
    case ErrorKind::kNumerical: return 4;
  }
  return 1;
}

}  // namespace

nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json players = nlohmann::json::array();
  for (const auto& p : cfg.players) players.push_back({{"name", p.name}, {"columns", p.columns}});
  return {{"data", cfg.data_path},
          {"delimiter", std::string(1, cfg.delimiter)},
          {"response", cfg.response},
          {"players", players},
          {"factors", cfg.factors},
          {"filter", cfg.filter},
          {"family", cfg.family},
          {"measures", cfg.measures},
          {"null", cfg.null_convention},
          {"hurdle", cfg.hurdle},
          {"binary_players", cfg.binary_players},
          {"count_players", cfg.count_players},
          {"mc_samples", cfg.mc_samples},
          {"seed", cfg.seed},
          {"permissive", cfg.permissive},
          {"max_iter", cfg.max_iter},
          {"tol", cfg.tol}};
}

std::vector<PlayerSpec> parse_player_specs(const std::string& spec) {
  std::vector<PlayerSpec> out;
  for (const auto& item : split_list(spec, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      out.push_back({item, {item}});
      continue;
    }
    PlayerSpec p{item.substr(0, eq), split_list(item.substr(eq + 1), '+')};
    if (p.name.empty() || p.columns.empty()) {
      throw ConfigError("malformed player group '" + item + "'");
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + " lacks '='");
    }
    auto strip = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r\"");
      const auto b = s.find_last_not_of(" \t\r\"");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = strip(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    out[key] = strip(line.substr(eq + 1));
  }
  return out;
}

Dataset load_dataset(const RunConfig& cfg) {
  RawTable raw = read_csv(cfg.data_path, cfg.delimiter);
  if (!cfg.filter.empty()) {
    const auto eq = cfg.filter.find('=');
    if (eq == std::string::npos) throw ConfigError("--filter expects column=value");
    const auto values = split_list(cfg.filter.substr(eq + 1), '|');
    raw = filter_rows(raw, cfg.filter.substr(0, eq), {values.begin(), values.end()});
  }
  std::vector<PlayerSpec> players = cfg.players;
  if (players.empty()) {
    const std::string filter_col = cfg.filter.substr(0, cfg.filter.find('='));
    for (const auto& col : raw.header) {
      if (col != cfg.response && col != filter_col) players.push_back({col, {col}});
    }
  }
  FactorPolicy policy;
  policy.factors.insert(cfg.factors.begin(), cfg.factors.end());
  return encode_dataset(raw, cfg.response, players, policy);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shapley-value variable importance for generalized linear models"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", kToolVersion);

  RawOptions analyze_opts, rootogram_opts, cache_opts;
  CLI::App* analyze_cmd = app.add_subcommand("analyze", "Shapley decomposition of model fit");
  add_model_options(*analyze_cmd, analyze_opts);
  add_analysis_options(*analyze_cmd, analyze_opts);
  analyze_cmd->add_option("--cache-out", analyze_opts.cache_out,
                          "Write per-subset statistics (CSV)");
  analyze_cmd->add_flag("--include-cache", analyze_opts.include_cache,
                        "Embed per-subset statistics in the JSON report");

  CLI::App* rootogram_cmd = app.add_subcommand("rootogram", "Hanging-rootogram data of the full model");
  add_model_options(*rootogram_cmd, rootogram_opts);

  CLI::App* cache_cmd = app.add_subcommand("cache-export", "Per-subset statistics as CSV");
  add_model_options(*cache_cmd, cache_opts);
  add_analysis_options(*cache_cmd, cache_opts);

  try {
    std::vector<std::string> argv = expand_config(args, app);
    std::reverse(argv.begin(), argv.end());  // CLI11 consumes from the back
    try {
      app.parse(argv);
    } catch (const CLI::ParseError& e) {
      std::ostringstream cli_out, cli_err;
      const int code = app.exit(e, cli_out, cli_err);
      out << cli_out.str();
      err << cli_err.str();
      return code == 0 ? 0 : 2;
    }
    if (analyze_cmd->parsed()) {
      return cmd_analyze(to_config(analyze_opts), analyze_opts.include_cache, out, err);
    }
    if (rootogram_cmd->parsed()) return cmd_rootogram(to_config(rootogram_opts), out);
    return cmd_cache_export(to_config(cache_opts), out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace glmshap::cli
