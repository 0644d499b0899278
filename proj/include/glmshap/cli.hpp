#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "glmshap/dataset.hpp"

namespace glmshap::cli {

struct RunConfig {
  std::string data_path;
  char delimiter = ',';
  std::string response;
  std::vector<PlayerSpec> players;  // empty: every non-response column
  std::vector<std::string> factors;
  std::string filter;  // "column=value1|value2"
  std::string family = "poisson";
  std::vector<std::string> measures{"kl-r2"};
  std::string null_convention = "ml";
  bool hurdle = false;
  std::vector<std::string> binary_players;
  std::vector<std::string> count_players;
  std::size_t mc_samples = 0;
  std::uint64_t seed = 42;
  unsigned workers = 0;
  bool permissive = false;
  int max_iter = 100;
  double tol = 1e-10;
  std::string out;
  std::string cache_out;
};

nlohmann::json to_json(const RunConfig& cfg);

/// "a,b,grp=c+d" -> players a, b and grp (columns c and d).
std::vector<PlayerSpec> parse_player_specs(const std::string& spec);

/// Flat "key = value" document; '#' starts a comment.
std::map<std::string, std::string> parse_config_text(const std::string& text);

/// Loads the dataset a config describes.
Dataset load_dataset(const RunConfig& cfg);

/// Entry point behind the executable. `args` excludes the program name.
/// Returns the process exit code: 0 success, 2 configuration error, 3 data
/// error, 4 numerical error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace glmshap::cli
