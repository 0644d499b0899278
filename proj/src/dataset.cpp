#include "glmshap/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_set>

#include "glmshap/error.hpp"

namespace glmshap {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

// One logical CSV record; quoted fields may contain the delimiter, doubled
// quotes and newlines.
bool read_record(std::istream& in, char delimiter,
                 std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool quoted_field = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
      quoted_field = true;
    } else if (c == delimiter) {
      fields.push_back(quoted_field ? field : trim(field));
      field.clear();
      quoted_field = false;
    } else if (c == '\n') {
      break;
    } else {
      field.push_back(c);
    }
  }
  if (!any) return false;
  if (in_quotes) {
    throw DataError(DataErrorCode::kParse, "unterminated quoted CSV field");
  }
  fields.push_back(quoted_field ? field : trim(field));
  return true;
}

bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" ||
         cell == ".";
}

std::optional<double> parse_number(const std::string& cell) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

void check_complete(const RawTable& raw, std::size_t column) {
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    if (is_missing(raw.rows[r][column])) {
      throw DataError(DataErrorCode::kMissingValue,
                      "missing value in column '" + raw.header[column] +
                          "' at data row " + std::to_string(r + 1));
    }
  }
}

// Numeric view of a column, or nullopt if any cell is non-numeric.
std::optional<std::vector<double>> numeric_column(const RawTable& raw,
                                                  std::size_t column) {
  std::vector<double> values;
  values.reserve(raw.rows.size());
  for (const auto& row : raw.rows) {
    auto v = parse_number(row[column]);
    if (!v) return std::nullopt;
    values.push_back(*v);
  }
  return values;
}

}  // namespace

std::size_t RawTable::column_index(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw DataError(DataErrorCode::kMissingColumn,
                    "column '" + name + "' not found in data");
  }
  return static_cast<std::size_t>(it - header.begin());
}

bool RawTable::has_column(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

RawTable parse_csv(std::istream& in, char delimiter) {
  RawTable table;
  std::vector<std::string> fields;
  if (!read_record(in, delimiter, fields)) {
    throw DataError(DataErrorCode::kParse, "CSV input is empty");
  }
  table.header = fields;
  std::size_t line = 1;
  while (read_record(in, delimiter, fields)) {
    ++line;
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != table.header.size()) {
      throw DataError(DataErrorCode::kParse,
                      "CSV record " + std::to_string(line) + " has " +
                          std::to_string(fields.size()) + " fields, expected " +
                          std::to_string(table.header.size()));
    }
    table.rows.push_back(fields);
  }
  return table;
}

RawTable read_csv(const std::string& path, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError(DataErrorCode::kParse, "cannot open data file '" + path + "'");
  }
  return parse_csv(in, delimiter);
}

RawTable filter_rows(const RawTable& table, const std::string& column,
                     const std::set<std::string>& accepted) {
  const std::size_t c = table.column_index(column);
  RawTable out;
  out.header = table.header;
  for (const auto& row : table.rows) {
    if (accepted.count(row[c])) out.rows.push_back(row);
  }
  return out;
}

Dataset::Dataset(Eigen::VectorXd y, Eigen::MatrixXd design,
                 std::vector<std::string> column_names,
                 std::vector<Player> players)
    : y_(std::move(y)),
      design_(std::move(design)),
      column_names_(std::move(column_names)),
      players_(std::move(players)) {
  if (design_.rows() != y_.size()) {
    throw DataError(DataErrorCode::kShape,
                    "design has " + std::to_string(design_.rows()) +
                        " rows but response has " + std::to_string(y_.size()));
  }
  if (column_names_.size() != m()) {
    throw DataError(DataErrorCode::kShape, "column name count mismatch");
  }
  if (players_.size() > SubsetKey::kCapacity) {
    throw DataError(DataErrorCode::kShape, "at most 64 players are supported");
  }
  std::vector<int> owner(m(), -1);
  std::unordered_set<std::string> names;
  for (std::size_t i = 0; i < players_.size(); ++i) {
    const Player& pl = players_[i];
    if (!names.insert(pl.name).second) {
      throw DataError(DataErrorCode::kShape, "duplicate player name '" + pl.name + "'");
    }
    if (pl.columns.empty()) {
      throw DataError(DataErrorCode::kShape, "player '" + pl.name + "' has no columns");
    }
    for (std::size_t c : pl.columns) {
      if (c >= m() || owner[c] != -1) {
        throw DataError(DataErrorCode::kShape,
                        "player '" + pl.name + "' claims column " +
                            std::to_string(c) + " which is out of range or owned twice");
      }
      owner[c] = static_cast<int>(i);
    }
  }
  for (std::size_t c = 0; c < m(); ++c) {
    if (owner[c] == -1) {
      throw DataError(DataErrorCode::kShape,
                      "design column '" + column_names_[c] + "' belongs to no player");
    }
  }
  if (n() < m() + 1) {
    throw DataError(DataErrorCode::kShape,
                    "need more observations (" + std::to_string(n()) +
                        ") than columns plus intercept (" + std::to_string(m() + 1) + ")");
  }
}

std::vector<std::string> Dataset::player_names() const {
  std::vector<std::string> out;
  out.reserve(players_.size());
  for (const auto& pl : players_) out.push_back(pl.name);
  return out;
}

std::size_t Dataset::player_index(const std::string& name) const {
  for (std::size_t i = 0; i < players_.size(); ++i) {
    if (players_[i].name == name) return i;
  }
  throw DataError(DataErrorCode::kMissingColumn, "no player named '" + name + "'");
}

Dataset Dataset::with_response(Eigen::VectorXd y) const {
  return Dataset(std::move(y), design_, column_names_, players_);
}

Dataset Dataset::rows(const std::vector<std::size_t>& indices) const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(indices.size()));
  Eigen::MatrixXd x(static_cast<Eigen::Index>(indices.size()), design_.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto src = static_cast<Eigen::Index>(indices[r]);
    y(static_cast<Eigen::Index>(r)) = y_(src);
    x.row(static_cast<Eigen::Index>(r)) = design_.row(src);
  }
  return Dataset(std::move(y), std::move(x), column_names_, players_);
}

Dataset Dataset::restrict_players(const std::vector<std::string>& names) const {
  std::vector<Player> players;
  std::vector<std::size_t> source_columns;
  for (const auto& name : names) {
    const Player& src = players_[player_index(name)];
    Player pl{src.name, {}};
    for (std::size_t c : src.columns) {
      pl.columns.push_back(source_columns.size());
      source_columns.push_back(c);
    }
    players.push_back(std::move(pl));
  }
  Eigen::MatrixXd x(design_.rows(), static_cast<Eigen::Index>(source_columns.size()));
  std::vector<std::string> col_names;
  for (std::size_t j = 0; j < source_columns.size(); ++j) {
    x.col(static_cast<Eigen::Index>(j)) =
        design_.col(static_cast<Eigen::Index>(source_columns[j]));
    col_names.push_back(column_names_[source_columns[j]]);
  }
  return Dataset(y_, std::move(x), std::move(col_names), std::move(players));
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.y_.size() == b.y_.size() && a.design_.rows() == b.design_.rows() &&
         a.design_.cols() == b.design_.cols() && a.y_ == b.y_ &&
         a.design_ == b.design_ && a.column_names_ == b.column_names_ &&
         a.players_ == b.players_;
}

Dataset encode_dataset(const RawTable& raw, const std::string& response_name,
                       const std::vector<PlayerSpec>& player_specs,
                       const FactorPolicy& factor_policy) {
  const std::size_t response_col = raw.column_index(response_name);
  check_complete(raw, response_col);
  const auto response = numeric_column(raw, response_col);
  if (!response) {
    throw DataError(DataErrorCode::kType,
                    "response column '" + response_name + "' is not numeric");
  }

  // Resolve every column first so a missing name is reported before any
  // other problem.
  std::vector<std::vector<std::size_t>> spec_columns;
  for (const auto& spec : player_specs) {
    if (spec.columns.empty()) {
      throw ConfigError("player '" + spec.name + "' lists no columns");
    }
    std::vector<std::size_t> cols;
    for (const auto& name : spec.columns) cols.push_back(raw.column_index(name));
    spec_columns.push_back(std::move(cols));
  }

  std::vector<std::vector<double>> columns;
  std::vector<std::string> column_names;
  std::vector<Player> players;
  for (std::size_t s = 0; s < player_specs.size(); ++s) {
    Player pl{player_specs[s].name, {}};
    for (std::size_t k = 0; k < spec_columns[s].size(); ++k) {
      const std::size_t col = spec_columns[s][k];
      const std::string& col_name = raw.header[col];
      check_complete(raw, col);
      auto numeric = numeric_column(raw, col);
      if (numeric && !factor_policy.factors.count(col_name)) {
        const auto [lo, hi] = std::minmax_element(numeric->begin(), numeric->end());
        if (numeric->empty() || *lo == *hi) {
          throw DataError(DataErrorCode::kDegenerateColumn,
                          "column '" + col_name + "' is constant");
        }
        pl.columns.push_back(columns.size());
        columns.push_back(std::move(*numeric));
        column_names.push_back(col_name);
        continue;
      }
      // Categorical: reference level is the lexicographically first one.
      std::map<std::string, std::size_t> levels;
      for (const auto& row : raw.rows) levels.emplace(row[col], 0);
      if (levels.size() < 2) {
        throw DataError(DataErrorCode::kDegenerateColumn,
                        "categorical column '" + col_name +
                            "' has fewer than two observed levels");
      }
      std::size_t index = 0;
      for (auto& [level, idx] : levels) idx = index++;
      const std::size_t first_dummy = columns.size();
      for (auto it = std::next(levels.begin()); it != levels.end(); ++it) {
        pl.columns.push_back(columns.size());
        columns.emplace_back(raw.rows.size(), 0.0);
        column_names.push_back(col_name + it->first);
      }
      for (std::size_t r = 0; r < raw.rows.size(); ++r) {
        const std::size_t level = levels.at(raw.rows[r][col]);
        if (level > 0) columns[first_dummy + level - 1][r] = 1.0;
      }
    }
    players.push_back(std::move(pl));
  }

  const auto n = static_cast<Eigen::Index>(raw.rows.size());
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(response->data(), n);
  Eigen::MatrixXd design(n, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    design.col(static_cast<Eigen::Index>(j)) =
        Eigen::Map<const Eigen::VectorXd>(columns[j].data(), n);
  }
  return Dataset(std::move(y), std::move(design), std::move(column_names),
                 std::move(players));
}

SubsetDesign select_columns(const Dataset& ds, SubsetKey s) {
  SubsetDesign out;
  for (std::size_t i = 0; i < ds.p(); ++i) {
    if (!s.contains(i)) continue;
    for (std::size_t col : ds.players()[i].columns) out.columns.push_back(col);
  }
  std::sort(out.columns.begin(), out.columns.end());
  const auto n = static_cast<Eigen::Index>(ds.n());
  out.x.resize(n, static_cast<Eigen::Index>(out.columns.size() + 1));
  out.x.col(0).setOnes();
  for (std::size_t j = 0; j < out.columns.size(); ++j) {
    out.x.col(static_cast<Eigen::Index>(j + 1)) =
        ds.design().col(static_cast<Eigen::Index>(out.columns[j]));
  }
  return out;
}

std::vector<std::string> subset_player_names(const Dataset& ds, SubsetKey s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ds.p(); ++i) {
    if (s.contains(i)) out.push_back(ds.players()[i].name);
  }
  return out;
}

}  // namespace glmshap
