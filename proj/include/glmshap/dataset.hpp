#pragma once

#include <cstddef>
#include <istream>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glmshap/subset_key.hpp"

namespace glmshap {

/// Raw CSV contents: header plus row-major string cells.
struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column_index(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

RawTable parse_csv(std::istream& in, char delimiter = ',');
RawTable read_csv(const std::string& path, char delimiter = ',');

/// Keeps the rows whose `column` cell equals one of `accepted`.
RawTable filter_rows(const RawTable& table, const std::string& column,
                     const std::set<std::string>& accepted);

/// A named regressor group, the unit of the Shapley game.
struct Player {
  std::string name;
  std::vector<std::size_t> columns;

  friend bool operator==(const Player&, const Player&) = default;
};

/// Requested grouping of raw columns into one player.
struct PlayerSpec {
  std::string name;
  std::vector<std::string> columns;
};

/// Columns with any non-numeric cell are always treated as categorical;
/// `factors` forces numeric-coded columns to be treated as categorical too.
struct FactorPolicy {
  std::set<std::string> factors;
};

/// Response vector, design matrix (no intercept column) and the players
/// partitioning the design columns. Immutable after construction.
class Dataset {
 public:
  Dataset(Eigen::VectorXd y, Eigen::MatrixXd design,
          std::vector<std::string> column_names, std::vector<Player> players);

  std::size_t n() const { return static_cast<std::size_t>(y_.size()); }
  std::size_t m() const { return static_cast<std::size_t>(design_.cols()); }
  std::size_t p() const { return players_.size(); }

  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::MatrixXd& design() const { return design_; }
  const std::vector<std::string>& column_names() const { return column_names_; }
  const std::vector<Player>& players() const { return players_; }
  std::vector<std::string> player_names() const;
  std::size_t player_index(const std::string& name) const;

  /// Same design and players with a different response.
  Dataset with_response(Eigen::VectorXd y) const;
  /// Subset of observations, in the given order.
  Dataset rows(const std::vector<std::size_t>& indices) const;
  /// Keeps only the named players (in the given order) and their columns.
  Dataset restrict_players(const std::vector<std::string>& names) const;

  friend bool operator==(const Dataset&, const Dataset&);

 private:
  Eigen::VectorXd y_;
  Eigen::MatrixXd design_;
  std::vector<std::string> column_names_;
  std::vector<Player> players_;
};

Dataset encode_dataset(const RawTable& raw, const std::string& response_name,
                       const std::vector<PlayerSpec>& player_specs,
                       const FactorPolicy& factor_policy = {});

/// Design restricted to the players in a subset. `x` carries the intercept
/// as its first column followed by the selected design columns in their
/// original order.
struct SubsetDesign {
  std::vector<std::size_t> columns;
  Eigen::MatrixXd x;

  bool intercept_only() const { return columns.empty(); }
};

SubsetDesign select_columns(const Dataset& ds, SubsetKey s);

/// Players of `ds` present in `s`, by name.
std::vector<std::string> subset_player_names(const Dataset& ds, SubsetKey s);

}  // namespace glmshap
