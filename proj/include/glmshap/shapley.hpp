#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "glmshap/dataset.hpp"
#include "glmshap/family.hpp"
#include "glmshap/glm.hpp"
#include "glmshap/measures.hpp"
#include "glmshap/subset_key.hpp"

namespace glmshap {

/// |S|! (p - |S| - 1)! / p!, computed as 1 / (p * C(p-1, k)).
double shapley_weight(std::size_t p, std::size_t k);

/// Per-subset statistics for all 2^p coalitions, indexed by key bits.
/// Distinct keys may be written concurrently.
class SubsetFitCache {
 public:
  SubsetFitCache() = default;
  explicit SubsetFitCache(std::size_t p);

  std::size_t players() const { return p_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t filled() const;
  bool complete() const { return filled() == size(); }

  void put(SubsetKey key, const SubsetStats& stats);
  bool contains(SubsetKey key) const;
  const SubsetStats& at(SubsetKey key) const;

 private:
  std::size_t p_ = 0;
  std::vector<SubsetStats> entries_;
  std::vector<std::uint8_t> present_;
};

struct ShapleyResult {
  std::vector<std::string> players;
  std::vector<double> phi;
  double v_grand = 0.0;
  double v_empty = 0.0;
  FitMeasure measure;
  bool is_pseudo = false;
  std::optional<std::vector<double>> imp_fm;
  std::optional<std::vector<double>> imp_bm;
  std::optional<std::vector<double>> mc_stderr;
  std::size_t samples = 0;  // permutation samples; 0 for exact runs
};

/// Exact Shapley values of the game `values` (indexed by key bits, size
/// 2^p), accumulated with compensated summation in fixed key order.
std::vector<double> shapley_from_game(std::span<const double> values, std::size_t p);

/// Average marginal contribution over all p! orderings; p <= 9.
std::vector<double> permutation_average(std::span<const double> values, std::size_t p);

/// v(S) for every key of a complete cache.
std::vector<double> game_values(const SubsetFitCache& cache, const FitMeasure& measure,
                                const RunConstants& consts);

ShapleyResult shapley_from_cache(const SubsetFitCache& cache, const FitMeasure& measure,
                                 const RunConstants& consts,
                                 std::vector<std::string> player_names);

std::vector<double> shapley_permutation_oracle(const SubsetFitCache& cache,
                                               const FitMeasure& measure,
                                               const RunConstants& consts);

/// Fills impFM (when the values do not sum to zero) and impBM (when the
/// measure is bounded above by one).
ShapleyResult importance_measures(ShapleyResult res);

struct EngineOptions {
  FitControl ctl;
  unsigned workers = 0;  // 0: available parallelism
  bool permissive = false;
  NullConvention null_convention = NullConvention::kMlNull;
};

/// A subset fit failed during enumeration.
class EnumerationError : public NumericalError {
 public:
  EnumerationError(SubsetKey key, const std::vector<std::string>& players,
                   const std::string& diagnostic);
  SubsetKey key() const { return key_; }

 private:
  SubsetKey key_;
};

/// Fits every listed subset (in parallel) and returns their statistics in
/// the same order. Fit failures raise EnumerationError for the earliest
/// failing key, or in permissive mode fall back to the best iterate and
/// append a warning.
std::vector<SubsetStats> fit_subsets(const Dataset& ds, const Family& family,
                                     const std::vector<SubsetKey>& keys,
                                     const EngineOptions& opts,
                                     std::vector<std::string>& warnings);

/// All 2^p subset fits; visits keys by increasing size, then key value.
SubsetFitCache enumerate_subsets(const Dataset& ds, const Family& family,
                                 const EngineOptions& opts,
                                 std::vector<std::string>& warnings);

RunConstants run_constants(const Dataset& ds, const Family& family,
                           const SubsetStats& empty_fit, const EngineOptions& opts);

struct ExactRun {
  ShapleyResult result;
  SubsetFitCache cache;
  RunConstants consts;
  std::vector<std::string> warnings;
};

ExactRun shapley_exact(const Dataset& ds, const Family& family,
                       const FitMeasure& measure, const EngineOptions& opts = {});

/// Monte-Carlo permutation estimate. When `samples` is a multiple of p!
/// (p <= 10) every ordering is visited equally often and the result is
/// exact.
ShapleyResult shapley_sampled(const Dataset& ds, const Family& family,
                              const FitMeasure& measure, std::size_t samples,
                              std::uint64_t seed, const EngineOptions& opts = {});

/// Everything one model analysis produces: per-measure results from a single
/// enumeration (or a single set of sampled permutations).
struct Analysis {
  std::vector<std::string> players;
  Family family;
  std::size_t n = 0;
  RunConstants consts;
  SubsetStats full;  // statistics of the model with all players
  std::optional<SubsetFitCache> cache;  // exact runs only
  std::vector<ShapleyResult> results;
  std::vector<std::string> warnings;
};

struct SamplingOptions {
  std::size_t samples = 0;  // 0: exact enumeration
  std::uint64_t seed = 0;
};

Analysis analyze(const Dataset& ds, const Family& family,
                 const std::vector<FitMeasure>& measures, const EngineOptions& opts = {},
                 const SamplingOptions& sampling = {});

}  // namespace glmshap
