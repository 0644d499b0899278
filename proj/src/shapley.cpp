#include "glmshap/shapley.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <random>
#include <unordered_map>

#include "parallel.hpp"

namespace glmshap {

namespace {

using detail::CompensatedSum;

std::string describe(SubsetKey key, const std::vector<std::string>& players) {
  std::string names;
  for (const auto& p : players) names += (names.empty() ? "" : ", ") + p;
  return "{" + names + "} (bits " + std::to_string(key.bits) + ")";
}

std::uint64_t factorial(std::size_t p) {
  std::uint64_t f = 1;
  for (std::size_t k = 2; k <= p; ++k) f *= k;
  return f;
}

std::vector<double> weight_table(std::size_t p) {
  std::vector<double> w(p);
  for (std::size_t k = 0; k < p; ++k) w[k] = shapley_weight(p, k);
  return w;
}

// Keys in the order fits are scheduled: by size, then numeric value.
std::vector<SubsetKey> enumeration_order(std::size_t p) {
  std::vector<SubsetKey> keys(std::size_t{1} << p);
  for (std::size_t b = 0; b < keys.size(); ++b) keys[b] = {b};
  std::stable_sort(keys.begin(), keys.end(), [](SubsetKey a, SubsetKey b) {
    return a.size() < b.size();
  });
  return keys;
}

struct SampledCore {
  std::vector<ShapleyResult> results;
  RunConstants consts;
  SubsetStats full;
  std::vector<std::string> warnings;
};

SampledCore sampled_core(const Dataset& ds, const Family& family,
                         const std::vector<FitMeasure>& measures, std::size_t samples,
                         std::uint64_t seed, const EngineOptions& opts) {
  if (samples < 1) throw ConfigError("sample count must be at least 1");
  const std::size_t p = ds.p();
  if (p == 0) throw ConfigError("at least one player is required");

  // Orderings: all of them, equally often, when the sample count allows it.
  std::vector<std::vector<std::uint8_t>> orderings;
  std::vector<std::uint8_t> perm(p);
  std::iota(perm.begin(), perm.end(), std::uint8_t{0});
  const bool stratified = p <= 10 && samples % factorial(p) == 0;
  if (stratified) {
    do {
      orderings.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    std::mt19937_64 rng(seed);
    orderings.reserve(samples);
    for (std::size_t s = 0; s < samples; ++s) {
      std::shuffle(perm.begin(), perm.end(), rng);
      orderings.push_back(perm);
    }
  }

  std::unordered_map<SubsetKey, std::size_t> index;
  std::vector<SubsetKey> keys;
  auto intern = [&](SubsetKey key) {
    if (index.emplace(key, keys.size()).second) keys.push_back(key);
  };
  for (const auto& ord : orderings) {
    SubsetKey s = SubsetKey::empty();
    intern(s);
    for (std::uint8_t i : ord) {
      s = s.with(i);
      intern(s);
    }
  }
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::pair(keys[a].size(), keys[a].bits) < std::pair(keys[b].size(), keys[b].bits);
  });
  std::vector<SubsetKey> sorted_keys;
  for (std::size_t k : order) sorted_keys.push_back(keys[k]);

  SampledCore core;
  const std::vector<SubsetStats> fitted =
      fit_subsets(ds, family, sorted_keys, opts, core.warnings);
  std::vector<SubsetStats> stats(keys.size());
  for (std::size_t k = 0; k < order.size(); ++k) stats[order[k]] = fitted[k];

  core.consts = run_constants(ds, family, stats[index.at(SubsetKey::empty())], opts);
  core.full = stats[index.at(SubsetKey::full(p))];

  for (const FitMeasure& measure : measures) {
    std::vector<double> v(stats.size());
    for (std::size_t k = 0; k < stats.size(); ++k) v[k] = evaluate(measure, stats[k], core.consts);

    std::vector<double> mean(p, 0.0), m2(p, 0.0);
    std::size_t count = 0;
    for (const auto& ord : orderings) {
      ++count;
      SubsetKey s = SubsetKey::empty();
      double prev = v[index.at(s)];
      for (std::uint8_t i : ord) {
        s = s.with(i);
        const double cur = v[index.at(s)];
        const double delta = cur - prev;
        prev = cur;
        // Welford update.
        const double d = delta - mean[i];
        mean[i] += d / static_cast<double>(count);
        m2[i] += d * (delta - mean[i]);
      }
    }

    ShapleyResult res;
    res.players = ds.player_names();
    res.phi = mean;
    res.measure = measure;
    res.v_grand = evaluate(measure, core.full, core.consts);
    res.v_empty = v[index.at(SubsetKey::empty())];
    res.is_pseudo = res.v_empty != 0.0;
    res.samples = samples;
    std::vector<double> se(p, 0.0);
    if (!stratified && count > 1) {
      for (std::size_t i = 0; i < p; ++i) {
        se[i] = std::sqrt(m2[i] / static_cast<double>(count - 1) / static_cast<double>(count));
      }
    }
    res.mc_stderr = std::move(se);
    core.results.push_back(importance_measures(std::move(res)));
  }
  return core;
}

}  // namespace

double shapley_weight(std::size_t p, std::size_t k) {
  if (p == 0 || k >= p) {
    throw ConfigError("shapley_weight: coalition size " + std::to_string(k) +
                      " out of range for " + std::to_string(p) + " players");
  }
  if (p > SubsetKey::kCapacity) throw ConfigError("shapley_weight: too many players");
  // Exact C(p-1, k); every partial product is itself a binomial coefficient.
  const std::size_t n = p - 1;
  const std::size_t r = std::min(k, n - k);
  unsigned __int128 binom = 1;
  for (std::size_t i = 1; i <= r; ++i) binom = binom * (n - r + i) / i;
  return 1.0 / (static_cast<double>(p) * static_cast<double>(binom));
}

SubsetFitCache::SubsetFitCache(std::size_t p) : p_(p) {
  if (p > kMaxExactPlayers) {
    throw ConfigError("exact enumeration supports at most " +
                      std::to_string(kMaxExactPlayers) + " players");
  }
  entries_.resize(std::size_t{1} << p);
  present_.assign(entries_.size(), 0);
}

std::size_t SubsetFitCache::filled() const {
  return static_cast<std::size_t>(std::count(present_.begin(), present_.end(), 1));
}

void SubsetFitCache::put(SubsetKey key, const SubsetStats& stats) {
  entries_.at(key.bits) = stats;
  present_[key.bits] = 1;
}

bool SubsetFitCache::contains(SubsetKey key) const {
  return key.bits < present_.size() && present_[key.bits] != 0;
}

const SubsetStats& SubsetFitCache::at(SubsetKey key) const {
  if (!contains(key)) {
    throw ConfigError("subset " + std::to_string(key.bits) + " is not in the cache");
  }
  return entries_[key.bits];
}

std::vector<double> shapley_from_game(std::span<const double> values, std::size_t p) {
  if (values.size() != (std::size_t{1} << p)) {
    throw ConfigError("game has " + std::to_string(values.size()) +
                      " values; expected 2^" + std::to_string(p));
  }
  const std::vector<double> w = weight_table(p);
  std::vector<double> phi(p);
  for (std::size_t i = 0; i < p; ++i) {
    const std::uint64_t bit = std::uint64_t{1} << i;
    CompensatedSum acc;
    for (std::uint64_t s = 0; s < values.size(); ++s) {
      if (s & bit) continue;
      const int k = std::popcount(s);
      acc.add(w[static_cast<std::size_t>(k)] * (values[s | bit] - values[s]));
    }
    phi[i] = acc.value();
  }
  return phi;
}

std::vector<double> permutation_average(std::span<const double> values, std::size_t p) {
  if (p > 9) throw ConfigError("permutation oracle is limited to 9 players");
  if (values.size() != (std::size_t{1} << p)) {
    throw ConfigError("game size does not match the player count");
  }
  std::vector<std::size_t> perm(p);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<CompensatedSum> acc(p);
  std::size_t orderings = 0;
  do {
    ++orderings;
    std::uint64_t s = 0;
    for (std::size_t i : perm) {
      const std::uint64_t next = s | (std::uint64_t{1} << i);
      acc[i].add(values[next] - values[s]);
      s = next;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::vector<double> phi(p);
  for (std::size_t i = 0; i < p; ++i) phi[i] = acc[i].value() / static_cast<double>(orderings);
  return phi;
}

std::vector<double> game_values(const SubsetFitCache& cache, const FitMeasure& measure,
                                const RunConstants& consts) {
  if (!cache.complete()) throw ConfigError("subset cache is incomplete");
  std::vector<double> v(cache.size());
  for (std::uint64_t s = 0; s < v.size(); ++s) v[s] = evaluate(measure, cache.at({s}), consts);
  return v;
}

ShapleyResult shapley_from_cache(const SubsetFitCache& cache, const FitMeasure& measure,
                                 const RunConstants& consts,
                                 std::vector<std::string> player_names) {
  const std::vector<double> v = game_values(cache, measure, consts);
  ShapleyResult res;
  res.players = std::move(player_names);
  res.phi = shapley_from_game(v, cache.players());
  res.measure = measure;
  res.v_grand = v.back();
  res.v_empty = v.front();
  res.is_pseudo = res.v_empty != 0.0;
  return importance_measures(std::move(res));
}

std::vector<double> shapley_permutation_oracle(const SubsetFitCache& cache,
                                               const FitMeasure& measure,
                                               const RunConstants& consts) {
  return permutation_average(game_values(cache, measure, consts), cache.players());
}

ShapleyResult importance_measures(ShapleyResult res) {
  CompensatedSum total;
  for (double v : res.phi) total.add(v);
  const double sum = total.value();
  if (sum != 0.0) {
    std::vector<double> fm(res.phi.size());
    for (std::size_t i = 0; i < fm.size(); ++i) fm[i] = res.phi[i] / sum;
    res.imp_fm = std::move(fm);
  } else {
    res.imp_fm.reset();
  }
  if (res.measure.has_upper_bound_one) {
    res.imp_bm = res.phi;  // best model has v = 1
  } else {
    res.imp_bm.reset();
  }
  return res;
}

EnumerationError::EnumerationError(SubsetKey key, const std::vector<std::string>& players,
                                   const std::string& diagnostic)
    : NumericalError("fit failed for subset " + describe(key, players) + ": " + diagnostic),
      key_(key) {}

std::vector<SubsetStats> fit_subsets(const Dataset& ds, const Family& family,
                                     const std::vector<SubsetKey>& keys,
                                     const EngineOptions& opts,
                                     std::vector<std::string>& warnings) {
  opts.ctl.validate();
  family.validate_response(ds.y());
  std::vector<SubsetStats> stats(keys.size());
  std::vector<std::uint8_t> fallback(keys.size(), 0);

  std::mutex mutex;
  std::size_t first_failure = keys.size();
  std::string failure_message;
  std::atomic<std::size_t> failure_bound{keys.size()};

  detail::parallel_for(keys.size(), opts.workers, [&](std::size_t k) {
    if (k > failure_bound.load()) return;  // cannot be the earliest failure
    try {
      try {
        const FittedGlm f = fit(ds, family, keys[k], opts.ctl);
        stats[k] = {f.loglik, f.deviance};
      } catch (const ConvergenceError& e) {
        if (!opts.permissive) throw;
        stats[k] = {e.best().loglik, e.best().deviance};
        fallback[k] = 1;
      }
    } catch (const std::exception& e) {
      std::lock_guard lock(mutex);
      if (k < first_failure) {
        first_failure = k;
        failure_message = e.what();
        failure_bound.store(k);
      }
    }
  });

  if (first_failure < keys.size()) {
    const SubsetKey key = keys[first_failure];
    throw EnumerationError(key, subset_player_names(ds, key), failure_message);
  }
  for (std::size_t k = 0; k < keys.size(); ++k) {
    if (fallback[k]) {
      warnings.push_back("WARNING: fit for subset " +
                         describe(keys[k], subset_player_names(ds, keys[k])) +
                         " did not converge; using its best iterate");
    }
  }
  return stats;
}

SubsetFitCache enumerate_subsets(const Dataset& ds, const Family& family,
                                 const EngineOptions& opts,
                                 std::vector<std::string>& warnings) {
  const std::size_t p = ds.p();
  if (p > kMaxExactPlayers) {
    throw ConfigError(std::to_string(p) + " players exceed the exact enumeration limit of " +
                      std::to_string(kMaxExactPlayers) + "; use permutation sampling");
  }
  if (p > kExactWarnPlayers) {
    warnings.push_back("WARNING: exact enumeration over " + std::to_string(p) +
                       " players requires " + std::to_string(std::uint64_t{1} << p) +
                       " fits");
  }
  const std::vector<SubsetKey> keys = enumeration_order(p);
  const std::vector<SubsetStats> stats = fit_subsets(ds, family, keys, opts, warnings);
  SubsetFitCache cache(p);
  for (std::size_t k = 0; k < keys.size(); ++k) cache.put(keys[k], stats[k]);
  return cache;
}

RunConstants run_constants(const Dataset& ds, const Family& family,
                           const SubsetStats& empty_fit, const EngineOptions& opts) {
  const double sat = saturated_loglik(ds, family);
  double null_ll = empty_fit.loglik;
  if (opts.null_convention == NullConvention::kPluginNull) {
    null_ll = null_fit_convention(ds, family, NullConvention::kPluginNull, opts.ctl).loglik;
  }
  return RunConstants::make(null_ll, sat, opts.null_convention);
}

ExactRun shapley_exact(const Dataset& ds, const Family& family, const FitMeasure& measure,
                       const EngineOptions& opts) {
  ExactRun run;
  run.cache = enumerate_subsets(ds, family, opts, run.warnings);
  run.consts = run_constants(ds, family, run.cache.at(SubsetKey::empty()), opts);
  run.result = shapley_from_cache(run.cache, measure, run.consts, ds.player_names());
  return run;
}

ShapleyResult shapley_sampled(const Dataset& ds, const Family& family,
                              const FitMeasure& measure, std::size_t samples,
                              std::uint64_t seed, const EngineOptions& opts) {
  return sampled_core(ds, family, {measure}, samples, seed, opts).results.front();
}

Analysis analyze(const Dataset& ds, const Family& family,
                 const std::vector<FitMeasure>& measures, const EngineOptions& opts,
                 const SamplingOptions& sampling) {
  if (measures.empty()) throw ConfigError("at least one measure is required");
  Analysis a;
  a.players = ds.player_names();
  a.family = family;
  a.n = ds.n();
  if (sampling.samples > 0) {
    SampledCore core = sampled_core(ds, family, measures, sampling.samples, sampling.seed, opts);
    a.consts = core.consts;
    a.full = core.full;
    a.results = std::move(core.results);
    a.warnings = std::move(core.warnings);
    return a;
  }
  SubsetFitCache cache = enumerate_subsets(ds, family, opts, a.warnings);
  a.consts = run_constants(ds, family, cache.at(SubsetKey::empty()), opts);
  a.full = cache.at(SubsetKey::full(ds.p()));
  for (const FitMeasure& m : measures) {
    a.results.push_back(shapley_from_cache(cache, m, a.consts, a.players));
  }
  a.cache = std::move(cache);
  return a;
}

}  // namespace glmshap
