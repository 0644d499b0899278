#pragma once

#include <functional>
#include <vector>

#include "glmshap/dataset.hpp"
#include "glmshap/family.hpp"
#include "glmshap/glm.hpp"
#include "glmshap/hurdle.hpp"

namespace glmshap {

/// Hanging-rootogram data for counts 0..j_max, j_max the largest observed
/// count. Expected frequencies beyond j_max are summed separately so the
/// total expected mass can be checked against n.
struct RootogramData {
  std::vector<long> counts;
  std::vector<double> observed;
  std::vector<double> expected;
  std::vector<double> sqrt_observed;
  std::vector<double> sqrt_expected;
  std::vector<double> hanging_bottom;  // sqrt(expected) - sqrt(observed)
  double expected_beyond_max = 0.0;
  std::size_t n = 0;

  double observed_total() const;
  double expected_total() const;
};

/// Rootogram from per-observation probability functions f_i(j).
RootogramData make_rootogram(const Eigen::VectorXd& y,
                             const std::function<double(std::size_t, long)>& prob);

/// Rootogram of the full model of a single count family.
RootogramData rootogram_glm(const Dataset& ds, const Family& family,
                            const FitControl& ctl = {});

/// Rootogram of the full hurdle model: f(0) = 1 - pi_i and
/// f(j) = pi_i * ztpois(j; rate_i) for j >= 1, both parts predicted on all
/// n rows.
RootogramData rootogram_hurdle(const Dataset& ds, const HurdleSpec& spec,
                               const FitControl& ctl = {});

}  // namespace glmshap
