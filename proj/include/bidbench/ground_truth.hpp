#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bidbench/covariates.hpp"
#include "bidbench/errors.hpp"
#include "bidbench/rng.hpp"

namespace bidbench {

enum class CurveFamily { richards, stacked_sigmoid };

inline std::string to_string(CurveFamily f) {
  return f == CurveFamily::richards ? "richards" : "stacked_sigmoid";
}

inline CurveFamily family_from_string(const std::string& s) {
  if (s == "richards") return CurveFamily::richards;
  if (s == "stacked_sigmoid" || s == "stacked-sigmoid") return CurveFamily::stacked_sigmoid;
  throw ArgumentError("unknown curve family '" + s + "'");
}

/// Min/max of a raw linear score over the generating covariate matrix,
/// recorded for audit and serialization. Scores themselves saturate at the
/// unit interval (see normalized_score), so the bounds do not affect curves.
struct ScoreBounds {
  double lo = 0.0;
  double hi = 1.0;
};

/// Decreasing unit sigmoid: ~1 well below 0.5, ~0 well above, slope -5 at the
/// midpoint. Building block of the stacked-sigmoid family.
inline double falling_sigmoid(double z) { return 1.0 / (1.0 + std::exp(20.0 * (z - 0.5))); }

/// Noiseless bid-response generator: a curve family conditioned on the
/// covariates through four normalized linear scores.
struct GroundTruthSpec {
  CurveFamily family = CurveFamily::richards;
  std::vector<double> w1, w2, w3, w4;  // entries in [0,1]
  double noise_sd = 0.1;               // sd of the observation noise on p_f
  std::array<ScoreBounds, 4> score_bounds{};

  std::size_t dim() const { return w1.size(); }

  /// s_j(x) in [0,1]: the raw score w_j^T x saturated at the unit interval.
  /// On standardized covariates the raw scores have sd around sqrt(d/3), so
  /// much of their mass saturates; the resulting mix of pinned and interior
  /// scores is what makes the generated curves structurally diverse. (An
  /// earlier min-max rescaling of the scores concentrated them near 0.5 and
  /// produced nearly homogeneous curves.)
  double normalized_score(std::size_t j, std::span<const double> x) const {
    const std::vector<double>* w[4] = {&w1, &w2, &w3, &w4};
    if (j >= 4) throw ArgumentError("score index out of range");
    if (x.size() != w[j]->size()) throw ArgumentError("covariate row has wrong dimension");
    double raw = 0.0;
    const auto& wj = *w[j];
    for (std::size_t k = 0; k < wj.size(); ++k) raw += wj[k] * x[k];
    return std::clamp(raw, 0.0, 1.0);
  }
};

/// Draw the four weight vectors i.i.d. U[0,1] per entry and record the raw
/// score ranges over the given matrix for audit. Degenerate ranges (single
/// row) are widened to +/- 0.5 so the recorded interval is never empty.
inline GroundTruthSpec draw_ground_truth(CurveFamily family, const CovariateMatrix& cov,
                                         double noise_sd, std::uint64_t seed) {
  if (cov.rows == 0 || cov.cols == 0) throw ArgumentError("draw_ground_truth: empty matrix");
  if (noise_sd < 0.0) throw ArgumentError("draw_ground_truth: negative noise_sd");

  GroundTruthSpec spec;
  spec.family = family;
  spec.noise_sd = noise_sd;
  const Rng root(seed);
  std::vector<double>* w[4] = {&spec.w1, &spec.w2, &spec.w3, &spec.w4};
  for (std::size_t j = 0; j < 4; ++j) {
    Rng stream = root.fork(j);
    w[j]->resize(cov.cols);
    for (double& e : *w[j]) e = stream.uniform();

    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < cov.rows; ++i) {
      double raw = 0.0;
      const auto x = cov.row(i);
      for (std::size_t k = 0; k < cov.cols; ++k) raw += (*w[j])[k] * x[k];
      if (i == 0) {
        lo = hi = raw;
      } else {
        lo = std::min(lo, raw);
        hi = std::max(hi, raw);
      }
    }
    if (hi <= lo) {
      lo -= 0.5;
      hi = lo + 1.0;
    }
    spec.score_bounds[j] = {lo, hi};
  }
  return spec;
}

/// Noiseless mu(b, x). Both families are monotone non-increasing in b and map
/// into [0,1] by construction of the coefficient ranges:
///   richards:         p = (1-a) - (B-a) / (1 + exp(-g (b - dlt)))
///                     a = 0.2 s1, B = 0.8 + 0.2 s2, g = 0.5 + 5 s3, dlt = s4
///   stacked sigmoid:  p = a + B sg(b/g) + (1-a-B) sg((b-dlt)/(1-dlt))
///                     a = 0.2 s1, B = 0.8 s2, g = 0.25 + 0.75 s3, dlt = s4
/// with sg the falling sigmoid above.
inline double true_response(const GroundTruthSpec& spec, double b, std::span<const double> x) {
  if (!(b >= 0.0 && b <= 1.0))
    throw DomainError("bid " + std::to_string(b) + " outside [0,1]");
  const double s1 = spec.normalized_score(0, x);
  const double s2 = spec.normalized_score(1, x);
  const double s3 = spec.normalized_score(2, x);
  const double s4 = spec.normalized_score(3, x);

  double p;
  if (spec.family == CurveFamily::richards) {
    const double alpha = 0.2 * s1;
    const double beta = 0.8 + 0.2 * s2;
    const double gamma = 0.5 + 5.0 * s3;
    const double delta = s4;
    p = (1.0 - alpha) - (beta - alpha) / (1.0 + std::exp(-gamma * (b - delta)));
  } else {
    const double alpha = 0.2 * s1;
    const double beta = 0.8 * s2;
    const double gamma = 0.25 + 0.75 * s3;
    // delta = 1 would make the second sigmoid's argument 0/0.
    const double delta = std::min(s4, 1.0 - 1e-9);
    p = alpha + beta * falling_sigmoid(b / gamma) +
        (1.0 - alpha - beta) * falling_sigmoid((b - delta) / (1.0 - delta));
  }
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace bidbench
