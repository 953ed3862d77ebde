#ifndef OCD_PAC_BOUNDS_H_
#define OCD_PAC_BOUNDS_H_

// Sample-size calculators for the alien detection-rate guarantee.
//
// With |S0| = |Sm| = n and
//   n > 1/2 ln(2 / (1 - sqrt(1 - delta))) (1/epsilon)^2 ((2 - alpha)/alpha)^2
// the fitted threshold detects at least 1 - (q + epsilon) of the aliens with
// probability at least 1 - delta. Running with an upper bound alpha' >= alpha
// keeps the guarantee (for an admissible detector) when alpha' replaces alpha
// in the size formula.

#include <cstdint>
#include <optional>

#include "ocd/cdf_mixture.h"

namespace ocd {

struct PacParams {
  double alpha = 0.5;
  std::optional<double> alpha_prime;
  double q = 0.05;
  double epsilon = 0.05;
  double delta = 0.05;

  double eta() const { return q + epsilon; }

  // Throws InvalidArgument on any range violation, including
  // epsilon outside (0, 1 - q) and alpha_prime < alpha.
  void Validate() const;
};

// Right-hand side of the sample-size condition for the given mixture
// fraction (alpha or alpha').
double SampleSizeLowerBound(double delta, double epsilon, double alpha);

// Smallest integer n strictly greater than SampleSizeLowerBound.
std::int64_t RequiredSampleSize(const PacParams& params,
                                bool use_alpha_prime = false);

// Slack epsilon guaranteed by n samples:
//   ((2 - alpha)/alpha) sqrt(ln(2 / (1 - sqrt(1 - delta))) / (2 n)).
// n is real-valued so the formula can be evaluated off the integers.
double AchievedEpsilon(double n, double delta, double alpha);

struct MassartQuery {
  double lambda = 0.0;
  std::int64_t n = 1;
};

// P(sqrt(n) sup|F_n - F| > lambda) <= 2 exp(-2 lambda^2), for every lambda.
struct MassartBound {
  double raw = 0.0;      // 2 exp(-2 lambda^2); exceeds 1 for small lambda
  double clamped = 0.0;  // min(1, raw)
};
MassartBound ComputeMassartBound(const MassartQuery& query);

// Empirical admissibility: F0(g) >= Fm(g) at every point g of the union grid.
struct AdmissibilityReport {
  bool admissible = true;
  double max_violation = 0.0;  // max over grid of (Fm - F0)+
  std::optional<double> worst_point;  // grid point attaining max_violation
};
AdmissibilityReport CheckAdmissibility(const EmpiricalCdf& clean,
                                       const EmpiricalCdf& mixture);

// Same check restricted to grid points strictly above `above`. Shrinking the
// alien CDF estimate's threshold under an overestimated alpha only needs
// admissibility on that upper tail.
AdmissibilityReport CheckAdmissibilityAbove(const EmpiricalCdf& clean,
                                            const EmpiricalCdf& mixture,
                                            std::optional<double> above);

}  // namespace ocd

#endif  // OCD_PAC_BOUNDS_H_
