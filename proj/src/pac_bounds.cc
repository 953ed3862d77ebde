#include "ocd/pac_bounds.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ocd/status.h"

namespace ocd {
namespace {

void CheckDelta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InvalidArgumentError(
        fmt::format("delta must lie in (0, 1), got {}", delta));
  }
}

void CheckAlpha(double alpha, const char* name) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw InvalidArgumentError(
        fmt::format("{} must lie in (0, 1], got {}", name, alpha));
  }
}

// ln(2 / (1 - sqrt(1 - delta))). 1 - sqrt(1 - d) is evaluated as
// d / (1 + sqrt(1 - d)) to avoid cancellation for small delta.
double LogTerm(double delta) {
  return std::log(2.0 * (1.0 + std::sqrt(1.0 - delta)) / delta);
}

}  // namespace

void PacParams::Validate() const {
  CheckAlpha(alpha, "alpha");
  if (alpha_prime) {
    CheckAlpha(*alpha_prime, "alpha'");
    if (*alpha_prime < alpha) {
      throw InvalidArgumentError(fmt::format(
          "alpha' ({}) must be an upper bound on alpha ({})", *alpha_prime,
          alpha));
    }
  }
  if (!(q > 0.0 && q < 1.0)) {
    throw InvalidArgumentError(fmt::format("q must lie in (0, 1), got {}", q));
  }
  if (!(epsilon > 0.0 && epsilon < 1.0 - q)) {
    throw InvalidArgumentError(fmt::format(
        "epsilon must lie in (0, 1 - q) = (0, {}), got {}", 1.0 - q, epsilon));
  }
  CheckDelta(delta);
}

double SampleSizeLowerBound(double delta, double epsilon, double alpha) {
  CheckDelta(delta);
  CheckAlpha(alpha, "alpha");
  if (!(epsilon > 0.0)) {
    throw InvalidArgumentError(
        fmt::format("epsilon must be positive, got {}", epsilon));
  }
  const double ratio = (2.0 - alpha) / alpha;
  return 0.5 * LogTerm(delta) * ratio * ratio / (epsilon * epsilon);
}

std::int64_t RequiredSampleSize(const PacParams& params,
                                bool use_alpha_prime) {
  params.Validate();
  if (use_alpha_prime && !params.alpha_prime) {
    throw InvalidArgumentError("alpha' requested but not set");
  }
  const double alpha = use_alpha_prime ? *params.alpha_prime : params.alpha;
  const double bound = SampleSizeLowerBound(params.delta, params.epsilon, alpha);
  // floor(b) + 1 is the least integer strictly above b, including when b is
  // itself an integer.
  return static_cast<std::int64_t>(std::floor(bound)) + 1;
}

double AchievedEpsilon(double n, double delta, double alpha) {
  if (!(n >= 1.0)) {
    throw InvalidArgumentError(fmt::format("n must be >= 1, got {}", n));
  }
  CheckDelta(delta);
  CheckAlpha(alpha, "alpha");
  return (2.0 - alpha) / alpha * std::sqrt(LogTerm(delta) / (2.0 * n));
}

MassartBound ComputeMassartBound(const MassartQuery& query) {
  if (!(query.lambda >= 0.0)) {
    throw InvalidArgumentError(
        fmt::format("lambda must be >= 0, got {}", query.lambda));
  }
  if (query.n < 1) {
    throw InvalidArgumentError(fmt::format("n must be >= 1, got {}", query.n));
  }
  MassartBound bound;
  bound.raw = 2.0 * std::exp(-2.0 * query.lambda * query.lambda);
  bound.clamped = std::min(1.0, bound.raw);
  return bound;
}

AdmissibilityReport CheckAdmissibilityAbove(const EmpiricalCdf& clean,
                                            const EmpiricalCdf& mixture,
                                            std::optional<double> above) {
  AdmissibilityReport report;
  for (const double g : UnionGrid(clean, mixture)) {
    if (above && g <= *above) continue;
    // Compare exact counts: Fm(g) > F0(g) <=> cm * n0 > c0 * nm.
    const auto c0 = static_cast<long double>(clean.CountAtOrBelow(g));
    const auto cm = static_cast<long double>(mixture.CountAtOrBelow(g));
    const auto n0 = static_cast<long double>(clean.sample_size());
    const auto nm = static_cast<long double>(mixture.sample_size());
    if (cm * n0 > c0 * nm) {
      report.admissible = false;
      const double violation = mixture(g) - clean(g);
      if (!report.worst_point || violation > report.max_violation) {
        report.max_violation = violation;
        report.worst_point = g;
      }
    }
  }
  return report;
}

AdmissibilityReport CheckAdmissibility(const EmpiricalCdf& clean,
                                       const EmpiricalCdf& mixture) {
  return CheckAdmissibilityAbove(clean, mixture, std::nullopt);
}

}  // namespace ocd
