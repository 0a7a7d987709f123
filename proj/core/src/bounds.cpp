#include "fairens/bounds.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "fairens/error.hpp"

namespace fairens {

namespace {

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) comp_ += (sum_ - t) + x;
    else comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void check_square(std::span<const double> weights, const Matrix<double>& t) {
  if (t.rows() != weights.size() || t.cols() != weights.size())
    throw Error(ErrorCode::LengthMismatch, "tandem matrix must be m x m for m weights");
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = i + 1; j < t.cols(); ++j)
      if (t(i, j) != t(j, i)) throw Error(ErrorCode::AsymmetricMatrix, "tandem matrix is not symmetric");
}

double weighted_mean(std::span<const double> weights, std::span<const double> values) {
  if (weights.size() != values.size()) throw Error(ErrorCode::LengthMismatch, "one value per weight required");
  double s = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) s += weights[j] * values[j];
  return s;
}

double quadratic_form(std::span<const double> weights, const Matrix<double>& t) {
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i)
    for (std::size_t j = 0; j < weights.size(); ++j) s += weights[i] * weights[j] * t(i, j);
  return s;
}

void check_delta(double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw Error(ErrorCode::InvalidDelta, "delta must lie in (0,1]");
}

void check_n(std::size_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "sample size must be positive");
}

}  // namespace

double first_order_bound(std::span<const double> weights, std::span<const double> member_drs) {
  return 2.0 * weighted_mean(weights, member_drs);
}

double second_order_bound(std::span<const double> weights, const Matrix<double>& tandem) {
  check_square(weights, tandem);
  return 4.0 * quadratic_form(weights, tandem);
}

std::optional<double> c_tandem_bound(std::span<const double> weights, std::span<const double> member_drs,
                                     const Matrix<double>& tandem) {
  check_square(weights, tandem);
  const double mu = weighted_mean(weights, member_drs);
  if (mu >= 0.5) return std::nullopt;
  const double t = quadratic_form(weights, tandem);
  // T >= mu^2 for consistent inputs, so the denominator is >= (1/2 - mu)^2 > 0.
  return (t - mu * mu) / (t - mu + 0.25);
}

SecondMomentIdentity second_moment_identity(std::span<const double> weights, const Matrix<int>& losses) {
  const std::size_t n = losses.rows(), m = losses.cols();
  if (weights.size() != m) throw Error(ErrorCode::ShapeMismatch, "loss matrix columns must match weights");
  if (n == 0) throw Error(ErrorCode::ShapeMismatch, "loss matrix has no rows");
  for (int v : losses.data())
    if (v != 0 && v != 1) throw Error(ErrorCode::InvalidArgument, "losses must be 0/1");

  CompensatedSum lhs;
  for (std::size_t i = 0; i < n; ++i) {
    double z = 0.0;
    for (std::size_t j = 0; j < m; ++j) z += weights[j] * losses(i, j);
    lhs.add(z * z);
  }
  double rhs = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      std::size_t both = 0;
      for (std::size_t i = 0; i < n; ++i) both += static_cast<std::size_t>(losses(i, a) & losses(i, b));
      rhs += weights[a] * weights[b] * (static_cast<double>(both) / static_cast<double>(n));
    }
  }
  return {lhs.value() / static_cast<double>(n), rhs};
}

double hoeffding_single(std::size_t n, double delta) {
  check_n(n);
  check_delta(delta);
  return std::sqrt(std::log(1.0 / delta) / (2.0 * static_cast<double>(n)));
}

double hoeffding_class(std::size_t n, double delta, std::size_t class_size) {
  check_n(n);
  check_delta(delta);
  if (class_size < 1) throw Error(ErrorCode::InvalidArgument, "hypothesis class must be non-empty");
  return std::sqrt(std::log(static_cast<double>(class_size) / delta) / (2.0 * static_cast<double>(n)));
}

double mcallester_bound(std::size_t n, double delta, double kl) {
  check_n(n);
  check_delta(delta);
  if (!std::isfinite(kl)) throw Error(ErrorCode::InvalidArgument, "KL divergence must be finite");
  if (kl < 0.0) throw Error(ErrorCode::NegativeKL, "KL divergence must be non-negative");
  const double nn = static_cast<double>(n);
  return std::sqrt((kl + std::log(2.0 * std::sqrt(nn) / delta)) / (2.0 * nn));
}

double kl_discrete(std::span<const double> rho, std::span<const double> pi) {
  if (rho.size() != pi.size()) throw Error(ErrorCode::LengthMismatch, "distributions differ in length");
  auto check = [](std::span<const double> p, const char* name) {
    double s = 0.0;
    for (double x : p) {
      if (!(x >= 0.0)) throw Error(ErrorCode::NotADistribution, std::string(name) + " has a negative entry");
      s += x;
    }
    if (std::fabs(s - 1.0) > 1e-9) throw Error(ErrorCode::NotADistribution, std::string(name) + " does not sum to 1");
  };
  check(rho, "rho");
  check(pi, "pi");
  double kl = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (rho[i] == 0.0) continue;
    if (pi[i] == 0.0) throw Error(ErrorCode::DivergentSupport, "rho puts mass where pi has none");
    kl += rho[i] * std::log(rho[i] / pi[i]);
  }
  return std::max(kl, 0.0);
}

Matrix<double> tandem_matrix(const EnsembleProfile& profile) {
  const std::size_t m = profile.size();
  Matrix<double> t(m, m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a; b < m; ++b) {
      const double v = empirical_tandem(profile.members[a], profile.members[b]);
      t(a, b) = v;
      t(b, a) = v;
    }
  }
  return t;
}

std::vector<double> member_drs(const EnsembleProfile& profile) {
  std::vector<double> drs;
  drs.reserve(profile.size());
  for (const auto& m : profile.members) drs.push_back(empirical_dr(m));
  return drs;
}

OracleBoundReport audit_bounds(const EnsembleProfile& profile) {
  if (profile.size() == 0) throw Error(ErrorCode::EmptyProfile, "profile has no members");
  const auto drs = member_drs(profile);
  const auto tandem = tandem_matrix(profile);
  OracleBoundReport r;
  r.ensemble_dr = profile.ensemble_dr();
  r.expected_member_dr = weighted_mean(profile.weights, drs);
  r.expected_tandem = quadratic_form(profile.weights, tandem);
  r.first_order = first_order_bound(profile.weights, drs);
  r.second_order = second_order_bound(profile.weights, tandem);
  r.c_tandem = c_tandem_bound(profile.weights, drs, tandem);
  r.first_order_holds = r.ensemble_dr <= r.first_order;
  r.second_order_holds = r.ensemble_dr <= r.second_order;
  r.c_tandem_holds = !r.c_tandem || r.ensemble_dr <= *r.c_tandem;
  return r;
}

OracleBoundReport audit_bounds(const WeightedEnsemble& e, const EnsembleProfile& profile) {
  if (e.size() != profile.size() || e.weights() != profile.weights)
    throw Error(ErrorCode::InvalidArgument, "profile was not built from this ensemble");
  return audit_bounds(profile);
}

PacBoundReport pac_single(double empirical, std::size_t n, double delta) {
  PacBoundReport r{"hoeffding-single", empirical, hoeffding_single(n, delta), 0.0, n, delta, 1, 0.0};
  r.bound = r.empirical + r.slack;
  return r;
}

PacBoundReport pac_class(double empirical, std::size_t n, double delta, std::size_t class_size) {
  PacBoundReport r{"hoeffding-class", empirical, hoeffding_class(n, delta, class_size), 0.0, n, delta, class_size, 0.0};
  r.bound = r.empirical + r.slack;
  return r;
}

PacBoundReport pac_mcallester(double empirical, std::size_t n, double delta, double kl) {
  PacBoundReport r{"mcallester", empirical, mcallester_bound(n, delta, kl), 0.0, n, delta, 1, kl};
  r.bound = r.empirical + r.slack;
  return r;
}

std::string oracle_report_to_json(const OracleBoundReport& r) {
  nlohmann::ordered_json j = {{"ensemble_dr", r.ensemble_dr},
                              {"expected_member_dr", r.expected_member_dr},
                              {"expected_tandem", r.expected_tandem},
                              {"first_order", r.first_order},
                              {"second_order", r.second_order},
                              {"c_tandem", r.c_tandem ? nlohmann::ordered_json(*r.c_tandem) : nullptr},
                              {"first_order_holds", r.first_order_holds},
                              {"second_order_holds", r.second_order_holds},
                              {"c_tandem_holds", r.c_tandem_holds},
                              {"proxy", r.proxy}};
  return j.dump(2);
}

}  // namespace fairens
