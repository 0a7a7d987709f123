#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairens/ensemble.hpp"
#include "fairens/matrix.hpp"

namespace fairens {

// Oracle bounds on the discriminative risk of a weighted vote, in terms of
// member risks (first order) and pairwise tandem risks (second order).

/// 2 * sum_j w_j dr_j
double first_order_bound(std::span<const double> weights, std::span<const double> member_drs);

/// 4 * sum_ij w_i w_j T_ij
double second_order_bound(std::span<const double> weights, const Matrix<double>& tandem);

/// Chebyshev-Cantelli form (T - mu^2) / (T - mu + 1/4); empty when mu >= 1/2.
std::optional<double> c_tandem_bound(std::span<const double> weights, std::span<const double> member_drs,
                                     const Matrix<double>& tandem);

struct SecondMomentIdentity {
  double lhs = 0.0;  // mean_i (sum_j w_j l_ij)^2
  double rhs = 0.0;  // sum_jj' w_j w_j' mean_i(l_ij l_ij')
};

/// Both sides of the second-moment identity for an n x m binary loss matrix.
SecondMomentIdentity second_moment_identity(std::span<const double> weights, const Matrix<int>& losses);

double hoeffding_single(std::size_t n, double delta);
double hoeffding_class(std::size_t n, double delta, std::size_t class_size);
double mcallester_bound(std::size_t n, double delta, double kl);
double kl_discrete(std::span<const double> rho, std::span<const double> pi);

/// Member-by-member tandem risks; the diagonal holds member risks.
Matrix<double> tandem_matrix(const EnsembleProfile& profile);
std::vector<double> member_drs(const EnsembleProfile& profile);

struct OracleBoundReport {
  double ensemble_dr = 0.0;
  double expected_member_dr = 0.0;  // E_rho[L(f)]
  double expected_tandem = 0.0;     // E_rho^2[L(f, f')]
  double first_order = 0.0;
  double second_order = 0.0;
  std::optional<double> c_tandem;  // empty: inapplicable
  bool first_order_holds = false;
  bool second_order_holds = false;
  bool c_tandem_holds = true;  // vacuously true when inapplicable
  std::string proxy = "empirical";
};

/// Evaluates every oracle bound on the profile's own sample.
OracleBoundReport audit_bounds(const WeightedEnsemble& e, const EnsembleProfile& profile);
OracleBoundReport audit_bounds(const EnsembleProfile& profile);

struct PacBoundReport {
  std::string kind;  // hoeffding-single | hoeffding-class | mcallester
  double empirical = 0.0;
  double slack = 0.0;
  double bound = 0.0;
  std::size_t n = 0;
  double delta = 0.05;
  std::size_t class_size = 1;
  double kl = 0.0;
};

PacBoundReport pac_single(double empirical, std::size_t n, double delta);
PacBoundReport pac_class(double empirical, std::size_t n, double delta, std::size_t class_size);
PacBoundReport pac_mcallester(double empirical, std::size_t n, double delta, double kl);

std::string oracle_report_to_json(const OracleBoundReport& r);

}  // namespace fairens
