#pragma once

#include "multipath/network.hpp"
#include "multipath/rational.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace multipath {

/// Symmetric circle: N resources of capacity C, user i uses the r consecutive
/// resources i, ..., i+r-1 (mod N); identical traffic for every user.
struct CircleParams {
  int N = 4;
  int r = 2;
  double C = 1.0;
  double lambda = 0.5;
  double mu = 1.0;
  double kappa = 1.0;
  double eta = 1.0;

  double rho() const { return lambda / mu; }
  double streaming_load() const { return kappa / eta; }
};

/// Throws InputError on N < 3, r < 2, r >= N or nonpositive parameters.
void validate(const CircleParams& p);

/// Resource and user ids are "1".."N".
Network circle_network(const CircleParams& p);

/// Strongly connected sets of the circle without subset enumeration: every arc
/// of length r..N-1 plus the full set, in canonical order. Requires N <= 64.
std::vector<ResourceMask> circle_arcs(int N, int r);

/// Minimal rate over arcs, O(N^2). Requires some positive count.
Rational circle_min_rate(const CircleParams& p, const Counts& n);

struct CircleEquilibrium {
  Rational n_hat, m_hat, x_hat;
};

/// Exact symmetric equilibrium from the (exactly converted) parameters.
/// Throws StabilityError when rho >= C.
CircleEquilibrium circle_equilibrium(const CircleParams& p);

struct DiffusionScalars {
  double q = 0, d = 0;
  double V = 0;        // Var(n_i + m_i)
  double Cov = 0;      // Cov(n_i + m_i, n_j + m_j), i != j
  double Cprime = 0;   // N * Cov
  double Vprime = 0;   // (kappa/eta) C / (C - rho)
};

DiffusionScalars diffusion_scalars(const CircleParams& p);

struct DiffusionModel {
  Eigen::MatrixXd P;  // 2N x 2N, n block first
  Eigen::MatrixXd D;  // diagonal
  DiffusionScalars scalars;
};

DiffusionModel drift_matrix(const CircleParams& p);

/// e^{-Pt} from the closed form. Requires t >= 0.
Eigen::MatrixXd expm_closed(const CircleParams& p, double t);
/// e^{-Pt} by scaling and squaring.
Eigen::MatrixXd expm_numeric(const Eigen::MatrixXd& P, double t);

struct CircleCovariance {
  double cov_nn = 0;  // Cov(n_i, n_j), i != j
  double var_n = 0;
  double cov_nm = 0;  // Cov(n_i, m_j), any i, j
  double var_m = 0;
  double cov_mm = 0;  // i != j
  double V = 0;
  double Cov = 0;
};

CircleCovariance covariance_closed(const CircleParams& p);
/// Closed form assembled into the full 2N x 2N matrix.
Eigen::MatrixXd covariance_matrix_closed(const CircleParams& p);

/// Stationary covariance: solves P S + S P^T = D D^T (Bartels-Stewart on the
/// complex Schur form). P must have eigenvalues with positive real part.
Eigen::MatrixXd covariance_numeric(const Eigen::MatrixXd& P, const Eigen::MatrixXd& D);

/// The same matrix as the integral of e^{-Ps} D D^T e^{-P^T s} over [0, inf),
/// by adaptive Gauss-Kronrod on geometrically growing panels. Throws
/// ConvergenceError if a panel cannot reach `tol`.
Eigen::MatrixXd covariance_quadrature(const Eigen::MatrixXd& P, const Eigen::MatrixXd& D, double tol = 1e-12);

/// log(1 - Phi(z)), accurate far into the upper tail.
double log_normal_survival(double z);

struct CongestionTerm {
  int k = 0;
  double z = 0;          // argument of Phi
  double log_probability = 0;
  double probability = 0;
};

/// Normal-approximation congestion probabilities for k = 1..N-r and k = N,
/// with arc capacity (k+r-1)C and total capacity NC.
std::vector<CongestionTerm> congestion_probabilities(const CircleParams& p, double epsilon);

/// (k+r-1) / sqrt(k^2 Cov + k (V - Cov)): the small-epsilon growth rate of the
/// k-arc normal argument. Smaller means more likely to congest.
double dominating_term(int k, int r, double V, double Cov);
/// Continuous minimizer of dominating_term over k, when the denominator
/// V - (2(r-1)+1) Cov is positive.
std::optional<double> dominating_optimum(int r, double V, double Cov);

struct ClusterSizeEstimate {
  int k_argmax = 0;       // over k = 1..N-r
  std::optional<double> k0;  // continuous optimum of the dominating term
};

ClusterSizeEstimate most_likely_cluster_size(const CircleParams& p, double epsilon);

}  // namespace multipath
