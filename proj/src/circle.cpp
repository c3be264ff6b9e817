#include "multipath/circle.hpp"

#include "multipath/error.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>

namespace multipath {

void validate(const CircleParams& p) {
  if (p.N < 3) throw InputError("circle needs N >= 3");
  if (p.r < 2) throw InputError("circle needs r >= 2");
  if (p.r >= p.N) throw InputError("circle needs r < N");
  for (double v : {p.C, p.lambda, p.mu, p.kappa, p.eta}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError("circle parameters must be positive and finite");
  }
}

Network circle_network(const CircleParams& p) {
  validate(p);
  std::vector<Resource> resources;
  std::vector<User> users;
  const Rational capacity = rational_from_double(p.C);
  for (int j = 0; j < p.N; ++j) resources.push_back({std::to_string(j + 1), capacity});
  for (int i = 0; i < p.N; ++i) {
    User u{std::to_string(i + 1), {}};
    for (int k = 0; k < p.r; ++k) u.resources.push_back(static_cast<std::size_t>((i + k) % p.N));
    users.push_back(std::move(u));
  }
  return Network(std::move(resources), std::move(users));
}

std::vector<ResourceMask> circle_arcs(int N, int r) {
  if (N < 3 || r < 2 || r >= N) throw InputError("circle needs N >= 3 and 2 <= r < N");
  if (N > static_cast<int>(kMaskBits)) throw SizeError("arcs as masks need N <= 64", kMaskBits);
  std::vector<ResourceMask> out;
  for (int len = r; len < N; ++len) {
    for (int i = 0; i < N; ++i) {
      ResourceMask s = 0;
      for (int k = 0; k < len; ++k) s |= ResourceMask{1} << ((i + k) % N);
      out.push_back(s);
    }
  }
  out.push_back(N == static_cast<int>(kMaskBits) ? ~ResourceMask{0} : (ResourceMask{1} << N) - 1);
  std::sort(out.begin(), out.end(), canonical_less);
  return out;
}

Rational circle_min_rate(const CircleParams& p, const Counts& n) {
  validate(p);
  if (n.size() != static_cast<std::size_t>(p.N)) throw InputError("circle_min_rate needs N counts");
  const Rational C = rational_from_double(p.C);
  Rational total = 0;
  for (const auto& v : n) {
    if (v < 0) throw InputError("counts must be nonnegative");
    total += v;
  }
  if (total == 0) throw InputError("circle_min_rate requires some positive count");
  Rational best = C * p.N / total;
  for (int i = 0; i < p.N; ++i) {
    Rational sum = 0;
    for (int k = 1; k <= p.N - p.r; ++k) {
      sum += n[static_cast<std::size_t>((i + k - 1) % p.N)];
      if (sum == 0) continue;
      Rational rate = C * (k + p.r - 1) / sum;
      if (rate < best) best = std::move(rate);
    }
  }
  return best;
}

CircleEquilibrium circle_equilibrium(const CircleParams& p) {
  validate(p);
  const Rational C = rational_from_double(p.C);
  const Rational rho = rational_from_double(p.lambda) / rational_from_double(p.mu);
  if (rho >= C) throw StabilityError("circle is unstable: rho >= C");
  CircleEquilibrium eq;
  eq.m_hat = rational_from_double(p.kappa) / rational_from_double(p.eta);
  eq.x_hat = (C - rho) / eq.m_hat;
  eq.n_hat = rho * eq.m_hat / (C - rho);
  return eq;
}

namespace {

void require_stable(const CircleParams& p) {
  validate(p);
  if (!(p.rho() < p.C)) throw StabilityError("circle is unstable: rho >= C");
}

}  // namespace

DiffusionScalars diffusion_scalars(const CircleParams& p) {
  require_stable(p);
  const auto cov = covariance_closed(p);
  const double slack = p.C - p.rho();
  DiffusionScalars s;
  s.q = p.mu * p.rho() * slack / (p.N * p.C * p.streaming_load());
  s.d = p.mu * slack * slack / (p.C * p.streaming_load());
  s.V = cov.V;
  s.Cov = cov.Cov;
  s.Cprime = p.N * cov.Cov;
  s.Vprime = p.streaming_load() * p.C / slack;
  return s;
}

DiffusionModel drift_matrix(const CircleParams& p) {
  DiffusionModel model;
  model.scalars = diffusion_scalars(p);
  const int N = p.N;
  const double q = model.scalars.q;
  const double diag = p.mu * (p.C - p.rho()) / p.streaming_load() * (1.0 - p.rho() / (N * p.C));
  model.P = Eigen::MatrixXd::Zero(2 * N, 2 * N);
  model.P.topLeftCorner(N, N).setConstant(-q);
  model.P.topLeftCorner(N, N).diagonal().setConstant(diag);
  model.P.topRightCorner(N, N).setConstant(-q);
  model.P.bottomRightCorner(N, N).diagonal().setConstant(p.eta);
  model.D = Eigen::MatrixXd::Zero(2 * N, 2 * N);
  model.D.diagonal().head(N).setConstant(std::sqrt(2.0 * p.lambda));
  model.D.diagonal().tail(N).setConstant(std::sqrt(2.0 * p.kappa));
  return model;
}

Eigen::MatrixXd expm_closed(const CircleParams& p, double t) {
  if (!(t >= 0.0)) throw InputError("time must be nonnegative");
  const auto s = diffusion_scalars(p);
  const int N = p.N;
  const double decay = std::exp(-s.d * t);
  const double mix = std::exp(-N * s.q * t);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * N, 2 * N);
  out.topLeftCorner(N, N).setConstant(decay * (1.0 - mix) / N);
  out.topLeftCorner(N, N).diagonal().setConstant(decay * (1.0 + (N - 1) * mix) / N);
  out.bottomRightCorner(N, N).diagonal().setConstant(std::exp(-p.eta * t));
  // B (e^{-eta t} - e^{-d t}) / (eta - d), B = -q everywhere.
  double factor;
  if (std::abs(p.eta - s.d) < 1e-9 * std::max(p.eta, s.d)) {
    factor = -t * std::exp(-p.eta * t);
  } else {
    factor = (std::exp(-p.eta * t) - decay) / (p.eta - s.d);
  }
  out.topRightCorner(N, N).setConstant(-s.q * factor);
  return out;
}

Eigen::MatrixXd expm_numeric(const Eigen::MatrixXd& P, double t) {
  if (!(t >= 0.0)) throw InputError("time must be nonnegative");
  return Eigen::MatrixXd((-t * P).exp());
}

CircleCovariance covariance_closed(const CircleParams& p) {
  require_stable(p);
  const double N = p.N, C = p.C, rho = p.rho(), load = p.streaming_load();
  const double slack = C - rho;
  const double mix = p.mu * slack * slack + C * p.kappa;
  CircleCovariance c;
  c.cov_nn = load / N * (rho * rho / (slack * slack) + p.lambda * rho / mix);
  c.var_n = load * rho / slack + c.cov_nn;
  c.cov_nm = load / N * p.lambda * slack / mix;
  c.var_m = load;
  c.cov_mm = 0.0;
  c.V = c.var_n + c.var_m + 2.0 * c.cov_nm;
  c.Cov = c.cov_nn + 2.0 * c.cov_nm;
  return c;
}

Eigen::MatrixXd covariance_matrix_closed(const CircleParams& p) {
  const auto c = covariance_closed(p);
  const int N = p.N;
  Eigen::MatrixXd S(2 * N, 2 * N);
  S.topLeftCorner(N, N).setConstant(c.cov_nn);
  S.topLeftCorner(N, N).diagonal().setConstant(c.var_n);
  S.topRightCorner(N, N).setConstant(c.cov_nm);
  S.bottomLeftCorner(N, N).setConstant(c.cov_nm);
  S.bottomRightCorner(N, N).setConstant(c.cov_mm);
  S.bottomRightCorner(N, N).diagonal().setConstant(c.var_m);
  return S;
}

Eigen::MatrixXd covariance_numeric(const Eigen::MatrixXd& P, const Eigen::MatrixXd& D) {
  if (P.rows() != P.cols() || D.rows() != P.rows() || D.cols() != P.cols())
    throw InputError("P and D must be square of the same size");
  const Eigen::Index n = P.rows();
  if (n == 0) return Eigen::MatrixXd(0, 0);

  Eigen::ComplexSchur<Eigen::MatrixXd> schur(P);
  const Eigen::MatrixXcd& T = schur.matrixT();
  const Eigen::MatrixXcd& U = schur.matrixU();
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!(T(k, k).real() > 0.0)) throw InputError("P has an eigenvalue with nonpositive real part");
  }
  // With S = U Y U^*: T Y + Y T^* = U^* D D^T U. Columns from the last one.
  const Eigen::MatrixXcd F = U.adjoint() * (D * D.transpose()).cast<std::complex<double>>() * U;
  Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    Eigen::VectorXcd rhs = F.col(j);
    for (Eigen::Index k = j + 1; k < n; ++k) rhs -= std::conj(T(j, k)) * Y.col(k);
    Eigen::MatrixXcd lhs = T;
    lhs.diagonal().array() += std::conj(T(j, j));
    Y.col(j) = lhs.triangularView<Eigen::Upper>().solve(rhs);
  }
  Eigen::MatrixXd S = (U * Y * U.adjoint()).real();
  return (S + S.transpose()) / 2.0;
}

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
using Gauss = boost::math::quadrature::gauss<double, 7>;

struct PanelEstimate {
  Eigen::MatrixXd kronrod;
  double error;
};

PanelEstimate gk15(const std::function<Eigen::MatrixXd(double)>& f, double a, double b) {
  const double half = (b - a) / 2.0, mid = (a + b) / 2.0;
  const auto& xk = Kronrod::abscissa();
  const auto& wk = Kronrod::weights();
  const auto& wg = Gauss::weights();
  const Eigen::MatrixXd f0 = f(mid);
  Eigen::MatrixXd K = wk[0] * f0;
  Eigen::MatrixXd G = wg[0] * f0;
  for (std::size_t k = 1; k < xk.size(); ++k) {
    const Eigen::MatrixXd pair = f(mid - half * xk[k]) + f(mid + half * xk[k]);
    K += wk[k] * pair;
    if (k % 2 == 0) G += wg[k / 2] * pair;  // Gauss nodes sit at even Kronrod positions
  }
  K *= half;
  G *= half;
  return {K, (K - G).cwiseAbs().maxCoeff()};
}

Eigen::MatrixXd adaptive(const std::function<Eigen::MatrixXd(double)>& f, double a, double b, double tol,
                         int depth) {
  auto est = gk15(f, a, b);
  if (est.error <= tol) return est.kronrod;
  if (depth >= 40) throw ConvergenceError("quadrature panel did not converge", est.error);
  const double mid = (a + b) / 2.0;
  return adaptive(f, a, mid, tol / 2.0, depth + 1) + adaptive(f, mid, b, tol / 2.0, depth + 1);
}

}  // namespace

Eigen::MatrixXd covariance_quadrature(const Eigen::MatrixXd& P, const Eigen::MatrixXd& D, double tol) {
  if (P.rows() != P.cols() || D.rows() != P.rows() || D.cols() != P.cols())
    throw InputError("P and D must be square of the same size");
  if (!(tol > 0.0)) throw InputError("tolerance must be positive");
  const Eigen::Index n = P.rows();
  if (n == 0) return Eigen::MatrixXd(0, 0);
  const Eigen::VectorXcd eig = P.eigenvalues();
  double slowest = HUGE_VAL, fastest = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!(eig[k].real() > 0.0)) throw InputError("P has an eigenvalue with nonpositive real part");
    slowest = std::min(slowest, eig[k].real());
    fastest = std::max(fastest, std::abs(eig[k]));
  }
  const Eigen::MatrixXd Q = D * D.transpose();
  const double scale = std::max(Q.cwiseAbs().maxCoeff(), 1e-300);
  auto integrand = [&](double s) {
    const Eigen::MatrixXd E = expm_numeric(P, s);
    return Eigen::MatrixXd(E * Q * E.transpose());
  };

  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(n, n);
  double a = 0.0, width = 0.25 / fastest;
  // The integrand decays like e^{-2 slowest s}; stop well past machine precision.
  const double end = 40.0 / slowest;
  while (a < end) {
    const double b = std::min(a + width, end);
    total += adaptive(integrand, a, b, tol * scale / (2.0 * slowest), 0);
    a = b;
    width *= 2.0;
  }
  return (total + total.transpose()) / 2.0;
}

double log_normal_survival(double z) {
  if (z < 5.0) return std::log(0.5 * std::erfc(z / std::sqrt(2.0)));
  // Mills ratio by its continued fraction, evaluated backwards.
  double t = z;
  for (int k = 200; k >= 1; --k) t = z + k / t;
  constexpr double log_sqrt_2pi = 0.91893853320467274178;
  return -z * z / 2.0 - log_sqrt_2pi - std::log(t);
}

std::vector<CongestionTerm> congestion_probabilities(const CircleParams& p, double epsilon) {
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  const auto s = diffusion_scalars(p);
  const double mean = p.streaming_load() * p.C / (p.C - p.rho());  // n_hat + m_hat
  std::vector<CongestionTerm> out;
  auto term = [&](int k, double capacity, double weight) {
    CongestionTerm t;
    t.k = k;
    t.z = (capacity / epsilon - k * mean) / std::sqrt(k * s.V + k * (k - 1.0) * s.Cov);
    t.log_probability = std::log(weight) + log_normal_survival(t.z);
    t.probability = std::exp(t.log_probability);
    out.push_back(t);
  };
  for (int k = 1; k <= p.N - p.r; ++k) term(k, (k + p.r - 1) * p.C, p.N);
  term(p.N, p.N * p.C, 1.0);
  return out;
}

double dominating_term(int k, int r, double V, double Cov) {
  return (k + r - 1) / std::sqrt(k * k * Cov + k * (V - Cov));
}

std::optional<double> dominating_optimum(int r, double V, double Cov) {
  const double denom = V - (2.0 * (r - 1) + 1.0) * Cov;
  if (!(denom > 0.0)) return std::nullopt;
  return (r - 1) * (V - Cov) / denom;
}

ClusterSizeEstimate most_likely_cluster_size(const CircleParams& p, double epsilon) {
  const auto terms = congestion_probabilities(p, epsilon);
  ClusterSizeEstimate est;
  double best = -HUGE_VAL;
  for (const auto& t : terms) {
    if (t.k > p.N - p.r) continue;
    if (t.log_probability > best) {
      best = t.log_probability;
      est.k_argmax = t.k;
    }
  }
  const auto s = diffusion_scalars(p);
  est.k0 = dominating_optimum(p.r, s.V, s.Cov);
  return est;
}

}  // namespace multipath
