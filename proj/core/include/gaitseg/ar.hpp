#ifndef GAITSEG_AR_HPP
#define GAITSEG_AR_HPP

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "gaitseg/rng.hpp"
#include "gaitseg/types.hpp"

namespace gaitseg {

/// One AR regime: x_t = sum_j coeffs[j-1] * x_{t-j} + e_t, e_t ~ N(0, noise_var).
struct ArState {
  std::vector<double> coeffs;
  double noise_var = 1.0;

  int order() const { return static_cast<int>(coeffs.size()); }
  void validate() const;
};

enum class PriorKind { Conjugate, SparseARD };

/// Prior over (A, sigma^2). Conjugate: A | s2 ~ N(mu0, s2 * diag(coeff_var)),
/// s2 ~ InvGamma(nu, theta). SparseARD: A_j ~ N(0, coeff_var[j]) independent
/// of s2 ~ InvGamma(nu, theta).
struct ArPrior {
  PriorKind kind = PriorKind::Conjugate;
  int order = 1;
  Eigen::VectorXd mu0;        // conjugate only; zero when empty
  Eigen::VectorXd coeff_var;  // per-coefficient variance scale
  double nu = 2.0;
  double theta = 1.0;
  int gibbs_sweeps = 5;  // SparseARD sweeps per draw

  static ArPrior conjugate(int order, double coeff_var = 0.25, double nu = 2.0,
                           double theta = 1.0);
  static ArPrior sparse_ard(int order, double coeff_var = 0.25, double nu = 2.0,
                            double theta = 1.0);
  void validate() const;
};

/// Lagged design for a window: rows (x_{t-1},...,x_{t-r}) with target x_t for
/// t = r+1..T (0-based: t = r..T-1). A zero window yields zero rows.
struct ArDesign {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};
ArDesign make_design(std::span<const double> window, int order);

/// Conditional log-likelihood sum_{t>r} log N(x_t | A . lags, noise_var),
/// conditioning on the first r points.
double ar_loglik(std::span<const double> window, const ArState& state);

/// Sufficient statistics of a regression data set.
struct RegressionStats {
  Eigen::MatrixXd xtx;
  Eigen::VectorXd xty;
  double yty = 0.0;
  long n = 0;

  explicit RegressionStats(int order)
      : xtx(Eigen::MatrixXd::Zero(order, order)),
        xty(Eigen::VectorXd::Zero(order)),
        yty(0.0),
        n(0) {}
  void add_row(const Eigen::VectorXd& row, double target);
  void add(const ArDesign& d);
};

/// Closed-form Normal-inverse-Gamma posterior of the conjugate model.
struct NigPosterior {
  Eigen::VectorXd mean;       // posterior mean of A
  Eigen::MatrixXd precision;  // V_n^{-1}: posterior covariance of A is s2 * precision^{-1}
  double nu_n = 0.0;
  double theta_n = 0.0;

  Eigen::VectorXd coeff_mean() const { return mean; }
  double noise_var_mean() const;  // E[s2], requires nu_n > 1
  ArState sample(Rng& rng) const;
  /// Log marginal likelihood of the data folded into this posterior,
  /// relative to the prior it came from.
  double log_marginal = 0.0;
};

NigPosterior conjugate_posterior(const RegressionStats& stats,
                                 const ArPrior& prior);

/// Exact draw from the conjugate posterior given a data window.
ArState sample_posterior_conjugate(std::span<const double> window,
                                   const ArPrior& prior, Rng& rng);
ArState sample_posterior_conjugate(const RegressionStats& stats,
                                   const ArPrior& prior, Rng& rng);

/// Gibbs sweeps alternating A | s2 (exact multivariate normal) and
/// s2 | A ~ InvGamma(nu + n/2, theta + 0.5*sum resid^2). `init` seeds the
/// chain; pass the previous draw for a persistent chain.
ArState sample_posterior_sparse(std::span<const double> window,
                                const ArPrior& prior, Rng& rng,
                                const ArState* init = nullptr);
ArState sample_posterior_sparse(const RegressionStats& stats,
                                const ArPrior& prior, Rng& rng,
                                const ArState* init = nullptr);

/// Dispatch on prior.kind.
ArState sample_posterior(const RegressionStats& stats, const ArPrior& prior,
                         Rng& rng, const ArState* init = nullptr);

/// Draw from the prior itself (empty-data posterior).
ArState sample_prior(const ArPrior& prior, Rng& rng);

/// Log predictive density of a single observation under the conjugate
/// prior/posterior (Student-t).
double log_predictive(const NigPosterior& post, const Eigen::VectorXd& lags,
                      double target);
double log_prior_predictive(const ArPrior& prior, const Eigen::VectorXd& lags,
                            double target);

/// S(f) = noise_var / |1 - sum_j A_j exp(-i 2 pi f j / rate)|^2 at each
/// frequency in Hz; f must lie in [0, rate/2].
std::vector<double> ar_psd(const ArState& state,
                           const std::vector<double>& freqs_hz, double rate);

/// Spectral radius of the AR companion matrix.
double companion_spectral_radius(const ArState& state);
bool is_stationary(const ArState& state);

/// Simulate T values after discarding burn_in, zero-initialized lag buffer,
/// i.i.d. N(0, noise_var) innovations. Throws NonStationary unless forced.
std::vector<double> ar_simulate(const ArState& state, std::size_t T, Rng& rng,
                                std::size_t burn_in = 0, bool force = false);

/// Ordinary least squares fit (diagnostic; used by tests).
Eigen::VectorXd ols_coeffs(std::span<const double> window, int order);

}  // namespace gaitseg

#endif
