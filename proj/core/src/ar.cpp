#include "gaitseg/ar.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <numbers>

namespace gaitseg {

void ArState::validate() const {
  if (coeffs.empty()) throw Error(ErrorCode::ConfigInvalid, "AR order must be >= 1");
  if (!(noise_var > 0.0) || !std::isfinite(noise_var))
    throw Error(ErrorCode::ConfigInvalid, "noise_var must be positive");
  for (double c : coeffs)
    if (!std::isfinite(c))
      throw Error(ErrorCode::ConfigInvalid, "non-finite AR coefficient");
}

ArPrior ArPrior::conjugate(int order, double coeff_var, double nu, double theta) {
  ArPrior p;
  p.kind = PriorKind::Conjugate;
  p.order = order;
  p.mu0 = Eigen::VectorXd::Zero(order);
  p.coeff_var = Eigen::VectorXd::Constant(order, coeff_var);
  p.nu = nu;
  p.theta = theta;
  return p;
}

ArPrior ArPrior::sparse_ard(int order, double coeff_var, double nu, double theta) {
  ArPrior p = conjugate(order, coeff_var, nu, theta);
  p.kind = PriorKind::SparseARD;
  return p;
}

void ArPrior::validate() const {
  if (order < 1) throw Error(ErrorCode::ConfigInvalid, "order must be >= 1");
  if (!(nu > 0) || !(theta > 0))
    throw Error(ErrorCode::ConfigInvalid, "nu and theta must be positive");
  if (coeff_var.size() != order)
    throw Error(ErrorCode::DimensionMismatch, "coeff_var length != order");
  for (long i = 0; i < coeff_var.size(); ++i)
    if (!(coeff_var[i] > 0))
      throw Error(ErrorCode::ConfigInvalid, "coeff_var entries must be positive");
}

ArDesign make_design(std::span<const double> window, int order) {
  const long T = static_cast<long>(window.size());
  const long rows = std::max<long>(0, T - order);
  ArDesign d;
  d.X.resize(rows, order);
  d.y.resize(rows);
  for (long t = order; t < T; ++t) {
    for (int j = 0; j < order; ++j) d.X(t - order, j) = window[t - 1 - j];
    d.y[t - order] = window[t];
  }
  return d;
}

double ar_loglik(std::span<const double> window, const ArState& state) {
  state.validate();
  const int r = state.order();
  if (static_cast<long>(window.size()) <= r)
    throw Error(ErrorCode::WindowTooShort, "window must be longer than the order");
  const double log_norm =
      -0.5 * std::log(2.0 * std::numbers::pi * state.noise_var);
  double ll = 0.0;
  for (std::size_t t = static_cast<std::size_t>(r); t < window.size(); ++t) {
    double pred = 0.0;
    for (int j = 0; j < r; ++j) pred += state.coeffs[j] * window[t - 1 - j];
    const double res = window[t] - pred;
    ll += log_norm - 0.5 * res * res / state.noise_var;
  }
  return ll;
}

void RegressionStats::add_row(const Eigen::VectorXd& row, double target) {
  xtx.selfadjointView<Eigen::Lower>().rankUpdate(row);
  xty.noalias() += row * target;
  yty += target * target;
  ++n;
}

void RegressionStats::add(const ArDesign& d) {
  if (d.X.rows() == 0) return;
  xtx.selfadjointView<Eigen::Lower>().rankUpdate(d.X.transpose());
  xty.noalias() += d.X.transpose() * d.y;
  yty += d.y.squaredNorm();
  n += d.X.rows();
}

double NigPosterior::noise_var_mean() const {
  if (nu_n <= 1.0)
    throw Error(ErrorCode::ConfigInvalid, "noise_var mean undefined for nu_n <= 1");
  return theta_n / (nu_n - 1.0);
}

NigPosterior conjugate_posterior(const RegressionStats& stats,
                                 const ArPrior& prior) {
  prior.validate();
  const int r = prior.order;
  Eigen::VectorXd prior_prec = prior.coeff_var.cwiseInverse();
  Eigen::VectorXd mu0 =
      prior.mu0.size() == r ? prior.mu0 : Eigen::VectorXd::Zero(r);

  NigPosterior post;
  post.precision = Eigen::MatrixXd(stats.xtx.selfadjointView<Eigen::Lower>());
  post.precision.diagonal() += prior_prec;
  Eigen::LLT<Eigen::MatrixXd> llt(post.precision);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::StageFailed, "conjugate posterior not SPD");
  Eigen::VectorXd b = stats.xty + prior_prec.asDiagonal() * mu0;
  post.mean = llt.solve(b);
  post.nu_n = prior.nu + 0.5 * static_cast<double>(stats.n);
  double quad = stats.yty + mu0.dot(prior_prec.asDiagonal() * mu0) -
                post.mean.dot(post.precision.selfadjointView<Eigen::Lower>() * post.mean);
  post.theta_n = std::max(prior.theta + 0.5 * quad, 1e-300);

  // log marginal likelihood of the folded-in rows
  double logdet_post = 0.0;
  for (int i = 0; i < r; ++i) logdet_post += 2.0 * std::log(llt.matrixL()(i, i));
  double logdet_prior = 0.0;
  for (int i = 0; i < r; ++i) logdet_prior += std::log(prior_prec[i]);
  post.log_marginal =
      -0.5 * static_cast<double>(stats.n) * std::log(2.0 * std::numbers::pi) +
      0.5 * (logdet_prior - logdet_post) + prior.nu * std::log(prior.theta) -
      post.nu_n * std::log(post.theta_n) + std::lgamma(post.nu_n) -
      std::lgamma(prior.nu);
  return post;
}

ArState NigPosterior::sample(Rng& rng) const {
  const int r = static_cast<int>(mean.size());
  ArState s;
  s.noise_var = rng.inv_gamma(nu_n, theta_n);
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  Eigen::VectorXd z(r);
  for (int i = 0; i < r; ++i) z[i] = rng.normal();
  // A = mean + sigma * L^{-T} z
  Eigen::VectorXd dev =
      llt.matrixU().solve(z) * std::sqrt(s.noise_var);
  Eigen::VectorXd a = mean + dev;
  s.coeffs.assign(a.data(), a.data() + r);
  return s;
}

ArState sample_posterior_conjugate(const RegressionStats& stats,
                                   const ArPrior& prior, Rng& rng) {
  return conjugate_posterior(stats, prior).sample(rng);
}

ArState sample_posterior_conjugate(std::span<const double> window,
                                   const ArPrior& prior, Rng& rng) {
  if (static_cast<long>(window.size()) < prior.order)
    throw Error(ErrorCode::WindowTooShort, "window shorter than the order");
  RegressionStats stats(prior.order);
  stats.add(make_design(window, prior.order));
  return sample_posterior_conjugate(stats, prior, rng);
}

ArState sample_posterior_sparse(const RegressionStats& stats,
                                const ArPrior& prior, Rng& rng,
                                const ArState* init) {
  prior.validate();
  const int r = prior.order;
  ArState s;
  if (init && init->order() == r) {
    s = *init;
  } else {
    s = sample_prior(prior, rng);
  }

  Eigen::MatrixXd xtx(stats.xtx.selfadjointView<Eigen::Lower>());
  Eigen::VectorXd prior_prec = prior.coeff_var.cwiseInverse();

  for (int sweep = 0; sweep < std::max(1, prior.gibbs_sweeps); ++sweep) {
    // A | s2: ridge-form Gaussian conditional
    Eigen::MatrixXd prec = xtx / s.noise_var;
    prec.diagonal() += prior_prec;
    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorCode::StageFailed, "sparse conditional not SPD");
    Eigen::VectorXd mean = llt.solve(stats.xty / s.noise_var);
    Eigen::VectorXd z(r);
    for (int i = 0; i < r; ++i) z[i] = rng.normal();
    Eigen::VectorXd a = mean + llt.matrixU().solve(z);
    s.coeffs.assign(a.data(), a.data() + r);

    // s2 | A
    const double rss =
        stats.yty - 2.0 * a.dot(stats.xty) + a.dot(xtx * a);
    s.noise_var = rng.inv_gamma(prior.nu + 0.5 * static_cast<double>(stats.n),
                                prior.theta + 0.5 * std::max(rss, 0.0));
  }
  return s;
}

ArState sample_posterior_sparse(std::span<const double> window,
                                const ArPrior& prior, Rng& rng,
                                const ArState* init) {
  if (static_cast<long>(window.size()) < prior.order)
    throw Error(ErrorCode::WindowTooShort, "window shorter than the order");
  RegressionStats stats(prior.order);
  stats.add(make_design(window, prior.order));
  return sample_posterior_sparse(stats, prior, rng, init);
}

ArState sample_posterior(const RegressionStats& stats, const ArPrior& prior,
                         Rng& rng, const ArState* init) {
  if (prior.kind == PriorKind::Conjugate)
    return sample_posterior_conjugate(stats, prior, rng);
  return sample_posterior_sparse(stats, prior, rng, init);
}

ArState sample_prior(const ArPrior& prior, Rng& rng) {
  prior.validate();
  ArState s;
  s.noise_var = rng.inv_gamma(prior.nu, prior.theta);
  s.coeffs.resize(prior.order);
  for (int i = 0; i < prior.order; ++i) {
    const double mean = prior.mu0.size() == prior.order ? prior.mu0[i] : 0.0;
    // conjugate prior scales coefficient variance with the noise draw
    const double var = prior.kind == PriorKind::Conjugate
                           ? prior.coeff_var[i] * s.noise_var
                           : prior.coeff_var[i];
    s.coeffs[i] = rng.normal(mean, std::sqrt(var));
  }
  return s;
}

namespace {
double student_t_logpdf(double x, double df, double loc, double scale2) {
  const double z2 = (x - loc) * (x - loc) / scale2;
  return std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
         0.5 * std::log(df * std::numbers::pi * scale2) -
         0.5 * (df + 1.0) * std::log1p(z2 / df);
}
}  // namespace

double log_predictive(const NigPosterior& post, const Eigen::VectorXd& lags,
                      double target) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(post.precision);
  const double h = lags.dot(ldlt.solve(lags));
  const double scale2 = (post.theta_n / post.nu_n) * (1.0 + h);
  return student_t_logpdf(target, 2.0 * post.nu_n, post.mean.dot(lags), scale2);
}

double log_prior_predictive(const ArPrior& prior, const Eigen::VectorXd& lags,
                            double target) {
  const double h = lags.dot(prior.coeff_var.asDiagonal() * lags);
  const double loc =
      prior.mu0.size() == lags.size() ? prior.mu0.dot(lags) : 0.0;
  const double scale2 = (prior.theta / prior.nu) * (1.0 + h);
  return student_t_logpdf(target, 2.0 * prior.nu, loc, scale2);
}

std::vector<double> ar_psd(const ArState& state,
                           const std::vector<double>& freqs_hz, double rate) {
  state.validate();
  std::vector<double> out;
  out.reserve(freqs_hz.size());
  for (double f : freqs_hz) {
    if (f < 0.0 || f > 0.5 * rate + 1e-12)
      throw Error(ErrorCode::FrequencyOutOfRange,
                  "frequency outside [0, rate/2]");
    std::complex<double> denom(1.0, 0.0);
    const double w = 2.0 * std::numbers::pi * f / rate;
    for (int j = 1; j <= state.order(); ++j)
      denom -= state.coeffs[j - 1] *
               std::exp(std::complex<double>(0.0, -w * j));
    out.push_back(state.noise_var / std::norm(denom));
  }
  return out;
}

double companion_spectral_radius(const ArState& state) {
  const int r = state.order();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(r, r);
  for (int j = 0; j < r; ++j) C(0, j) = state.coeffs[j];
  for (int i = 1; i < r; ++i) C(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(C, /*computeEigenvectors=*/false);
  double radius = 0.0;
  for (long i = 0; i < es.eigenvalues().size(); ++i)
    radius = std::max(radius, std::abs(es.eigenvalues()[i]));
  return radius;
}

bool is_stationary(const ArState& state) {
  return companion_spectral_radius(state) < 1.0;
}

std::vector<double> ar_simulate(const ArState& state, std::size_t T, Rng& rng,
                                std::size_t burn_in, bool force) {
  state.validate();
  if (!force && !is_stationary(state))
    throw Error(ErrorCode::NonStationary, "AR state is not stationary");
  const int r = state.order();
  const double sd = std::sqrt(state.noise_var);
  std::vector<double> buf(static_cast<std::size_t>(r), 0.0);
  std::vector<double> out;
  out.reserve(T);
  for (std::size_t t = 0; t < burn_in + T; ++t) {
    double v = rng.normal(0.0, sd);
    for (int j = 0; j < r; ++j)
      v += state.coeffs[j] * buf[(t + static_cast<std::size_t>(r) - 1 - j) % r];
    buf[t % r] = v;
    if (t >= burn_in) out.push_back(v);
  }
  return out;
}

Eigen::VectorXd ols_coeffs(std::span<const double> window, int order) {
  ArDesign d = make_design(window, order);
  return (d.X.transpose() * d.X).ldlt().solve(d.X.transpose() * d.y);
}

}  // namespace gaitseg
