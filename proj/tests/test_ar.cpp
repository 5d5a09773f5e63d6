#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "gaitseg/ar.hpp"
#include "gaitseg/spectral.hpp"

using namespace gaitseg;

TEST_SUITE("ar") {

TEST_CASE("ar_loglik: zeros under standard normal") {
  std::vector<double> x(50, 0.0);
  ArState st;
  st.coeffs = {0.0, 0.0};
  st.noise_var = 1.0;
  const double expect = 48.0 * std::log(1.0 / std::sqrt(2.0 * std::numbers::pi));
  CHECK(ar_loglik(x, st) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("ar_loglik: noiseless recursion gives zero residuals") {
  ArState st;
  st.coeffs = {0.7, -0.2};
  st.noise_var = 0.3;
  std::vector<double> x = {1.0, 0.5};
  for (int t = 2; t < 40; ++t)
    x.push_back(st.coeffs[0] * x[t - 1] + st.coeffs[1] * x[t - 2]);
  const double expect = (40.0 - 2.0) * std::log(1.0 / std::sqrt(2.0 * std::numbers::pi * 0.3));
  CHECK(ar_loglik(x, st) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("ar_loglik: matches naive per-point oracle") {
  ArState st;
  st.coeffs = {0.5, -0.3};
  st.noise_var = 0.1;
  Rng rng(77);
  auto x = ar_simulate(st, 50, rng, 100);
  double oracle = 0.0;
  for (std::size_t t = 2; t < x.size(); ++t) {
    const double mu = st.coeffs[0] * x[t - 1] + st.coeffs[1] * x[t - 2];
    const double z = x[t] - mu;
    oracle += -0.5 * std::log(2.0 * std::numbers::pi * st.noise_var) -
              0.5 * z * z / st.noise_var;
  }
  CHECK(ar_loglik(x, st) == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("ar_loglik: depends only on the values (shift a copy)") {
  ArState st;
  st.coeffs = {0.4};
  st.noise_var = 0.5;
  Rng rng(5);
  auto x = ar_simulate(st, 120, rng, 50);
  std::vector<double> same(x.begin(), x.end());
  CHECK(ar_loglik(x, st) == ar_loglik(same, st));
  try {
    ar_loglik(std::vector<double>{0.1}, st);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::WindowTooShort);
  }
}

TEST_CASE("conjugate posterior: empty data reduces to the prior") {
  ArPrior prior = ArPrior::conjugate(1, 0.25, 3.0, 2.0);
  Rng rng(101);
  // window of length r contributes zero regression rows
  std::vector<double> window = {0.7};
  double mean_a = 0.0, var_a = 0.0, mean_s2 = 0.0;
  const int n = 4000;
  std::vector<double> draws(n);
  for (int i = 0; i < n; ++i) {
    ArState d = sample_posterior_conjugate(window, prior, rng);
    draws[i] = d.coeffs[0];
    mean_a += d.coeffs[0];
    mean_s2 += d.noise_var;
  }
  mean_a /= n;
  mean_s2 /= n;
  for (double v : draws) var_a += (v - mean_a) * (v - mean_a);
  var_a /= n;
  // prior: A | s2 ~ N(0, s2*0.25), s2 ~ InvGamma(3, 2) with E[s2]=1, so
  // E[A]=0 and Var[A]=0.25*E[s2]=0.25
  CHECK(std::abs(mean_a) < 0.05);
  CHECK(mean_s2 == doctest::Approx(1.0).epsilon(0.1));
  CHECK(var_a == doctest::Approx(0.25).epsilon(0.2));
}

TEST_CASE("conjugate posterior: concentrates near truth for AR(1)") {
  ArState truth;
  truth.coeffs = {0.8};
  truth.noise_var = 1.0;
  Rng rng(555);
  auto x = ar_simulate(truth, 5000, rng, 500);
  ArPrior prior = ArPrior::conjugate(1, 1.0);
  ArDesign d = make_design(x, 1);
  RegressionStats stats(1);
  stats.add(d);
  NigPosterior post = conjugate_posterior(stats, prior);
  const double post_sd =
      std::sqrt(post.noise_var_mean() / post.precision(0, 0));
  CHECK(std::abs(post.mean(0) - 0.8) < 3.0 * post_sd);
  // Monte Carlo draws agree with the analytic mean
  double mc = 0.0;
  for (int i = 0; i < 200; ++i) mc += post.sample(rng).coeffs[0];
  mc /= 200.0;
  CHECK(mc == doctest::Approx(post.mean(0)).epsilon(0.01));
}

TEST_CASE("conjugate posterior: matches 2-D grid quadrature, r=1 n=3") {
  // three consecutive data points -> two regression rows
  const std::vector<double> x = {0.5, 0.9, 0.2};
  ArPrior prior = ArPrior::conjugate(1, 0.5, 3.0, 1.5);
  RegressionStats stats(1);
  ArDesign d = make_design(x, 1);
  stats.add(d);
  NigPosterior post = conjugate_posterior(stats, prior);

  // quadrature over (a, s2) of prior x likelihood
  double z = 0.0, ea = 0.0, es2 = 0.0;
  for (double a = -4.0; a <= 4.0; a += 0.002) {
    for (double s2 = 0.01; s2 <= 25.0; s2 += 0.01) {
      double lp = -(prior.nu + 1.0) * std::log(s2) - prior.theta / s2;  // InvGamma
      lp += -0.5 * std::log(s2 * 0.5) - 0.5 * a * a / (s2 * 0.5);       // A | s2
      for (int t = 1; t < 3; ++t) {
        const double r = x[t] - a * x[t - 1];
        lp += -0.5 * std::log(s2) - 0.5 * r * r / s2;
      }
      const double w = std::exp(lp);
      z += w;
      ea += w * a;
      es2 += w * s2;
    }
  }
  ea /= z;
  es2 /= z;
  CHECK(post.mean(0) == doctest::Approx(ea).epsilon(1e-3));
  CHECK(post.noise_var_mean() == doctest::Approx(es2).epsilon(1e-3));
}

TEST_CASE("sparse posterior: zero data reproduces the prior") {
  ArPrior prior = ArPrior::sparse_ard(1, 0.09, 3.0, 2.0);
  Rng rng(31);
  std::vector<double> window = {0.0};  // length r: no likelihood term
  const int n = 1000;
  double mean = 0.0, var = 0.0;
  std::vector<double> draws(n);
  for (int i = 0; i < n; ++i) {
    ArState d = sample_posterior_sparse(window, prior, rng);
    draws[i] = d.coeffs[0];
    mean += d.coeffs[0];
  }
  mean /= n;
  for (double v : draws) var += (v - mean) * (v - mean);
  var /= n;
  // A_j ~ N(0, 0.09) independent of s2; 3 standard errors of the MC mean
  CHECK(std::abs(mean) < 3.0 * std::sqrt(0.09 / n));
  CHECK(var == doctest::Approx(0.09).epsilon(0.15));
}

TEST_CASE("sparse posterior: tiny prior variance pins coefficients to zero") {
  ArState truth;
  truth.coeffs = {0.8};
  truth.noise_var = 1.0;
  Rng rng(63);
  auto x = ar_simulate(truth, 500, rng, 100);
  ArPrior prior = ArPrior::sparse_ard(1, 1e-12);
  for (int i = 0; i < 10; ++i) {
    ArState d = sample_posterior_sparse(x, prior, rng);
    CHECK(std::abs(d.coeffs[0]) < 1e-4);
  }
}

TEST_CASE("sparse posterior: agrees with conjugate for broad priors") {
  ArState truth;
  truth.coeffs = {0.5, -0.3};
  truth.noise_var = 0.5;
  Rng rng(99);
  auto x = ar_simulate(truth, 2000, rng, 200);
  ArPrior cp = ArPrior::conjugate(2, 10.0);
  ArPrior sp = ArPrior::sparse_ard(2, 10.0);
  sp.gibbs_sweeps = 5;
  double cm0 = 0, cm1 = 0, sm0 = 0, sm1 = 0;
  const int n = 400;
  ArState chain;  // persistent sparse chain
  chain.coeffs = {0.0, 0.0};
  chain.noise_var = 1.0;
  for (int i = 0; i < n; ++i) {
    ArState c = sample_posterior_conjugate(x, cp, rng);
    chain = sample_posterior_sparse(x, sp, rng, &chain);
    cm0 += c.coeffs[0]; cm1 += c.coeffs[1];
    sm0 += chain.coeffs[0]; sm1 += chain.coeffs[1];
  }
  CHECK(std::abs(cm0 / n - sm0 / n) < 0.05);
  CHECK(std::abs(cm1 / n - sm1 / n) < 0.05);
}

TEST_CASE("ar_psd: white noise is flat") {
  ArState st;
  st.coeffs = {0.0, 0.0};
  st.noise_var = 2.0;
  auto psd = ar_psd(st, {0.0, 1.0, 5.0, 14.9}, 30.0);
  for (double v : psd) CHECK(v == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("ar_psd: AR(1) closed form at f=0") {
  ArState st;
  st.coeffs = {0.9};
  st.noise_var = 1.0;
  auto psd = ar_psd(st, {0.0}, 30.0);
  CHECK(psd[0] == doctest::Approx(100.0).epsilon(1e-9));
}

TEST_CASE("ar_psd: frequency out of range rejected") {
  ArState st;
  st.coeffs = {0.2};
  try {
    ar_psd(st, {16.0}, 30.0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FrequencyOutOfRange);
  }
}

TEST_CASE("ar_psd: integral over full band equals process variance") {
  ArState st;
  st.coeffs = {1.2, -0.5};
  st.noise_var = 0.7;
  const int n = 4096;
  std::vector<double> freqs(n);
  for (int i = 0; i < n; ++i)
    freqs[i] = 15.0 * static_cast<double>(i) / static_cast<double>(n - 1);
  auto psd = ar_psd(st, freqs, 30.0);
  // two-sided symmetric: integral over [-15,15] = 2x one side; trapezoid,
  // normalized per cycles/sample so divide by the rate
  double integral = 0.0;
  for (int i = 1; i < n; ++i)
    integral += 0.5 * (psd[i] + psd[i - 1]) * (freqs[i] - freqs[i - 1]);
  integral = 2.0 * integral / 30.0;
  Rng rng(7);
  auto sim = ar_simulate(st, 200000, rng, 2000);
  double mean = 0.0, var = 0.0;
  for (double v : sim) mean += v;
  mean /= static_cast<double>(sim.size());
  for (double v : sim) var += (v - mean) * (v - mean);
  var /= static_cast<double>(sim.size());
  CHECK(integral == doctest::Approx(var).epsilon(0.05));
}

TEST_CASE("ar_psd: matches Welch periodogram of a long simulation") {
  // resonance near 1 Hz at 30 Hz sampling
  const double m = 0.9, w = 2.0 * std::numbers::pi / 30.0;
  ArState st;
  st.coeffs = {2.0 * m * std::cos(w), -m * m};
  st.noise_var = 1.0;
  Rng rng(13);
  auto x = ar_simulate(st, 1 << 16, rng, 2000);
  auto welch = welch_psd(x, 512, 30.0);
  double num = 0.0, den = 0.0;
  std::vector<double> freqs;
  std::vector<double> emp;
  for (std::size_t k = 0; k < welch.freq_hz.size(); ++k) {
    if (welch.freq_hz[k] < 0.2 || welch.freq_hz[k] > 10.0) continue;
    freqs.push_back(welch.freq_hz[k]);
    emp.push_back(welch.psd[k]);
  }
  auto model = ar_psd(st, freqs, 30.0);
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    num += (emp[i] - model[i]) * (emp[i] - model[i]);
    den += model[i] * model[i];
  }
  CHECK(std::sqrt(num / den) < 0.10);
}

TEST_CASE("ar_simulate: white noise variance") {
  ArState st;
  st.coeffs = {0.0};
  st.noise_var = 1.7;
  Rng rng(21);
  auto x = ar_simulate(st, 100000, rng);
  double mean = 0.0, var = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(x.size());
  CHECK(var == doctest::Approx(1.7).epsilon(0.05));
}

TEST_CASE("ar_simulate: near-unit-root still stationary") {
  ArState st;
  st.coeffs = {0.99};
  st.noise_var = 1.0;
  CHECK(is_stationary(st));
  CHECK(companion_spectral_radius(st) == doctest::Approx(0.99).epsilon(1e-9));
  Rng rng(2);
  auto x = ar_simulate(st, 1000, rng, 1000);
  for (double v : x) CHECK(std::isfinite(v));
}

TEST_CASE("ar_simulate: non-stationary rejected unless forced") {
  ArState st;
  st.coeffs = {1.01};
  st.noise_var = 1.0;
  Rng rng(3);
  try {
    ar_simulate(st, 10, rng);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonStationary);
  }
  auto x = ar_simulate(st, 10, rng, 0, true);
  CHECK(x.size() == 10);
}

TEST_CASE("ar_simulate: AR(1) lag-1 autocorrelation") {
  ArState st;
  st.coeffs = {0.8};
  st.noise_var = 1.0;
  Rng rng(37);
  auto x = ar_simulate(st, 100000, rng, 1000);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double c0 = 0.0, c1 = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    c0 += (x[t] - mean) * (x[t] - mean);
    if (t + 1 < x.size()) c1 += (x[t] - mean) * (x[t + 1] - mean);
  }
  CHECK(c1 / c0 == doctest::Approx(0.8).epsilon(0.0125));
}

TEST_CASE("weak prior concentrates on the OLS solution") {
  ArState truth;
  truth.coeffs = {0.6, -0.25};
  truth.noise_var = 0.8;
  Rng rng(71);
  auto x = ar_simulate(truth, 5000, rng, 500);
  ArPrior prior = ArPrior::conjugate(2, 1e6);
  RegressionStats stats(2);
  stats.add(make_design(x, 2));
  NigPosterior post = conjugate_posterior(stats, prior);
  Eigen::VectorXd ols = ols_coeffs(x, 2);
  for (int j = 0; j < 2; ++j) {
    const double sd = std::sqrt(post.noise_var_mean() *
                                post.precision.inverse()(j, j));
    CHECK(std::abs(post.mean(j) - ols(j)) < 3.0 * sd);
  }
}

}  // TEST_SUITE
