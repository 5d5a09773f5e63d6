#include "gaitseg/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

namespace gaitseg {

void HdpHyper::validate(bool blocked) const {
  if (!(gamma > 0) || !(alpha > 0))
    throw Error(ErrorCode::ConfigInvalid, "gamma and alpha must be positive");
  if (kappa < 0) throw Error(ErrorCode::ConfigInvalid, "kappa must be >= 0");
  if (order < 1) throw Error(ErrorCode::ConfigInvalid, "order must be >= 1");
  if (blocked && truncation < 1)
    throw Error(ErrorCode::TruncationTooSmall, "truncation must be >= 1");
  ar_prior.validate();
}

void ModelSnapshot::validate() const {
  const int K = sequence.k_active;
  if (static_cast<int>(states.size()) != K)
    throw Error(ErrorCode::DimensionMismatch, "states.size != k_active");
  if (static_cast<int>(beta.size()) != K + 1)
    throw Error(ErrorCode::DimensionMismatch, "beta.size != k_active + 1");
  double bsum = 0.0;
  for (double b : beta) {
    if (b < -1e-15) throw Error(ErrorCode::ConfigInvalid, "negative beta weight");
    bsum += b;
  }
  if (std::abs(bsum - 1.0) > 1e-12)
    throw Error(ErrorCode::ConfigInvalid, "beta does not sum to 1");
  std::vector<long> occupancy(K, 0);
  for (int z : sequence.labels) {
    if (z < 0 || z >= K)
      throw Error(ErrorCode::ConfigInvalid, "label out of range");
    ++occupancy[z];
  }
  for (long o : occupancy)
    if (o == 0) throw Error(ErrorCode::ConfigInvalid, "empty state in snapshot");
}

void StatePosterior::validate() const {
  for (const auto& row : probs) {
    double sum = 0.0;
    for (double p : row) {
      if (p < 0) throw Error(ErrorCode::ConfigInvalid, "negative posterior");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw Error(ErrorCode::ConfigInvalid, "posterior row does not sum to 1");
  }
}

namespace {

struct SeriesData {
  Eigen::MatrixXd lags;      // T x r, row t = (x_{t-1}, ..., x_{t-r})
  Eigen::VectorXd targets;   // x_t
  std::vector<char> valid;   // full r-lag history within the segment
  std::vector<char> seg_start;
  long T = 0;
  int r = 0;
};

SeriesData build_series(const AmplitudeSeries& x, int r) {
  SeriesData d;
  d.T = static_cast<long>(x.size());
  d.r = r;
  d.lags = Eigen::MatrixXd::Zero(d.T, r);
  d.targets.resize(d.T);
  d.valid.assign(d.T, 0);
  d.seg_start.assign(d.T, 0);
  if (d.T > 0) d.seg_start[0] = 1;
  for (std::size_t b : x.boundaries)
    if (b < x.size()) d.seg_start[b] = 1;
  long seg0 = 0;
  for (long t = 0; t < d.T; ++t) {
    if (d.seg_start[t]) seg0 = t;
    d.targets[t] = x.values[static_cast<std::size_t>(t)];
    if (t - seg0 >= r) {
      d.valid[t] = 1;
      for (int j = 0; j < r; ++j)
        d.lags(t, j) = x.values[static_cast<std::size_t>(t - 1 - j)];
    }
  }
  return d;
}

double emission_loglik(const SeriesData& d, long t, const ArState& s) {
  if (!d.valid[t]) return 0.0;  // conditioned-on points: uniform across states
  double pred = 0.0;
  for (int j = 0; j < d.r; ++j) pred += s.coeffs[j] * d.lags(t, j);
  const double res = d.targets[t] - pred;
  return -0.5 * std::log(2.0 * std::numbers::pi * s.noise_var) -
         0.5 * res * res / s.noise_var;
}

// Chinese-restaurant table count for n customers at concentration c.
long sample_crt(long n, double c, Rng& rng) {
  long m = 0;
  for (long i = 0; i < n; ++i)
    if (rng.bernoulli(c / (c + static_cast<double>(i)))) ++m;
  return m;
}

long sample_binomial(long n, double p, Rng& rng) {
  long k = 0;
  for (long i = 0; i < n; ++i)
    if (rng.bernoulli(p)) ++k;
  return k;
}

// Sticky HDP auxiliary-variable update of the global weights. Counts are
// K x K transitions plus an initial-assignment row; returns beta of size
// K + 1 (trailing remainder).
std::vector<double> resample_beta(const std::vector<std::vector<long>>& counts,
                                  const std::vector<long>& init_counts,
                                  const std::vector<double>& beta,
                                  double alpha, double kappa, double gamma,
                                  Rng& rng) {
  const int K = static_cast<int>(counts.size());
  std::vector<double> table_cols(K, 0.0);
  for (int j = 0; j < K; ++j) {
    for (int k = 0; k < K; ++k) {
      if (counts[j][k] == 0) continue;
      const double conc = alpha * beta[k] + (j == k ? kappa : 0.0);
      long m = sample_crt(counts[j][k], conc, rng);
      if (j == k && kappa > 0.0) {
        // override tables due to the sticky mass do not inform beta
        const double rho = kappa / (kappa + alpha * beta[k]);
        m -= sample_binomial(m, rho, rng);
      }
      table_cols[k] += static_cast<double>(m);
    }
  }
  for (int k = 0; k < K; ++k)
    if (init_counts[k] > 0)
      table_cols[k] += static_cast<double>(
          sample_crt(init_counts[k], alpha * beta[k], rng));

  std::vector<double> dir_param(K + 1);
  for (int k = 0; k < K; ++k) dir_param[k] = table_cols[k];
  dir_param[K] = gamma;
  return rng.dirichlet(dir_param);
}

struct CountSet {
  std::vector<std::vector<long>> trans;
  std::vector<long> init;
  std::vector<long> occupancy;
};

CountSet tally(const std::vector<int>& z, const SeriesData& d, int K) {
  CountSet c;
  c.trans.assign(K, std::vector<long>(K, 0));
  c.init.assign(K, 0);
  c.occupancy.assign(K, 0);
  for (long t = 0; t < d.T; ++t) {
    ++c.occupancy[z[t]];
    if (d.seg_start[t])
      ++c.init[z[t]];
    else
      ++c.trans[z[t - 1]][z[t]];
  }
  return c;
}

// Resample per-state AR parameters from their assigned rows.
void resample_states(std::vector<ArState>& states, const std::vector<int>& z,
                     const SeriesData& d, const HdpHyper& hyper, Rng& rng) {
  const int K = static_cast<int>(states.size());
  std::vector<std::vector<long>> members(K);
  for (long t = 0; t < d.T; ++t)
    if (d.valid[t]) members[z[t]].push_back(t);
  for (int k = 0; k < K; ++k) {
    RegressionStats stats(d.r);
    if (!members[k].empty()) {
      Eigen::MatrixXd Xk(members[k].size(), d.r);
      Eigen::VectorXd yk(members[k].size());
      for (std::size_t i = 0; i < members[k].size(); ++i) {
        Xk.row(i) = d.lags.row(members[k][i]);
        yk[i] = d.targets[members[k][i]];
      }
      stats.xtx.selfadjointView<Eigen::Lower>().rankUpdate(Xk.transpose());
      stats.xty = Xk.transpose() * yk;
      stats.yty = yk.squaredNorm();
      stats.n = static_cast<long>(members[k].size());
    }
    const ArState* init = states[k].order() == d.r ? &states[k] : nullptr;
    states[k] = sample_posterior(stats, hyper.ar_prior, rng, init);
  }
}

ModelSnapshot make_snapshot(const std::vector<int>& z,
                            const std::vector<ArState>& states,
                            const std::vector<double>& beta_full,
                            const SeriesData& d, const HdpHyper& hyper,
                            int iteration, std::uint64_t seed,
                            bool saturated) {
  // compact to occupied states, ordered by first occurrence
  const int K_in = static_cast<int>(states.size());
  std::vector<int> remap(K_in, -1);
  std::vector<int> order;
  for (int zt : z)
    if (remap[zt] < 0) {
      remap[zt] = static_cast<int>(order.size());
      order.push_back(zt);
    }
  const int K = static_cast<int>(order.size());

  ModelSnapshot snap;
  snap.sequence.labels.resize(z.size());
  for (std::size_t t = 0; t < z.size(); ++t)
    snap.sequence.labels[t] = remap[z[t]];
  snap.sequence.k_active = K;
  snap.states.reserve(K);
  for (int k : order) snap.states.push_back(states[k]);
  snap.beta.resize(K + 1);
  double occupied_mass = 0.0;
  for (int k = 0; k < K; ++k) {
    snap.beta[k] = beta_full[order[k]];
    occupied_mass += snap.beta[k];
  }
  snap.beta[K] = std::max(0.0, 1.0 - occupied_mass);
  // renormalize exactly
  double total = occupied_mass + snap.beta[K];
  for (auto& b : snap.beta) b /= total;

  snap.transition_counts.assign(K, std::vector<long>(K, 0));
  for (long t = 1; t < d.T; ++t)
    if (!d.seg_start[t])
      ++snap.transition_counts[snap.sequence.labels[t - 1]]
                              [snap.sequence.labels[t]];
  snap.hyper = hyper;
  snap.iteration = iteration;
  snap.seed = seed;
  snap.truncation_saturated = saturated;
  return snap;
}

}  // namespace

std::vector<ModelSnapshot> gibbs_direct_assignment(const AmplitudeSeries& x,
                                                   const HdpHyper& hyper,
                                                   int iters, Rng& rng,
                                                   const SnapshotSink& sink) {
  hyper.validate(/*blocked=*/false);
  x.validate();
  const int r = hyper.order;
  if (static_cast<long>(x.size()) <= r)
    throw Error(ErrorCode::SeriesTooShort, "series must be longer than the order");
  if (iters < 1) throw Error(ErrorCode::ConfigInvalid, "iters must be >= 1");

  SeriesData d = build_series(x, r);
  const long T = d.T;
  const double alpha = hyper.alpha, kappa = hyper.kappa, gamma = hyper.gamma;

  // Point-wise moves merge redundant states easily (they empty out and are
  // dropped) but can never split a merged one, and walking a block of points
  // from one state to another takes O(block^2) sweeps. Warm-start the label
  // sequence with a short truncated blocked pre-pass so the point-wise
  // sweeps start near a sensible segmentation.
  std::vector<int> z(T, 0);
  int k0 = 1;
  {
    HdpHyper pre = hyper;
    pre.truncation = std::min(hyper.truncation, 10);
    Rng pre_rng = rng.split("init");
    auto pre_snaps = gibbs_blocked_weak_limit(x, pre, 30, pre_rng);
    z = pre_snaps.back().sequence.labels;
    k0 = std::max(1, pre_snaps.back().sequence.k_active);
  }
  std::vector<ArState> states(k0);
  std::vector<double> beta(k0, 1.0 / (k0 + 1.0));
  double beta_rem = 1.0 / (k0 + 1.0);
  {
    std::vector<RegressionStats> stats(k0, RegressionStats(r));
    for (long t = 0; t < T; ++t)
      if (d.valid[t])
        stats[z[t]].add_row(d.lags.row(t).transpose(), d.targets[t]);
    for (int k = 0; k < k0; ++k)
      states[k] = sample_posterior(stats[k], hyper.ar_prior, rng);
  }

  CountSet counts = tally(z, d, k0);
  std::vector<ModelSnapshot> snaps;
  snaps.reserve(iters);

  for (int it = 0; it < iters; ++it) {
    // sweep labels
    for (long t = 0; t < T; ++t) {
      int K = static_cast<int>(states.size());
      const int old = z[t];
      const bool has_prev = !d.seg_start[t];
      const bool has_next = t + 1 < T && !d.seg_start[t + 1];
      const int prev = has_prev ? z[t - 1] : -1;
      const int next = has_next ? z[t + 1] : -1;

      // remove t's edges
      if (has_prev) --counts.trans[prev][old];
      else --counts.init[old];
      if (has_next) --counts.trans[old][next];
      --counts.occupancy[old];

      std::vector<double> logw(K + 1);
      for (int k = 0; k < K; ++k) {
        double lw = 0.0;
        if (has_prev) {
          const double left = static_cast<double>(counts.trans[prev][k]) +
                              alpha * beta[k] + (prev == k ? kappa : 0.0);
          lw += std::log(std::max(left, 1e-300));
        } else {
          lw += std::log(std::max(beta[k], 1e-300));
        }
        if (has_next) {
          double num = static_cast<double>(counts.trans[k][next]) +
                       alpha * beta[next] + (k == next ? kappa : 0.0);
          if (has_prev && prev == k && k == next) num += 1.0;
          double den = 0.0;
          for (int k2 = 0; k2 < K; ++k2)
            den += static_cast<double>(counts.trans[k][k2]);
          den += alpha + kappa + ((has_prev && prev == k) ? 1.0 : 0.0);
          lw += std::log(num / den);
        }
        lw += emission_loglik(d, t, states[k]);
        logw[k] = lw;
      }
      // birth of a new state
      {
        double lw = 0.0;
        if (has_prev)
          lw += std::log(std::max(alpha * beta_rem, 1e-300));
        else
          lw += std::log(std::max(beta_rem, 1e-300));
        if (has_next)
          lw += std::log(alpha * beta[next] / (alpha + kappa));
        if (d.valid[t])
          lw += log_prior_predictive(hyper.ar_prior, d.lags.row(t).transpose(),
                                     d.targets[t]);
        logw[K] = lw;
      }

      const double mx = *std::max_element(logw.begin(), logw.end());
      std::vector<double> w(logw.size());
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(logw[i] - mx);
      int knew = static_cast<int>(rng.categorical(w));

      if (knew == K) {
        // instantiate: split the remainder stick and draw parameters from
        // the posterior given just this point
        const double b = rng.beta(1.0, gamma);
        beta.push_back(b * beta_rem);
        beta_rem *= (1.0 - b);
        RegressionStats stats(r);
        if (d.valid[t]) stats.add_row(d.lags.row(t).transpose(), d.targets[t]);
        states.push_back(
            sample_posterior_conjugate(stats, hyper.ar_prior, rng));
        for (auto& row : counts.trans) row.push_back(0);
        counts.trans.emplace_back(K + 1, 0);
        counts.init.push_back(0);
        counts.occupancy.push_back(0);
      }
      z[t] = knew;
      if (has_prev) ++counts.trans[prev][knew];
      else ++counts.init[knew];
      if (has_next) ++counts.trans[knew][next];
      ++counts.occupancy[knew];
    }

    // drop empty states, folding their stick weight into the remainder
    {
      int K = static_cast<int>(states.size());
      std::vector<int> remap(K, -1);
      std::vector<ArState> states2;
      std::vector<double> beta2;
      for (int k = 0; k < K; ++k) {
        if (counts.occupancy[k] > 0) {
          remap[k] = static_cast<int>(states2.size());
          states2.push_back(std::move(states[k]));
          beta2.push_back(beta[k]);
        } else {
          beta_rem += beta[k];
        }
      }
      if (static_cast<int>(states2.size()) != K) {
        for (long t = 0; t < T; ++t) z[t] = remap[z[t]];
        states = std::move(states2);
        beta = std::move(beta2);
        counts = tally(z, d, static_cast<int>(states.size()));
      }
    }

    // global weights and state parameters
    {
      std::vector<double> beta_with_rem = beta;
      std::vector<double> newb = resample_beta(counts.trans, counts.init,
                                               beta_with_rem, alpha, kappa,
                                               gamma, rng);
      const int K = static_cast<int>(states.size());
      beta.assign(newb.begin(), newb.begin() + K);
      beta_rem = newb[K];
    }
    resample_states(states, z, d, hyper, rng);

    std::vector<double> beta_full = beta;
    ModelSnapshot snap = make_snapshot(z, states, beta_full, d, hyper, it,
                                       rng.seed(), false);
    if (sink) sink(snap);
    snaps.push_back(std::move(snap));
  }
  return snaps;
}

std::vector<ModelSnapshot> gibbs_blocked_weak_limit(const AmplitudeSeries& x,
                                                    const HdpHyper& hyper,
                                                    int iters, Rng& rng,
                                                    const SnapshotSink& sink) {
  hyper.validate(/*blocked=*/true);
  x.validate();
  const int r = hyper.order;
  const int L = hyper.truncation;
  if (static_cast<long>(x.size()) <= r)
    throw Error(ErrorCode::SeriesTooShort, "series must be longer than the order");
  if (iters < 1) throw Error(ErrorCode::ConfigInvalid, "iters must be >= 1");

  SeriesData d = build_series(x, r);
  const long T = d.T;
  const double alpha = hyper.alpha, kappa = hyper.kappa, gamma = hyper.gamma;

  // Scale-aware initialization: label each point by the quantile bin of its
  // local mean-square amplitude. Regimes that differ in scale start mostly
  // separated — something uniform random labels almost never achieve — and
  // regimes sharing a scale are no worse off than under a random start.
  std::vector<int> z(T);
  {
    const long w = std::max<long>(
        5, std::min<long>(T / 4, static_cast<long>(std::lround(x.rate))));
    std::vector<double> prefix(static_cast<std::size_t>(T) + 1, 0.0);
    for (long t = 0; t < T; ++t)
      prefix[static_cast<std::size_t>(t) + 1] =
          prefix[static_cast<std::size_t>(t)] + d.targets[t] * d.targets[t];
    std::vector<double> scale(static_cast<std::size_t>(T));
    for (long t = 0; t < T; ++t) {
      const long lo = std::max<long>(0, t - w / 2);
      const long hi = std::min<long>(T, lo + w);
      scale[static_cast<std::size_t>(t)] =
          (prefix[static_cast<std::size_t>(hi)] -
           prefix[static_cast<std::size_t>(lo)]) /
          static_cast<double>(hi - lo);
    }
    std::vector<long> idx(static_cast<std::size_t>(T));
    std::iota(idx.begin(), idx.end(), 0L);
    std::sort(idx.begin(), idx.end(), [&](long a, long b) {
      return scale[static_cast<std::size_t>(a)] <
             scale[static_cast<std::size_t>(b)];
    });
    for (long rank = 0; rank < T; ++rank)
      z[idx[static_cast<std::size_t>(rank)]] =
          std::min<int>(L - 1, static_cast<int>((rank * L) / T));
  }
  std::vector<double> beta(L, 1.0 / L);
  std::vector<ArState> states(L);
  for (int k = 0; k < L; ++k) states[k] = sample_prior(hyper.ar_prior, rng);

  std::vector<ModelSnapshot> snaps;
  snaps.reserve(iters);
  Eigen::MatrixXd logem(T, L);

  for (int it = 0; it < iters; ++it) {
    CountSet counts = tally(z, d, L);

    // beta via table counts (weak limit adds gamma/L to every column)
    {
      std::vector<double> table_cols(L, 0.0);
      for (int j = 0; j < L; ++j)
        for (int k = 0; k < L; ++k) {
          if (counts.trans[j][k] == 0) continue;
          const double conc = alpha * beta[k] + (j == k ? kappa : 0.0);
          long m = sample_crt(counts.trans[j][k], conc, rng);
          if (j == k && kappa > 0.0)
            m -= sample_binomial(m, kappa / (kappa + alpha * beta[k]), rng);
          table_cols[k] += static_cast<double>(m);
        }
      for (int k = 0; k < L; ++k)
        if (counts.init[k] > 0)
          table_cols[k] += static_cast<double>(
              sample_crt(counts.init[k], alpha * beta[k], rng));
      std::vector<double> dir_param(L);
      for (int k = 0; k < L; ++k) dir_param[k] = gamma / L + table_cols[k];
      beta = rng.dirichlet(dir_param);
    }

    // transition rows and initial distribution
    Eigen::MatrixXd pi(L, L);
    for (int j = 0; j < L; ++j) {
      std::vector<double> param(L);
      for (int k = 0; k < L; ++k)
        param[k] = alpha * beta[k] + (j == k ? kappa : 0.0) +
                   static_cast<double>(counts.trans[j][k]);
      std::vector<double> row = rng.dirichlet(param);
      for (int k = 0; k < L; ++k) pi(j, k) = row[k];
    }
    std::vector<double> pi0;
    {
      std::vector<double> param(L);
      for (int k = 0; k < L; ++k)
        param[k] = alpha * beta[k] + static_cast<double>(counts.init[k]);
      pi0 = rng.dirichlet(param);
    }

    resample_states(states, z, d, hyper, rng);

    // emission likelihood matrix (valid rows only; others uniform)
    Eigen::MatrixXd coeffs(r, L);
    Eigen::VectorXd vars(L);
    for (int k = 0; k < L; ++k) {
      for (int j = 0; j < r; ++j) coeffs(j, k) = states[k].coeffs[j];
      vars[k] = states[k].noise_var;
    }
    Eigen::MatrixXd pred = d.lags * coeffs;  // T x L
    for (long t = 0; t < T; ++t) {
      if (!d.valid[t]) {
        logem.row(t).setZero();
        continue;
      }
      for (int k = 0; k < L; ++k) {
        const double res = d.targets[t] - pred(t, k);
        logem(t, k) = -0.5 * std::log(2.0 * std::numbers::pi * vars[k]) -
                      0.5 * res * res / vars[k];
      }
    }

    // forward filter (scaled), backward sample; restarts at segment starts
    Eigen::MatrixXd fwd(T, L);
    for (long t = 0; t < T; ++t) {
      Eigen::RowVectorXd prior_t(L);
      if (d.seg_start[t]) {
        for (int k = 0; k < L; ++k) prior_t[k] = pi0[k];
      } else {
        prior_t = fwd.row(t - 1) * pi;
      }
      const double mx = logem.row(t).maxCoeff();
      Eigen::RowVectorXd like =
          (logem.row(t).array() - mx).exp().matrix();
      Eigen::RowVectorXd a = prior_t.cwiseProduct(like);
      const double s = a.sum();
      fwd.row(t) = s > 0 ? (a / s).eval() : Eigen::RowVectorXd::Constant(L, 1.0 / L);
    }
    for (long t = T - 1; t >= 0; --t) {
      std::vector<double> w(L);
      const bool next_in_seg = t + 1 < T && !d.seg_start[t + 1];
      for (int k = 0; k < L; ++k) {
        double v = fwd(t, k);
        if (next_in_seg) v *= pi(k, z[t + 1]);
        w[k] = v;
      }
      z[t] = static_cast<int>(rng.categorical(w));
    }

    CountSet occ = tally(z, d, L);
    bool saturated = true;
    for (int k = 0; k < L; ++k)
      if (occ.occupancy[k] == 0) saturated = false;

    ModelSnapshot snap =
        make_snapshot(z, states, beta, d, hyper, it, rng.seed(), saturated);
    if (sink) sink(snap);
    snaps.push_back(std::move(snap));
  }
  return snaps;
}

StatePosterior state_posterior(const std::vector<ModelSnapshot>& snapshots,
                               int burn_in) {
  if (burn_in < 0 || snapshots.size() <= static_cast<std::size_t>(burn_in))
    throw Error(ErrorCode::AllBurnedIn, "no snapshots left after burn-in");
  const auto& last = snapshots.back();
  const std::size_t T = last.sequence.labels.size();
  int K = last.sequence.k_active;

  std::vector<std::vector<double>> acc(T, std::vector<double>(K, 0.0));
  const std::size_t retained = snapshots.size() - static_cast<std::size_t>(burn_in);

  for (std::size_t s = static_cast<std::size_t>(burn_in); s < snapshots.size(); ++s) {
    const auto& snap = snapshots[s];
    const int Ks = snap.sequence.k_active;
    // overlap with the final snapshot's labels
    std::vector<std::vector<long>> overlap(Ks, std::vector<long>(K, 0));
    for (std::size_t t = 0; t < T; ++t)
      ++overlap[snap.sequence.labels[t]][last.sequence.labels[t]];
    // greedy maximum-overlap matching
    std::vector<int> match(Ks, -1);
    std::vector<char> used(K, 0);
    for (int pick = 0; pick < Ks; ++pick) {
      long best = -1;
      int bi = -1, bj = -1;
      for (int i = 0; i < Ks; ++i) {
        if (match[i] >= 0) continue;
        for (int j = 0; j < K; ++j) {
          if (used[j]) continue;
          if (overlap[i][j] > best) {
            best = overlap[i][j];
            bi = i;
            bj = j;
          }
        }
      }
      if (bi < 0) break;
      match[bi] = bj;
      used[bj] = 1;
    }
    // unmatched states get fresh columns
    for (int i = 0; i < Ks; ++i) {
      if (match[i] >= 0) continue;
      match[i] = K++;
      for (auto& row : acc) row.push_back(0.0);
    }
    for (std::size_t t = 0; t < T; ++t)
      acc[t][match[snap.sequence.labels[t]]] += 1.0;
  }

  StatePosterior post;
  post.probs = std::move(acc);
  for (auto& row : post.probs)
    for (auto& p : row) p /= static_cast<double>(retained);
  return post;
}

double snapshot_log_density(const ModelSnapshot& snap,
                            const AmplitudeSeries& x) {
  snap.validate();
  const int K = snap.sequence.k_active;
  SeriesData d = build_series(x, snap.hyper.order);
  const double alpha = snap.hyper.alpha, kappa = snap.hyper.kappa;

  double ll = 0.0;
  for (long t = 0; t < d.T; ++t)
    ll += emission_loglik(d, t, snap.states[snap.sequence.labels[t]]);

  // sticky Dirichlet-multinomial marginal of the transition counts given beta
  std::vector<long> init_counts(K, 0);
  for (long t = 0; t < d.T; ++t)
    if (d.seg_start[t]) ++init_counts[snap.sequence.labels[t]];
  for (int j = 0; j < K; ++j) {
    long row_total = 0;
    for (int k = 0; k < K; ++k) row_total += snap.transition_counts[j][k];
    ll += std::lgamma(alpha + kappa) -
          std::lgamma(alpha + kappa + static_cast<double>(row_total));
    for (int k = 0; k < K; ++k) {
      const double conc = alpha * snap.beta[k] + (j == k ? kappa : 0.0);
      ll += std::lgamma(conc + static_cast<double>(snap.transition_counts[j][k])) -
            std::lgamma(conc);
    }
  }
  long init_total = 0;
  for (long c : init_counts) init_total += c;
  ll += std::lgamma(alpha) - std::lgamma(alpha + static_cast<double>(init_total));
  for (int k = 0; k < K; ++k)
    ll += std::lgamma(alpha * snap.beta[k] + static_cast<double>(init_counts[k])) -
          std::lgamma(alpha * snap.beta[k]);

  // symmetric Dirichlet density over (beta_1..beta_K, remainder)
  const double a0 = snap.hyper.gamma / static_cast<double>(K + 1);
  ll += std::lgamma(snap.hyper.gamma) -
        static_cast<double>(K + 1) * std::lgamma(a0);
  for (double b : snap.beta) ll += (a0 - 1.0) * std::log(std::max(b, 1e-300));
  return ll;
}

namespace {
void best_assignment(const std::vector<std::vector<long>>& overlap,
                     std::vector<int>& current, std::vector<char>& used,
                     std::size_t row, long acc, long& best) {
  if (row == current.size()) {
    best = std::max(best, acc);
    return;
  }
  for (std::size_t j = 0; j < used.size(); ++j) {
    if (used[j]) continue;
    used[j] = 1;
    best_assignment(overlap, current, used, row + 1, acc + overlap[row][j], best);
    used[j] = 0;
  }
}
}  // namespace

double matched_hamming_accuracy(const std::vector<int>& truth,
                                const std::vector<int>& pred) {
  if (truth.size() != pred.size() || truth.empty())
    throw Error(ErrorCode::LengthMismatch, "label sequences must match in length");
  auto compact = [](const std::vector<int>& v, std::vector<int>& out) {
    std::map<int, int> m;
    out.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      auto [it, fresh] = m.emplace(v[i], static_cast<int>(m.size()));
      out[i] = it->second;
      (void)fresh;
    }
    return static_cast<int>(m.size());
  };
  std::vector<int> a, b;
  int Ka = compact(truth, a);
  int Kb = compact(pred, b);
  const bool swap_sides = Ka > Kb;
  if (swap_sides) {
    std::swap(a, b);
    std::swap(Ka, Kb);
  }
  std::vector<std::vector<long>> overlap(Ka, std::vector<long>(Kb, 0));
  for (std::size_t i = 0; i < a.size(); ++i) ++overlap[a[i]][b[i]];

  double arrangements = 1.0;
  for (int i = 0; i < Ka; ++i) arrangements *= static_cast<double>(Kb - i);
  long best = 0;
  if (Ka <= 8 && arrangements <= 2e6) {
    std::vector<int> cur(Ka);
    std::vector<char> used(Kb, 0);
    best_assignment(overlap, cur, used, 0, 0, best);
  } else {
    // greedy fallback for very fragmented labelings
    std::vector<char> used(Kb, 0);
    for (int pick = 0; pick < Ka; ++pick) {
      long b0 = -1;
      int bi = -1, bj = -1;
      for (int i = 0; i < Ka; ++i)
        for (int j = 0; j < Kb; ++j)
          if (!used[j] && overlap[i][j] > b0) {
            b0 = overlap[i][j];
            bi = i;
            bj = j;
          }
      if (bi < 0) break;
      best += b0;
      used[bj] = 1;
      for (int j = 0; j < Kb; ++j) overlap[bi][j] = -1;
    }
  }
  return static_cast<double>(best) / static_cast<double>(truth.size());
}

long label_switch_count(const StateSequence& seq, const AmplitudeSeries& x) {
  long switches = 0;
  for (std::size_t t = 1; t < seq.labels.size(); ++t) {
    if (x.is_boundary(t)) continue;
    if (seq.labels[t] != seq.labels[t - 1]) ++switches;
  }
  return switches;
}

}  // namespace gaitseg
