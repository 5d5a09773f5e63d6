#ifndef GAITSEG_RNG_HPP
#define GAITSEG_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace gaitseg {

/// Deterministic RNG handle. One handle per sequential computation; never
/// share a handle across concurrent calls.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Derive an independent child stream, e.g. one per pipeline stage or
  /// chain. Stable across platforms (FNV-1a on the tag).
  Rng split(std::string_view tag) const {
    std::uint64_t h = 14695981039346656037ull;
    for (char c : tag) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    return Rng(seed_ ^ h);
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal(double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(engine_);
  }
  /// Gamma(shape, scale).
  double gamma(double shape, double scale) {
    return std::gamma_distribution<double>(shape, scale)(engine_);
  }
  /// InvGamma(shape, scale): 1/X with X ~ Gamma(shape, 1/scale).
  double inv_gamma(double shape, double scale) {
    double g = gamma(shape, 1.0 / scale);
    return 1.0 / g;
  }
  double beta(double a, double b) {
    double x = gamma(a, 1.0);
    double y = gamma(b, 1.0);
    return x / (x + y);
  }
  double exponential(double mean) {
    return std::exponential_distribution<double>(1.0 / mean)(engine_);
  }
  bool bernoulli(double p) { return uniform() < p; }

  std::vector<double> dirichlet(const std::vector<double>& alpha) {
    std::vector<double> w(alpha.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      // gamma_distribution degenerates for tiny shapes; floor keeps weights proper
      w[i] = gamma(std::max(alpha[i], 1e-12), 1.0);
      if (w[i] <= 0) w[i] = 1e-300;
      sum += w[i];
    }
    for (auto& v : w) v /= sum;
    return w;
  }

  /// Sample an index proportional to the given (unnormalized) weights.
  std::size_t categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u <= acc) return i;
    }
    return weights.size() - 1;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

}  // namespace gaitseg

#endif
