#ifndef GAITSEG_SEGMENTER_HPP
#define GAITSEG_SEGMENTER_HPP

#include <condition_variable>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <vector>

#include "gaitseg/ar.hpp"
#include "gaitseg/rng.hpp"
#include "gaitseg/types.hpp"

namespace gaitseg {

/// Sticky HDP-HMM hyperparameters.
struct HdpHyper {
  double gamma = 1.0;  // top-level concentration
  double alpha = 1.0;  // transition concentration
  double kappa = 50.0; // sticky self-transition mass
  ArPrior ar_prior;
  int order = 90;
  int truncation = 20;  // blocked sampler only
  bool resample_concentrations = false;

  void validate(bool blocked) const;
};

struct StateSequence {
  std::vector<int> labels;  // 0-based internally; serialized 1-based
  int k_active = 0;
};

/// One retained iteration of either sampler. beta has k_active entries plus
/// a trailing remainder mass; everything sums to 1.
struct ModelSnapshot {
  StateSequence sequence;
  std::vector<ArState> states;
  std::vector<double> beta;  // size k_active + 1 (last entry = remainder)
  std::vector<std::vector<long>> transition_counts;
  HdpHyper hyper;
  int iteration = 0;
  std::uint64_t seed = 0;
  bool truncation_saturated = false;

  void validate() const;
};

/// Per-point empirical state distribution across retained snapshots.
struct StatePosterior {
  std::vector<std::vector<double>> probs;  // T x K
  std::size_t num_states() const { return probs.empty() ? 0 : probs[0].size(); }
  void validate() const;
};

using SnapshotSink = std::function<void(const ModelSnapshot&)>;

/// Direct-assignment Gibbs sampler for the sticky HDP-HMM with AR emissions.
/// New-state births score the point under the conjugate prior predictive;
/// instantiated states use their current AR parameters.
std::vector<ModelSnapshot> gibbs_direct_assignment(const AmplitudeSeries& x,
                                                   const HdpHyper& hyper,
                                                   int iters, Rng& rng,
                                                   const SnapshotSink& sink = nullptr);

/// Weak-limit blocked sampler: forward-filtering backward-sampling of the
/// full label path under an L-state truncation.
std::vector<ModelSnapshot> gibbs_blocked_weak_limit(const AmplitudeSeries& x,
                                                    const HdpHyper& hyper,
                                                    int iters, Rng& rng,
                                                    const SnapshotSink& sink = nullptr);

/// Aggregate retained snapshots into per-point label frequencies, aligning
/// labels to the final snapshot by greedy maximum-overlap matching.
StatePosterior state_posterior(const std::vector<ModelSnapshot>& snapshots,
                               int burn_in);

/// Joint log-density of (labels, transition structure, beta, emissions) for a
/// snapshot; invariant under simultaneous permutation of state indices.
double snapshot_log_density(const ModelSnapshot& snap, const AmplitudeSeries& x);

/// Fraction of points matching after the optimal one-to-one relabeling of the
/// smaller label alphabet onto the larger (exhaustive for <= 8 labels on the
/// smaller side, greedy beyond).
double matched_hamming_accuracy(const std::vector<int>& truth,
                                const std::vector<int>& pred);

/// Count of t with z_t != z_{t-1} within segments.
long label_switch_count(const StateSequence& seq,
                        const AmplitudeSeries& x);

/// Bounded hand-off queue between a sampler (producer) and a serializer or
/// diagnostics consumer; push blocks when full (back-pressure).
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

  void push(T item) {
    std::unique_lock lk(mu_);
    not_full_.wait(lk, [&] { return q_.size() < capacity_ || closed_; });
    if (closed_) throw Error(ErrorCode::StageFailed, "push on closed queue");
    q_.push_back(std::move(item));
    not_empty_.notify_one();
  }

  /// Blocks until an item is available or the queue is closed and drained.
  std::optional<T> pop() {
    std::unique_lock lk(mu_);
    not_empty_.wait(lk, [&] { return !q_.empty() || closed_; });
    if (q_.empty()) return std::nullopt;
    T item = std::move(q_.front());
    q_.pop_front();
    not_full_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard lk(mu_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

 private:
  std::size_t capacity_;
  std::deque<T> q_;
  bool closed_ = false;
  std::mutex mu_;
  std::condition_variable not_empty_, not_full_;
};

}  // namespace gaitseg

#endif
