#pragma once

// Exact-kernel Markov path simulation for q-OU and q-BM, the deterministic
// OU <-> BM time change, and fourth-moment / large-jump statistics.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "qtangent/kernels.hpp"
#include "qtangent/parallel.hpp"
#include "qtangent/sampling.hpp"

namespace qtangent {

struct TimeGrid {
  double t0 = 0.0;
  double t1 = 1.0;
  int steps = 1;

  void validate() const;
  double dt() const { return (t1 - t0) / steps; }
  double time(int i) const { return i == steps ? t1 : t0 + i * dt(); }
  Eigen::ArrayXd times() const;
};

enum class InitKind { Stationary, Fixed, Origin };

/// Stationary: q-OU from the q-normal; q-BM from its marginal at t0 > 0.
/// Origin: q-BM started at 0 at t0 = 0.
struct InitialCondition {
  InitKind kind = InitKind::Stationary;
  double x = 0.0;

  static InitialCondition stationary() { return {InitKind::Stationary, 0.0}; }
  static InitialCondition fixed(double x) { return {InitKind::Fixed, x}; }
  static InitialCondition origin() { return {InitKind::Origin, 0.0}; }
};

struct PathSample {
  Process process = Process::QOU;
  double q = 0.0;
  TimeGrid grid;
  Eigen::ArrayXd times;
  Eigen::ArrayXd values;
  SeedSpec seed;
};

struct JumpStats {
  double max_abs_increment = 0.0;
  double threshold = 0.0;
  long exceed_count = 0;
  long ensemble_size = 0;

  double fraction() const { return ensemble_size > 0 ? double(exceed_count) / double(ensemble_size) : 0.0; }
};

struct SimulationOptions {
  int nodes = 128;
  std::size_t cache_capacity = 4096;
  // conditioning states are snapped to this fraction of the support width
  double quantum = 1e-4;
};

/// Draws one transition of q-OU or q-BM by inverse CDF from a cached
/// conditional table. Owned by a single thread.
class TransitionSampler {
 public:
  TransitionSampler(const QParamsd& p, const SimulationOptions& options = {});

  double qou_step(double delta, double x, double u);
  double qbm_step(double t1, double t2, double y1, double u);
  /// q-normal (scale = 1) or its sqrt(scale) dilation, the q-BM marginal.
  double marginal(double scale, double u);

  const QParamsd& params() const { return p_; }
  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

 private:
  struct Key {
    int kind;
    std::uint64_t a, b;
    std::int64_t cell;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };
  using Entry = std::pair<Key, std::shared_ptr<const CdfTable>>;

  const CdfTable& lookup(const Key& key, const std::function<CdfTable()>& build);

  QParamsd p_;
  SimulationOptions options_;
  std::shared_ptr<const CdfTable> qnormal_;
  std::list<Entry> lru_;
  std::unordered_map<Key, std::list<Entry>::iterator, KeyHash> index_;
  std::size_t hits_ = 0, misses_ = 0;
};

PathSample simulate_path(Process process, const QParamsd& p, const TimeGrid& grid, const InitialCondition& init,
                         const SeedSpec& seed, TransitionSampler& sampler);
PathSample simulate_path(Process process, const QParamsd& p, const TimeGrid& grid, const InitialCondition& init,
                         const SeedSpec& seed, const SimulationOptions& options = {});

/// W_{e^{2t}} = e^t X_t, on the remapped time grid.
PathSample ou_to_bm(const PathSample& path);
/// X_t = e^{-t} W_{e^{2t}}; needs all times > 0.
PathSample bm_to_ou(const PathSample& path);

double moment4_closed(double q, double s, double t);

struct MomentEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  bool std_error_defined = false;
  long samples = 0;
};

MomentEstimate moment4_estimate(double q, double s, double t, long n_samples, const SeedSpec& seed, int threads = 0);

double jump_bound(double q, double S, double T, double a);

/// Largest absolute grid increment of each of n_paths q-BM paths on [S, T];
/// path i uses stream index seed.stream_index + i.
std::vector<double> max_increments(double q, double S, double T, int n_paths, int steps, const SeedSpec& seed,
                                   int threads = 0);
JumpStats jump_stats(const std::vector<double>& maxima, double a);
JumpStats sup_jump_estimate(double q, double S, double T, double a, int n_paths, int steps, const SeedSpec& seed,
                            int threads = 0);

/// Standard error sqrt(p (1 - p) / n).
double binomial_std_error(double p, long n);

}  // namespace qtangent
