#include "qtangent/simulate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

namespace qtangent {

void TimeGrid::validate() const {
  if (!(t0 >= 0.0) || !(t1 > t0) || !std::isfinite(t1)) {
    raise(ErrorKind::InvalidTime, "time grid needs 0 <= t0 < t1");
  }
  if (steps < 1) raise(ErrorKind::InvalidParameter, "time grid needs at least one step");
}

Eigen::ArrayXd TimeGrid::times() const {
  Eigen::ArrayXd out(steps + 1);
  for (int i = 0; i <= steps; ++i) out(i) = time(i);
  return out;
}

std::size_t TransitionSampler::KeyHash::operator()(const Key& k) const {
  std::uint64_t h = std::uint64_t(k.kind) * 0x9E3779B97F4A7C15ull;
  for (std::uint64_t v : {k.a, k.b, std::uint64_t(k.cell)}) {
    h ^= v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
  }
  return std::size_t(h);
}

TransitionSampler::TransitionSampler(const QParamsd& p, const SimulationOptions& options) : p_(p), options_(options) {
  if (options_.cache_capacity < 1) options_.cache_capacity = 1;
}

const CdfTable& TransitionSampler::lookup(const Key& key, const std::function<CdfTable()>& build) {
  if (auto it = index_.find(key); it != index_.end()) {
    ++hits_;
    lru_.splice(lru_.begin(), lru_, it->second);
    return *it->second->second;
  }
  ++misses_;
  lru_.emplace_front(key, std::make_shared<const CdfTable>(build()));
  index_[key] = lru_.begin();
  if (lru_.size() > options_.cache_capacity) {
    index_.erase(lru_.back().first);
    lru_.pop_back();
  }
  return *lru_.front().second;
}

namespace {

std::uint64_t bits(double v) { return std::bit_cast<std::uint64_t>(v); }

CdfTable table_for(const TransitionRow<double>& row, int n, NodeHint hint) {
  CdfOptions options;
  options.n = n;
  options.hint = hint;
  return build_cdf([row](double y) { return row(y); }, row.support(), options);
}

}  // namespace

double TransitionSampler::qou_step(double delta, double x, double u) {
  const double width = 2.0 * p_.x_plus;
  const double h = options_.quantum * width;
  const std::int64_t cell = std::llround(x / h);
  const double xq = std::clamp(double(cell) * h, p_.x_minus, p_.x_plus);
  const auto& table = lookup({0, bits(delta), 0, cell}, [&] {
    const double one_minus_q = 1.0 - p_.q;
    const double chord = std::sqrt(std::max(4.0 / one_minus_q - xq * xq, 0.0));
    NodeHint hint{xq * std::exp(-delta),
                  std::max({0.5 * delta * chord, delta * delta / std::sqrt(one_minus_q), 1e-9 * width})};
    return table_for(TransitionRow<double>::qou(p_, delta, xq), options_.nodes, hint);
  });
  return std::clamp(sample(table, u), p_.x_minus, p_.x_plus);
}

double TransitionSampler::qbm_step(double t1, double t2, double y1, double u) {
  const double one_minus_q = 1.0 - p_.q;
  const double bound2 = 2.0 * std::sqrt(t2 / one_minus_q);
  if (t1 == 0.0) {
    const auto& table = lookup({1, bits(t1), bits(t2), 0}, [&] {
      return table_for(TransitionRow<double>::qbm(p_, 0.0, t2, 0.0), options_.nodes, {});
    });
    return std::clamp(sample(table, u), -bound2, bound2);
  }
  const double bound1 = 2.0 * std::sqrt(t1 / one_minus_q);
  const double width = 2.0 * bound1;
  const double h = options_.quantum * width;
  const std::int64_t cell = std::llround(y1 / h);
  const double yq = std::clamp(double(cell) * h, -bound1, bound1);
  const auto& table = lookup({1, bits(t1), bits(t2), cell}, [&] {
    const double dt = t2 - t1;
    const double c = std::sqrt(std::max(4.0 * t1 / one_minus_q - yq * yq, 0.0)) / (2.0 * t1);
    NodeHint hint{yq * (1.0 + dt / (2.0 * t1)),
                  std::max({c * dt, dt * dt / std::sqrt(t1 * t1 * t1 * one_minus_q), 1e-9 * width})};
    return table_for(TransitionRow<double>::qbm(p_, t1, t2, yq), options_.nodes, hint);
  });
  return std::clamp(sample(table, u), -bound2, bound2);
}

double TransitionSampler::marginal(double scale, double u) {
  if (!qnormal_) {
    const QParamsd p = p_;
    CdfOptions options;
    options.n = std::max(options_.nodes, 256);
    qnormal_ = std::make_shared<const CdfTable>(
        build_cdf([p](double x) { return qnormal_pdf(p, x); }, {p.x_minus, p.x_plus}, options));
  }
  return std::sqrt(scale) * sample(*qnormal_, u);
}

PathSample simulate_path(Process process, const QParamsd& p, const TimeGrid& grid, const InitialCondition& init,
                         const SeedSpec& seed, TransitionSampler& sampler) {
  grid.validate();
  if (sampler.params().q != p.q) raise(ErrorKind::InvalidParameter, "sampler was built for a different q");
  PathSample path;
  path.process = process;
  path.q = p.q;
  path.grid = grid;
  path.seed = seed;
  path.times = grid.times();
  path.values.resize(grid.steps + 1);
  UniformStream u(seed);

  if (process == Process::QOU) {
    switch (init.kind) {
      case InitKind::Stationary:
        path.values(0) = sampler.marginal(1.0, u.next());
        break;
      case InitKind::Fixed:
        if (!(std::abs(init.x) <= p.x_plus)) {
          raise(ErrorKind::InvalidInit, "q-OU initial state outside support: " + std::to_string(init.x));
        }
        path.values(0) = init.x;
        break;
      case InitKind::Origin:
        raise(ErrorKind::InvalidInit, "q-OU takes a stationary or fixed initial state");
    }
    const double delta = grid.dt();
    for (int i = 0; i < grid.steps; ++i) path.values(i + 1) = sampler.qou_step(delta, path.values(i), u.next());
    return path;
  }

  if (process == Process::QBM) {
    switch (init.kind) {
      case InitKind::Origin:
        if (grid.t0 != 0.0) raise(ErrorKind::InvalidInit, "q-BM starts at the origin only at t0 = 0");
        path.values(0) = 0.0;
        break;
      case InitKind::Fixed: {
        const double bound = 2.0 * std::sqrt(grid.t0 / (1.0 - p.q));
        if (!(grid.t0 > 0.0) || !(std::abs(init.x) <= bound)) {
          raise(ErrorKind::InvalidInit, "q-BM fixed start needs t0 > 0 and |x| <= " + std::to_string(bound));
        }
        path.values(0) = init.x;
        break;
      }
      case InitKind::Stationary:
        if (!(grid.t0 > 0.0)) raise(ErrorKind::InvalidInit, "q-BM marginal start needs t0 > 0");
        path.values(0) = sampler.marginal(grid.t0, u.next());
        break;
    }
    for (int i = 0; i < grid.steps; ++i) {
      path.values(i + 1) = sampler.qbm_step(grid.time(i), grid.time(i + 1), path.values(i), u.next());
    }
    return path;
  }

  raise(ErrorKind::UnknownProcess, "simulation supports qou and qbm only");
}

PathSample simulate_path(Process process, const QParamsd& p, const TimeGrid& grid, const InitialCondition& init,
                         const SeedSpec& seed, const SimulationOptions& options) {
  TransitionSampler sampler(p, options);
  return simulate_path(process, p, grid, init, seed, sampler);
}

PathSample ou_to_bm(const PathSample& path) {
  if (path.process != Process::QOU) raise(ErrorKind::UnknownProcess, "ou_to_bm expects a q-OU path");
  PathSample out = path;
  out.process = Process::QBM;
  out.times = (2.0 * path.times).exp();
  out.values = path.times.exp() * path.values;
  return out;
}

PathSample bm_to_ou(const PathSample& path) {
  if (path.process != Process::QBM) raise(ErrorKind::UnknownProcess, "bm_to_ou expects a q-BM path");
  if (!(path.times > 0.0).all()) raise(ErrorKind::InvalidTime, "bm_to_ou needs all times > 0");
  PathSample out = path;
  out.process = Process::QOU;
  out.times = 0.5 * path.times.log();
  out.values = path.values / path.times.sqrt();
  return out;
}

namespace {

void require_times(double s, double t) {
  if (!(s >= 0.0) || !(t > s) || !std::isfinite(t)) {
    raise(ErrorKind::InvalidTime, "need 0 <= s < t, got s=" + std::to_string(s) + " t=" + std::to_string(t));
  }
}

}  // namespace

double moment4_closed(double q, double s, double t) {
  const QParamsd p(q);
  if (s == t && s >= 0.0) return 0.0;
  require_times(s, t);
  const double d = t - s;
  return (2.0 + p.q) * d * d + 2.0 * (1.0 - p.q) * s * d;
}

MomentEstimate moment4_estimate(double q, double s, double t, long n_samples, const SeedSpec& seed, int threads) {
  const QParamsd p(q);
  require_times(s, t);
  if (n_samples < 1) raise(ErrorKind::InvalidParameter, "moment4_estimate needs n_samples >= 1");
  constexpr long kBlock = 4096;
  const std::size_t blocks = std::size_t((n_samples + kBlock - 1) / kBlock);
  const int workers = resolve_threads(threads);
  std::vector<std::unique_ptr<TransitionSampler>> samplers(static_cast<std::size_t>(workers));
  std::vector<double> sums(blocks), squares(blocks);

  parallel_for(blocks, workers, [&](std::size_t b, int worker) {
    auto& sampler = samplers[std::size_t(worker)];
    if (!sampler) sampler = std::make_unique<TransitionSampler>(p);
    UniformStream u({seed.base_seed, seed.stream_index + b});
    const long begin = long(b) * kBlock;
    const long end = std::min(n_samples, begin + kBlock);
    double sum = 0.0, sq = 0.0;
    for (long i = begin; i < end; ++i) {
      double ws = 0.0, wt;
      if (s == 0.0) {
        wt = sampler->marginal(t, u.next());
      } else {
        ws = sampler->marginal(s, u.next());
        wt = sampler->qbm_step(s, t, ws, u.next());
      }
      const double d2 = (wt - ws) * (wt - ws);
      sum += d2 * d2;
      sq += d2 * d2 * d2 * d2;
    }
    sums[b] = sum;
    squares[b] = sq;
  });

  double sum = 0.0, sq = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    sum += sums[b];
    sq += squares[b];
  }
  MomentEstimate out;
  out.samples = n_samples;
  const double n = double(n_samples);
  out.estimate = sum / n;
  if (n_samples > 1) {
    const double var = std::max(0.0, (sq - n * out.estimate * out.estimate) / (n - 1.0));
    out.std_error = std::sqrt(var / n);
    out.std_error_defined = true;
  } else {
    out.std_error = std::numeric_limits<double>::infinity();
  }
  return out;
}

double jump_bound(double q, double S, double T, double a) {
  const QParamsd p(q);
  require_times(S, T);
  if (!(a > 0.0)) raise(ErrorKind::InvalidThreshold, "jump threshold must be positive");
  return std::min(1.0, (1.0 - p.q) * (T * T - S * S) / (a * a * a * a));
}

std::vector<double> max_increments(double q, double S, double T, int n_paths, int steps, const SeedSpec& seed,
                                   int threads) {
  const QParamsd p(q);
  require_times(S, T);
  if (n_paths < 1) raise(ErrorKind::InvalidParameter, "need at least one path");
  const TimeGrid grid{S, T, steps};
  grid.validate();
  const InitialCondition init = S == 0.0 ? InitialCondition::origin() : InitialCondition::stationary();
  const int workers = resolve_threads(threads);
  std::vector<std::unique_ptr<TransitionSampler>> samplers(static_cast<std::size_t>(workers));
  std::vector<double> maxima(static_cast<std::size_t>(n_paths));
  parallel_for(std::size_t(n_paths), workers, [&](std::size_t i, int worker) {
    auto& sampler = samplers[std::size_t(worker)];
    if (!sampler) sampler = std::make_unique<TransitionSampler>(p);
    const auto path = simulate_path(Process::QBM, p, grid, init, {seed.base_seed, seed.stream_index + i}, *sampler);
    const Eigen::Index n = path.values.size();
    maxima[i] = (path.values.tail(n - 1) - path.values.head(n - 1)).abs().maxCoeff();
  });
  return maxima;
}

JumpStats jump_stats(const std::vector<double>& maxima, double a) {
  if (!(a >= 0.0)) raise(ErrorKind::InvalidThreshold, "jump threshold must be >= 0");
  JumpStats stats;
  stats.threshold = a;
  stats.ensemble_size = long(maxima.size());
  for (double m : maxima) {
    stats.max_abs_increment = std::max(stats.max_abs_increment, m);
    if (m > a) ++stats.exceed_count;
  }
  return stats;
}

JumpStats sup_jump_estimate(double q, double S, double T, double a, int n_paths, int steps, const SeedSpec& seed,
                            int threads) {
  if (!(a >= 0.0)) raise(ErrorKind::InvalidThreshold, "jump threshold must be >= 0");
  return jump_stats(max_increments(q, S, T, n_paths, steps, seed, threads), a);
}

double binomial_std_error(double p, long n) {
  if (n < 1) return std::numeric_limits<double>::infinity();
  const double pc = std::clamp(p, 0.0, 1.0);
  return std::sqrt(pc * (1.0 - pc) / double(n));
}

}  // namespace qtangent
