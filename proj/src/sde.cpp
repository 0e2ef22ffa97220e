#include "fluxnet/sde.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "fluxnet/error.hpp"

namespace fluxnet {

std::string_view scheme_name(Scheme s) {
  return s == Scheme::Exact ? "exact" : "euler-maruyama";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "euler-maruyama" || name == "em") return Scheme::EulerMaruyama;
  if (name == "exact") return Scheme::Exact;
  throw Error(Errc::InvalidConfig,
              "unknown scheme '" + std::string(name) +
                  "' (expected euler-maruyama or exact)");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 1));
}

namespace {

struct Timescales {
  double fastest = 0.0;
  double slowest = 0.0;
  double tau_min = std::numeric_limits<double>::infinity();
  double tau_max = 0.0;
  bool stable = false;
};

Timescales timescales(const Network& net) {
  const Matrix a = rate_matrix(net).a;
  Timescales ts;
  ts.fastest = fastest_decay_rate(a);
  ts.slowest = slowest_decay_rate(a);
  ts.stable = spectral_abscissa(a) < 0.0;
  for (const auto& ch : net.noise()) {
    if (const auto* o = std::get_if<OuNoise>(&ch.kind)) {
      ts.tau_min = std::min(ts.tau_min, o->tau);
      ts.tau_max = std::max(ts.tau_max, o->tau);
    }
  }
  return ts;
}

[[noreturn]] void bad_config(const std::string& msg) {
  throw Error(Errc::InvalidConfig, msg);
}

}  // namespace

SimConfig resolve_config(const Network& net, SimConfig cfg) {
  const Timescales ts = timescales(net);
  if (cfg.dt == 0.0) {
    if (!(ts.fastest > 0.0)) bad_config("cannot choose dt automatically: A has no decay");
    cfg.dt = 0.01 / ts.fastest;
    if (std::isfinite(ts.tau_min)) cfg.dt = std::min(cfg.dt, 1e-2 * ts.tau_min);
  }
  double slow = ts.stable ? ts.slowest : 0.0;
  if (ts.tau_max > 0.0) slow = std::min(slow, 1.0 / ts.tau_max);
  if (cfg.burn_in < 0.0) {
    if (!(slow > 0.0)) bad_config("cannot choose burn-in automatically: unstable rate matrix");
    cfg.burn_in = 10.0 / slow;
  }
  if (cfg.t_end == 0.0) {
    if (!(slow > 0.0)) bad_config("cannot choose t_end automatically: unstable rate matrix");
    cfg.t_end = cfg.burn_in + 1000.0 / slow;
  }
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) bad_config("dt must be > 0");
  if (!(cfg.burn_in >= 0.0)) bad_config("burn-in must be >= 0");
  if (!(cfg.burn_in < cfg.t_end)) bad_config("burn-in must be < t_end");
  if (cfg.ensemble < 1) bad_config("ensemble must be >= 1");
  if (cfg.record_stride < 1) bad_config("stride must be >= 1");
  if (cfg.threads < 1) bad_config("threads must be >= 1");
  if (cfg.x0 && static_cast<std::size_t>(cfg.x0->size()) != net.num_species()) {
    bad_config("x0 has the wrong dimension");
  }
  if (cfg.t_end / cfg.dt > 1e12) bad_config("t_end / dt is too large");
  return cfg;
}

Stepper::Stepper(const Network& net, Scheme scheme, double dt)
    : scheme_(scheme), num_species_(net.num_species()), dt_(dt) {
  if (!(dt > 0.0)) throw Error(Errc::InvalidConfig, "dt must be > 0");
  const AugmentedSystem sys = augmented_system(net);
  state_dim_ = static_cast<std::size_t>(sys.drift.rows());
  if (scheme_ == Scheme::EulerMaruyama) {
    a_ = rate_matrix(net).a;
    input_ = net.input_vector();
    sqrt_dt_ = std::sqrt(dt);
    for (const auto& ch : net.noise()) {
      if (const auto* w = std::get_if<WhiteNoise>(&ch.kind)) {
        white_.emplace_back(ch.species, w->sigma);
      }
    }
    for (const std::size_t c : sys.ou_channels) {
      const auto& ch = net.noise()[c];
      const auto& o = std::get<OuNoise>(ch.kind);
      const double decay = std::exp(-dt / o.tau);
      ou_.push_back({ch.species, decay,
                     o.stationary_sd * std::sqrt(-std::expm1(-2.0 * dt / o.tau))});
    }
    noise_dim_ = white_.size() + ou_.size();
    return;
  }

  // Exact transition: Van Loan block exponentials for the covariance and
  // the integrated offset.
  const auto n = static_cast<Eigen::Index>(state_dim_);
  const Matrix s = sys.diffusion * sys.diffusion.transpose();
  Matrix block = Matrix::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = -sys.drift * dt;
  block.topRightCorner(n, n) = s * dt;
  block.bottomRightCorner(n, n) = sys.drift.transpose() * dt;
  const Matrix e = expm(block);
  transition_ = e.bottomRightCorner(n, n).transpose();
  Matrix q = transition_ * e.topRightCorner(n, n);
  q = 0.5 * (q + q.transpose());

  Matrix aug = Matrix::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = sys.drift * dt;
  aug.topRightCorner(n, 1) = sys.offset * dt;
  shift_ = expm(aug).topRightCorner(n, 1);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(q);
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  noise_factor_ = eig.eigenvectors() * root.asDiagonal();
  noise_dim_ = state_dim_;
}

void Stepper::step(std::span<double> z, std::span<const double> normals) const {
  Eigen::Map<Vector> state(z.data(), static_cast<Eigen::Index>(z.size()));
  if (scheme_ == Scheme::Exact) {
    const Eigen::Map<const Vector> w(normals.data(),
                                     static_cast<Eigen::Index>(normals.size()));
    const Vector next = transition_ * state + shift_ + noise_factor_ * w;
    state = next;
    return;
  }
  const auto m = static_cast<Eigen::Index>(num_species_);
  auto x = state.head(m);
  Vector drift = a_ * x + input_;
  for (std::size_t k = 0; k < ou_.size(); ++k) {
    drift(static_cast<Eigen::Index>(ou_[k].species)) +=
        state(m + static_cast<Eigen::Index>(k));
  }
  x += drift * dt_;
  std::size_t used = 0;
  for (const auto& [species, sigma] : white_) {
    x(static_cast<Eigen::Index>(species)) += sigma * sqrt_dt_ * normals[used++];
  }
  for (std::size_t k = 0; k < ou_.size(); ++k) {
    double& xi = state(m + static_cast<Eigen::Index>(k));
    xi = xi * ou_[k].decay + ou_[k].shock * normals[used++];
  }
}

std::vector<std::string> state_names(const Network& net) {
  std::vector<std::string> names = net.species();
  for (const std::size_t c : augmented_system(net).ou_channels) {
    names.push_back("xi_" + net.species_name(net.noise()[c].species));
  }
  return names;
}

namespace {

// Per-batch raw sums of shifted samples y = z - ref.
struct TrajectoryResult {
  Matrix batch_sum;     // dim x batches
  Matrix batch_sumsq;   // dim x batches
  std::exception_ptr error;
};

struct RunPlan {
  long long total_steps = 0;
  long long first_sample_step = 0;
  long long batches = 0;
  long long batch_size = 0;
};

RunPlan plan_run(const SimConfig& cfg) {
  RunPlan p;
  p.total_steps = std::llround(cfg.t_end / cfg.dt);
  const long long burn = std::llround(cfg.burn_in / cfg.dt);
  const long long stride = cfg.record_stride;
  // Recorded steps s >= burn with s % stride == 0.
  const long long first = ((burn + stride - 1) / stride) * stride;
  const long long n = first > p.total_steps ? 0 : (p.total_steps - first) / stride + 1;
  if (n < 1) {
    throw Error(Errc::InvalidConfig, "no samples after burn-in; increase t_end");
  }
  p.batches = std::max<long long>(1, static_cast<long long>(std::sqrt(static_cast<double>(n))));
  p.batch_size = n / p.batches;
  // Surplus samples at the start are discarded so batches are equal.
  p.first_sample_step = first + (n - p.batches * p.batch_size) * stride;
  return p;
}

Vector initial_species(const Network& net, const SimConfig& cfg) {
  if (cfg.x0) return *cfg.x0;
  const Matrix a = rate_matrix(net).a;
  if (spectral_abscissa(a) < 0.0) {
    return a.partialPivLu().solve(-net.input_vector());
  }
  return Vector::Zero(static_cast<Eigen::Index>(net.num_species()));
}

// Initial OU states are drawn from their stationary law.
void init_state(const Network& net, const Vector& x0, std::span<double> z,
                std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  const std::size_t m = net.num_species();
  for (std::size_t i = 0; i < m; ++i) z[i] = x0(static_cast<Eigen::Index>(i));
  std::size_t k = m;
  for (const std::size_t c : augmented_system(net).ou_channels) {
    z[k++] = std::get<OuNoise>(net.noise()[c].kind).stationary_sd * normal(rng);
  }
}

[[noreturn]] void nonfinite(long long step, double dt) {
  std::ostringstream msg;
  msg << "state became non-finite at step " << step << " (t = " << step * dt
      << "); try a smaller dt";
  throw Error(Errc::NonfiniteState, msg.str());
}

void run_trajectory(const Network& net, const SimConfig& cfg,
                    const RunPlan& plan, const Vector& ref,
                    std::size_t index, const TrajectoryObserver* observer,
                    TrajectoryResult& out) {
  Stepper stepper(net, cfg.scheme, cfg.dt);
  const std::size_t dim = stepper.state_dim();
  std::mt19937_64 rng(trajectory_seed(cfg.seed, index));
  std::normal_distribution<double> normal;
  std::vector<double> z(dim);
  std::vector<double> w(stepper.noise_dim());
  init_state(net, initial_species(net, cfg), z, rng);

  out.batch_sum = Matrix::Zero(static_cast<Eigen::Index>(dim), plan.batches);
  out.batch_sumsq = Matrix::Zero(static_cast<Eigen::Index>(dim), plan.batches);
  const long long stride = cfg.record_stride;
  auto record = [&](long long s) {
    if (observer && *observer) (*observer)(static_cast<double>(s) * cfg.dt, z);
    if (s < plan.first_sample_step) return;
    const long long sample = (s - plan.first_sample_step) / stride;
    const auto batch = static_cast<Eigen::Index>(sample / plan.batch_size);
    for (std::size_t d = 0; d < dim; ++d) {
      const double y = z[d] - ref(static_cast<Eigen::Index>(d));
      out.batch_sum(static_cast<Eigen::Index>(d), batch) += y;
      out.batch_sumsq(static_cast<Eigen::Index>(d), batch) += y * y;
    }
  };
  record(0);
  for (long long s = 1; s <= plan.total_steps; ++s) {
    for (auto& v : w) v = normal(rng);
    stepper.step(z, w);
    if (s % stride == 0) {
      for (const double v : z) {
        if (!std::isfinite(v)) nonfinite(s, cfg.dt);
      }
      record(s);
    }
  }
  for (const double v : z) {
    if (!std::isfinite(v)) nonfinite(plan.total_steps, cfg.dt);
  }
}

}  // namespace

MomentEstimates simulate(const Network& net, const SimConfig& cfg_in,
                         const TrajectoryObserver& observer) {
  const SimConfig cfg = resolve_config(net, cfg_in);
  const RunPlan plan = plan_run(cfg);
  const auto names = state_names(net);
  const std::size_t dim = names.size();

  Vector ref = Vector::Zero(static_cast<Eigen::Index>(dim));
  ref.head(static_cast<Eigen::Index>(net.num_species())) =
      initial_species(net, cfg);

  std::vector<TrajectoryResult> slots(static_cast<std::size_t>(cfg.ensemble));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < slots.size(); i = next++) {
      try {
        run_trajectory(net, cfg, plan, ref, i, i == 0 ? &observer : nullptr,
                       slots[i]);
      } catch (...) {
        slots[i].error = std::current_exception();
      }
    }
  };
  const int nthreads = std::min<int>(cfg.threads, cfg.ensemble);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  }
  for (const auto& s : slots) {
    if (s.error) std::rethrow_exception(s.error);
  }

  // Order-fixed reduction over trajectories.
  const auto d = static_cast<Eigen::Index>(dim);
  const double b = static_cast<double>(plan.batch_size);
  const auto nb = static_cast<Eigen::Index>(plan.batches) * cfg.ensemble;
  Matrix sums(d, nb);
  Matrix sumsq(d, nb);
  for (std::size_t t = 0; t < slots.size(); ++t) {
    const auto off = static_cast<Eigen::Index>(t) * plan.batches;
    sums.middleCols(off, plan.batches) = slots[t].batch_sum;
    sumsq.middleCols(off, plan.batches) = slots[t].batch_sumsq;
  }
  const double total = b * static_cast<double>(nb);
  const Vector mean_shift = sums.rowwise().sum() / total;

  MomentEstimates est;
  est.names = names;
  est.config = cfg;
  est.seed = cfg.seed;
  est.n_samples = static_cast<std::size_t>(total);
  est.n_batches = static_cast<std::size_t>(nb);
  est.mean = mean_shift + ref;
  est.variance = Vector::Zero(d);
  est.mean_stderr = Vector::Zero(d);
  est.variance_stderr = Vector::Zero(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double mu = mean_shift(i);
    Vector bmean(nb);
    Vector bvar(nb);
    for (Eigen::Index j = 0; j < nb; ++j) {
      bmean(j) = sums(i, j) / b;
      bvar(j) = std::max(0.0, (sumsq(i, j) - 2.0 * mu * sums(i, j)) / b + mu * mu);
    }
    est.variance(i) = bvar.mean();
    if (nb > 1) {
      const double dn = static_cast<double>(nb);
      est.mean_stderr(i) = std::sqrt((bmean.array() - bmean.mean()).square().sum() /
                                     (dn - 1.0) / dn);
      est.variance_stderr(i) = std::sqrt((bvar.array() - bvar.mean()).square().sum() /
                                         (dn - 1.0) / dn);
    }
  }
  for (const auto& r : net.reactions()) {
    const auto i = static_cast<Eigen::Index>(r.source.index());
    est.flux_names.push_back(net.reaction_label(r));
    est.flux_variance.push_back(r.rate * r.rate * est.variance(i));
    est.flux_variance_stderr.push_back(r.rate * r.rate * est.variance_stderr(i));
  }
  return est;
}

ConvergenceReport convergence_check(const Network& net, const Vector& x0_a,
                                    const Vector& x0_b, const SimConfig& cfg) {
  const Matrix a = rate_matrix(net).a;
  const auto m = static_cast<Eigen::Index>(net.num_species());
  if (x0_a.size() != m || x0_b.size() != m) {
    throw Error(Errc::InvalidArgument, "initial conditions have the wrong dimension");
  }
  if (!(spectral_abscissa(a) < -1e-12)) {
    throw Error(Errc::UnstableMatrix, "convergence_check needs a stable rate matrix");
  }
  ConvergenceReport rep;
  rep.lambda_min = slowest_decay_rate(a);
  const double dt = cfg.dt > 0.0 ? cfg.dt : 0.01 / fastest_decay_rate(a);
  const double horizon = cfg.t_end > 0.0 ? cfg.t_end : 10.0 / rep.lambda_min;
  const long long steps = std::llround(horizon / dt);
  const long long stride = std::max(1, cfg.record_stride);
  if (steps < 2 * stride) {
    throw Error(Errc::InvalidConfig, "horizon too short for the chosen dt");
  }

  const Stepper stepper(net, cfg.scheme, dt);
  std::mt19937_64 rng(trajectory_seed(cfg.seed, 0));
  std::normal_distribution<double> normal;
  std::vector<double> za(stepper.state_dim()), zb(stepper.state_dim());
  init_state(net, x0_a, za, rng);
  std::copy(za.begin() + m, za.end(), zb.begin() + m);
  for (Eigen::Index i = 0; i < m; ++i) zb[static_cast<std::size_t>(i)] = x0_b(i);
  std::vector<double> w(stepper.noise_dim());

  const Vector d0 = x0_a - x0_b;
  rep.identical_start = d0.lpNorm<Eigen::Infinity>() == 0.0;
  for (long long s = 1; s <= steps; ++s) {
    for (auto& v : w) v = normal(rng);
    stepper.step(za, w);
    stepper.step(zb, w);
    if (s % stride != 0) continue;
    const double t = static_cast<double>(s) * dt;
    Vector diff(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto k = static_cast<std::size_t>(i);
      diff(i) = za[k] - zb[k];
    }
    if (!diff.allFinite()) nonfinite(s, dt);
    rep.times.push_back(t);
    rep.distance.push_back(diff.norm());
    if (!rep.identical_start) {
      const Vector exact = expm(a * t) * d0;
      const double scale = exact.lpNorm<Eigen::Infinity>();
      if (scale > 1e-280) {
        rep.max_relative_error = std::max(
            rep.max_relative_error, (diff - exact).lpNorm<Eigen::Infinity>() / scale);
      }
    } else {
      rep.max_relative_error =
          std::max(rep.max_relative_error, diff.lpNorm<Eigen::Infinity>());
    }
  }

  if (rep.identical_start) {
    rep.fitted_rate = std::numeric_limits<double>::infinity();
    rep.rate_ok = rep.max_relative_error == 0.0;
    return rep;
  }
  std::vector<double> tx, ly;
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    if (rep.times[i] >= 0.5 * horizon && rep.distance[i] > 0.0) {
      tx.push_back(rep.times[i]);
      ly.push_back(std::log(rep.distance[i]));
    }
  }
  if (tx.size() < 2) {
    throw Error(Errc::InvalidConfig, "too few recorded points to fit a decay rate");
  }
  rep.fitted_rate = -fit_line(tx, ly).slope;
  rep.rate_ok = rep.fitted_rate >= 0.9 * rep.lambda_min;
  return rep;
}

Observable parse_observable(const Network& net, const std::string& text_in) {
  std::string text;
  for (const char c : text_in) {
    if (c != ' ') text.push_back(c);
  }
  if (text.rfind("xi_", 0) == 0) {
    const auto sp = net.find_species(text.substr(3));
    if (sp) {
      for (std::size_t c = 0; c < net.noise().size(); ++c) {
        if (net.noise()[c].species == *sp) {
          return {Observable::Kind::Input, c, text};
        }
      }
    }
    throw Error(Errc::InvalidArgument, "no noise channel named " + text);
  }
  if (text.find("->") != std::string::npos) {
    for (std::size_t r = 0; r < net.reactions().size(); ++r) {
      if (net.reaction_label(net.reactions()[r]) == text) {
        return {Observable::Kind::Flux, r, text};
      }
    }
    throw Error(Errc::InvalidArgument, "no reaction " + text);
  }
  if (const auto sp = net.find_species(text)) {
    return {Observable::Kind::Species, *sp, text};
  }
  throw Error(Errc::UnknownSpecies, "unknown observable " + text);
}

namespace {

// Position of a noise channel among the OU states (relative to m).
std::size_t ou_state_offset(const Network& net, std::size_t channel) {
  const auto ou = augmented_system(net).ou_channels;
  const auto it = std::find(ou.begin(), ou.end(), channel);
  if (it == ou.end()) {
    throw Error(Errc::WhiteNoiseInput,
                "white-noise channel has no pointwise variance");
  }
  return static_cast<std::size_t>(it - ou.begin());
}

}  // namespace

double exact_observable_variance(const Network& net,
                                 const StationaryStats& stats,
                                 const Observable& obs) {
  switch (obs.kind) {
    case Observable::Kind::Species: {
      const auto i = static_cast<Eigen::Index>(obs.index);
      return stats.joint_cov(i, i);
    }
    case Observable::Kind::Flux: {
      const auto& r = net.reactions().at(obs.index);
      const auto i = static_cast<Eigen::Index>(r.source.index());
      return r.rate * r.rate * stats.joint_cov(i, i);
    }
    case Observable::Kind::Input: {
      const auto i = static_cast<Eigen::Index>(net.num_species() +
                                               ou_state_offset(net, obs.index));
      return stats.joint_cov(i, i);
    }
  }
  return 0.0;
}

VarianceRatioReport variance_ratio(const Network& net, const SimConfig& cfg,
                                   const std::vector<Observable>& observables,
                                   const TrajectoryObserver& observer) {
  const auto ou = augmented_system(net).ou_channels;
  if (ou.empty()) {
    throw Error(Errc::WhiteNoiseInput,
                "variance ratio needs an OU input: white noise has no finite "
                "pointwise variance");
  }
  const auto& ref = net.noise()[ou.front()];
  VarianceRatioReport rep;
  rep.input_label = "xi_" + net.species_name(ref.species);
  rep.input_variance = std::get<OuNoise>(ref.kind).variance();
  const StationaryStats exact = stationary_stats(net);
  rep.moments = simulate(net, cfg, observer);
  const auto m = net.num_species();
  for (const auto& obs : observables) {
    VarianceRatioReport::Entry e;
    e.label = obs.label;
    double var = 0.0;
    double se = 0.0;
    switch (obs.kind) {
      case Observable::Kind::Species:
        var = rep.moments.variance(static_cast<Eigen::Index>(obs.index));
        se = rep.moments.variance_stderr(static_cast<Eigen::Index>(obs.index));
        break;
      case Observable::Kind::Flux:
        var = rep.moments.flux_variance.at(obs.index);
        se = rep.moments.flux_variance_stderr.at(obs.index);
        break;
      case Observable::Kind::Input: {
        const auto i = static_cast<Eigen::Index>(m + ou_state_offset(net, obs.index));
        var = rep.moments.variance(i);
        se = rep.moments.variance_stderr(i);
        break;
      }
    }
    e.r = var / rep.input_variance;
    e.r_stderr = se / rep.input_variance;
    e.r_exact = exact_observable_variance(net, exact, obs) / rep.input_variance;
    rep.entries.push_back(e);
  }
  return rep;
}

}  // namespace fluxnet
