#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fluxnet/network.hpp"
#include "fluxnet/stationary.hpp"

namespace fluxnet {

/// Master seed used whenever the caller does not supply one.
inline constexpr std::uint64_t kDefaultSeed = 20240601;

enum class Scheme {
  /// Euler-Maruyama for the species equations, exact Gaussian update for OU
  /// channels.
  EulerMaruyama,
  /// Exact Gaussian transition of the whole augmented linear system.
  Exact,
};

std::string_view scheme_name(Scheme s);
Scheme parse_scheme(std::string_view name);

/// Zero-valued numeric fields mean "choose automatically" (see
/// resolve_config).
struct SimConfig {
  double dt = 0.0;
  double t_end = 0.0;
  /// Negative: automatic.
  double burn_in = -1.0;
  int ensemble = 1;
  std::uint64_t seed = kDefaultSeed;
  int record_stride = 1;
  Scheme scheme = Scheme::EulerMaruyama;
  int threads = 1;
  /// Initial species state; defaults to the stationary mean.
  std::optional<Vector> x0;
};

/// Fills automatic fields:
///   dt      = 0.01 / max|Re eig(A)|, and <= 0.01 tau_min with OU channels
///   burn_in = 10 / lambda_slow
///   t_end   = burn_in + 1000 / lambda_slow
/// where lambda_slow = min(min|Re eig(A)|, 1 / tau_max). Throws
/// InvalidConfig on inconsistent values.
SimConfig resolve_config(const Network& net, SimConfig cfg);

/// Seed of trajectory `index`: splitmix64(master ^ splitmix64(index + 1)).
std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index);

std::uint64_t splitmix64(std::uint64_t x);

/// One time step of the augmented state z = (x, xi).
class Stepper {
 public:
  Stepper(const Network& net, Scheme scheme, double dt);

  std::size_t state_dim() const noexcept { return state_dim_; }
  std::size_t num_species() const noexcept { return num_species_; }
  /// Standard normals consumed per step.
  std::size_t noise_dim() const noexcept { return noise_dim_; }

  void step(std::span<double> z, std::span<const double> normals) const;

 private:
  Scheme scheme_;
  std::size_t num_species_ = 0;
  std::size_t state_dim_ = 0;
  std::size_t noise_dim_ = 0;
  // Euler-Maruyama
  Matrix a_;
  Vector input_;
  double dt_ = 0.0;
  double sqrt_dt_ = 0.0;
  std::vector<std::pair<std::size_t, double>> white_;    // species, sigma
  struct OuState {
    std::size_t species;
    double decay;
    double shock;
  };
  std::vector<OuState> ou_;
  // Exact
  Matrix transition_;
  Vector shift_;
  Matrix noise_factor_;
};

/// Names of the augmented state: species names then "xi_<species>" for each
/// OU channel.
std::vector<std::string> state_names(const Network& net);

/// Called for trajectory 0 at every recorded step (t >= 0, including
/// burn-in) with the full augmented state.
using TrajectoryObserver =
    std::function<void(double t, std::span<const double> state)>;

struct MomentEstimates {
  std::vector<std::string> names;
  Vector mean;
  Vector variance;
  Vector mean_stderr;
  Vector variance_stderr;
  /// Var(k x_source) per reaction and its standard error.
  std::vector<std::string> flux_names;
  std::vector<double> flux_variance;
  std::vector<double> flux_variance_stderr;
  std::size_t n_samples = 0;
  std::size_t n_batches = 0;
  std::uint64_t seed = 0;
  SimConfig config;
};

/// Ensemble simulation with batch-means moment estimates. Results are
/// bit-identical for any thread count. Throws NonfiniteState on blow-up.
MomentEstimates simulate(const Network& net, const SimConfig& cfg,
                         const TrajectoryObserver& observer = {});

struct ConvergenceReport {
  std::vector<double> times;
  /// ||x_a(t) - x_b(t)||_2 along the coupled pair.
  std::vector<double> distance;
  /// max_t ||simulated difference - e^{At} d0||_inf / ||e^{At} d0||_inf.
  double max_relative_error = 0.0;
  double fitted_rate = 0.0;
  double lambda_min = 0.0;
  bool identical_start = false;
  bool rate_ok = false;
};

/// Runs two trajectories from x0_a and x0_b with one shared noise
/// realization and compares their difference with e^{At}(x0_a - x0_b).
/// The decay rate is fitted on log-distance over the second half of the
/// horizon (default horizon 10 / lambda_min). Errors: UnstableMatrix.
ConvergenceReport convergence_check(const Network& net, const Vector& x0_a,
                                    const Vector& x0_b, const SimConfig& cfg);

struct Observable {
  enum class Kind { Species, Flux, Input };
  Kind kind = Kind::Species;
  /// Species index, reaction index or noise-channel index.
  std::size_t index = 0;
  std::string label;
};

/// "X1" (species), "X1->X2" (flux of that reaction) or "xi_X1" (the noise
/// channel on X1's input).
Observable parse_observable(const Network& net, const std::string& text);

struct VarianceRatioReport {
  std::string input_label;
  double input_variance = 0.0;
  struct Entry {
    std::string label;
    double r = 0.0;
    double r_stderr = 0.0;
    /// Exact value from the augmented stationary covariance.
    double r_exact = 0.0;
  };
  std::vector<Entry> entries;
  MomentEstimates moments;
};

/// r = Var(X) / Var(xi) against the first OU channel. Errors:
/// WhiteNoiseInput when the network has no OU channel.
VarianceRatioReport variance_ratio(const Network& net, const SimConfig& cfg,
                                   const std::vector<Observable>& observables,
                                   const TrajectoryObserver& observer = {});

/// Exact variance of an observable from the augmented stationary covariance.
double exact_observable_variance(const Network& net,
                                 const StationaryStats& stats,
                                 const Observable& obs);

}  // namespace fluxnet
