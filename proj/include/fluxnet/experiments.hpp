#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluxnet/netparse.hpp"
#include "fluxnet/network.hpp"

namespace fluxnet {

using Json = nlohmann::json;

struct InstanceResult {
  /// Everything needed to rebuild the instance (rates, sizes, grid value).
  Json params = Json::object();
  std::optional<std::uint64_t> seed;
  Json observed = Json::object();
  bool pass = true;
};

struct ExperimentReport {
  std::string experiment;
  std::vector<InstanceResult> instances;
  /// Sweep-level claims (slope intervals, boundedness); each must hold.
  std::map<std::string, bool> claims;
  Json summary = Json::object();

  std::size_t violations() const;
  bool passed() const;
  /// {experiment, instances:[{params, seed, observed, pass}], summary}
  Json to_json() const;
};

/// Randomized experiments draw instance i from a generator seeded with
/// trajectory_seed(seed, i). `instance_seed` replays one instance.
struct TrialOptions {
  int trials = 100;
  std::uint64_t seed = 20240601;
  int threads = 1;
  std::optional<std::uint64_t> instance_seed;
};

using Rng = std::mt19937_64;

/// Log-uniform draw on [lo, hi].
double log_uniform(Rng& rng, double lo = 1e-2, double hi = 1e2);

/// Random SSC network on {0, X1..Xm}: arbitrary digraph, not necessarily
/// weakly reversible. Used for the deficiency property.
Network random_ssc_network(Rng& rng, int m);

/// Random weakly reversible network with one linkage class through the zero
/// complex: a random Hamiltonian cycle on {0, X1..Xm} plus extra edges.
Network random_weakly_reversible_network(Rng& rng, int m);

// ---------------------------------------------------------------- chains

/// Strict decrease of the analytic flux variances along a white-noise chain
/// and Var(k_i x_i) <= sigma^2 k_1 / 2.
ExperimentReport check_chain_monotonicity(const std::vector<double>& ks,
                                          double sigma = 1.0);

/// Random chains of length m with log-uniform rates.
ExperimentReport chain_monotonicity_trials(const TrialOptions& opts, int m = 10,
                                           double sigma = 1.0);

/// Var(k_j x_j) / (sigma^2 k_i / 2) for j >= i as k_i (1-based index)
/// runs over `grid` (small values); the limit is 1 and the log-log slope of
/// Var(k_i x_i) in k_i is 1.
ExperimentReport small_k_sweep(const std::vector<double>& ks, int index,
                               const std::vector<double>& grid,
                               double sigma = 1.0);

/// As k_i grows the chain behaves like the chain with X_i removed.
ExperimentReport chain_reduction_check(const std::vector<double>& ks, int index,
                                       const std::vector<double>& grid,
                                       double sigma = 1.0);

// ------------------------------------------------ side systems and loops

/// A closed SSC subsystem on `size` species attached to a chain: it is fed
/// at `entry` and drains back through `exit` only.
struct SideSystem {
  struct Edge {
    std::size_t from = 0;
    std::size_t to = 0;
    double rate = 0.0;
  };
  std::size_t size = 1;
  std::vector<Edge> edges;
  std::size_t entry = 0;
  std::size_t exit = 0;

  Json to_json() const;
};

/// Strongly connected random subsystem with 1..max_size species.
SideSystem random_side_system(Rng& rng, int max_size = 4);

/// 0 -> X1 (I = 1, white sigma), X1 -> 0 @ k1, X1 -> S_entry @ k2,
/// S_exit -> X1 @ k3. Errors: InvalidSideTopology.
Network side_reaction_network(double k1, double k2, double k3,
                              const SideSystem& side, double sigma);

/// Var(k1 x1) with the side system against sigma^2 k1 / 2 without it.
/// k2 = k3 = 0 compares the bare system with itself.
ExperimentReport side_reaction_experiment(double k1, double k2, double k3,
                                          const SideSystem& side,
                                          double sigma = 1.0);

ExperimentReport side_reaction_trials(const TrialOptions& opts,
                                      double sigma = 1.0);

/// Chain X1..Xn with flux c from X_n into the subsystem, whose exit returns
/// to X1 with rate alpha. Errors: InvalidLoopTopology.
Network feedback_network(const std::vector<double>& ks, const SideSystem& sub,
                         double c, double alpha, double sigma);

/// Exit-flux variance Var(k_n x_n) of the loop network against the plain
/// chain with the same rates. c = 0 detaches the loop (equality expected).
ExperimentReport feedback_experiment(const std::vector<double>& ks,
                                     const SideSystem& sub, double c,
                                     double alpha, double sigma = 1.0);

ExperimentReport feedback_trials(const TrialOptions& opts, double sigma = 1.0);

// ----------------------------------------------------------- sweeps

/// One parameter of a network file swept over a grid.
struct SweepSpec {
  NetworkFile base;
  std::string parameter;
  std::vector<double> grid;
  /// Species whose variance is tracked; defaults to the source species of
  /// the reaction that references the parameter.
  std::optional<std::string> observable;
};

/// Var(x_a) over the grid, fitted on the top two decades: the 95% slope
/// interval must lie in [-1.15, -0.85] and L Var(x_a) must stay within a
/// factor 2 over the fit window. Flux variances along the chain below X_a
/// must decrease at every L. Errors: UnstableAtSomeL, HypothesisViolated
/// (parameter not on exactly one reaction out of a species).
ExperimentReport large_L_sweep(const SweepSpec& spec);

/// lambda(L) = min |Re eig A(L)|: every L stable and L lambda(L) bounded
/// below (log-log slope over the top two decades >= -0.15); the factor-2
/// spread around the median is reported as its own claim.
/// Errors: HypothesisViolated (column dominance or parameter placement).
ExperimentReport eigenvalue_scaling(const SweepSpec& spec);

// ------------------------------------------------ structural properties

/// Random weakly reversible networks: stable A and e^{At} v >= -1e-10 for
/// t in {0.1, 1, 10} and 20 random v >= 0.
ExperimentReport positivity_trials(const TrialOptions& opts, int max_m = 12);

/// Random SSC networks: deficiency 0; s = m with one linkage class through 0.
ExperimentReport deficiency_trials(const TrialOptions& opts, int max_m = 12);

/// Names accepted by `fluxnet verify`.
const std::vector<std::string>& experiment_names();

}  // namespace fluxnet
