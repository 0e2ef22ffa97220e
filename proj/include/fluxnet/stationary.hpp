#pragma once

#include <optional>
#include <vector>

#include "fluxnet/network.hpp"

namespace fluxnet {

/// Sigma in dx = (A x + I) dt + Sigma dB: m x p, one column per white-noise
/// channel.
struct DiffusionSpec {
  Matrix sigma;
};

/// White-noise channels of `net` as a diffusion matrix (OU channels are not
/// representable here; see stationary_stats).
DiffusionSpec white_diffusion(const Network& net);

/// First two moments of the stationary measure.
struct StationaryStats {
  Vector mean;
  /// Species covariance (m x m).
  Matrix cov;
  /// Var(k x_source) per reaction, aligned with Network::reactions(). Empty
  /// when computed without a network.
  std::vector<double> flux_var;
  /// Stationary variance per noise channel, aligned with Network::noise();
  /// nullopt for white channels (no pointwise variance).
  std::vector<std::optional<double>> input_var;
  /// Covariance of (x, xi) where xi are the OU channel states; equals `cov`
  /// when there are no OU channels.
  Matrix joint_cov;
};

/// Solves A C + C A^T = -Sigma Sigma^T for a stable A and attaches the mean
/// -A^{-1} I. Errors: UnstableMatrix when max Re(lambda) >= -1e-12,
/// SolveFailure, TooLarge (m > 64).
StationaryStats stationary_covariance(const RateMatrix& rm,
                                      const DiffusionSpec& diff,
                                      const Vector& input);

/// Full stationary statistics of a network with any mix of white and OU
/// channels. OU channels are handled exactly by augmenting the state with
/// d xi = -xi / tau dt + sd sqrt(2 / tau) dB.
StationaryStats stationary_stats(const Network& net);

/// The augmented linear system (x, xi) used by stationary_stats and the
/// exact simulation scheme: dz = (M z + b) dt + G dB.
struct AugmentedSystem {
  Matrix drift;      // M
  Vector offset;     // b
  Matrix diffusion;  // G
  std::size_t num_species = 0;
  /// Index into Network::noise() of each OU state, in state order.
  std::vector<std::size_t> ou_channels;
};

AugmentedSystem augmented_system(const Network& net);

/// Closed-form stationary variances of a white-noise-forced irreversible chain
/// 0 -> X1 -> ... -> Xm -> 0 with distinct rate constants.
struct ChainVarianceTable {
  std::vector<double> ks;
  /// Lower-triangular eigenvector coefficients; column j is the eigenvector
  /// of the chain rate matrix for eigenvalue -k_j.
  Matrix p;
  std::vector<double> var_x;
  std::vector<double> var_flux;
};

/// Minimum pairwise relative gap |k_i - k_j| / max(k_i, k_j).
double min_relative_gap(const std::vector<double>& ks);

inline constexpr double kDistinctRateGap = 1e-6;

/// Errors: InvalidArgument (empty or nonpositive ks, sigma < 0),
/// NearDegenerateRates (min relative gap < kDistinctRateGap).
ChainVarianceTable chain_variances(const std::vector<double>& ks, double sigma);

/// Flux variances Var(k_i x_i) of a white-noise chain: closed form when the
/// rates are distinct, otherwise the Lyapunov solve.
std::vector<double> chain_flux_variances(const std::vector<double>& ks,
                                         double sigma);

/// All-equal-rate chain, species i (1-based).
struct EqualRateVariance {
  double var_x = 0.0;
  double var_flux = 0.0;
  /// Large-i asymptote sigma^2 k / (2 sqrt(pi i)) of var_flux.
  double flux_asymptote = 0.0;
};

EqualRateVariance equal_rate_chain_variance(int i, double k, double sigma);

/// (m_i / I)^2 Var(xi) for a network whose only input is one (noisy)
/// species. Errors: MultipleNoisyInputs, InvalidArgument (no input / I = 0).
double general_variance_bound(const Network& net, std::size_t species_index,
                              double input_variance);

}  // namespace fluxnet
