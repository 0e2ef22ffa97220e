#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fluxnet/linalg.hpp"

namespace fluxnet {

/// A complex of a single-species-complex network: either the zero complex or
/// exactly one species.
class Complex {
 public:
  static Complex zero() { return Complex(); }
  static Complex species(std::size_t index) { return Complex(index); }

  bool is_zero() const noexcept { return !index_.has_value(); }
  /// Species index; only meaningful when !is_zero().
  std::size_t index() const { return index_.value(); }

  /// Species complexes order by index; the zero complex sorts last.
  std::strong_ordering operator<=>(const Complex& other) const noexcept;
  bool operator==(const Complex& other) const noexcept = default;

 private:
  Complex() = default;
  explicit Complex(std::size_t index) : index_(index) {}

  std::optional<std::size_t> index_;
};

struct Reaction {
  Complex source;
  Complex target;
  double rate = 0.0;

  bool operator==(const Reaction&) const = default;
};

struct WhiteNoise {
  double sigma = 0.0;
  bool operator==(const WhiteNoise&) const = default;
};

/// Stationary Ornstein-Uhlenbeck forcing with zero mean.
struct OuNoise {
  double tau = 0.0;
  double stationary_sd = 0.0;

  double variance() const { return stationary_sd * stationary_sd; }
  bool operator==(const OuNoise&) const = default;
};

using NoiseKind = std::variant<WhiteNoise, OuNoise>;

/// Noise added to the input of one species.
struct NoiseChannel {
  std::size_t species = 0;
  NoiseKind kind;

  bool operator==(const NoiseChannel&) const = default;
};

using NoiseSpec = std::vector<NoiseChannel>;

/// Name-level description accepted by build_network. "0" names the zero
/// complex; reactions out of "0" are folded into the input vector.
struct ReactionSpec {
  std::string source;
  std::string target;
  double rate = 0.0;
};

struct InputSpec {
  std::string species;
  double rate = 0.0;
  std::optional<NoiseKind> noise;
};

inline constexpr const char* kZeroName = "0";

/// Validated, normalized SSC network: dx/dt = A x + I (+ noise).
class Network {
 public:
  std::size_t num_species() const noexcept { return species_.size(); }
  const std::vector<std::string>& species() const noexcept { return species_; }
  const std::string& species_name(std::size_t i) const { return species_.at(i); }
  std::optional<std::size_t> find_species(const std::string& name) const;

  /// Reactions between species or to the zero complex; sorted by
  /// (source, target) with parallel edges merged.
  const std::vector<Reaction>& reactions() const noexcept { return reactions_; }

  /// Declared inflows 0 -> X_j. A species present here has an inflow arrow
  /// even when its constant rate is 0 (it may still carry noise).
  const std::map<std::size_t, double>& inputs() const noexcept { return inputs_; }

  /// Dense input vector I of length m.
  Vector input_vector() const;

  const NoiseSpec& noise() const noexcept { return noise_; }

  /// Name for a complex ("0" for the zero complex).
  std::string complex_name(const Complex& c) const;

  /// "X1->X2" style label of a reaction.
  std::string reaction_label(const Reaction& r) const;

  bool operator==(const Network&) const = default;

  /// Copy with the noise specification replaced (validated).
  Network with_noise(NoiseSpec noise) const;

  /// Copy with the constant inputs scaled by `factor` (>= 0).
  Network with_scaled_inputs(double factor) const;

 private:
  friend Network build_network(std::vector<std::string> species,
                               const std::vector<ReactionSpec>& reactions,
                               const std::vector<InputSpec>& inputs);

  std::vector<std::string> species_;
  std::vector<Reaction> reactions_;
  std::map<std::size_t, double> inputs_;
  NoiseSpec noise_;
};

/// Validates and normalizes a network description.
/// Errors: DuplicateSpecies, UnknownSpecies, NonpositiveRate, NegativeInput,
/// SelfLoop, DuplicateInput, InvalidNoise.
Network build_network(std::vector<std::string> species,
                      const std::vector<ReactionSpec>& reactions,
                      const std::vector<InputSpec>& inputs);

struct NetworkAnalysis {
  int num_complexes = 0;
  int num_linkage_classes = 0;
  int dim_stoich = 0;
  int deficiency = 0;
  bool weakly_reversible = false;
  bool has_zero_complex = false;
  /// Every species lies in the linkage class of the zero complex.
  bool zero_connected = false;
};

NetworkAnalysis analyze(const Network& net);

struct RateMatrix {
  Matrix a;
  /// Rate constant of X_i -> 0 (0 when absent).
  Vector outflow_to_zero;
};

RateMatrix rate_matrix(const Network& net);

/// Deterministic equilibrium m solving A m + I = 0.
/// Errors: NotWeaklyReversible; SingularRateMatrix when some species is not
/// connected to the zero complex (A then has a conserved direction).
Vector equilibrium(const Network& net);

/// 0 -> X1 -> X2 -> ... -> Xm -> 0 with rate constants `ks`, constant input
/// `input` into X1 and optional noise on that input.
Network make_chain(const std::vector<double>& ks, double input = 1.0,
                   std::optional<NoiseKind> noise = std::nullopt);

}  // namespace fluxnet
