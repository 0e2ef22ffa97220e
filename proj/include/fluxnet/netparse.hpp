#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fluxnet/network.hpp"

namespace fluxnet {

/// A literal or a reference to a named parameter.
using NumExpr = std::variant<double, std::string>;

struct SourcePos {
  int line = 0;
  int column = 0;
};

/// Unresolved contents of a .rxn file. Parameter references are kept
/// symbolic so a sweep can re-instantiate the same file many times.
struct NetworkTemplate {
  struct Species {
    std::string name;
    SourcePos pos;
  };
  struct Noise {
    bool ou = false;
    NumExpr sigma = 0.0;  // white
    NumExpr tau = 0.0;    // ou
    NumExpr sd = 0.0;     // ou
    SourcePos sigma_pos, tau_pos, sd_pos;
  };
  struct Input {
    std::string species;
    SourcePos species_pos;
    double rate = 0.0;
    SourcePos rate_pos;
    std::optional<Noise> noise;
  };
  struct Reaction {
    std::string source;
    std::string target;
    SourcePos source_pos, target_pos;
    NumExpr k = 0.0;
    SourcePos k_pos;
  };
  struct Param {
    double value = 0.0;
    SourcePos pos;
  };

  std::vector<Species> species;
  std::vector<Input> inputs;
  std::vector<Reaction> reactions;
  std::map<std::string, Param> params;

  /// Names referenced by any NUMEXPR, in first-use order.
  std::vector<std::string> referenced_parameters() const;
};

/// Parses the text into a template. Throws ParseError (code SyntaxError) on
/// malformed lines; semantic checks happen in instantiate().
NetworkTemplate parse_template(std::string_view text);

/// Resolves parameters (bindings override file `param` lines) and validates.
/// Throws ParseError with a semantic code (UnknownSpecies, NonpositiveRate,
/// NegativeInput, DuplicateSpecies, DuplicateInput, SelfLoop,
/// UnboundParameter, InvalidNoise) at the offending position.
Network instantiate(const NetworkTemplate& tmpl,
                    const std::map<std::string, double>& bindings = {});

struct NetworkFile {
  std::string name;
  NetworkTemplate tmpl;
  Network network;
  /// Effective parameter values (file declarations merged with bindings).
  std::map<std::string, double> params;

  /// Re-instantiates with additional overrides on top of `params`.
  Network with_params(const std::map<std::string, double>& overrides) const;
};

NetworkFile parse_network(std::string_view text,
                          const std::map<std::string, double>& bindings = {},
                          std::string name = {});

NetworkFile load_network_file(const std::string& path,
                              const std::map<std::string, double>& bindings = {});

/// Canonical text: species in declaration order, inputs by species, reactions
/// sorted by (source, target). Numbers use the shortest round-trip form.
std::string serialize_network(const Network& net);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

}  // namespace fluxnet
