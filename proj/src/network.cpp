#include "fluxnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <unordered_map>

#include "fluxnet/error.hpp"

namespace fluxnet {

std::strong_ordering Complex::operator<=>(const Complex& other) const noexcept {
  if (is_zero() || other.is_zero()) {
    return static_cast<int>(is_zero()) <=> static_cast<int>(other.is_zero());
  }
  return *index_ <=> *other.index_;
}

std::optional<std::size_t> Network::find_species(const std::string& name) const {
  const auto it = std::find(species_.begin(), species_.end(), name);
  if (it == species_.end()) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(it - species_.begin());
}

Vector Network::input_vector() const {
  Vector in = Vector::Zero(static_cast<Eigen::Index>(species_.size()));
  for (const auto& [j, rate] : inputs_) {
    in(static_cast<Eigen::Index>(j)) = rate;
  }
  return in;
}

std::string Network::complex_name(const Complex& c) const {
  return c.is_zero() ? std::string(kZeroName) : species_.at(c.index());
}

std::string Network::reaction_label(const Reaction& r) const {
  return complex_name(r.source) + "->" + complex_name(r.target);
}

namespace {

void validate_noise(const NoiseKind& kind, const std::string& species) {
  if (const auto* w = std::get_if<WhiteNoise>(&kind)) {
    if (!(w->sigma > 0.0) || !std::isfinite(w->sigma)) {
      throw Error(Errc::InvalidNoise,
                  "white noise on " + species + " needs sigma > 0");
    }
  } else {
    const auto& ou = std::get<OuNoise>(kind);
    if (!(ou.tau > 0.0) || !(ou.stationary_sd > 0.0) ||
        !std::isfinite(ou.tau) || !std::isfinite(ou.stationary_sd)) {
      throw Error(Errc::InvalidNoise,
                  "OU noise on " + species + " needs tau > 0 and sd > 0");
    }
  }
}

}  // namespace

Network Network::with_noise(NoiseSpec noise) const {
  Network out = *this;
  std::set<std::size_t> seen;
  for (const auto& ch : noise) {
    if (ch.species >= species_.size()) {
      throw Error(Errc::UnknownSpecies, "noise channel on unknown species");
    }
    if (!inputs_.contains(ch.species)) {
      throw Error(Errc::NoiseWithoutInput,
                  "noise attached to " + species_[ch.species] +
                      " which has no input");
    }
    if (!seen.insert(ch.species).second) {
      throw Error(Errc::DuplicateInput,
                  "more than one noise channel on " + species_[ch.species]);
    }
    validate_noise(ch.kind, species_[ch.species]);
  }
  std::sort(noise.begin(), noise.end(),
            [](const auto& a, const auto& b) { return a.species < b.species; });
  out.noise_ = std::move(noise);
  return out;
}

Network Network::with_scaled_inputs(double factor) const {
  if (!(factor >= 0.0)) {
    throw Error(Errc::NegativeInput, "input scale factor must be >= 0");
  }
  Network out = *this;
  for (auto& [j, rate] : out.inputs_) {
    rate *= factor;
  }
  return out;
}

Network build_network(std::vector<std::string> species,
                      const std::vector<ReactionSpec>& reactions,
                      const std::vector<InputSpec>& inputs) {
  if (species.empty()) {
    throw Error(Errc::InvalidArgument, "a network needs at least one species");
  }
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < species.size(); ++i) {
    const auto& name = species[i];
    if (name.empty() || name == kZeroName) {
      throw Error(Errc::InvalidArgument,
                  "invalid species name '" + name + "'");
    }
    if (!index.emplace(name, i).second) {
      throw Error(Errc::DuplicateSpecies, "duplicate species " + name);
    }
  }
  auto resolve = [&](const std::string& name) -> Complex {
    if (name == kZeroName) {
      return Complex::zero();
    }
    const auto it = index.find(name);
    if (it == index.end()) {
      throw Error(Errc::UnknownSpecies, "unknown species " + name);
    }
    return Complex::species(it->second);
  };

  Network net;
  net.species_ = std::move(species);

  std::set<std::size_t> declared_inputs;
  std::vector<NoiseChannel> noise;
  for (const auto& in : inputs) {
    const Complex c = resolve(in.species);
    if (c.is_zero()) {
      throw Error(Errc::InvalidArgument, "input target must be a species");
    }
    if (!(in.rate >= 0.0) || !std::isfinite(in.rate)) {
      throw Error(Errc::NegativeInput,
                  "input rate for " + in.species + " must be >= 0");
    }
    if (!declared_inputs.insert(c.index()).second) {
      throw Error(Errc::DuplicateInput,
                  "duplicate input declaration for " + in.species);
    }
    net.inputs_[c.index()] += in.rate;
    if (in.noise) {
      noise.push_back({c.index(), *in.noise});
    }
  }

  std::map<std::pair<Complex, Complex>, double> merged;
  for (const auto& r : reactions) {
    const Complex src = resolve(r.source);
    const Complex dst = resolve(r.target);
    if (!(r.rate > 0.0) || !std::isfinite(r.rate)) {
      throw Error(Errc::NonpositiveRate,
                  "rate of " + r.source + " -> " + r.target + " must be > 0");
    }
    if (src == dst) {
      throw Error(Errc::SelfLoop,
                  "reaction " + r.source + " -> " + r.target +
                      " has identical source and target");
    }
    if (src.is_zero()) {
      net.inputs_[dst.index()] += r.rate;
      continue;
    }
    merged[{src, dst}] += r.rate;
  }
  for (const auto& [key, rate] : merged) {
    net.reactions_.push_back({key.first, key.second, rate});
  }
  return net.with_noise(std::move(noise));
}

namespace {

// Node ids: species 0..m-1, zero complex m.
struct ComplexGraph {
  std::size_t num_nodes = 0;
  std::vector<bool> present;
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
};

ComplexGraph complex_graph(const Network& net) {
  const std::size_t m = net.num_species();
  ComplexGraph g;
  g.num_nodes = m + 1;
  g.present.assign(m + 1, false);
  g.out.resize(m + 1);
  auto node = [m](const Complex& c) { return c.is_zero() ? m : c.index(); };
  auto add = [&](std::size_t u, std::size_t v) {
    g.present[u] = g.present[v] = true;
    g.out[u].push_back(v);
    g.edges.emplace_back(u, v);
  };
  for (const auto& r : net.reactions()) {
    add(node(r.source), node(r.target));
  }
  for (const auto& [j, rate] : net.inputs()) {
    add(m, j);
  }
  return g;
}

std::vector<std::size_t> undirected_components(const ComplexGraph& g) {
  std::vector<std::size_t> parent(g.num_nodes);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& [u, v] : g.edges) {
    parent[find(u)] = find(v);
  }
  std::vector<std::size_t> comp(g.num_nodes);
  for (std::size_t i = 0; i < g.num_nodes; ++i) {
    comp[i] = find(i);
  }
  return comp;
}

// Tarjan's strongly connected components; returns component id per node.
std::vector<std::size_t> strong_components(const ComplexGraph& g) {
  const std::size_t n = g.num_nodes;
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> idx(n, kUnset), low(n, 0), comp(n, kUnset);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t counter = 0;
  std::size_t ncomp = 0;

  // Iterative DFS keeps deep chains off the call stack.
  for (std::size_t root = 0; root < n; ++root) {
    if (idx[root] != kUnset) {
      continue;
    }
    std::vector<std::pair<std::size_t, std::size_t>> work{{root, 0}};
    idx[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!work.empty()) {
      auto& [v, pos] = work.back();
      if (pos < g.out[v].size()) {
        const std::size_t w = g.out[v][pos++];
        if (idx[w] == kUnset) {
          idx[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          work.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], idx[w]);
        }
        continue;
      }
      if (low[v] == idx[v]) {
        std::size_t w = kUnset;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = ncomp;
        } while (w != v);
        ++ncomp;
      }
      const std::size_t finished = v;
      work.pop_back();
      if (!work.empty()) {
        auto& parent = work.back().first;
        low[parent] = std::min(low[parent], low[finished]);
      }
    }
  }
  return comp;
}

}  // namespace

NetworkAnalysis analyze(const Network& net) {
  const std::size_t m = net.num_species();
  const ComplexGraph g = complex_graph(net);
  NetworkAnalysis out;
  out.has_zero_complex = g.present[m];
  out.num_complexes =
      static_cast<int>(std::count(g.present.begin(), g.present.end(), true));

  const auto comp = undirected_components(g);
  std::set<std::size_t> classes;
  for (std::size_t i = 0; i < g.num_nodes; ++i) {
    if (g.present[i]) {
      classes.insert(comp[i]);
    }
  }
  out.num_linkage_classes = static_cast<int>(classes.size());

  std::vector<std::vector<std::int64_t>> vectors;
  vectors.reserve(g.edges.size());
  for (const auto& [u, v] : g.edges) {
    std::vector<std::int64_t> row(m, 0);
    if (u < m) row[u] -= 1;
    if (v < m) row[v] += 1;
    vectors.push_back(std::move(row));
  }
  out.dim_stoich = integer_rank(std::move(vectors));
  out.deficiency =
      out.num_complexes - out.num_linkage_classes - out.dim_stoich;

  const auto scc = strong_components(g);
  out.weakly_reversible = std::all_of(
      g.edges.begin(), g.edges.end(),
      [&](const auto& e) { return scc[e.first] == scc[e.second]; });

  out.zero_connected = out.has_zero_complex;
  for (std::size_t i = 0; i < m && out.zero_connected; ++i) {
    out.zero_connected = g.present[i] && comp[i] == comp[m];
  }
  return out;
}

RateMatrix rate_matrix(const Network& net) {
  const auto m = static_cast<Eigen::Index>(net.num_species());
  RateMatrix rm;
  rm.a = Matrix::Zero(m, m);
  rm.outflow_to_zero = Vector::Zero(m);
  for (const auto& r : net.reactions()) {
    const auto i = static_cast<Eigen::Index>(r.source.index());
    rm.a(i, i) -= r.rate;
    if (r.target.is_zero()) {
      rm.outflow_to_zero(i) += r.rate;
    } else {
      rm.a(static_cast<Eigen::Index>(r.target.index()), i) += r.rate;
    }
  }
  return rm;
}

Vector equilibrium(const Network& net) {
  const NetworkAnalysis info = analyze(net);
  if (!info.weakly_reversible) {
    throw Error(Errc::NotWeaklyReversible,
                "equilibrium requires a weakly reversible network");
  }
  if (!info.zero_connected) {
    throw Error(Errc::SingularRateMatrix,
                "rate matrix is singular: some species is not linked to the "
                "zero complex");
  }
  const RateMatrix rm = rate_matrix(net);
  const Vector in = net.input_vector();
  Eigen::PartialPivLU<Matrix> lu(rm.a);
  Vector mean = lu.solve(-in);
  // One refinement step tightens the residual for stiff rate spreads.
  mean += lu.solve(-in - rm.a * mean);
  return mean;
}

Network make_chain(const std::vector<double>& ks, double input,
                   std::optional<NoiseKind> noise) {
  std::vector<std::string> names;
  std::vector<ReactionSpec> reactions;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    names.push_back("X" + std::to_string(i + 1));
  }
  for (std::size_t i = 0; i < ks.size(); ++i) {
    reactions.push_back(
        {names[i], i + 1 < ks.size() ? names[i + 1] : kZeroName, ks[i]});
  }
  const std::string first = names.empty() ? std::string() : names.front();
  return build_network(std::move(names), reactions, {{first, input, noise}});
}

}  // namespace fluxnet
