#include "fluxnet/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "fluxnet/error.hpp"
#include "fluxnet/sde.hpp"
#include "fluxnet/stationary.hpp"

namespace fluxnet {

std::size_t ExperimentReport::violations() const {
  return static_cast<std::size_t>(std::count_if(
      instances.begin(), instances.end(),
      [](const InstanceResult& r) { return !r.pass; }));
}

bool ExperimentReport::passed() const {
  return violations() == 0 &&
         std::all_of(claims.begin(), claims.end(),
                     [](const auto& c) { return c.second; });
}

Json ExperimentReport::to_json() const {
  Json out;
  out["experiment"] = experiment;
  out["instances"] = Json::array();
  for (const auto& inst : instances) {
    Json j;
    j["params"] = inst.params;
    j["seed"] = inst.seed ? Json(*inst.seed) : Json(nullptr);
    j["observed"] = inst.observed;
    j["pass"] = inst.pass;
    out["instances"].push_back(std::move(j));
  }
  Json s = summary;
  s["instances"] = instances.size();
  s["violations"] = violations();
  s["claims"] = Json::object();
  for (const auto& [name, ok] : claims) s["claims"][name] = ok;
  s["pass"] = passed();
  out["summary"] = std::move(s);
  return out;
}

double log_uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

namespace {

std::string species_name(std::size_t node, std::size_t m) {
  return node == m ? std::string(kZeroName) : "X" + std::to_string(node + 1);
}

std::vector<std::string> numbered_species(int m) {
  std::vector<std::string> names;
  for (int i = 0; i < m; ++i) names.push_back("X" + std::to_string(i + 1));
  return names;
}

Network network_from_edges(
    int m, const std::set<std::pair<std::size_t, std::size_t>>& edges,
    Rng& rng) {
  const auto um = static_cast<std::size_t>(m);
  std::vector<ReactionSpec> reactions;
  for (const auto& [u, v] : edges) {
    reactions.push_back({species_name(u, um), species_name(v, um), log_uniform(rng)});
  }
  return build_network(numbered_species(m), reactions, {});
}

// Runs instance i with a generator seeded per instance, optionally on
// several threads; slots keep the output order fixed.
template <class Make>
ExperimentReport run_trials(std::string name, const TrialOptions& opts,
                            Make make) {
  if (opts.trials < 1 && !opts.instance_seed) {
    throw Error(Errc::InvalidArgument, "trials must be >= 1");
  }
  std::vector<std::uint64_t> seeds;
  if (opts.instance_seed) {
    seeds.push_back(*opts.instance_seed);
  } else {
    for (int i = 0; i < opts.trials; ++i) {
      seeds.push_back(trajectory_seed(opts.seed, static_cast<std::uint64_t>(i)));
    }
  }
  std::vector<InstanceResult> slots(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < slots.size(); i = next++) {
      Rng rng(seeds[i]);
      try {
        slots[i] = make(rng);
      } catch (const Error& e) {
        slots[i].pass = false;
        slots[i].observed["error"] = std::string(errc_name(e.code())) + ": " + e.what();
      }
      slots[i].seed = seeds[i];
    }
  };
  const int nthreads = std::clamp<int>(opts.threads, 1, static_cast<int>(slots.size()));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  }
  ExperimentReport rep;
  rep.experiment = std::move(name);
  rep.instances = std::move(slots);
  rep.summary["master_seed"] = opts.seed;
  if (opts.instance_seed) rep.summary["replayed_instance_seed"] = *opts.instance_seed;
  return rep;
}

bool strictly_below(double lower, double upper) {
  return upper - lower > 1e-12 * std::abs(upper);
}

void require_grid(const std::vector<double>& grid) {
  if (grid.size() < 2) {
    throw Error(Errc::InvalidArgument, "grid needs at least two values");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i]) ||
        (i > 0 && !(grid[i] > grid[i - 1]))) {
      throw Error(Errc::InvalidArgument,
                  "grid must be positive and strictly increasing");
    }
  }
}

void require_chain(const std::vector<double>& ks, int index) {
  if (ks.empty()) throw Error(Errc::InvalidArgument, "empty chain");
  for (const double k : ks) {
    if (!(k > 0.0)) throw Error(Errc::InvalidArgument, "chain rates must be > 0");
  }
  if (index < 1 || static_cast<std::size_t>(index) > ks.size()) {
    throw Error(Errc::InvalidArgument, "index out of range (1-based)");
  }
}

// Fit over the points within two decades of the upper (or lower) end.
LineFit fit_two_decades(const std::vector<double>& x, const std::vector<double>& y,
                        bool upper) {
  std::vector<double> lx, ly;
  const double edge = upper ? x.back() / 100.0 * (1 - 1e-12)
                            : x.front() * 100.0 * (1 + 1e-12);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (upper ? x[i] >= edge : x[i] <= edge) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) {
    lx.clear();
    ly.clear();
    for (std::size_t i = 0; i < x.size(); ++i) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  return fit_line(lx, ly);
}

Json fit_json(const LineFit& f) {
  return {{"slope", f.slope},
          {"slope_lo", f.slope_lo},
          {"slope_hi", f.slope_hi},
          {"slope_stderr", f.slope_stderr},
          {"points", f.n}};
}

}  // namespace

Network random_ssc_network(Rng& rng, int m) {
  if (m < 1) throw Error(Errc::InvalidArgument, "m must be >= 1");
  const auto n = static_cast<std::size_t>(m) + 1;  // node m is the zero complex
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double density = 0.05 + 0.35 * u(rng);
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a != b && u(rng) < density) edges.insert({a, b});
    }
  }
  return network_from_edges(m, edges, rng);
}

Network random_weakly_reversible_network(Rng& rng, int m) {
  if (m < 1) throw Error(Errc::InvalidArgument, "m must be >= 1");
  const auto n = static_cast<std::size_t>(m) + 1;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i) edges.insert({order[i], order[(i + 1) % n]});
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a != b && u(rng) < 0.2) edges.insert({a, b});
    }
  }
  return network_from_edges(m, edges, rng);
}

// ---------------------------------------------------------------- chains

namespace {

std::vector<double> analytic_chain_fluxes(const std::vector<double>& ks,
                                          double sigma) {
  const bool all_equal = std::all_of(ks.begin(), ks.end(),
                                     [&](double k) { return k == ks.front(); });
  if (ks.size() > 1 && all_equal) {
    std::vector<double> out;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      out.push_back(
          equal_rate_chain_variance(static_cast<int>(i + 1), ks.front(), sigma).var_flux);
    }
    return out;
  }
  return chain_flux_variances(ks, sigma);
}

InstanceResult chain_instance(const std::vector<double>& ks, double sigma) {
  InstanceResult inst;
  inst.params = {{"ks", ks}, {"sigma", sigma}};
  const auto fv = analytic_chain_fluxes(ks, sigma);
  const double cap = sigma * sigma * ks.front() / 2.0;
  int violations = 0;
  for (std::size_t i = 0; i < fv.size(); ++i) {
    if (i > 0 && !strictly_below(fv[i], fv[i - 1])) ++violations;
    if (!(fv[i] <= cap * (1 + 1e-12) + 1e-12)) ++violations;
  }
  inst.observed = {{"flux_variance", fv}, {"first_flux_cap", cap},
                   {"violations", violations}};
  inst.pass = violations == 0;
  return inst;
}

}  // namespace

ExperimentReport check_chain_monotonicity(const std::vector<double>& ks,
                                          double sigma) {
  require_chain(ks, 1);
  ExperimentReport rep;
  rep.experiment = "chain-monotonic";
  rep.instances.push_back(chain_instance(ks, sigma));
  return rep;
}

ExperimentReport chain_monotonicity_trials(const TrialOptions& opts, int m,
                                           double sigma) {
  if (m < 1) throw Error(Errc::InvalidArgument, "chain length must be >= 1");
  auto rep = run_trials("chain-monotonic", opts, [&](Rng& rng) {
    std::vector<double> ks;
    for (int i = 0; i < m; ++i) ks.push_back(log_uniform(rng));
    return chain_instance(ks, sigma);
  });
  rep.summary["chain_length"] = m;
  rep.summary["rate_range"] = {1e-2, 1e2};
  return rep;
}

ExperimentReport small_k_sweep(const std::vector<double>& ks, int index,
                               const std::vector<double>& grid, double sigma) {
  require_chain(ks, index);
  require_grid(grid);
  if (!(sigma > 0.0)) throw Error(Errc::InvalidArgument, "sigma must be > 0");
  const auto i = static_cast<std::size_t>(index - 1);
  ExperimentReport rep;
  rep.experiment = "small-k";
  std::vector<double> own;
  std::vector<double> ratios_at_min;
  for (const double g : grid) {
    std::vector<double> k = ks;
    k[i] = g;
    const auto fv = chain_flux_variances(k, sigma);
    const Vector mean = equilibrium(make_chain(k, 1.0));
    double mean_dev = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j) {
      mean_dev = std::max(mean_dev, std::abs(k[j] * mean(static_cast<Eigen::Index>(j)) - 1.0));
    }
    std::vector<double> ratios;
    for (std::size_t j = i; j < k.size(); ++j) {
      ratios.push_back(fv[j] * 2.0 / (sigma * sigma * g));
    }
    if (g == grid.front()) ratios_at_min = ratios;
    own.push_back(fv[i]);
    InstanceResult inst;
    inst.params = {{"ks", k}, {"index", index}, {"k_i", g}, {"sigma", sigma}};
    inst.observed = {{"flux_variance", fv}, {"ratio", ratios},
                     {"max_flux_mean_deviation", mean_dev}};
    inst.pass = mean_dev < 1e-9;
    rep.instances.push_back(std::move(inst));
  }
  const LineFit fit = fit_two_decades(grid, own, false);
  rep.claims["ratio_within_5pct_at_smallest_k"] =
      std::all_of(ratios_at_min.begin(), ratios_at_min.end(),
                  [](double r) { return r >= 0.95 && r <= 1.05; });
  rep.claims["slope_one"] = fit.slope_lo >= 0.95 && fit.slope_hi <= 1.05;
  rep.summary["fit"] = fit_json(fit);
  rep.summary["ratio_at_smallest_k"] = ratios_at_min;
  return rep;
}

ExperimentReport chain_reduction_check(const std::vector<double>& ks, int index,
                                       const std::vector<double>& grid,
                                       double sigma) {
  require_chain(ks, index);
  require_grid(grid);
  if (ks.size() < 2) {
    throw Error(Errc::InvalidArgument, "reduction needs a chain of length >= 2");
  }
  const auto i = static_cast<std::size_t>(index - 1);
  std::vector<double> reduced_ks = ks;
  reduced_ks.erase(reduced_ks.begin() + static_cast<std::ptrdiff_t>(i));
  const auto reduced = chain_flux_variances(reduced_ks, sigma);

  ExperimentReport rep;
  rep.experiment = "chain-reduction";
  // diffs[c][g]: comparison c at grid point g.
  std::vector<std::string> labels;
  if (i > 0) labels.push_back("Var(k" + std::to_string(i + 1) + "x" +
                              std::to_string(i + 1) + ") vs upstream flux");
  for (std::size_t j = i + 1; j < ks.size(); ++j) {
    labels.push_back("Var(k" + std::to_string(j + 1) + "x" + std::to_string(j + 1) +
                     ") vs reduced chain");
  }
  std::vector<std::vector<double>> diffs(labels.size());
  for (const double g : grid) {
    std::vector<double> k = ks;
    k[i] = g;
    const auto fv = chain_flux_variances(k, sigma);
    std::vector<double> d;
    if (i > 0) d.push_back(std::abs(fv[i] - fv[i - 1]));
    for (std::size_t j = i + 1; j < ks.size(); ++j) {
      d.push_back(std::abs(fv[j] - reduced[j - 1]));
    }
    for (std::size_t c = 0; c < d.size(); ++c) diffs[c].push_back(d[c]);
    InstanceResult inst;
    inst.params = {{"ks", k}, {"index", index}, {"k_i", g}, {"sigma", sigma}};
    inst.observed = {{"flux_variance", fv}, {"difference", d}};
    rep.instances.push_back(std::move(inst));
  }
  bool monotone = true;
  bool vanishing = true;
  Json fits = Json::array();
  for (std::size_t c = 0; c < diffs.size(); ++c) {
    for (std::size_t g = 1; g < grid.size(); ++g) {
      if (!(diffs[c][g] < diffs[c][g - 1])) monotone = false;
    }
    const bool positive = std::all_of(diffs[c].begin(), diffs[c].end(),
                                      [](double v) { return v > 0.0; });
    if (positive) {
      const LineFit fit = fit_two_decades(grid, diffs[c], true);
      fits.push_back({{"comparison", labels[c]}, {"fit", fit_json(fit)}});
      if (!(fit.slope_hi < -0.5)) vanishing = false;
    } else if (diffs[c].back() != 0.0) {
      vanishing = false;
    }
  }
  rep.claims["differences_decrease_monotonically"] = monotone;
  rep.claims["differences_vanish"] = vanishing;
  rep.summary["comparisons"] = labels;
  rep.summary["reduced_chain_ks"] = reduced_ks;
  rep.summary["reduced_flux_variance"] = reduced;
  rep.summary["difference_fits"] = fits;
  return rep;
}

// ------------------------------------------------ side systems and loops

Json SideSystem::to_json() const {
  Json e = Json::array();
  for (const auto& edge : edges) e.push_back({edge.from, edge.to, edge.rate});
  return {{"size", size}, {"edges", e}, {"entry", entry}, {"exit", exit}};
}

SideSystem random_side_system(Rng& rng, int max_size) {
  if (max_size < 1) throw Error(Errc::InvalidArgument, "max_size must be >= 1");
  std::uniform_int_distribution<int> size_dist(1, max_size);
  SideSystem side;
  side.size = static_cast<std::size_t>(size_dist(rng));
  std::uniform_int_distribution<std::size_t> pick(0, side.size - 1);
  side.entry = pick(rng);
  side.exit = pick(rng);
  if (side.size > 1) {
    std::vector<std::size_t> order(side.size);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::set<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < side.size; ++i) {
      edges.insert({order[i], order[(i + 1) % side.size]});
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t a = 0; a < side.size; ++a) {
      for (std::size_t b = 0; b < side.size; ++b) {
        if (a != b && u(rng) < 0.3) edges.insert({a, b});
      }
    }
    for (const auto& [a, b] : edges) side.edges.push_back({a, b, log_uniform(rng)});
  }
  return side;
}

namespace {

// Every side species must be reachable from the entry and must reach the
// exit, so the subsystem is fed and drains back.
void validate_side(const SideSystem& side, Errc code) {
  auto fail = [&](const std::string& why) { throw Error(code, why); };
  if (side.size < 1) fail("subsystem needs at least one species");
  if (side.entry >= side.size || side.exit >= side.size) {
    fail("subsystem entry/exit index out of range");
  }
  std::vector<std::vector<std::size_t>> fwd(side.size), back(side.size);
  for (const auto& e : side.edges) {
    if (e.from >= side.size || e.to >= side.size) fail("subsystem edge out of range");
    if (e.from == e.to) fail("subsystem edge is a self-loop");
    if (!(e.rate > 0.0)) fail("subsystem rates must be > 0");
    fwd[e.from].push_back(e.to);
    back[e.to].push_back(e.from);
  }
  auto reach = [&](std::size_t start, const auto& adj) {
    std::vector<bool> seen(side.size, false);
    std::vector<std::size_t> stack{start};
    seen[start] = true;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (const std::size_t w : adj[v]) {
        if (!seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
      }
    }
    return seen;
  };
  const auto from_entry = reach(side.entry, fwd);
  const auto to_exit = reach(side.exit, back);
  for (std::size_t v = 0; v < side.size; ++v) {
    if (!from_entry[v]) fail("subsystem species S" + std::to_string(v + 1) + " is not fed by the entry");
    if (!to_exit[v]) fail("subsystem species S" + std::to_string(v + 1) + " does not drain to the exit");
  }
}

std::string side_name(std::size_t i) { return "S" + std::to_string(i + 1); }

void add_side(const SideSystem& side, std::vector<std::string>& species,
              std::vector<ReactionSpec>& reactions) {
  for (std::size_t i = 0; i < side.size; ++i) species.push_back(side_name(i));
  for (const auto& e : side.edges) {
    reactions.push_back({side_name(e.from), side_name(e.to), e.rate});
  }
}

double flux_variance(const Network& net, const StationaryStats& stats,
                     const std::string& from, const std::string& to) {
  for (std::size_t r = 0; r < net.reactions().size(); ++r) {
    const auto& rx = net.reactions()[r];
    if (net.complex_name(rx.source) == from && net.complex_name(rx.target) == to) {
      return stats.flux_var[r];
    }
  }
  throw Error(Errc::InvalidArgument, "no reaction " + from + "->" + to);
}

}  // namespace

Network side_reaction_network(double k1, double k2, double k3,
                              const SideSystem& side, double sigma) {
  validate_side(side, Errc::InvalidSideTopology);
  if (!(k1 > 0.0) || !(k2 > 0.0) || !(k3 > 0.0)) {
    throw Error(Errc::InvalidSideTopology, "k1, k2 and k3 must be > 0");
  }
  std::vector<std::string> species{"X1"};
  std::vector<ReactionSpec> reactions{{"X1", kZeroName, k1},
                                      {"X1", side_name(side.entry), k2},
                                      {side_name(side.exit), "X1", k3}};
  add_side(side, species, reactions);
  return build_network(std::move(species), reactions,
                       {{"X1", 1.0, WhiteNoise{sigma}}});
}

ExperimentReport side_reaction_experiment(double k1, double k2, double k3,
                                          const SideSystem& side, double sigma) {
  if (!(sigma > 0.0)) throw Error(Errc::InvalidArgument, "sigma must be > 0");
  InstanceResult inst;
  inst.params = {{"k1", k1}, {"k2", k2}, {"k3", k3}, {"side", side.to_json()},
                 {"sigma", sigma}};
  const double bare = sigma * sigma * k1 / 2.0;
  const Network plain = make_chain({k1}, 1.0, WhiteNoise{sigma});
  const double plain_var = stationary_stats(plain).flux_var.front();
  if (k2 == 0.0 && k3 == 0.0) {
    inst.observed = {{"var_without", plain_var}, {"closed_form", bare}};
    inst.pass = std::abs(plain_var - bare) <= 1e-12 * bare;
  } else {
    const Network net = side_reaction_network(k1, k2, k3, side, sigma);
    const double with = flux_variance(net, stationary_stats(net), "X1", kZeroName);
    inst.observed = {{"var_with", with}, {"var_without", bare},
                     {"relative_margin", (bare - with) / bare}};
    inst.pass = strictly_below(with, bare);
  }
  ExperimentReport rep;
  rep.experiment = "side-reaction";
  rep.instances.push_back(std::move(inst));
  return rep;
}

ExperimentReport side_reaction_trials(const TrialOptions& opts, double sigma) {
  auto rep = run_trials("side-reaction", opts, [&](Rng& rng) {
    const double k1 = log_uniform(rng);
    const double k2 = log_uniform(rng);
    const double k3 = log_uniform(rng);
    const SideSystem side = random_side_system(rng, 4);
    return side_reaction_experiment(k1, k2, k3, side, sigma).instances.front();
  });
  rep.summary["rate_range"] = {1e-2, 1e2};
  rep.summary["side_sizes"] = {1, 4};
  return rep;
}

Network feedback_network(const std::vector<double>& ks, const SideSystem& sub,
                         double c, double alpha, double sigma) {
  if (ks.empty()) throw Error(Errc::InvalidLoopTopology, "empty chain");
  validate_side(sub, Errc::InvalidLoopTopology);
  if (!(c > 0.0) || !(alpha > 0.0)) {
    throw Error(Errc::InvalidLoopTopology, "c and alpha must be > 0");
  }
  const std::size_t n = ks.size();
  std::vector<std::string> species = numbered_species(static_cast<int>(n));
  std::vector<ReactionSpec> reactions;
  for (std::size_t i = 0; i < n; ++i) {
    reactions.push_back({species[i], i + 1 < n ? species[i + 1] : kZeroName, ks[i]});
  }
  reactions.push_back({species.back(), side_name(sub.entry), c});
  reactions.push_back({side_name(sub.exit), species.front(), alpha});
  add_side(sub, species, reactions);
  return build_network(std::move(species), reactions,
                       {{"X1", 1.0, WhiteNoise{sigma}}});
}

ExperimentReport feedback_experiment(const std::vector<double>& ks,
                                     const SideSystem& sub, double c,
                                     double alpha, double sigma) {
  if (!(sigma > 0.0)) throw Error(Errc::InvalidArgument, "sigma must be > 0");
  InstanceResult inst;
  inst.params = {{"ks", ks}, {"subsystem", sub.to_json()}, {"c", c},
                 {"alpha", alpha}, {"sigma", sigma}};
  const std::string last = "X" + std::to_string(ks.size());
  const Network chain = make_chain(ks, 1.0, WhiteNoise{sigma});
  const double plain = flux_variance(chain, stationary_stats(chain), last, kZeroName);
  if (c == 0.0) {
    inst.observed = {{"var_chain", plain}, {"var_loop", plain}};
    inst.pass = true;
  } else {
    const Network net = feedback_network(ks, sub, c, alpha, sigma);
    const double loop = flux_variance(net, stationary_stats(net), last, kZeroName);
    inst.observed = {{"var_loop", loop}, {"var_chain", plain},
                     {"relative_margin", (plain - loop) / plain}};
    inst.pass = strictly_below(loop, plain);
  }
  ExperimentReport rep;
  rep.experiment = "feedback";
  rep.instances.push_back(std::move(inst));
  return rep;
}

ExperimentReport feedback_trials(const TrialOptions& opts, double sigma) {
  auto rep = run_trials("feedback", opts, [&](Rng& rng) {
    std::uniform_int_distribution<int> len(2, 5);
    std::vector<double> ks(static_cast<std::size_t>(len(rng)));
    for (auto& k : ks) k = log_uniform(rng);
    const SideSystem sub = random_side_system(rng, 4);
    const double c = log_uniform(rng);
    const double alpha = log_uniform(rng);
    return feedback_experiment(ks, sub, c, alpha, sigma).instances.front();
  });
  rep.summary["rate_range"] = {1e-2, 1e2};
  rep.summary["chain_lengths"] = {2, 5};
  rep.summary["subsystem_sizes"] = {1, 4};
  return rep;
}

// ----------------------------------------------------------- sweeps

namespace {

struct SweepTarget {
  std::string source;
  std::string target;
  std::size_t observable = 0;
};

SweepTarget sweep_target(const SweepSpec& spec) {
  require_grid(spec.grid);
  if (spec.parameter.empty()) {
    throw Error(Errc::InvalidArgument, "sweep parameter name is empty");
  }
  std::vector<const NetworkTemplate::Reaction*> uses;
  for (const auto& r : spec.base.tmpl.reactions) {
    if (const auto* name = std::get_if<std::string>(&r.k);
        name && *name == spec.parameter) {
      uses.push_back(&r);
    }
  }
  for (const auto& in : spec.base.tmpl.inputs) {
    if (in.noise) {
      for (const NumExpr* e : {&in.noise->sigma, &in.noise->tau, &in.noise->sd}) {
        if (const auto* name = std::get_if<std::string>(e);
            name && *name == spec.parameter) {
          throw Error(Errc::HypothesisViolated,
                      "parameter " + spec.parameter + " must scale a rate constant, not noise");
        }
      }
    }
  }
  if (uses.size() != 1) {
    throw Error(Errc::HypothesisViolated,
                "parameter " + spec.parameter + " must multiply exactly one reaction (found " +
                    std::to_string(uses.size()) + ")");
  }
  if (uses.front()->source == kZeroName) {
    throw Error(Errc::HypothesisViolated,
                "parameter " + spec.parameter + " must sit on a reaction out of a species");
  }
  SweepTarget t;
  t.source = uses.front()->source;
  t.target = uses.front()->target;
  const std::string obs = spec.observable.value_or(t.source);
  const auto idx = spec.base.network.find_species(obs);
  if (!idx) throw Error(Errc::UnknownSpecies, "unknown observable species " + obs);
  t.observable = *idx;
  return t;
}

Network network_at(const SweepSpec& spec, double value) {
  return spec.base.with_params({{spec.parameter, value}});
}

// Reactions carrying the flux along the unbranched chain below X_a: each
// step leaves by its only remaining outflow into a species whose only
// inflow it is.
std::vector<std::size_t> downstream_chain(const Network& net, const SweepTarget& t) {
  const auto& rx = net.reactions();
  const std::size_t a = *net.find_species(t.source);
  std::vector<std::size_t> chain;
  std::size_t cur = a;
  for (std::size_t guard = 0; guard <= net.num_species(); ++guard) {
    std::vector<std::size_t> outs;
    for (std::size_t r = 0; r < rx.size(); ++r) {
      if (rx[r].source.index() != cur) continue;
      if (cur == a && net.complex_name(rx[r].target) == t.target) continue;
      outs.push_back(r);
    }
    if (outs.size() != 1) break;
    chain.push_back(outs.front());
    const Complex next = rx[outs.front()].target;
    if (next.is_zero()) break;
    const std::size_t nx = next.index();
    const auto inflows = std::count_if(rx.begin(), rx.end(), [&](const Reaction& r) {
      return !r.target.is_zero() && r.target.index() == nx;
    });
    if (inflows != 1 || net.inputs().count(nx) != 0 || nx == a) break;
    cur = nx;
  }
  return chain;
}

}  // namespace

ExperimentReport large_L_sweep(const SweepSpec& spec) {
  const SweepTarget t = sweep_target(spec);
  ExperimentReport rep;
  rep.experiment = "large-L";
  std::vector<double> var;
  bool ordered_everywhere = true;
  for (const double L : spec.grid) {
    const Network net = network_at(spec, L);
    StationaryStats stats;
    try {
      stats = stationary_stats(net);
    } catch (const Error& e) {
      if (e.code() != Errc::UnstableMatrix && e.code() != Errc::SolveFailure) throw;
      std::ostringstream msg;
      msg << "no stationary solution at " << spec.parameter << " = " << L << ": " << e.what();
      throw Error(Errc::UnstableAtSomeL, msg.str());
    }
    const auto o = static_cast<Eigen::Index>(t.observable);
    const double v = stats.cov(o, o);
    var.push_back(v);
    Json downstream = Json::array();
    bool ordered = true;
    double prev = 0.0;
    const auto chain = downstream_chain(net, t);
    for (std::size_t c = 0; c < chain.size(); ++c) {
      const double fv = stats.flux_var[chain[c]];
      downstream.push_back({{"reaction", net.reaction_label(net.reactions()[chain[c]])},
                            {"flux_variance", fv}});
      if (c > 0 && !strictly_below(fv, prev)) ordered = false;
      prev = fv;
    }
    ordered_everywhere = ordered_everywhere && ordered;
    InstanceResult inst;
    inst.params = {{spec.parameter, L}};
    inst.observed = {{"variance", v}, {"L_times_variance", L * v},
                     {"downstream", downstream}, {"downstream_ordered", ordered}};
    inst.pass = ordered;
    rep.instances.push_back(std::move(inst));
  }
  const LineFit fit = fit_two_decades(spec.grid, var, true);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  const double edge = spec.grid.back() / 100.0 * (1 - 1e-12);
  for (std::size_t i = 0; i < spec.grid.size(); ++i) {
    if (spec.grid[i] >= edge) {
      lo = std::min(lo, spec.grid[i] * var[i]);
      hi = std::max(hi, spec.grid[i] * var[i]);
    }
  }
  rep.claims["slope_in_[-1.15,-0.85]"] = fit.slope_lo >= -1.15 && fit.slope_hi <= -0.85;
  rep.claims["L_times_variance_bounded"] = hi <= 2.0 * lo;
  rep.claims["downstream_ordered"] = ordered_everywhere;
  rep.summary["parameter"] = spec.parameter;
  rep.summary["species"] = spec.base.network.species_name(t.observable);
  rep.summary["reaction"] = t.source + "->" + t.target;
  rep.summary["fit"] = fit_json(fit);
  rep.summary["file"] = spec.base.name;
  return rep;
}

ExperimentReport eigenvalue_scaling(const SweepSpec& spec) {
  const SweepTarget t = sweep_target(spec);
  ExperimentReport rep;
  rep.experiment = "eigenvalue-scaling";
  std::vector<double> scaled;
  bool stable_everywhere = true;
  for (const double L : spec.grid) {
    const Network net = network_at(spec, L);
    const Matrix a = rate_matrix(net).a;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double off = a.col(j).sum() - a(j, j);
      if (!(std::abs(a(j, j)) >= off * (1 - 1e-12))) {
        throw Error(Errc::HypothesisViolated,
                    "column " + std::to_string(j + 1) + " is not diagonally dominant");
      }
    }
    const double abscissa = spectral_abscissa(a);
    const double lambda = slowest_decay_rate(a);
    const bool stable = abscissa < 0.0;
    stable_everywhere = stable_everywhere && stable;
    scaled.push_back(L * lambda);
    InstanceResult inst;
    inst.params = {{spec.parameter, L}};
    inst.observed = {{"lambda", lambda}, {"L_times_lambda", L * lambda},
                     {"spectral_abscissa", abscissa}, {"stable", stable}};
    inst.pass = stable;
    rep.instances.push_back(std::move(inst));
  }
  std::vector<double> sorted = scaled;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  const bool within2 = std::all_of(scaled.begin(), scaled.end(), [&](double v) {
    return v >= median / 2.0 && v <= median * 2.0;
  });
  rep.claims["stable_at_every_L"] = stable_everywhere;
  bool bounded = false;
  if (std::all_of(scaled.begin(), scaled.end(), [](double v) { return v > 0.0; })) {
    const LineFit fit = fit_two_decades(spec.grid, scaled, true);
    bounded = fit.slope_lo >= -0.15;
    rep.summary["fit"] = fit_json(fit);
  }
  rep.claims["L_times_lambda_bounded_below"] = bounded;
  rep.summary["parameter"] = spec.parameter;
  rep.summary["reaction"] = t.source + "->" + t.target;
  rep.summary["floor"] = sorted.front();
  rep.summary["median"] = median;
  rep.summary["within_factor_2_of_median"] = within2;
  rep.summary["file"] = spec.base.name;
  return rep;
}

// ------------------------------------------------ structural properties

ExperimentReport positivity_trials(const TrialOptions& opts, int max_m) {
  if (max_m < 1) throw Error(Errc::InvalidArgument, "max_m must be >= 1");
  auto rep = run_trials("positivity", opts, [&](Rng& rng) {
    std::uniform_int_distribution<int> size(1, max_m);
    const int m = size(rng);
    const Network net = random_weakly_reversible_network(rng, m);
    const NetworkAnalysis info = analyze(net);
    const Matrix a = rate_matrix(net).a;
    const double abscissa = spectral_abscissa(a);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double min_entry = std::numeric_limits<double>::infinity();
    for (const double t : {0.1, 1.0, 10.0}) {
      const Matrix e = expm(a * t);
      for (int s = 0; s < 20; ++s) {
        Vector v(a.rows());
        for (auto& x : v) x = u(rng);
        min_entry = std::min(min_entry, (e * v).minCoeff());
      }
    }
    InstanceResult inst;
    inst.params = {{"network", serialize_network(net)}};
    inst.observed = {{"species", m},
                     {"weakly_reversible", info.weakly_reversible},
                     {"spectral_abscissa", abscissa},
                     {"min_entry", min_entry}};
    inst.pass = info.weakly_reversible && abscissa < 0.0 && min_entry >= -1e-10;
    return inst;
  });
  rep.summary["times"] = {0.1, 1.0, 10.0};
  rep.summary["vectors_per_time"] = 20;
  return rep;
}

ExperimentReport deficiency_trials(const TrialOptions& opts, int max_m) {
  if (max_m < 1) throw Error(Errc::InvalidArgument, "max_m must be >= 1");
  auto rep = run_trials("deficiency", opts, [&](Rng& rng) {
    std::uniform_int_distribution<int> size(1, max_m);
    const int m = size(rng);
    const Network net = random_ssc_network(rng, m);
    const NetworkAnalysis info = analyze(net);
    InstanceResult inst;
    inst.params = {{"network", serialize_network(net)}};
    inst.observed = {{"species", m},
                     {"complexes", info.num_complexes},
                     {"linkage_classes", info.num_linkage_classes},
                     {"dim_stoich", info.dim_stoich},
                     {"deficiency", info.deficiency}};
    const bool full_rank = !(info.zero_connected && info.num_linkage_classes == 1) ||
                           info.dim_stoich == m;
    inst.pass = info.deficiency == 0 && full_rank;
    return inst;
  });
  return rep;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{
      "chain-monotonic", "side-reaction",      "feedback",
      "large-L",         "small-k",            "chain-reduction",
      "eigenvalue-scaling", "positivity",      "deficiency"};
  return names;
}

}  // namespace fluxnet
