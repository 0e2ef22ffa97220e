#include "fluxnet/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "fluxnet/error.hpp"
#include "fluxnet/experiments.hpp"
#include "fluxnet/netparse.hpp"
#include "fluxnet/sde.hpp"
#include "fluxnet/stationary.hpp"

namespace fluxnet {

namespace {

double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error(Errc::InvalidArgument, "invalid number '" + text + "' for " + what);
  }
  return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_double(item, what));
  }
  if (out.empty()) throw Error(Errc::InvalidArgument, what + " is empty");
  return out;
}

// NAME=VALUE pairs become bindings; bare NAMEs are returned separately.
std::map<std::string, double> parse_bindings(const std::vector<std::string>& items,
                                             std::vector<std::string>* bare) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      if (!bare) throw Error(Errc::InvalidArgument, "--param expects NAME=VALUE, got " + item);
      bare->push_back(item);
      continue;
    }
    const std::string name = item.substr(0, eq);
    if (name.empty()) throw Error(Errc::InvalidArgument, "--param with empty name");
    out[name] = parse_double(item.substr(eq + 1), "--param " + name);
  }
  return out;
}

std::string num(double v) { return format_number(v); }

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::UnstableMatrix:
    case Errc::NotWeaklyReversible:
    case Errc::SingularRateMatrix:
    case Errc::UnstableAtSomeL:
    case Errc::HypothesisViolated:
      return kExitUnstable;
    case Errc::NonfiniteState:
      return kExitNonfinite;
    case Errc::SolveFailure:
    case Errc::TooLarge:
      return kExitFailure;
    default:
      return kExitUsage;
  }
}

int default_threads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("FLUXNET_THREADS")) {
    int v = 0;
    const std::string s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size() && v > 0) return v;
    throw Error(Errc::InvalidArgument, "FLUXNET_THREADS must be a positive integer");
  }
  return 1;
}

// ------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string file;
  std::vector<std::string> params;
  std::string format = "text";
  bool structure_only = false;
};

Json structure_json(const NetworkAnalysis& a) {
  return {{"complexes", a.num_complexes},
          {"linkage_classes", a.num_linkage_classes},
          {"dim_stoich", a.dim_stoich},
          {"deficiency", a.deficiency},
          {"weakly_reversible", a.weakly_reversible},
          {"has_zero_complex", a.has_zero_complex}};
}

int cmd_analyze(const AnalyzeArgs& args, std::ostream& out, std::ostream& err) {
  const auto file = load_network_file(args.file, parse_bindings(args.params, nullptr));
  const Network& net = file.network;
  const NetworkAnalysis info = analyze(net);
  const Matrix a = rate_matrix(net).a;
  const auto eig = eigenvalues(a);
  err << "analyze: file=" << args.file << " format=" << args.format
      << " structure_only=" << (args.structure_only ? "true" : "false");
  for (const auto& [k, v] : file.params) err << " param " << k << "=" << num(v);
  err << "\n";

  std::optional<StationaryStats> stats;
  if (!args.structure_only) {
    if (!info.weakly_reversible) {
      throw Error(Errc::NotWeaklyReversible,
                  "network is not weakly reversible; stationary statistics are "
                  "not defined (use --structure-only)");
    }
    stats = stationary_stats(net);
  }

  const auto& names = net.species();
  if (args.format == "json") {
    Json j;
    j["file"] = args.file;
    j["species"] = names;
    j["structure"] = structure_json(info);
    j["eigenvalues"] = Json::array();
    for (const auto& l : eig) j["eigenvalues"].push_back({l.real(), l.imag()});
    if (stats) {
      Json s;
      const auto m = static_cast<Eigen::Index>(names.size());
      std::vector<std::vector<double>> cov(names.size());
      for (Eigen::Index r = 0; r < m; ++r) {
        for (Eigen::Index c = 0; c < m; ++c) cov[static_cast<std::size_t>(r)].push_back(stats->cov(r, c));
      }
      s["mean"] = Json::object();
      s["variance"] = Json::object();
      for (Eigen::Index i = 0; i < m; ++i) {
        s["mean"][names[static_cast<std::size_t>(i)]] = stats->mean(i);
        s["variance"][names[static_cast<std::size_t>(i)]] = stats->cov(i, i);
      }
      s["covariance"] = cov;
      s["flux_variance"] = Json::object();
      for (std::size_t r = 0; r < net.reactions().size(); ++r) {
        s["flux_variance"][net.reaction_label(net.reactions()[r])] = stats->flux_var[r];
      }
      s["input_variance"] = Json::object();
      for (std::size_t c = 0; c < net.noise().size(); ++c) {
        const auto& v = stats->input_var[c];
        s["input_variance"][net.species_name(net.noise()[c].species)] =
            v ? Json(*v) : Json(nullptr);
      }
      j["stationary"] = std::move(s);
    }
    out << j.dump(2) << "\n";
    return kExitOk;
  }

  out << std::setprecision(10);
  out << "species: " << names.size() << " (";
  for (std::size_t i = 0; i < names.size(); ++i) out << (i ? " " : "") << names[i];
  out << ")\n";
  out << "complexes n = " << info.num_complexes << "\n"
      << "linkage classes l = " << info.num_linkage_classes << "\n"
      << "stoichiometric dimension s = " << info.dim_stoich << "\n"
      << "deficiency = " << info.deficiency << "\n"
      << "weakly reversible: " << (info.weakly_reversible ? "yes" : "no") << "\n";
  out << "eigenvalues of A:";
  for (const auto& l : eig) {
    out << " " << l.real();
    if (l.imag() != 0.0) out << (l.imag() > 0 ? "+" : "") << l.imag() << "i";
  }
  out << "\n";
  if (!stats) return kExitOk;
  out << "stationary mean:";
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << " " << names[i] << "=" << stats->mean(static_cast<Eigen::Index>(i));
  }
  out << "\nvariance:";
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    out << " " << names[i] << "=" << stats->cov(e, e);
  }
  out << "\nflux variance:";
  for (std::size_t r = 0; r < net.reactions().size(); ++r) {
    out << " " << net.reaction_label(net.reactions()[r]) << "=" << stats->flux_var[r];
  }
  out << "\n";
  for (std::size_t c = 0; c < net.noise().size(); ++c) {
    if (const auto& v = stats->input_var[c]) {
      out << "input variance " << net.species_name(net.noise()[c].species) << "=" << *v << "\n";
    }
  }
  return kExitOk;
}

// ------------------------------------------------------------ simulate

struct SimulateArgs {
  std::string file;
  std::vector<std::string> params;
  SimConfig cfg;
  int threads = 0;
  std::string scheme = "euler-maruyama";
  std::optional<double> sigma;
  std::string out_prefix;
  std::string ratio;
  std::string format = "text";
};

Network override_noise(const Network& net, double sigma) {
  if (!(sigma >= 0.0)) throw Error(Errc::InvalidArgument, "--sigma must be >= 0");
  if (sigma == 0.0) return net.with_noise({});
  NoiseSpec noise;
  if (net.noise().empty()) {
    for (const auto& [j, rate] : net.inputs()) noise.push_back({j, WhiteNoise{sigma}});
  } else {
    for (const auto& ch : net.noise()) noise.push_back({ch.species, WhiteNoise{sigma}});
  }
  return net.with_noise(std::move(noise));
}

Json config_json(const SimConfig& c) {
  return {{"dt", c.dt},
          {"t_end", c.t_end},
          {"burn_in", c.burn_in},
          {"ensemble", c.ensemble},
          {"stride", c.record_stride},
          {"scheme", std::string(scheme_name(c.scheme))},
          {"threads", c.threads}};
}

Json moments_json(const MomentEstimates& est) {
  Json j;
  j["mean"] = Json::object();
  j["variance"] = Json::object();
  j["stderr"] = {{"mean", Json::object()}, {"variance", Json::object()},
                 {"flux_variance", Json::object()}};
  for (std::size_t i = 0; i < est.names.size(); ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    j["mean"][est.names[i]] = est.mean(e);
    j["variance"][est.names[i]] = est.variance(e);
    j["stderr"]["mean"][est.names[i]] = est.mean_stderr(e);
    j["stderr"]["variance"][est.names[i]] = est.variance_stderr(e);
  }
  j["flux_variance"] = Json::object();
  for (std::size_t r = 0; r < est.flux_names.size(); ++r) {
    j["flux_variance"][est.flux_names[r]] = est.flux_variance[r];
    j["stderr"]["flux_variance"][est.flux_names[r]] = est.flux_variance_stderr[r];
  }
  j["n_samples"] = est.n_samples;
  j["n_batches"] = est.n_batches;
  j["seed"] = est.seed;
  j["config"] = config_json(est.config);
  return j;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::InvalidArgument, "cannot write " + path);
  f << text;
  if (!f) throw Error(Errc::InvalidArgument, "write failed: " + path);
}

int cmd_simulate(SimulateArgs args, std::ostream& out, std::ostream& err) {
  const auto file = load_network_file(args.file, parse_bindings(args.params, nullptr));
  Network net = file.network;
  if (args.sigma) net = override_noise(net, *args.sigma);
  args.cfg.scheme = parse_scheme(args.scheme);
  args.cfg.threads = default_threads(args.threads);
  const SimConfig cfg = resolve_config(net, args.cfg);

  err << "simulate: file=" << args.file << " dt=" << num(cfg.dt) << " t_end=" << num(cfg.t_end)
      << " burn_in=" << num(cfg.burn_in) << " ensemble=" << cfg.ensemble << " seed=" << cfg.seed
      << " stride=" << cfg.record_stride << " scheme=" << scheme_name(cfg.scheme)
      << " threads=" << cfg.threads;
  if (args.sigma) err << " sigma=" << num(*args.sigma);
  for (const auto& [k, v] : file.params) err << " param " << k << "=" << num(v);
  err << "\n";
  if (!(spectral_abscissa(rate_matrix(net).a) < 0.0)) {
    err << "warning: rate matrix is not stable; moments describe a finite horizon only\n";
  }

  const auto names = state_names(net);
  std::ostringstream csv;
  TrajectoryObserver observer;
  if (!args.out_prefix.empty()) {
    csv << "t";
    for (std::size_t i = 0; i < names.size(); ++i) {
      csv << "," << (i < net.num_species() ? "x_" : "") << names[i];
    }
    csv << "\n";
    observer = [&csv](double t, std::span<const double> z) {
      csv << format_number(t);
      for (const double v : z) csv << "," << format_number(v);
      csv << "\n";
    };
  }

  std::vector<Observable> observables;
  if (!args.ratio.empty()) {
    std::stringstream ss(args.ratio);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) observables.push_back(parse_observable(net, item));
    }
  }

  MomentEstimates est;
  std::optional<VarianceRatioReport> ratio;
  if (!observables.empty()) {
    ratio = variance_ratio(net, cfg, observables, observer);
    est = ratio->moments;
  } else {
    est = simulate(net, cfg, observer);
  }

  Json moments = moments_json(est);
  if (ratio) {
    Json r;
    r["input"] = ratio->input_label;
    r["input_variance"] = ratio->input_variance;
    r["observables"] = Json::array();
    for (const auto& e : ratio->entries) {
      r["observables"].push_back(
          {{"label", e.label}, {"r", e.r}, {"stderr", e.r_stderr}, {"r_exact", e.r_exact}});
    }
    moments["ratio"] = std::move(r);
  }
  if (!args.out_prefix.empty()) {
    write_file(args.out_prefix + ".csv", csv.str());
    write_file(args.out_prefix + ".moments.json", moments.dump(2) + "\n");
  }

  if (args.format == "json") {
    out << moments.dump(2) << "\n";
    return kExitOk;
  }
  out << std::setprecision(8);
  out << "name mean mean_stderr variance variance_stderr\n";
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    out << names[i] << " " << est.mean(e) << " " << est.mean_stderr(e) << " "
        << est.variance(e) << " " << est.variance_stderr(e) << "\n";
  }
  for (std::size_t r = 0; r < est.flux_names.size(); ++r) {
    out << "flux " << est.flux_names[r] << " variance " << est.flux_variance[r] << " stderr "
        << est.flux_variance_stderr[r] << "\n";
  }
  if (ratio) {
    out << "ratio r = Var(X) / Var(" << ratio->input_label << ")\n";
    for (const auto& e : ratio->entries) {
      out << e.label << " r=" << e.r << " stderr=" << e.r_stderr << " exact=" << e.r_exact << "\n";
    }
  }
  out << "n_samples=" << est.n_samples << " n_batches=" << est.n_batches << " seed=" << est.seed
      << "\n";
  return kExitOk;
}

// -------------------------------------------------------------- verify

struct VerifyArgs {
  std::string name;
  std::string file;
  std::optional<int> trials;
  std::uint64_t seed = kDefaultSeed;
  std::optional<std::uint64_t> instance_seed;
  int threads = 0;
  double sigma = 1.0;
  std::optional<int> size;
  std::string ks;
  std::optional<int> index;
  std::string values;
  std::vector<std::string> params;
  std::string species;
  std::string format = "text";
  std::string out_path;
};

std::vector<double> sorted_grid(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

ExperimentReport run_experiment(const VerifyArgs& a) {
  TrialOptions opts;
  opts.seed = a.seed;
  opts.instance_seed = a.instance_seed;
  opts.threads = default_threads(a.threads);
  auto trials = [&](int d) { return a.trials.value_or(d); };
  const std::string& n = a.name;

  if (n == "chain-monotonic") {
    if (!a.ks.empty()) return check_chain_monotonicity(parse_list(a.ks, "--ks"), a.sigma);
    opts.trials = trials(200);
    return chain_monotonicity_trials(opts, a.size.value_or(10), a.sigma);
  }
  if (n == "side-reaction") {
    opts.trials = trials(100);
    return side_reaction_trials(opts, a.sigma);
  }
  if (n == "feedback") {
    opts.trials = trials(100);
    return feedback_trials(opts, a.sigma);
  }
  if (n == "positivity") {
    opts.trials = trials(200);
    return positivity_trials(opts, a.size.value_or(12));
  }
  if (n == "deficiency") {
    opts.trials = trials(500);
    return deficiency_trials(opts, a.size.value_or(12));
  }
  if (n == "small-k") {
    const auto ks = a.ks.empty() ? std::vector<double>{1, 1, 1, 1} : parse_list(a.ks, "--ks");
    const auto grid = a.values.empty() ? std::vector<double>{1e-4, 1e-3, 1e-2, 1e-1}
                                       : sorted_grid(parse_list(a.values, "--values"));
    return small_k_sweep(ks, a.index.value_or(2), grid, a.sigma);
  }
  if (n == "chain-reduction") {
    const auto ks = a.ks.empty() ? std::vector<double>{1, 2, 3} : parse_list(a.ks, "--ks");
    const auto grid = a.values.empty() ? std::vector<double>{1e2, 1e3, 1e4, 1e5}
                                       : sorted_grid(parse_list(a.values, "--values"));
    return chain_reduction_check(ks, a.index.value_or(2), grid, a.sigma);
  }
  if (n == "large-L" || n == "eigenvalue-scaling") {
    if (a.file.empty()) {
      throw Error(Errc::InvalidArgument, n + " needs a network file");
    }
    std::vector<std::string> bare;
    auto bindings = parse_bindings(a.params, &bare);
    if (bare.size() != 1) {
      throw Error(Errc::InvalidArgument, n + " needs exactly one --param NAME to sweep");
    }
    SweepSpec spec;
    spec.parameter = bare.front();
    spec.grid = a.values.empty() ? std::vector<double>{1e2, 1e3, 1e4, 1e5}
                                 : sorted_grid(parse_list(a.values, "--values"));
    // The swept parameter needs some binding to load; the grid overrides it.
    if (!bindings.contains(spec.parameter)) bindings[spec.parameter] = spec.grid.front();
    spec.base = load_network_file(a.file, bindings);
    if (!a.species.empty()) spec.observable = a.species;
    return n == "large-L" ? large_L_sweep(spec) : eigenvalue_scaling(spec);
  }
  std::ostringstream msg;
  msg << "unknown experiment '" << n << "'; available:";
  for (const auto& e : experiment_names()) msg << " " << e;
  throw Error(Errc::InvalidArgument, msg.str());
}

int cmd_verify(const VerifyArgs& a, const std::vector<std::string>& argv,
               std::ostream& out, std::ostream& err) {
  err << "verify: experiment=" << a.name << " seed=" << a.seed;
  if (a.trials) err << " trials=" << *a.trials;
  if (a.instance_seed) err << " instance_seed=" << *a.instance_seed;
  err << " sigma=" << num(a.sigma) << " threads=" << default_threads(a.threads);
  if (!a.file.empty()) err << " file=" << a.file;
  if (!a.values.empty()) err << " values=" << a.values;
  if (!a.ks.empty()) err << " ks=" << a.ks;
  err << "\n";

  const ExperimentReport rep = run_experiment(a);
  const Json j = rep.to_json();
  if (!a.out_path.empty()) write_file(a.out_path, j.dump(2) + "\n");
  if (a.format == "json") {
    out << j.dump(2) << "\n";
  } else {
    out << rep.experiment << ": " << rep.instances.size() << " instances, "
        << rep.violations() << " violations\n";
    for (const auto& [claim, ok] : rep.claims) {
      out << "  " << claim << ": " << (ok ? "pass" : "FAIL") << "\n";
    }
    for (const auto& key : {"fit", "floor", "median", "within_factor_2_of_median"}) {
      if (j["summary"].contains(key)) out << "  " << key << ": " << j["summary"][key].dump() << "\n";
    }
    out << (rep.passed() ? "PASS" : "FAIL") << "\n";
  }
  if (rep.passed()) return kExitOk;

  // Rebuild the command without the trial selection flags for replay.
  std::string base = "fluxnet";
  for (std::size_t i = 0; i < argv.size(); ++i) {
    if (argv[i] == "--trials" || argv[i] == "--seed" || argv[i] == "--instance-seed") {
      ++i;
      continue;
    }
    base += " " + argv[i];
  }
  std::size_t shown = 0;
  for (const auto& inst : rep.instances) {
    if (inst.pass) continue;
    if (++shown > 10) {
      err << "... " << rep.violations() - 10 << " more failing instances\n";
      break;
    }
    if (inst.seed) {
      err << "violation: replay with: " << base << " --instance-seed " << *inst.seed << "\n";
    } else {
      err << "violation: instance " << inst.params.dump() << "\n";
    }
  }
  for (const auto& [claim, ok] : rep.claims) {
    if (!ok) err << "violation: claim " << claim << " failed; replay with: " << base << "\n";
  }
  return kExitViolation;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic analysis of linear single-species-complex reaction networks"};
  app.name("fluxnet");
  app.require_subcommand(1);

  AnalyzeArgs an;
  auto* analyze_cmd = app.add_subcommand("analyze", "structural and stationary analysis");
  analyze_cmd->add_option("file", an.file, "network file (.rxn)")->required();
  analyze_cmd->add_option("--param", an.params, "parameter binding NAME=VALUE");
  analyze_cmd->add_option("--format", an.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  analyze_cmd->add_flag("--structure-only", an.structure_only,
                        "skip the stationary statistics");

  SimulateArgs sim;
  double burn_in = -1.0;
  std::uint64_t sim_seed = kDefaultSeed;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo simulation");
  sim_cmd->add_option("file", sim.file, "network file (.rxn)")->required();
  sim_cmd->add_option("--param", sim.params, "parameter binding NAME=VALUE");
  sim_cmd->add_option("--dt", sim.cfg.dt, "time step (default: automatic)");
  sim_cmd->add_option("--t-end", sim.cfg.t_end, "horizon (default: automatic)");
  sim_cmd->add_option("--burn-in", burn_in, "discarded prefix (default: automatic)");
  sim_cmd->add_option("--ensemble", sim.cfg.ensemble, "number of trajectories");
  sim_cmd->add_option("--seed", sim_seed, "master seed");
  sim_cmd->add_option("--stride", sim.cfg.record_stride, "record every N steps");
  sim_cmd->add_option("--threads", sim.threads, "worker threads (env FLUXNET_THREADS)");
  sim_cmd->add_option("--scheme", sim.scheme, "euler-maruyama or exact");
  sim_cmd->add_option("--sigma", sim.sigma, "replace all noise by white noise of this intensity");
  sim_cmd->add_option("--out", sim.out_prefix, "write PREFIX.csv and PREFIX.moments.json");
  sim_cmd->add_option("--ratio", sim.ratio, "comma-separated observables for Var(X)/Var(input)");
  sim_cmd->add_option("--format", sim.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  VerifyArgs ver;
  auto* ver_cmd = app.add_subcommand("verify", "run a named experiment");
  ver_cmd->add_option("name", ver.name, "experiment name")->required();
  ver_cmd->add_option("file", ver.file, "network file for sweeps");
  ver_cmd->add_option("--trials", ver.trials, "randomized instances");
  ver_cmd->add_option("--seed", ver.seed, "master seed");
  ver_cmd->add_option("--instance-seed", ver.instance_seed, "replay one instance");
  ver_cmd->add_option("--threads", ver.threads, "worker threads (env FLUXNET_THREADS)");
  ver_cmd->add_option("--sigma", ver.sigma, "white-noise intensity");
  ver_cmd->add_option("--size", ver.size, "chain length or maximal species count");
  ver_cmd->add_option("--ks", ver.ks, "comma-separated chain rate constants");
  ver_cmd->add_option("--index", ver.index, "1-based chain position");
  ver_cmd->add_option("--values,--grid", ver.values, "comma-separated sweep grid");
  ver_cmd->add_option("--param", ver.params, "NAME to sweep, or NAME=VALUE binding");
  ver_cmd->add_option("--species", ver.species, "observable species of a sweep");
  ver_cmd->add_option("--format", ver.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  ver_cmd->add_option("--out", ver.out_path, "write the report JSON here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (app.get_subcommands().empty() ? app.help()
                                            : app.get_subcommands().front()->help());
      return kExitOk;
    }
    err << "error: " << e.what() << "\n" << "run 'fluxnet --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (*analyze_cmd) return cmd_analyze(an, out, err);
    if (*sim_cmd) {
      sim.cfg.burn_in = burn_in;
      sim.cfg.seed = sim_seed;
      return cmd_simulate(sim, out, err);
    }
    if (*ver_cmd) return cmd_verify(ver, args, out, err);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error [" << errc_name(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace fluxnet
