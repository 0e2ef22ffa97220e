#include "fluxnet/netparse.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fluxnet/error.hpp"

namespace fluxnet {

namespace {

enum class Tok { Ident, Number, Arrow, Equals, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int column = 0;
};

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

[[noreturn]] void syntax(int line, int col, const std::string& msg) {
  throw ParseError(Errc::SyntaxError, line, col, msg);
}

// Scans [+-]?(d+[.d*]|.d+)([eE][+-]?d+)? starting at i; returns the end or i
// if no number starts here.
std::size_t scan_number(std::string_view s, std::size_t i) {
  std::size_t j = i;
  if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
  std::size_t digits = 0;
  while (j < s.size() && is_digit(s[j])) { ++j; ++digits; }
  if (j < s.size() && s[j] == '.') {
    ++j;
    while (j < s.size() && is_digit(s[j])) { ++j; ++digits; }
  }
  if (digits == 0) return i;
  if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
    std::size_t k = j + 1;
    if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
    std::size_t exp_digits = 0;
    while (k < s.size() && is_digit(s[k])) { ++k; ++exp_digits; }
    if (exp_digits > 0) j = k;
  }
  return j;
}

std::vector<Token> lex_line(std::string_view line, int line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    const int col = static_cast<int>(i) + 1;
    if (c == '#') break;
    if (c == ' ' || c == '\t' || c == '\r') { ++i; continue; }
    if (c == '-' && i + 1 < line.size() && line[i + 1] == '>') {
      out.push_back({Tok::Arrow, "->", col});
      i += 2;
      continue;
    }
    if (c == '=') {
      out.push_back({Tok::Equals, "=", col});
      ++i;
      continue;
    }
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < line.size() && ident_char(line[j])) ++j;
      out.push_back({Tok::Ident, std::string(line.substr(i, j - i)), col});
      i = j;
      continue;
    }
    const std::size_t end = scan_number(line, i);
    if (end != i) {
      if (end < line.size() && ident_char(line[end])) {
        syntax(line_no, static_cast<int>(end) + 1, "malformed number");
      }
      out.push_back({Tok::Number, std::string(line.substr(i, end - i)), col});
      i = end;
      continue;
    }
    syntax(line_no, col, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::End, "", static_cast<int>(line.size()) + 1});
  return out;
}

double to_double(const Token& t, int line_no) {
  std::string_view s = t.text;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    syntax(line_no, t.column, "number out of range");
  }
  return v;
}

class LineParser {
 public:
  LineParser(std::vector<Token> toks, int line_no)
      : toks_(std::move(toks)), line_(line_no) {}

  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  SourcePos here() const { return {line_, peek().column}; }
  int line() const { return line_; }

  [[noreturn]] void fail(const std::string& expected) const {
    syntax(line_, peek().column, "expected " + expected);
  }

  // Consumes `key =`.
  void key(const std::string& name) {
    if (peek().kind != Tok::Ident || peek().text != name) {
      fail("'" + name + "='");
    }
    const int col = peek().column;
    next();
    if (peek().kind != Tok::Equals) {
      syntax(line_, col, "expected '" + name + "='");
    }
    next();
  }

  std::string ident(const std::string& what) {
    if (peek().kind != Tok::Ident) fail(what);
    return next().text;
  }

  double number() {
    if (peek().kind != Tok::Number) fail("a number");
    const Token& t = next();
    return to_double(t, line_);
  }

  NumExpr numexpr() {
    if (peek().kind == Tok::Number) return number();
    if (peek().kind == Tok::Ident) return next().text;
    fail("a number or parameter name");
  }

  // IDENT or the zero complex.
  std::string complex() {
    if (peek().kind == Tok::Ident) return next().text;
    if (peek().kind == Tok::Number && peek().text == "0") {
      next();
      return kZeroName;
    }
    fail("a species name or '0'");
  }

  void end() {
    if (peek().kind != Tok::End) fail("end of line");
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int line_;
};

void parse_line(LineParser& p, NetworkTemplate& out) {
  if (p.peek().kind == Tok::End) return;
  if (p.peek().kind != Tok::Ident) {
    p.fail("'species', 'input', 'reaction' or 'param'");
  }
  const std::string keyword = p.peek().text;
  if (keyword == "species") {
    p.next();
    if (p.peek().kind != Tok::Ident) p.fail("a species name");
    while (p.peek().kind == Tok::Ident) {
      const SourcePos pos = p.here();
      out.species.push_back({p.next().text, pos});
    }
    p.end();
  } else if (keyword == "input") {
    p.next();
    NetworkTemplate::Input in;
    in.species_pos = p.here();
    in.species = p.ident("a species name");
    p.key("rate");
    in.rate_pos = p.here();
    in.rate = p.number();
    if (p.peek().kind == Tok::Ident && p.peek().text == "noise") {
      p.key("noise");
      NetworkTemplate::Noise noise;
      if (p.peek().kind != Tok::Ident ||
          (p.peek().text != "white" && p.peek().text != "ou")) {
        p.fail("'white' or 'ou'");
      }
      noise.ou = p.next().text == "ou";
      if (noise.ou) {
        p.key("tau");
        noise.tau_pos = p.here();
        noise.tau = p.numexpr();
        p.key("sd");
        noise.sd_pos = p.here();
        noise.sd = p.numexpr();
      } else {
        p.key("sigma");
        noise.sigma_pos = p.here();
        noise.sigma = p.numexpr();
      }
      in.noise = noise;
    }
    p.end();
    out.inputs.push_back(std::move(in));
  } else if (keyword == "reaction") {
    p.next();
    NetworkTemplate::Reaction r;
    r.source_pos = p.here();
    r.source = p.complex();
    if (p.peek().kind != Tok::Arrow) p.fail("'->'");
    p.next();
    r.target_pos = p.here();
    r.target = p.complex();
    p.key("k");
    r.k_pos = p.here();
    r.k = p.numexpr();
    p.end();
    out.reactions.push_back(std::move(r));
  } else if (keyword == "param") {
    p.next();
    const SourcePos pos = p.here();
    const std::string name = p.ident("a parameter name");
    if (p.peek().kind != Tok::Equals) p.fail("'='");
    p.next();
    const double value = p.number();
    p.end();
    if (out.params.contains(name)) {
      throw ParseError(Errc::SemanticError, pos.line, pos.column,
                       "duplicate parameter " + name);
    }
    out.params[name] = {value, pos};
  } else {
    p.fail("'species', 'input', 'reaction' or 'param'");
  }
}

[[noreturn]] void semantic(Errc code, SourcePos pos, const std::string& msg) {
  throw ParseError(code, pos.line, pos.column, msg);
}

}  // namespace

std::vector<std::string> NetworkTemplate::referenced_parameters() const {
  std::vector<std::string> names;
  auto note = [&](const NumExpr& e) {
    if (const auto* s = std::get_if<std::string>(&e)) {
      if (std::find(names.begin(), names.end(), *s) == names.end()) {
        names.push_back(*s);
      }
    }
  };
  for (const auto& in : inputs) {
    if (in.noise) {
      note(in.noise->sigma);
      note(in.noise->tau);
      note(in.noise->sd);
    }
  }
  for (const auto& r : reactions) note(r.k);
  return names;
}

NetworkTemplate parse_template(std::string_view text) {
  NetworkTemplate out;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    const std::string_view line =
        text.substr(start, nl == std::string_view::npos ? std::string_view::npos
                                                        : nl - start);
    ++line_no;
    LineParser p(lex_line(line, line_no), line_no);
    parse_line(p, out);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return out;
}

Network instantiate(const NetworkTemplate& tmpl,
                    const std::map<std::string, double>& bindings) {
  auto resolve = [&](const NumExpr& e, SourcePos pos) -> double {
    if (const auto* v = std::get_if<double>(&e)) return *v;
    const auto& name = std::get<std::string>(e);
    if (const auto it = bindings.find(name); it != bindings.end()) {
      return it->second;
    }
    if (const auto it = tmpl.params.find(name); it != tmpl.params.end()) {
      return it->second.value;
    }
    semantic(Errc::UnboundParameter, pos,
             "parameter '" + name + "' is neither declared nor bound");
  };

  std::vector<std::string> species;
  std::set<std::string> seen;
  for (const auto& s : tmpl.species) {
    if (!seen.insert(s.name).second) {
      semantic(Errc::DuplicateSpecies, s.pos, "duplicate species " + s.name);
    }
    species.push_back(s.name);
  }
  if (species.empty()) {
    semantic(Errc::SemanticError, {1, 1}, "no species declared");
  }
  auto check_species = [&](const std::string& name, SourcePos pos,
                           bool allow_zero) {
    if (name == kZeroName) {
      if (!allow_zero) semantic(Errc::SemanticError, pos, "expected a species");
      return;
    }
    if (!seen.contains(name)) {
      semantic(Errc::UnknownSpecies, pos, "unknown species " + name);
    }
  };

  std::vector<InputSpec> inputs;
  std::set<std::string> input_seen;
  for (const auto& in : tmpl.inputs) {
    check_species(in.species, in.species_pos, false);
    if (!input_seen.insert(in.species).second) {
      semantic(Errc::DuplicateInput, in.species_pos,
               "duplicate input for " + in.species);
    }
    if (!(in.rate >= 0.0)) {
      semantic(Errc::NegativeInput, in.rate_pos,
               "input rate must be >= 0");
    }
    InputSpec spec{in.species, in.rate, std::nullopt};
    if (in.noise) {
      const auto& n = *in.noise;
      if (n.ou) {
        const double tau = resolve(n.tau, n.tau_pos);
        const double sd = resolve(n.sd, n.sd_pos);
        if (!(tau > 0.0)) semantic(Errc::InvalidNoise, n.tau_pos, "tau must be > 0");
        if (!(sd > 0.0)) semantic(Errc::InvalidNoise, n.sd_pos, "sd must be > 0");
        spec.noise = OuNoise{tau, sd};
      } else {
        const double sigma = resolve(n.sigma, n.sigma_pos);
        if (!(sigma > 0.0)) {
          semantic(Errc::InvalidNoise, n.sigma_pos, "sigma must be > 0");
        }
        spec.noise = WhiteNoise{sigma};
      }
    }
    inputs.push_back(std::move(spec));
  }

  std::vector<ReactionSpec> reactions;
  for (const auto& r : tmpl.reactions) {
    check_species(r.source, r.source_pos, true);
    check_species(r.target, r.target_pos, true);
    if (r.source == r.target) {
      semantic(Errc::SelfLoop, r.target_pos,
               "reaction has identical source and target");
    }
    const double k = resolve(r.k, r.k_pos);
    if (!(k > 0.0) || !std::isfinite(k)) {
      semantic(Errc::NonpositiveRate, r.k_pos, "rate constant must be > 0");
    }
    reactions.push_back({r.source, r.target, k});
  }
  return build_network(std::move(species), reactions, inputs);
}

Network NetworkFile::with_params(
    const std::map<std::string, double>& overrides) const {
  auto merged = params;
  for (const auto& [k, v] : overrides) merged[k] = v;
  return instantiate(tmpl, merged);
}

NetworkFile parse_network(std::string_view text,
                          const std::map<std::string, double>& bindings,
                          std::string name) {
  NetworkFile file;
  file.name = std::move(name);
  file.tmpl = parse_template(text);
  for (const auto& [k, p] : file.tmpl.params) file.params[k] = p.value;
  for (const auto& [k, v] : bindings) file.params[k] = v;
  file.network = instantiate(file.tmpl, file.params);
  return file;
}

NetworkFile load_network_file(const std::string& path,
                              const std::map<std::string, double>& bindings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::InvalidArgument, "cannot open " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_network(buf.str(), bindings, path);
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) {
    throw Error(Errc::InvalidArgument, "cannot format number");
  }
  return std::string(buf, ptr);
}

std::string serialize_network(const Network& net) {
  auto check_name = [](const std::string& n) {
    if (n.empty() || !ident_start(n.front()) ||
        !std::all_of(n.begin(), n.end(), ident_char)) {
      throw Error(Errc::InvalidArgument,
                  "species name '" + n + "' is not representable");
    }
  };
  std::ostringstream out;
  out << "species";
  for (const auto& s : net.species()) {
    check_name(s);
    out << ' ' << s;
  }
  out << '\n';
  for (const auto& [j, rate] : net.inputs()) {
    out << "input " << net.species_name(j) << " rate=" << format_number(rate);
    const auto ch = std::find_if(net.noise().begin(), net.noise().end(),
                                 [j = j](const auto& c) { return c.species == j; });
    if (ch != net.noise().end()) {
      if (const auto* w = std::get_if<WhiteNoise>(&ch->kind)) {
        out << " noise=white sigma=" << format_number(w->sigma);
      } else {
        const auto& ou = std::get<OuNoise>(ch->kind);
        out << " noise=ou tau=" << format_number(ou.tau)
            << " sd=" << format_number(ou.stationary_sd);
      }
    }
    out << '\n';
  }
  for (const auto& r : net.reactions()) {
    out << "reaction " << net.complex_name(r.source) << " -> "
        << net.complex_name(r.target) << " k=" << format_number(r.rate)
        << '\n';
  }
  return out.str();
}

}  // namespace fluxnet
