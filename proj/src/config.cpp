#include "qpdyn/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "qpdyn/errors.hpp"
#include "qpdyn/field_io.hpp"

namespace qpdyn {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

struct Entry {
  std::string key;
  std::string value;
  std::size_t line;
};

using Sections = std::map<std::string, std::vector<Entry>>;

Sections parse_sections(const std::string& text) {
  Sections out;
  std::istringstream in(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw InvalidInput("config line " + std::to_string(lineno) + ": malformed section");
      section = trim(t.substr(1, t.size() - 2));
      out[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("config line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty())
      throw InvalidInput("config line " + std::to_string(lineno) + ": entry outside a section");
    out[section].push_back(Entry{trim(t.substr(0, eq)), trim(t.substr(eq + 1)), lineno});
  }
  return out;
}

class SectionView {
 public:
  SectionView(const Sections& all, const std::string& name) : name_(name) {
    const auto it = all.find(name);
    if (it != all.end()) entries_ = &it->second;
  }

  bool present() const { return entries_ != nullptr; }

  std::optional<std::string> get(const std::string& key) const {
    if (!entries_) return std::nullopt;
    for (const Entry& e : *entries_)
      if (e.key == key) return e.value;
    return std::nullopt;
  }

  std::vector<std::string> get_all(const std::string& key) const {
    std::vector<std::string> out;
    if (entries_)
      for (const Entry& e : *entries_)
        if (e.key == key) out.push_back(e.value);
    return out;
  }

  std::string require(const std::string& key) const {
    const auto v = get(key);
    if (!v) throw InvalidInput("config: [" + name_ + "] is missing '" + key + "'");
    return *v;
  }

  double require_double(const std::string& key) const { return to_double(key, require(key)); }

  double get_double(const std::string& key, double fallback) const {
    const auto v = get(key);
    return v ? to_double(key, *v) : fallback;
  }

  std::optional<double> get_optional_double(const std::string& key) const {
    const auto v = get(key);
    if (!v) return std::nullopt;
    return to_double(key, *v);
  }

  double to_double(const std::string& key, const std::string& v) const {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
      throw InvalidInput("config: [" + name_ + "] " + key + ": bad number '" + v + "'");
    return d;
  }

 private:
  std::string name_;
  const std::vector<Entry>* entries_ = nullptr;
};

}  // namespace

RhsKind parse_rhs_kind(const std::string& name) {
  if (name == "phase-direct") return RhsKind::phase_direct;
  if (name == "phase-fact") return RhsKind::phase_factorized;
  if (name == "schrodinger-ref") return RhsKind::schrodinger_reference;
  throw InvalidInput("unknown rhs kind '" + name +
                     "' (expected phase-direct|phase-fact|schrodinger-ref)");
}

const char* rhs_kind_name(RhsKind kind) {
  switch (kind) {
    case RhsKind::phase_direct: return "phase-direct";
    case RhsKind::phase_factorized: return "phase-fact";
    case RhsKind::schrodinger_reference: return "schrodinger-ref";
  }
  return "?";
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  const Sections sections = parse_sections(text);
  ExperimentConfig cfg;
  cfg.raw_text = text;
  cfg.hash = fnv1a_hex(text);

  {
    SectionView grid(sections, "grid");
    if (!grid.present()) throw InvalidInput("config: missing [grid] section");
    const double n = grid.require_double("n_q");
    if (!(n >= 2.0)) throw InvalidInput("config: [grid] n_q must be >= 2");
    cfg.n_q = static_cast<std::size_t>(n);
    cfg.q_min = grid.require_double("q_min");
    cfg.q_max = grid.require_double("q_max");
  }

  {
    SectionView init(sections, "initial_state");
    if (!init.present()) throw InvalidInput("config: missing [initial_state] section");
    for (const std::string& term : init.get_all("term")) {
      std::istringstream ls(term);
      double re = 0, im = 0, q0 = 0, p0 = 0;
      if (!(ls >> re >> im >> q0 >> p0))
        throw InvalidInput("config: [initial_state] term must be 're im q0 p0', got '" + term +
                           "'");
      cfg.terms.push_back(InitialTerm{Complex{re, im}, q0, p0});
    }
    if (cfg.terms.empty())
      throw InvalidInput("config: [initial_state] needs at least one 'term'");
  }

  {
    SectionView pot(sections, "potential");
    const std::string kind = pot.present() ? pot.get("kind").value_or("free") : "free";
    if (kind == "morse") {
      cfg.potential = PotentialSpec::morse(pot.get_double("v0", 0.0), pot.require_double("depth"),
                                           pot.require_double("a"), pot.require_double("q_eq"));
    } else if (kind == "harmonic") {
      cfg.potential =
          PotentialSpec::harmonic(pot.get_double("m", 1.0), pot.get_double("omega", 1.0));
    } else if (kind == "free") {
      cfg.potential = PotentialSpec::free_particle();
    } else {
      throw InvalidInput("config: [potential] unknown kind '" + kind + "'");
    }
  }

  {
    SectionView kin(sections, "kinetic");
    const std::string kind =
        kin.present() ? kin.get("kind").value_or("nonrelativistic") : "nonrelativistic";
    if (kind == "nonrelativistic") {
      cfg.kinetic = KineticSpec::non_relativistic(kin.present() ? kin.get_double("mass", 1.0) : 1.0);
    } else if (kind == "relativistic") {
      cfg.kinetic = KineticSpec::relativistic(kin.get_double("m0", 1.0),
                                              kin.get_double("c", 137.035999));
    } else {
      throw InvalidInput("config: [kinetic] unknown kind '" + kind + "'");
    }
  }

  {
    SectionView prop(sections, "propagation");
    if (prop.present()) {
      cfg.t1 = prop.get_double("t1", 0.0);
      cfg.rtol = prop.get_double("rtol", 1e-8);
      cfg.atol = prop.get_double("atol", 1e-10);
      cfg.dt_init = prop.get_double("dt_init", 1e-3);
      cfg.dt_max = prop.get_double("dt_max", std::numeric_limits<double>::infinity());
      cfg.snapshot_stride = prop.get_double("snapshot_stride", 0.5);
      if (const auto rhs = prop.get("rhs")) cfg.rhs_kind = parse_rhs_kind(*rhs);
      if (cfg.t1 < 0.0) throw InvalidInput("config: [propagation] t1 must be >= 0");
      if (!(cfg.rtol > 0.0) || !(cfg.atol > 0.0))
        throw InvalidInput("config: [propagation] rtol and atol must be positive");
      if (!(cfg.dt_max > 0.0)) throw InvalidInput("config: [propagation] dt_max must be > 0");
      cfg.dt_init = std::min(cfg.dt_init, cfg.dt_max);
    }
  }

  {
    SectionView outs(sections, "outputs");
    if (outs.present()) {
      if (const auto reps = outs.get("representations")) {
        std::istringstream ls(*reps);
        std::string name;
        while (ls >> name) cfg.outputs.push_back(name);
      }
      if (const auto c = outs.get("csv")) cfg.csv = (*c == "true" || *c == "1");
    }
    if (cfg.outputs.empty())
      cfg.outputs = {"psi_q", "psi_p", "qp", "kirkwood", "wigner", "husimi"};
    const std::vector<std::string> known = {"psi_q", "psi_p", "qp", "kirkwood", "wigner",
                                            "husimi"};
    for (const std::string& o : cfg.outputs)
      if (std::find(known.begin(), known.end(), o) == known.end())
        throw InvalidInput("config: [outputs] unknown representation '" + o + "'");
  }

  {
    SectionView gates(sections, "gates");
    if (gates.present()) {
      cfg.gate_roundtrip = gates.get_optional_double("roundtrip_linf");
      cfg.gate_trace = gates.get_optional_double("trace_abs");
      cfg.gate_l2 = gates.get_optional_double("compare_l2");
      cfg.gate_trace_drift = gates.get_optional_double("trace_drift");
      cfg.gate_energy_drift = gates.get_optional_double("energy_drift");
      cfg.gate_ehrenfest = gates.get_optional_double("ehrenfest_return");
    }
  }

  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

}  // namespace qpdyn
