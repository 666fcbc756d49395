#include "raftsim/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "json.hpp"

namespace raftsim {

namespace {

using nlohmann::json;

// Strict object access: every key must be known, every present key is
// type-checked, missing keys keep the caller's default.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : obj_(j), where_(std::move(where)) {
    if (!obj_.is_object()) throw ConfigError(where_ + " must be a JSON object");
  }

  ~ObjectReader() = default;

  template <class T>
  void get(const char* key, T& out) {
    seen_.push_back(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + "." + key + " has the wrong type");
    }
  }

  const json* child(const char* key) {
    seen_.push_back(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      bool known = false;
      for (const std::string& k : seen_)
        if (k == it.key()) known = true;
      if (!known) throw ConfigError(where_ + " has an unknown key \"" + it.key() + "\"");
    }
  }

 private:
  const json& obj_;
  std::string where_;
  std::vector<std::string> seen_;
};

ExchangeLaw parse_law(const json& j) {
  ObjectReader r(j, "law");
  std::string type = "noneq";
  r.get("type", type);
  if (type == "equilibrium") {
    EquilibriumLaw law;
    r.get("c", law.c);
    r.finish();
    return law;
  }
  if (type == "noneq") {
    NonEquilibriumLaw law;
    r.get("c1", law.c1);
    r.get("c2", law.c2);
    r.finish();
    return law;
  }
  if (type == "cutoff") {
    CutoffNonEquilibriumLaw law;
    r.get("c1", law.c1);
    r.get("c2", law.c2);
    r.get("a", law.cutoff.a);
    r.get("w", law.cutoff.w);
    r.finish();
    return law;
  }
  throw ConfigError("law.type must be one of equilibrium, noneq, cutoff (got \"" + type + "\")");
}

json emit_law(const ExchangeLaw& law) {
  json j;
  if (const auto* eq = std::get_if<EquilibriumLaw>(&law)) {
    j["type"] = "equilibrium";
    j["c"] = eq->c;
  } else if (const auto* ne = std::get_if<NonEquilibriumLaw>(&law)) {
    j["type"] = "noneq";
    j["c1"] = ne->c1;
    j["c2"] = ne->c2;
  } else {
    const auto& cl = std::get<CutoffNonEquilibriumLaw>(law);
    j["type"] = "cutoff";
    j["c1"] = cl.c1;
    j["c2"] = cl.c2;
    j["a"] = cl.cutoff.a;
    j["w"] = cl.cutoff.w;
  }
  return j;
}

}  // namespace

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Full:
      return "full";
    case ModelKind::Reduced:
      return "reduced";
    case ModelKind::OK:
      return "ok";
    case ModelKind::Stationary:
      return "stationary";
  }
  throw ConfigError("unhandled model kind");
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "full") return ModelKind::Full;
  if (s == "reduced") return ModelKind::Reduced;
  if (s == "ok") return ModelKind::OK;
  if (s == "stationary") return ModelKind::Stationary;
  throw ConfigError("model must be one of full, reduced, ok, stationary (got \"" + s + "\")");
}

long RunConfig::steps() const {
  if (params.dt <= 0.0) return 0;
  return std::lround(params.t_end / params.dt);
}

void RunConfig::validate() const {
  std::vector<std::string> problems;
  auto require = [&](bool ok, const std::string& msg) {
    if (!ok) problems.push_back(msg);
  };

  require(geometry.L > 0.0, "geometry.L must be positive");
  require(geometry.H > 0.0, "geometry.H must be positive");
  require(geometry.N >= 4, "geometry.N must be at least 4");
  require(geometry.N % 2 == 0, "geometry.N must be even");
  require(geometry.Mz >= 1, "geometry.Mz must be at least 1");

  require(params.eps >= 1e-8, "params.eps must be at least 1e-8");
  require(params.delta >= 1e-8, "params.delta must be at least 1e-8");
  require(params.D > 0.0, "params.D must be positive");
  require(params.dt > 0.0, "params.dt must be positive");
  require(params.t_end >= 0.0, "params.t_end must be non-negative");

  try {
    raftsim::validate(law);
  } catch (const ConfigError& e) {
    problems.push_back(e.what());
  }

  require(initial.noise_amp >= 0.0, "initial.noise_amp must be non-negative");
  require(initial.u0 >= 0.0, "initial.u0 must be non-negative");
  require(total_mass >= 0.0, "total_mass must be non-negative");
  if (initial.snapshot.empty() &&
      (model == ModelKind::Full || model == ModelKind::Reduced || model == ModelKind::Stationary)) {
    require(total_mass >= geometry.bulk_volume() * initial.u0 - 1e-12,
            "initial bulk mass |B|*u0 exceeds total_mass, leaving no surface mass");
  }
  if (model == ModelKind::OK)
    require(std::holds_alternative<NonEquilibriumLaw>(law),
            "the limit model requires the plain non-equilibrium law");
  if (model == ModelKind::Stationary)
    require(!std::holds_alternative<EquilibriumLaw>(law),
            "the stationary solver requires a rate law in (u, v); the equilibrium law is not "
            "closed in those variables");

  require(output.snapshot_every >= 0, "output.snapshot_every must be non-negative");
  require(output.csv_every >= 1, "output.csv_every must be at least 1");
  require(!output.dir.empty(), "output.dir must not be empty");

  require(stationary.tol > 0.0, "stationary.tol must be positive");
  require(stationary.alpha > 0.0 && stationary.alpha <= 1.0, "stationary.alpha must be in (0, 1]");
  require(stationary.max_iters >= 1, "stationary.max_iters must be at least 1");

  if (!problems.empty()) {
    std::string report = "invalid configuration:";
    for (const std::string& p : problems) report += "\n  - " + p;
    throw ConfigError(report);
  }
}

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }

  RunConfig c;
  ObjectReader root(j, "config");
  std::string model = to_string(c.model);
  root.get("model", model);
  c.model = model_kind_from_string(model);

  if (const json* g = root.child("geometry")) {
    ObjectReader r(*g, "geometry");
    r.get("L", c.geometry.L);
    r.get("N", c.geometry.N);
    r.get("H", c.geometry.H);
    r.get("Mz", c.geometry.Mz);
    r.finish();
  }
  if (const json* p = root.child("params")) {
    ObjectReader r(*p, "params");
    r.get("eps", c.params.eps);
    r.get("delta", c.params.delta);
    r.get("D", c.params.D);
    r.get("dt", c.params.dt);
    r.get("t_end", c.params.t_end);
    r.get("stab", c.params.stab);
    r.finish();
  }
  if (const json* l = root.child("law")) c.law = parse_law(*l);
  if (const json* i = root.child("initial")) {
    ObjectReader r(*i, "initial");
    r.get("phi_mean", c.initial.phi_mean);
    r.get("noise_amp", c.initial.noise_amp);
    r.get("seed", c.initial.seed);
    r.get("u0", c.initial.u0);
    r.get("snapshot", c.initial.snapshot);
    r.finish();
  }
  root.get("total_mass", c.total_mass);
  if (const json* o = root.child("output")) {
    ObjectReader r(*o, "output");
    r.get("dir", c.output.dir);
    r.get("snapshot_every", c.output.snapshot_every);
    r.get("csv_every", c.output.csv_every);
    r.finish();
  }
  if (const json* s = root.child("stationary")) {
    ObjectReader r(*s, "stationary");
    r.get("tol", c.stationary.tol);
    r.get("alpha", c.stationary.alpha);
    r.get("max_iters", c.stationary.max_iters);
    r.finish();
  }
  root.finish();
  return c;
}

std::string emit_config(const RunConfig& c) {
  json j;
  j["model"] = to_string(c.model);
  j["geometry"] = {{"L", c.geometry.L}, {"N", c.geometry.N}, {"H", c.geometry.H},
                   {"Mz", c.geometry.Mz}};
  j["params"] = {{"eps", c.params.eps}, {"delta", c.params.delta}, {"D", c.params.D},
                 {"dt", c.params.dt},   {"t_end", c.params.t_end}, {"stab", c.params.stab}};
  j["law"] = emit_law(c.law);
  j["initial"] = {{"phi_mean", c.initial.phi_mean},
                  {"noise_amp", c.initial.noise_amp},
                  {"seed", c.initial.seed},
                  {"u0", c.initial.u0},
                  {"snapshot", c.initial.snapshot}};
  j["total_mass"] = c.total_mass;
  j["output"] = {{"dir", c.output.dir},
                 {"snapshot_every", c.output.snapshot_every},
                 {"csv_every", c.output.csv_every}};
  j["stationary"] = {{"tol", c.stationary.tol},
                     {"alpha", c.stationary.alpha},
                     {"max_iters", c.stationary.max_iters}};
  return j.dump(2) + "\n";
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void save_config(const RunConfig& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << emit_config(c);
  out.flush();
  if (!out) throw InputError("cannot write " + path);
}

}  // namespace raftsim
