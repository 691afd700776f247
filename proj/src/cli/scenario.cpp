#include "yosida/scenario.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include "json.hpp"

#include "yosida/errors.hpp"

namespace yosida {

using json = nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(fmt::format("{}: {}", path.empty() ? "<root>" : path, msg));
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

/// Strict view of a JSON object: every key must be consumed before finish().
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string at(const std::string& key) const { return join(path_, key); }

  const json* get(const std::string& key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    used_.insert(key);
    return &*it;
  }
  const json& need(const std::string& key) {
    const json* v = get(key);
    if (!v) fail(at(key), "missing required key");
    return *v;
  }

  double number(const json& v, const std::string& key) const {
    if (!v.is_number()) fail(at(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(at(key), "must be finite");
    return x;
  }
  double num(const std::string& key) { return number(need(key), key); }
  double num(const std::string& key, double dflt) {
    const json* v = get(key);
    return v ? number(*v, key) : dflt;
  }
  std::uint64_t count(const std::string& key, std::uint64_t dflt) {
    const json* v = get(key);
    if (!v) return dflt;
    if (!v->is_number_unsigned()) fail(at(key), "expected a non-negative integer");
    return v->get<std::uint64_t>();
  }
  bool flag(const std::string& key, bool dflt) {
    const json* v = get(key);
    if (!v) return dflt;
    if (!v->is_boolean()) fail(at(key), "expected true or false");
    return v->get<bool>();
  }
  std::string str(const std::string& key) {
    const json& v = need(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    return v.get<std::string>();
  }
  std::string str(const std::string& key, const std::string& dflt) {
    return j_.contains(key) ? str(key) : dflt;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.contains(it.key())) fail(at(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// Forcing shapes

Forcing parse_forcing(const json& j, const std::string& path);

Forcing parse_trig(Obj& o, bool is_sin) {
  const double amp = o.num("amplitude", 1.0);
  const double freq = o.num("frequency", 1.0);
  const double phase = o.num("phase", 0.0);
  return is_sin ? Forcing::sine(amp, freq, phase) : Forcing::cosine(amp, freq, phase);
}

Forcing parse_forcing(const json& j, const std::string& path) {
  if (j.is_number()) {
    const double c = j.get<double>();
    if (!std::isfinite(c)) fail(path, "must be finite");
    return Forcing::constant(c);
  }
  Obj o(j, path);
  const std::string shape = o.str("shape");
  Forcing f;
  if (shape == "constant") {
    f = Forcing::constant(o.num("value"));
  } else if (shape == "sin" || shape == "cos") {
    f = parse_trig(o, shape == "sin");
  } else if (shape == "quasi_periodic") {
    // a1 sin(nu1 t) + a2 sin(nu2 t)
    const json& fr = o.need("frequencies");
    if (!fr.is_array() || fr.size() != 2) fail(o.at("frequencies"), "expected two numbers");
    std::vector<double> amp{1.0, 1.0};
    if (const json* a = o.get("amplitudes")) {
      if (!a->is_array() || a->size() != 2) fail(o.at("amplitudes"), "expected two numbers");
      for (std::size_t i = 0; i < 2; ++i) amp[i] = o.number((*a)[i], "amplitudes");
    }
    for (std::size_t i = 0; i < 2; ++i) {
      f = f + Forcing::sine(amp[i], o.number(fr[i], "frequencies"), 0.0);
    }
  } else if (shape == "sum") {
    const json& terms = o.need("terms");
    if (!terms.is_array()) fail(o.at("terms"), "expected an array");
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const auto p = fmt::format("{}[{}]", o.at("terms"), i);
      try {
        f = f + parse_forcing(terms[i], p);
      } catch (const ParameterError& e) {
        fail(p, e.what());
      }
    }
  } else if (shape == "table") {
    auto vec = [&](const std::string& key) {
      const json& v = o.need(key);
      if (!v.is_array()) fail(o.at(key), "expected an array of numbers");
      std::vector<double> out;
      for (const auto& x : v) out.push_back(o.number(x, key));
      return out;
    };
    auto t = vec("t");
    auto x = vec("x");
    try {
      f = Forcing::table(std::move(t), std::move(x));
    } catch (const ParameterError& e) {
      fail(o.path(), e.what());
    }
  } else {
    fail(o.at("shape"), fmt::format("unknown shape '{}' (constant, sin, cos, quasi_periodic, sum, table)", shape));
  }
  o.finish();
  return f;
}

json term_json(const Forcing::Term& t) {
  switch (t.kind) {
    case Forcing::Term::Kind::constant:
      return {{"shape", "constant"}, {"value", t.amplitude}};
    case Forcing::Term::Kind::sin:
    case Forcing::Term::Kind::cos:
      return {{"shape", t.kind == Forcing::Term::Kind::sin ? "sin" : "cos"},
              {"amplitude", t.amplitude},
              {"frequency", t.frequency},
              {"phase", t.phase}};
  }
  return {};
}

json forcing_json(const Forcing& f) {
  json parts = json::array();
  for (const auto& t : f.terms()) parts.push_back(term_json(t));
  if (!f.table_t().empty()) parts.push_back({{"shape", "table"}, {"t", f.table_t()}, {"x", f.table_x()}});
  if (parts.size() == 1) return parts[0];
  return {{"shape", "sum"}, {"terms", parts}};
}

// ---------------------------------------------------------------------------
// Operators

std::shared_ptr<Operator> make_operator(const std::string& id, const json& params,
                                        const std::string& path) {
  Obj o(params, path);
  auto forcing = [&](const std::string& key) {
    const json* v = o.get(key);
    return v ? parse_forcing(*v, o.at(key)) : Forcing{};
  };
  std::shared_ptr<Operator> op;
  if (id == "linear_scalar") {
    op = catalog::linear_scalar(o.num("a"), o.num("c", 0.0), o.num("omega"));
  } else if (id == "affine_forced") {
    op = catalog::affine_forced(o.num("a"), forcing("h"), o.num("omega"));
  } else if (id == "delay_linear" || id == "delay_cubic") {
    const double a = o.num("a"), b = o.num("b"), r = o.num("r");
    const Forcing h = forcing("h");
    const double omega = o.num("omega");
    op = id == "delay_linear" ? catalog::delay_linear(a, b, r, h, omega) : catalog::delay_cubic(a, b, r, h, omega);
  } else if (id == "delay_distributed") {
    const double a = o.num("a"), b = o.num("b"), kappa = o.num("kappa");
    op = catalog::delay_distributed(a, b, kappa, forcing("h"), o.num("omega"));
  } else if (id == "shrinkage_multivalued") {
    const double c = o.num("c"), a = o.num("a", 0.0), omega = o.num("omega");
    op = catalog::shrinkage_multivalued(c, a, omega, forcing("h"));
  } else if (id == "modulated_linear") {
    const double a = o.num("a"), eps = o.num("eps"), nu = o.num("nu");
    const Forcing h = forcing("h");
    op = catalog::modulated_linear(a, eps, nu, h, o.num("omega"));
  } else if (id == "diagonal_system") {
    const json& comps = o.need("components");
    if (!comps.is_array() || comps.empty()) fail(o.at("components"), "expected a non-empty array");
    std::vector<ComponentLaw> laws;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      Obj c(comps[i], fmt::format("{}[{}]", o.at("components"), i));
      ComponentLaw law;
      law.a = c.num("a", law.a);
      law.gamma = c.num("gamma", 0.0);
      law.c = c.num("c", 0.0);
      law.b = c.num("b", 0.0);
      if (const json* h = c.get("h")) law.h = parse_forcing(*h, c.at("h"));
      if (const json* th = c.get("theta")) law.theta = parse_forcing(*th, c.at("theta"));
      c.finish();
      laws.push_back(std::move(law));
    }
    const std::string coupling = o.str("coupling", "none");
    HistoryCoupling hc = HistoryCoupling::none;
    if (coupling == "point") {
      hc = HistoryCoupling::point;
    } else if (coupling == "distributed") {
      hc = HistoryCoupling::distributed;
    } else if (coupling != "none") {
      fail(o.at("coupling"), "expected none, point or distributed");
    }
    op = catalog::diagonal_system(std::move(laws), hc, o.num("delay", 1.0), o.num("omega"));
  } else if (id == "expansive_control") {
    op = catalog::expansive_control(o.num("a"), o.num("omega"));
  } else {
    fail(join(path, ""), fmt::format("unknown operator id '{}'", id));
  }
  o.finish();
  return op;
}

void apply_declared(Operator& op, const std::vector<std::pair<std::string, double>>& declared) {
  auto& c = op.mutable_constants();
  for (const auto& [key, value] : declared) {
    if (key == "K0") {
      c.K0 = value;
    } else if (key == "omega") {
      c.omega = value;
    } else if (key == "L_g") {
      c.L_g = value;
    } else {
      fail("operator.declared." + key, "unknown constant (K0, omega, L_g)");
    }
  }
}

// ---------------------------------------------------------------------------
// Scenario sections

const char* check_name(CheckSpec::Kind k) {
  switch (k) {
    case CheckSpec::Kind::periodicity: return "periodicity";
    case CheckSpec::Kind::antiperiodicity: return "antiperiodicity";
    case CheckSpec::Kind::almost_period: return "almost_period";
    case CheckSpec::Kind::integral_residual: return "integral_residual";
    case CheckSpec::Kind::lipschitz: return "lipschitz";
    case CheckSpec::Kind::modulus: return "modulus";
  }
  return "?";
}

CheckSpec parse_check(const json& j, const std::string& path) {
  Obj o(j, path);
  CheckSpec c;
  const std::string kind = o.str("kind");
  if (kind == "periodicity" || kind == "antiperiodicity") {
    c.kind = kind == "periodicity" ? CheckSpec::Kind::periodicity : CheckSpec::Kind::antiperiodicity;
    c.period = o.num("period");
    if (!(c.period > 0.0)) fail(o.at("period"), "must be positive");
  } else if (kind == "almost_period") {
    c.kind = CheckSpec::Kind::almost_period;
    c.epsilon = o.num("epsilon", c.epsilon);
    c.s_max = o.num("s_max", c.s_max);
    c.ds = o.num("ds", c.ds);
    if (!(c.epsilon > 0.0 && c.s_max > 0.0 && c.ds > 0.0)) fail(path, "epsilon, s_max and ds must be positive");
  } else if (kind == "integral_residual") {
    c.kind = CheckSpec::Kind::integral_residual;
    c.samples = o.count("samples", c.samples);
    c.delta_max = o.num("delta_max", c.delta_max);
    if (!(c.delta_max > 0.0)) fail(o.at("delta_max"), "must be positive");
  } else if (kind == "lipschitz" || kind == "modulus") {
    c.kind = kind == "lipschitz" ? CheckSpec::Kind::lipschitz : CheckSpec::Kind::modulus;
    c.horizon = o.num("horizon", c.horizon);
    if (!(c.horizon > 0.0)) fail(o.at("horizon"), "must be positive");
  } else {
    fail(o.at("kind"), fmt::format("unknown check '{}'", kind));
  }
  o.finish();
  return c;
}

json check_json(const CheckSpec& c) {
  json j{{"kind", check_name(c.kind)}};
  switch (c.kind) {
    case CheckSpec::Kind::periodicity:
    case CheckSpec::Kind::antiperiodicity:
      j["period"] = c.period;
      break;
    case CheckSpec::Kind::almost_period:
      j["epsilon"] = c.epsilon;
      j["s_max"] = c.s_max;
      j["ds"] = c.ds;
      break;
    case CheckSpec::Kind::integral_residual:
      j["samples"] = c.samples;
      j["delta_max"] = c.delta_max;
      break;
    case CheckSpec::Kind::lipschitz:
    case CheckSpec::Kind::modulus:
      j["horizon"] = c.horizon;
      break;
  }
  return j;
}

StartSpec parse_start(const json& j, const std::string& path) {
  Obj o(j, path);
  StartSpec s;
  const std::string kind = o.str("kind");
  if (kind == "zero") {
    s.kind = StartSpec::Kind::zero;
  } else if (kind == "constant") {
    s.kind = StartSpec::Kind::constant;
    const json& v = o.need("value");
    if (v.is_number()) {
      s.value = {o.number(v, "value")};
    } else if (v.is_array() && !v.empty()) {
      for (const auto& x : v) s.value.push_back(o.number(x, "value"));
    } else {
      fail(o.at("value"), "expected a number or a non-empty array");
    }
  } else if (kind == "forcing") {
    s.kind = StartSpec::Kind::forcing;
    const json& v = o.need("shape");
    if (v.is_array()) {
      if (v.empty()) fail(o.at("shape"), "expected at least one component");
      for (std::size_t i = 0; i < v.size(); ++i) {
        s.shape.push_back(parse_forcing(v[i], fmt::format("{}[{}]", o.at("shape"), i)));
      }
    } else {
      s.shape.push_back(parse_forcing(v, o.at("shape")));
    }
  } else {
    fail(o.at("kind"), "expected zero, constant or forcing");
  }
  o.finish();
  return s;
}

json start_json(const StartSpec& s) {
  switch (s.kind) {
    case StartSpec::Kind::zero:
      return {{"kind", "zero"}};
    case StartSpec::Kind::constant:
      return {{"kind", "constant"}, {"value", s.value}};
    case StartSpec::Kind::forcing: {
      json shapes = json::array();
      for (const auto& f : s.shape) shapes.push_back(forcing_json(f));
      return {{"kind", "forcing"}, {"shape", shapes}};
    }
  }
  return {};
}

}  // namespace

// ---------------------------------------------------------------------------

Scenario parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("malformed JSON: {}", e.what()));
  }
  Obj top(root, "");
  Scenario s;
  s.name = top.str("name", s.name);
  if (s.name.empty()) fail("name", "must not be empty");

  if (const json* op = top.get("operator")) {
    Obj o(*op, "operator");
    s.operator_id = o.str("id");
    const json* params = o.get("params");
    s.operator_params_json = params ? params->dump() : "{}";
    if (const json* d = o.get("declared")) {
      Obj dd(*d, "operator.declared");
      for (const char* key : {"K0", "L_g", "omega"}) {
        if (const json* v = dd.get(key)) s.declared.emplace_back(key, dd.number(*v, key));
      }
      dd.finish();
    }
    o.finish();
  }
  if (const json* st = top.get("start")) s.start = parse_start(*st, "start");

  if (const json* g = top.get("grid")) {
    Obj o(*g, "grid");
    s.grid.t_min = o.num("t_min", s.grid.t_min);
    s.grid.t_max = o.num("t_max", s.grid.t_max);
    s.grid.dt = o.num("dt", s.grid.dt);
    const std::string nk = o.str("norm", "euclidean");
    if (nk == "max") {
      s.grid.norm = NormKind::max;
    } else if (nk != "euclidean") {
      fail(o.at("norm"), "expected euclidean or max");
    }
    if (const json* e = o.get("extension")) {
      Obj eo(*e, "grid.extension");
      const std::string kind = eo.str("kind");
      if (kind == "periodic") {
        const double T = eo.num("period");
        if (!(T > 0.0)) fail(eo.at("period"), "must be positive");
        s.extension = LeftExtension::periodic(T);
      } else if (kind != "constant") {
        fail(eo.at("kind"), "expected constant or periodic");
      }
      eo.finish();
    }
    o.finish();
    try {
      s.grid.validate();
    } catch (const ParameterError& e) {
      fail("grid", e.what());
    }
  }

  if (const json* sv = top.get("solver")) {
    Obj o(*sv, "solver");
    if (const json* ls = o.get("lambda_schedule")) {
      if (!ls->is_array() || ls->empty()) fail(o.at("lambda_schedule"), "expected a non-empty array");
      s.lambda_schedule.clear();
      for (const auto& x : *ls) s.lambda_schedule.push_back(o.number(x, "lambda_schedule"));
    }
    s.n_max = o.count("n_max", s.n_max);
    if (const json* t = o.get("tol_outer")) s.tol_outer = o.number(*t, "tol_outer");
    s.tol_picard = o.num("tol_picard", s.tol_picard);
    s.burn_in = o.num("burn_in", s.burn_in);
    s.warm_start = o.flag("warm_start", s.warm_start);
    s.enforce_gate = o.flag("enforce_gate", s.enforce_gate);
    o.finish();
  }

  if (const json* cs = top.get("checks")) {
    if (!cs->is_array()) fail("checks", "expected an array");
    for (std::size_t i = 0; i < cs->size(); ++i) {
      s.checks.push_back(parse_check((*cs)[i], fmt::format("checks[{}]", i)));
    }
  }

  if (const json* v = top.get("verify")) {
    Obj o(*v, "verify");
    s.verify.samples = o.count("samples", s.verify.samples);
    s.verify.lambda_min = o.num("lambda_min", s.verify.lambda_min);
    s.verify.lambda_max = o.num("lambda_max", s.verify.lambda_max);
    s.verify.t_range = o.num("t_range", s.verify.t_range);
    s.verify.state_scale = o.num("state_scale", s.verify.state_scale);
    s.verify.iterate_inequality = o.flag("iterate_inequality", s.verify.iterate_inequality);
    o.finish();
    if (!(s.verify.lambda_min > 0.0 && s.verify.lambda_max >= s.verify.lambda_min)) {
      fail("verify", "need 0 < lambda_min <= lambda_max");
    }
  }

  if (const json* v = top.get("oracle")) {
    Obj o(*v, "oracle");
    s.oracle.alpha = o.num("alpha", s.oracle.alpha);
    s.oracle.beta = o.num("beta", s.oracle.beta);
    s.oracle.tol = o.num("tol", s.oracle.tol);
    s.oracle.refine = o.count("refine", s.oracle.refine);
    if (const json* f = o.get("f")) s.oracle.f = parse_forcing(*f, o.at("f"));
    s.oracle.random_cases = o.count("random_cases", s.oracle.random_cases);
    s.oracle.knot_spacing = o.num("knot_spacing", s.oracle.knot_spacing);
    s.oracle.agreement = o.num("agreement", s.oracle.agreement);
    o.finish();
    if (s.oracle.refine == 0) fail("oracle.refine", "must be at least 1");
    if (!(s.oracle.knot_spacing > 0.0)) fail("oracle.knot_spacing", "must be positive");
  }

  s.seed = top.count("seed", s.seed);
  const auto threads = top.count("threads", s.threads);
  if (threads == 0 || threads > 1024) fail("threads", "must lie in [1, 1024]");
  s.threads = static_cast<unsigned>(threads);
  s.output_dir = top.str("output_dir", s.output_dir);
  top.finish();

  // Operators are built once here so bad ids and parameters surface as
  // config errors, not at solve time.
  if (!s.operator_id.empty()) {
    try {
      (void)build_operator(s);
    } catch (const ParameterError& e) {
      fail("operator.params", e.what());
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(fmt::format("cannot read scenario file '{}'", file.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string serialize_scenario(const Scenario& s) {
  json j;
  j["name"] = s.name;
  if (!s.operator_id.empty()) {
    json op{{"id", s.operator_id}, {"params", json::parse(s.operator_params_json)}};
    if (!s.declared.empty()) {
      json d = json::object();
      for (const auto& [k, v] : s.declared) d[k] = v;
      op["declared"] = d;
    }
    j["operator"] = op;
  }
  j["start"] = start_json(s.start);
  json grid{{"t_min", s.grid.t_min},
            {"t_max", s.grid.t_max},
            {"dt", s.grid.dt},
            {"norm", s.grid.norm == NormKind::max ? "max" : "euclidean"}};
  grid["extension"] = s.extension.kind == LeftExtension::Kind::periodic
                          ? json{{"kind", "periodic"}, {"period", s.extension.period}}
                          : json{{"kind", "constant"}};
  j["grid"] = grid;
  json solver{{"lambda_schedule", s.lambda_schedule}, {"n_max", s.n_max},
              {"tol_picard", s.tol_picard},           {"burn_in", s.burn_in},
              {"warm_start", s.warm_start},           {"enforce_gate", s.enforce_gate}};
  if (s.tol_outer) solver["tol_outer"] = *s.tol_outer;
  j["solver"] = solver;
  json checks = json::array();
  for (const auto& c : s.checks) checks.push_back(check_json(c));
  j["checks"] = checks;
  j["verify"] = {{"samples", s.verify.samples},         {"lambda_min", s.verify.lambda_min},
                 {"lambda_max", s.verify.lambda_max},   {"t_range", s.verify.t_range},
                 {"state_scale", s.verify.state_scale}, {"iterate_inequality", s.verify.iterate_inequality}};
  json oracle{{"alpha", s.oracle.alpha},
              {"beta", s.oracle.beta},
              {"tol", s.oracle.tol},
              {"refine", s.oracle.refine},
              {"random_cases", s.oracle.random_cases},
              {"knot_spacing", s.oracle.knot_spacing},
              {"agreement", s.oracle.agreement}};
  if (s.oracle.f) oracle["f"] = forcing_json(*s.oracle.f);
  j["oracle"] = oracle;
  j["seed"] = s.seed;
  j["threads"] = s.threads;
  if (!s.output_dir.empty()) j["output_dir"] = s.output_dir;
  return j.dump(2) + "\n";
}

std::string config_hash(const Scenario& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_scenario(s)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::shared_ptr<Operator> build_operator(const Scenario& s) {
  if (s.operator_id.empty()) throw ConfigError("operator: scenario has no operator section");
  json params;
  try {
    params = json::parse(s.operator_params_json);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("operator.params: {}", e.what()));
  }
  auto op = make_operator(s.operator_id, params, "operator.params");
  apply_declared(*op, s.declared);
  return op;
}

GridFunction build_start(const Scenario& s, std::size_t dim) {
  GridSpec g = s.grid;
  g.dim = dim;
  switch (s.start.kind) {
    case StartSpec::Kind::zero:
      return GridFunction(g, s.extension);
    case StartSpec::Kind::constant: {
      State c = s.start.value;
      if (c.size() == 1 && dim > 1) c.assign(dim, c[0]);
      if (c.size() != dim) throw ConfigError(fmt::format("start.value: expected {} components", dim));
      return GridFunction::constant(g, c, s.extension);
    }
    case StartSpec::Kind::forcing: {
      VectorForcing f = s.start.shape;
      if (f.size() == 1 && dim > 1) f.assign(dim, f[0]);
      if (f.size() != dim) throw ConfigError(fmt::format("start.shape: expected {} components", dim));
      return GridFunction::sample(g, [&](double t) { return eval(f, t); }, s.extension);
    }
  }
  return GridFunction(g, s.extension);
}

SolverConfig build_solver_config(const Scenario& s, std::size_t dim) {
  SolverConfig c;
  c.grid = s.grid;
  c.grid.dim = dim;
  c.extension = s.extension;
  c.lambda_schedule = s.lambda_schedule;
  c.n_max = s.n_max;
  c.tol_outer = s.tol_outer;
  c.tol_picard = s.tol_picard;
  c.burn_in = s.burn_in;
  c.seed = s.seed;
  c.warm_start = s.warm_start;
  c.threads = s.threads;
  c.enforce_gate = s.enforce_gate;
  return c;
}

std::filesystem::path resolve_output_dir(const Scenario& s, const RunOptions& opt) {
  if (opt.out_dir) return *opt.out_dir;
  if (const char* env = std::getenv("YOSIDA_OUT_DIR"); env && *env) return env;
  if (!s.output_dir.empty()) return s.output_dir;
  return std::filesystem::path("out") / s.name;
}

}  // namespace yosida
