#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "doctest.h"
#include "json.hpp"
#include "support.hpp"
#include "yosida/errors.hpp"
#include "yosida/scenario.hpp"

using namespace yosida;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / fmt::format("yosida-test-{}-{}", name, ::getpid());
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = fmt::format("\"{}\" {} > /dev/null 2>&1", YOSIDA_CLI, args);
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Forcing random_forcing(testing::Gen& g) {
  Forcing f;
  const std::size_t n = 1 + g.index(3);
  for (std::size_t i = 0; i < n; ++i) {
    switch (g.index(3)) {
      case 0: f = f + Forcing::constant(g.uniform(-2, 2)); break;
      case 1: f = f + Forcing::cosine(g.uniform(-2, 2), g.uniform(0.1, 3), g.uniform(-1, 1)); break;
      default: f = f + Forcing::sine(g.uniform(-2, 2), g.uniform(0.1, 3), g.uniform(-1, 1)); break;
    }
  }
  return f;
}

Scenario random_scenario(testing::Gen& g) {
  Scenario s;
  s.name = fmt::format("s{}", g.index(1000));
  if (g.coin()) {
    s.operator_id = "delay_linear";
    s.operator_params_json =
        nlohmann::json{{"a", g.uniform(-2, 0)}, {"b", g.uniform(0, 0.9)}, {"r", g.uniform(0.1, 4)}, {"omega", -1.0}}.dump();
    if (g.coin()) s.declared = {{"K0", g.uniform(0, 1)}, {"omega", -1.0}};
  } else if (g.coin()) {
    s.operator_id = "linear_scalar";
    s.operator_params_json = nlohmann::json{{"a", g.uniform(-2, 0)}, {"c", g.uniform(-1, 1)}, {"omega", -0.5}}.dump();
  }
  switch (g.index(3)) {
    case 0: break;
    case 1: s.start.kind = StartSpec::Kind::constant; s.start.value = {g.uniform(-5, 5)}; break;
    default: s.start.kind = StartSpec::Kind::forcing; s.start.shape = {random_forcing(g)}; break;
  }
  s.grid.dt = std::ldexp(1.0, -static_cast<int>(g.index(8)));
  s.grid.t_min = -static_cast<double>(10 + g.index(40));
  s.grid.t_max = s.grid.t_min + s.grid.dt * static_cast<double>(100 + g.index(10000));
  if (g.coin()) s.grid.norm = NormKind::max;
  if (g.coin()) s.extension = LeftExtension::periodic(g.uniform(1, 7));
  s.lambda_schedule = {0.4, g.uniform(0.1, 0.3), 0.05};
  s.n_max = 1 + g.index(50);
  if (g.coin()) s.tol_outer = g.log_uniform(1e-9, 1e-3);
  s.tol_picard = g.log_uniform(1e-12, 1e-6);
  s.burn_in = g.uniform(0, 5);
  s.warm_start = g.coin();
  s.enforce_gate = g.coin();
  for (std::size_t i = g.index(4); i > 0; --i) {
    CheckSpec c;
    c.kind = static_cast<CheckSpec::Kind>(g.index(6));
    switch (c.kind) {
      case CheckSpec::Kind::periodicity:
      case CheckSpec::Kind::antiperiodicity: c.period = g.uniform(0.5, 7); break;
      case CheckSpec::Kind::almost_period:
        c.epsilon = g.uniform(0.01, 0.3);
        c.s_max = g.uniform(1, 10);
        c.ds = g.uniform(0.01, 0.1);
        break;
      case CheckSpec::Kind::integral_residual:
        c.samples = 1 + g.index(500);
        c.delta_max = g.uniform(0.1, 1);
        break;
      default: c.horizon = g.uniform(0.1, 2); break;
    }
    s.checks.push_back(c);
  }
  s.verify.samples = g.index(5000);
  s.verify.lambda_min = g.uniform(1e-4, 1e-2);
  s.verify.lambda_max = g.uniform(1, 10);
  s.verify.iterate_inequality = g.coin();
  s.oracle.alpha = g.uniform(0.1, 1);
  s.oracle.beta = g.uniform(1.1, 3);
  s.oracle.refine = 1 + g.index(8);
  if (g.coin()) s.oracle.f = random_forcing(g);
  s.oracle.random_cases = g.index(5);
  s.seed = g.index(1u << 30);
  s.threads = static_cast<unsigned>(1 + g.index(16));
  if (g.coin()) s.output_dir = "runs/x";
  return s;
}

const char* kLite = R"({
  "name": "lite",
  "operator": { "id": "delay_linear",
                "params": { "a": -1.0, "b": 0.5, "r": 3.141592653589793, "h": { "shape": "cos" }, "omega": -1.0 } },
  "grid": { "t_min": -30, "t_max": 30, "dt": 0.01, "extension": { "kind": "periodic", "period": 6.283185307179586 } },
  "solver": { "n_max": 25, "tol_outer": 1e-6, "burn_in": 10 },
  "checks": [ { "kind": "periodicity", "period": 6.283185307179586 },
              { "kind": "integral_residual", "samples": 50 },
              { "kind": "lipschitz" } ],
  "verify": { "samples": 0, "iterate_inequality": false },
  "threads": 1
})";

}  // namespace

TEST_CASE("parse, serialize, parse is the identity") {
  const fs::path dir = YOSIDA_SCENARIO_DIR;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().stem() == "malformed") continue;
    CAPTURE(e.path().string());
    const Scenario a = load_scenario(e.path());
    const std::string text = serialize_scenario(a);
    const Scenario b = parse_scenario(text);
    CHECK(a == b);
    CHECK(serialize_scenario(b) == text);
    CHECK(config_hash(a) == config_hash(b));
  }
}

TEST_CASE("random scenarios round-trip") {
  testing::Gen g(2024);
  for (int k = 0; k < 200; ++k) {
    const Scenario s = random_scenario(g);
    const std::string text = serialize_scenario(s);
    const Scenario back = parse_scenario(text);
    CHECK(serialize_scenario(back) == text);
    CHECK(back == s);
  }
}

TEST_CASE("config hash") {
  Scenario s = parse_scenario(kLite);
  const auto h = config_hash(s);
  CHECK(h.size() == 16);
  CHECK(h == config_hash(parse_scenario(kLite)));
  s.grid.dt = 0.02;
  CHECK(config_hash(s) != h);
}

TEST_CASE("configuration errors name the offending key") {
  auto message = [](const std::string& text) {
    try {
      parse_scenario(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message(R"({"grid": {"spacing": 1}})").find("grid.spacing") != std::string::npos);
  CHECK(message(R"({"bogus": 1})").find("bogus") != std::string::npos);
  CHECK(message(R"({"checks": [{"kind": "periodicity", "period": 1, "x": 2}]})").find("checks[0].x") != std::string::npos);
  CHECK(message(R"({"solver": {"n_max": -3}})").find("solver.n_max") != std::string::npos);
  CHECK(message(R"({"threads": 0})").find("threads") != std::string::npos);
  CHECK(message(R"({"operator": {"id": "nope"}})").find("operator") != std::string::npos);
  CHECK(message(R"({"operator": {"id": "delay_linear", "params": {"a": -1, "b": 0.5, "r": -1, "omega": -1}}})")
            .find("operator.params") != std::string::npos);
  CHECK(message(R"({"grid": {"dt": "small"}})").find("grid.dt") != std::string::npos);
  CHECK(message("{ not json").find("malformed JSON") != std::string::npos);
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), ConfigError);
}

TEST_CASE("output directory precedence") {
  Scenario s = parse_scenario(kLite);
  RunOptions o;
  ::unsetenv("YOSIDA_OUT_DIR");
  CHECK(resolve_output_dir(s, o) == fs::path("out") / "lite");
  s.output_dir = "from-file";
  CHECK(resolve_output_dir(s, o) == fs::path("from-file"));
  ::setenv("YOSIDA_OUT_DIR", "from-env", 1);
  CHECK(resolve_output_dir(s, o) == fs::path("from-env"));
  o.out_dir = "from-flag";
  CHECK(resolve_output_dir(s, o) == fs::path("from-flag"));
  ::unsetenv("YOSIDA_OUT_DIR");
}

TEST_CASE("build helpers") {
  const Scenario s = load_scenario(fs::path(YOSIDA_SCENARIO_DIR) / "system.json");
  const auto op = build_operator(s);
  const auto cfg = build_solver_config(s, op->dim());
  CHECK(cfg.grid.dim == op->dim());
  CHECK(build_start(s, op->dim()).dim() == op->dim());
  const Scenario oracle_only = load_scenario(fs::path(YOSIDA_SCENARIO_DIR) / "oracle_constant.json");
  CHECK_THROWS_AS(build_operator(oracle_only), ConfigError);
}

TEST_CASE("command line") {
  const fs::path dir = scratch("cli");
  const fs::path lite = dir / "lite.json";
  std::ofstream(lite) << kLite;
  const fs::path sc = YOSIDA_SCENARIO_DIR;

  SUBCASE("solve writes its outputs") {
    REQUIRE(run_cli(fmt::format("solve {} --out {}", lite.string(), (dir / "a").string())) == 0);
    for (const char* f : {"trajectory.csv", "convergence_report.txt", "convergence_report.kv", "qualitative_report.txt",
                          "manifest.json"}) {
      CHECK(fs::exists(dir / "a" / f));
    }
    CHECK(slurp(dir / "a" / "manifest.json").find("config_hash") != std::string::npos);
    REQUIRE(run_cli(fmt::format("solve {} --out {} --threads 4", lite.string(), (dir / "b").string())) == 0);
    CHECK(slurp(dir / "a" / "trajectory.csv") == slurp(dir / "b" / "trajectory.csv"));
  }
  SUBCASE("gate refusal") {
    CHECK(run_cli(fmt::format("solve {} --out {}", (sc / "gate_refusal.json").string(), (dir / "g").string())) == 3);
    CHECK(slurp(dir / "g" / "failure.txt").find("reason = hypothesis_gate") != std::string::npos);
  }
  SUBCASE("malformed scenario") {
    CHECK(run_cli(fmt::format("solve {} --out {}", (sc / "malformed.json").string(), (dir / "m").string())) == 2);
    CHECK(slurp(dir / "m" / "failure.txt").find("grid.spacing") != std::string::npos);
    CHECK(run_cli("solve /nonexistent.json") == 2);
    CHECK(run_cli("frobnicate x") == 2);
  }
  SUBCASE("oracle") {
    CHECK(run_cli(fmt::format("oracle {} --out {}", (sc / "oracle_constant.json").string(), (dir / "o").string())) == 0);
    CHECK(fs::exists(dir / "o" / "oracle_report.txt"));
    CHECK(run_cli(fmt::format("oracle {} --out {}", (sc / "oracle_bad_rates.json").string(), (dir / "ob").string())) == 2);
  }
  SUBCASE("verify with no samples passes vacuously") {
    CHECK(run_cli(fmt::format("verify {} --out {}", lite.string(), (dir / "v").string())) == 0);
    CHECK(slurp(dir / "v" / "assumptions_report.txt").find("VACUOUS PASS") != std::string::npos);
  }
  SUBCASE("environment override applies to the output directory") {
    const fs::path env = dir / "env";
    REQUIRE(::setenv("YOSIDA_OUT_DIR", env.string().c_str(), 1) == 0);
    CHECK(run_cli(fmt::format("oracle {}", (sc / "oracle_constant.json").string())) == 0);
    ::unsetenv("YOSIDA_OUT_DIR");
    CHECK(fs::exists(env / "manifest.json"));
  }
  fs::remove_all(dir);
}
