#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "isac/config.hpp"
#include "isac/errors.hpp"

using namespace isac;
using nlohmann::json;

namespace {

std::string error_path(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<accepted>";
}

}  // namespace

TEST_CASE("empty document yields defaults") {
  const RunConfig cfg = parse_config(json::object());
  CHECK(cfg == RunConfig{});
  CHECK(cfg.system.n_antennas == 4);
  CHECK(cfg.solver.max_iterations == 2000);
  CHECK_FALSE(cfg.design.channel_seed.has_value());
}

TEST_CASE("round trip through JSON") {
  RunConfig cfg;
  cfg.system.n_antennas = 5;
  cfg.system.constellation = ConstellationKind::kQam16;
  cfg.system.snr_convention = SnrConvention::kPerSample;
  cfg.solver.early_stop = true;
  cfg.design.eta = 4.5;
  cfg.design.eta_in_db = true;
  cfg.design.channel_seed = 17;
  cfg.design.symbol_seed = 18;
  cfg.experiment.eta_grid = {{0.0, 8.5}, true};
  cfg.experiment.rho_grid = {0.1, 1.0};
  cfg.experiment.base_seed = 12345678901234ULL;
  cfg.experiment.max_symbols = 5'000'000'000LL;
  const json doc = to_json(cfg);
  CHECK(doc.at("design").contains("eta_db"));
  CHECK_FALSE(doc.at("design").contains("eta"));
  CHECK(parse_config(doc) == cfg);
  CHECK(parse_config_text(doc.dump(2)) == cfg);
  CHECK(to_json(parse_config(doc)) == doc);
}

TEST_CASE("comments are allowed in config text") {
  const RunConfig cfg = parse_config_text(R"({
    // eight samples
    "system": {"n_samples": 8}
  })");
  CHECK(cfg.system.n_samples == 8);
  try {
    parse_config_text("{ not json");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.path() == "<file>");
  }
}

TEST_CASE("errors name the offending field") {
  CHECK(error_path(json::array()) == "<root>");
  CHECK(error_path({{"systems", json::object()}}) == "systems");
  CHECK(error_path({{"system", {{"n_antenna", 4}}}}) == "system.n_antenna");
  CHECK(error_path({{"system", {{"n_antennas", 2.5}}}}) == "system.n_antennas");
  CHECK(error_path({{"system", {{"n_antennas", 0}}}}) == "system.n_antennas");
  CHECK(error_path({{"system", {{"k_users", 5}}}}) == "system.k_users");
  CHECK(error_path({{"system", {{"constellation", "bpsk"}}}}) == "system.constellation");
  CHECK(error_path({{"system", {{"snr_convention", "loud"}}}}) == "system.snr_convention");
  CHECK(error_path({{"solver", {{"early_stop", 1}}}}) == "solver.early_stop");
  CHECK(error_path({{"solver", {{"feasibility_tolerance", 0}}}}) == "solver.feasibility_tolerance");
  CHECK(error_path({{"design", {{"epsilon", -1}}}}) == "design.epsilon");
  CHECK(error_path({{"design", {{"rho", "one"}}}}) == "design.rho");
  CHECK(error_path({{"design", {{"eta", 0.5}}}}) == "design.eta");
  CHECK(error_path({{"design", {{"eta_db", 30}}}}) == "design.eta_db");
  CHECK(error_path({{"design", {{"channel_seed", -3}}}}) == "design.channel_seed");
  CHECK(error_path({{"experiment", {{"rho_grid", json::array()}}}}) == "experiment.rho_grid");
  CHECK(error_path({{"experiment", {{"epsilon_grid", {1, -1}}}}}) == "experiment.epsilon_grid");
  CHECK(error_path({{"experiment", {{"n_trials", 0}}}}) == "experiment.n_trials");
}

TEST_CASE("linear and dB PAPR caps are mutually exclusive") {
  CHECK(error_path({{"design", {{"eta", 2}, {"eta_db", 3}}}}) == "design.eta");
  CHECK(error_path({{"experiment", {{"eta_grid", {2}}, {"eta_grid_db", {3}}}}}) ==
        "experiment.eta_grid");
  const RunConfig db = parse_config({{"design", {{"eta_db", 3.0}}}});
  CHECK(db.design.eta_in_db);
  CHECK(db.design.eta_linear() == doctest::Approx(1.99526231));
}

TEST_CASE("overrides") {
  json doc = {{"design", {{"eta_db", 3.0}}}};
  apply_override(doc, "design.eta=2.5");
  CHECK_FALSE(doc["design"].contains("eta_db"));
  apply_override(doc, "system.constellation=16qam");
  apply_override(doc, "experiment.rho_grid=[0.1,1]");
  apply_override(doc, "solver.early_stop=true");
  const RunConfig cfg = parse_config(doc);
  CHECK(cfg.design.eta == 2.5);
  CHECK_FALSE(cfg.design.eta_in_db);
  CHECK(cfg.system.constellation == ConstellationKind::kQam16);
  CHECK(cfg.experiment.rho_grid == std::vector<double>{0.1, 1.0});
  CHECK(cfg.solver.early_stop);
  CHECK_THROWS_AS(apply_override(doc, "design.eta"), ConfigError);
  CHECK_THROWS_AS(apply_override(doc, "eta=2"), ConfigError);
  CHECK_THROWS_AS(apply_override(doc, "a.b.c=2"), ConfigError);
}

TEST_CASE("environment overrides") {
  const char* env[] = {"PATH=/usr/bin",
                       "ISAC_SYSTEM__N_ANTENNAS=6",
                       "ISAC_DESIGN__EPSILON=0.5",
                       "ISAC_NOSEPARATOR=1",
                       "ISAC_SYSTEM__CONSTELLATION=16qam",
                       nullptr};
  const auto out = environment_overrides(env);
  REQUIRE(out.size() == 3);
  CHECK(out[0] == "design.epsilon=0.5");
  CHECK(out[1] == "system.constellation=16qam");
  CHECK(out[2] == "system.n_antennas=6");
  CHECK(environment_overrides(nullptr).empty());
}

TEST_CASE("conversion to runtime objects") {
  RunConfig cfg = parse_config({{"system", {{"n_antennas", 5}, {"n_samples", 8}}},
                                {"solver", {{"max_iterations", 300}}},
                                {"experiment", {{"eta_grid_db", {0, 3}}, {"n_trials", 7}}}});
  const ExperimentConfig e = to_experiment(cfg, 3);
  CHECK(e.n_antennas == 5);
  CHECK(e.m_iter == 300);
  CHECK(e.threads == 3);
  CHECK(e.n_trials == 7);
  CHECK(e.eta_grid.in_db);

  try {
    to_problem(cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& err) {
    CHECK(err.path() == "design.channel_seed");
  }
  cfg.design.channel_seed = 1;
  try {
    to_problem(cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& err) {
    CHECK(err.path() == "design.symbol_seed");
  }
  cfg.design.symbol_seed = 2;
  const ProblemSpec p = to_problem(cfg);
  CHECK(p.channel.matrix.rows() == 2);
  CHECK(p.channel.matrix.cols() == 5);
  CHECK(p.max_iterations == 300);
  CHECK(p.channel.noise_variance == doctest::Approx(0.1));
}
