// Command-line front end: design one waveform or regenerate the CCDF,
// sum-rate and SER curves as CSV.
//
// Exit codes:
//   0  success
//   1  usage or configuration error (message names the offending field)
//   2  design finished but a constraint violation exceeds the tolerance
//   3  channel is singular (zero-forcing target undefined)
//   4  I/O or other runtime failure

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "isac/config.hpp"
#include "isac/errors.hpp"
#include "isac/kpi.hpp"
#include "isac/montecarlo.hpp"
#include "isac/output.hpp"

extern char** environ;

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode : int { kOk = 0, kConfig = 1, kInfeasible = 2, kSingular = 3, kRuntime = 4 };

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  int threads = 1;
};

json load_document(const Options& opt) {
  json doc = json::object();
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path);
    if (!in) throw isac::ConfigError("--config", "cannot read " + opt.config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    try {
      doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
      throw isac::ConfigError(opt.config_path, std::string("not valid JSON: ") + e.what());
    }
  }
  for (const auto& o : isac::environment_overrides(environ)) isac::apply_override(doc, o);
  for (const auto& o : opt.overrides) isac::apply_override(doc, o);
  if (opt.seed) {
    for (const char* key : {"experiment.base_seed", "design.channel_seed", "design.symbol_seed"}) {
      isac::apply_override(doc, std::string(key) + "=" + std::to_string(*opt.seed));
    }
  }
  return doc;
}

void write_manifest(const fs::path& out, const std::string& command, const isac::RunConfig& cfg,
                    std::uint64_t seed, double seconds, const std::vector<fs::path>& outputs,
                    const json& metadata) {
  json paths = json::array();
  for (const auto& p : outputs) paths.push_back(p.string());
  json manifest = {{"command", command},
                   {"config", isac::to_json(cfg)},
                   {"seed", seed},
                   {"tool_version", ISAC_VERSION},
                   {"wall_clock_seconds", seconds},
                   {"outputs", std::move(paths)},
                   {"metadata", metadata}};
  isac::write_file_atomic(out / "manifest.json", manifest.dump(2) + "\n");
}

int run_design(const isac::RunConfig& cfg, const fs::path& out) {
  const auto start = std::chrono::steady_clock::now();
  const isac::ProblemSpec spec = isac::to_problem(cfg);
  spec.validate();
  const isac::SolveResult result = isac::solve(spec);
  const isac::CVector x_comm = isac::zero_forcing_target(spec.channel, spec.symbols);
  const double gain = isac::transmit_gain(cfg.system.snr_convention, x_comm, spec.n_samples());
  const isac::KpiReport kpi =
      isac::evaluate_kpis(spec.channel, result.waveform, spec.symbols, spec.reference,
                          spec.channel.noise_variance, gain);

  json kpi_doc = isac::kpi_json(kpi);
  kpi_doc["snr_db"] = cfg.design.snr_db;
  kpi_doc["noise_variance"] = spec.channel.noise_variance;
  kpi_doc["transmit_gain"] = gain;
  kpi_doc["snr_convention"] = std::string(isac::snr_convention_name(cfg.system.snr_convention));

  fs::create_directories(out);
  const fs::path waveform_path = out / "waveform.json";
  const fs::path kpi_path = out / "kpi.json";
  isac::write_file_atomic(waveform_path, isac::waveform_json(result).dump(2) + "\n");
  isac::write_file_atomic(kpi_path, kpi_doc.dump(2) + "\n");
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(out, "design", cfg, *cfg.design.channel_seed, seconds, {waveform_path, kpi_path},
                 {{"feasible", result.violations.within(spec.feasibility_tolerance)}});

  const bool feasible = result.violations.within(spec.feasibility_tolerance);
  std::cout << "design: " << result.iterations_run << " iterations, PAPR "
            << isac::format_number(kpi.papr_db) << " dB, similarity "
            << isac::format_number(kpi.similarity_distance) << ", rate/user "
            << isac::format_number(kpi.rate_per_user()) << (feasible ? "" : " (INFEASIBLE)")
            << "\n";
  return feasible ? kOk : kInfeasible;
}

int run_curve(const std::string& command, const isac::RunConfig& cfg, const fs::path& out,
              int threads) {
  const auto start = std::chrono::steady_clock::now();
  const isac::ExperimentConfig exp = isac::to_experiment(cfg, threads);
  isac::CurveTable table;
  if (command == "ccdf") {
    table = isac::run_ccdf(exp);
  } else if (command == "sumrate") {
    table = isac::run_sumrate(exp);
  } else {
    table = isac::run_ser(exp);
  }
  fs::create_directories(out);
  const fs::path csv = out / (command + ".csv");
  isac::write_file_atomic(csv, isac::curve_table_csv(table));
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(out, command, cfg, cfg.experiment.base_seed, seconds, {csv}, table.metadata);
  std::cout << command << ": wrote " << csv.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-function radar-communication waveform design by ADMM"};
  app.require_subcommand(1);
  Options opt;
  const std::vector<std::string> commands{"design", "ccdf", "sumrate", "ser"};
  const std::vector<std::string> descriptions{
      "design one waveform and write waveform.json and kpi.json",
      "PAPR CCDF for every (rho, eta) pair",
      "average per-user rate against the similarity radius",
      "QPSK symbol error rate against SNR"};
  for (std::size_t i = 0; i < commands.size(); ++i) {
    CLI::App* sub = app.add_subcommand(commands[i], descriptions[i]);
    sub->add_option("--config", opt.config_path, "JSON config file");
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--seed", opt.seed, "seed for all random draws");
    sub->add_option("--set", opt.overrides, "override a config field, section.key=value");
    sub->add_option("--threads", opt.threads, "worker threads for trials")
        ->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    const isac::RunConfig cfg = isac::parse_config(load_document(opt));
    if (command == "design") return run_design(cfg, opt.out_dir);
    return run_curve(command, cfg, opt.out_dir, opt.threads);
  } catch (const isac::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const isac::SpecError& e) {
    std::cerr << "invalid problem: " << e.what() << "\n";
    return kConfig;
  } catch (const isac::SingularityError& e) {
    std::cerr << "singular channel: " << e.what() << "\n";
    return kSingular;
  } catch (const isac::TrialError& e) {
    std::cerr << "experiment failed: " << e.what() << "\n";
    return e.singular_channel() ? kSingular : kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
}
