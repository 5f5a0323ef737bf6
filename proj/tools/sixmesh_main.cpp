// Command-line front end: single runs, comparison sweeps, the closed-form
// repair-energy calculator, and trace re-validation.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sixmesh/sim.hpp"
#include "sixmesh/sweep.hpp"
#include "sixmesh/validate.hpp"

using nlohmann::json;
using namespace sixmesh;

namespace {

std::vector<std::uint64_t> parse_seed_range(const std::string& spec) {
  std::vector<std::uint64_t> seeds;
  if (spec.empty()) return seeds;
  const auto dots = spec.find("..");
  if (dots != std::string::npos) {
    const std::uint64_t lo = std::stoull(spec.substr(0, dots));
    const std::uint64_t hi = std::stoull(spec.substr(dots + 2));
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::istringstream in(spec);
  std::string tok;
  while (std::getline(in, tok, ',')) seeds.push_back(std::stoull(tok));
  return seeds;
}

std::vector<std::uint32_t> parse_ladder(const std::string& spec) {
  std::vector<std::uint32_t> ladder;
  if (spec.empty()) return ladder;
  std::istringstream in(spec);
  std::string tok;
  while (std::getline(in, tok, ',')) ladder.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
  return ladder;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

json metrics_to_json(const MetricsReport& m) {
  return json{{"pdr", m.pdr},
              {"throughput_bps", m.throughput_bps},
              {"avg_e2e_delay_s", m.avg_e2e_delay_s},
              {"avg_energy_total_mAh", m.avg_energy_total_mah},
              {"avg_energy_per_delivered_mAh", m.avg_energy_per_delivered_mah},
              {"sent", m.sent},
              {"delivered", m.delivered},
              {"repair_sessions", m.repair_sessions},
              {"repair_success_ratio", m.repair_success_ratio},
              {"max_repair_radius_hops", m.max_repair_radius_hops}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"6LoWPAN mesh-under routing simulator: energy-aware local link repair "
               "versus the LOAD baseline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string format = "csv";
  std::string protocol_flag;
  std::uint64_t seed_flag = 0;
  bool seed_set = false;
  std::uint32_t traffic_flag = 0;
  bool traffic_set = false;

  auto* run_cmd = app.add_subcommand("run", "run one scenario and emit trace plus metrics");
  run_cmd->add_option("--config", config_path, "scenario config file")->required();
  run_cmd->add_option("--seed", seed_flag, "override the scenario seed")
      ->each([&](const std::string&) { seed_set = true; });
  run_cmd->add_option("--protocol", protocol_flag, "load or lrabc");
  run_cmd->add_option("--traffic", traffic_flag, "override traffic_total")
      ->each([&](const std::string&) { traffic_set = true; });
  run_cmd->add_option("--out", out_dir, "directory for trace.txt and metrics output");
  run_cmd->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  std::string seeds_spec;
  std::string ladder_spec;
  unsigned threads = 2;
  bool validate_flag = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "traffic-ladder comparison of both protocols");
  sweep_cmd->add_option("--config", config_path, "base scenario config file")->required();
  sweep_cmd->add_option("--seeds", seeds_spec, "seed range n..m or comma list (default 1..10)");
  sweep_cmd->add_option("--traffic", ladder_spec, "comma-separated ladder (default 200..1200)");
  sweep_cmd->add_option("--out", out_dir, "directory for comparison.csv and verdicts.txt");
  sweep_cmd->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sweep_cmd->add_option("--threads", threads, "worker threads (default 2)");
  sweep_cmd->add_flag("--validate", validate_flag, "run invariant checks on every trace");

  std::int64_t nd_load = 9, h_load = 7, nd_lrabc = 4, h_lrabc = 2;
  std::int64_t m_num = 2, m_den = 1;
  double c_req_tx = 1.0, c_req_rx = 1.0, c_rep_tx = 1.0, c_rep_rx = 1.0;
  auto* analytic_cmd =
      app.add_subcommand("analytic", "closed-form repair-energy figures and ratios");
  analytic_cmd->add_option("--nd-load", nd_load, "request-flood node count, baseline");
  analytic_cmd->add_option("--h-load", h_load, "reply hops, baseline");
  analytic_cmd->add_option("--nd-lrabc", nd_lrabc, "request-flood node count, local repair");
  analytic_cmd->add_option("--h-lrabc", h_lrabc, "reply hops, local repair");
  analytic_cmd->add_option("--m", m_num, "average forwarding neighbours (numerator)");
  analytic_cmd->add_option("--m-den", m_den, "average forwarding neighbours (denominator)");
  analytic_cmd->add_option("--cost-req-tx", c_req_tx, "request broadcast cost");
  analytic_cmd->add_option("--cost-req-rx", c_req_rx, "request reception cost");
  analytic_cmd->add_option("--cost-rep-tx", c_rep_tx, "reply transmission cost");
  analytic_cmd->add_option("--cost-rep-rx", c_rep_rx, "reply reception cost");
  analytic_cmd->add_option("--format", format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  std::string trace_path;
  auto* validate_cmd = app.add_subcommand("validate-trace", "re-check invariants on a stored trace");
  validate_cmd->add_option("--trace", trace_path, "trace file to validate")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      ScenarioConfig cfg = load_config_file(config_path);
      if (seed_set) cfg.seed = seed_flag;
      if (traffic_set) cfg.traffic_total = traffic_flag;
      if (!protocol_flag.empty()) {
        if (protocol_flag == "load") cfg.protocol = Protocol::LOAD;
        else if (protocol_flag == "lrabc") cfg.protocol = Protocol::LRABC;
        else throw std::invalid_argument("--protocol must be load or lrabc");
      }
      const SingleRun result = run_single(cfg);
      const std::string row =
          metrics_csv_row(result.resolved.protocol, result.resolved.traffic_total,
                          1, result.metrics);
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_file(std::filesystem::path(out_dir) / "trace.txt", result.trace.to_text());
        if (format == "json") {
          json j = metrics_to_json(result.metrics);
          j["protocol"] = protocol_name(result.resolved.protocol);
          j["traffic"] = result.resolved.traffic_total;
          j["seed"] = result.resolved.seed;
          write_file(std::filesystem::path(out_dir) / "metrics.json", j.dump(2) + "\n");
        } else {
          write_file(std::filesystem::path(out_dir) / "metrics.csv",
                     std::string(METRICS_CSV_HEADER) + "\n" + row + "\n");
        }
      }
      std::cout << METRICS_CSV_HEADER << '\n' << row << '\n';
      return 0;
    }

    if (*sweep_cmd) {
      ScenarioConfig cfg = load_config_file(config_path);
      SweepOptions opts;
      opts.seeds = parse_seed_range(seeds_spec);
      opts.traffic_ladder = parse_ladder(ladder_spec);
      opts.threads = threads;
      opts.validate_traces = validate_flag;
      const SweepResult result = run_comparison_suite(cfg, opts);

      std::ostringstream verdict_text;
      for (const auto& v : result.verdicts)
        verdict_text << (v.pass ? "PASS " : "FAIL ") << v.name << ": " << v.detail << '\n';

      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_file(std::filesystem::path(out_dir) / "comparison.csv", result.csv());
        write_file(std::filesystem::path(out_dir) / "verdicts.txt", verdict_text.str());
      }
      if (format == "json") {
        json j;
        j["csv"] = result.csv();
        j["runs"] = result.runs;
        j["verdicts"] = json::array();
        for (const auto& v : result.verdicts)
          j["verdicts"].push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
        j["violations"] = result.violations;
        std::cout << j.dump(2) << '\n';
      } else {
        std::cout << result.csv() << verdict_text.str();
        for (const auto& v : result.violations) std::cout << "VIOLATION " << v << '\n';
      }
      if (!result.violations.empty()) return 1;
      return result.all_verdicts_pass() ? 0 : 1;
    }

    if (*analytic_cmd) {
      EnergyCosts costs;
      costs.lrreq_tx = mah_to_energy(c_req_tx);
      costs.lrreq_rx = mah_to_energy(c_req_rx);
      costs.lrrep_tx = mah_to_energy(c_rep_tx);
      costs.lrrep_rx = mah_to_energy(c_rep_rx);
      const Rational m{m_num, m_den};
      const Energy e_load = analytic_repair_energy(RepairVariant::LOAD, nd_load, m, h_load, costs);
      const Energy e_lrabc =
          analytic_repair_energy(RepairVariant::LRABC, nd_lrabc, m, h_lrabc, costs);
      const RepairEnergyRatios ratios =
          repair_energy_ratios({nd_load, h_load}, {nd_lrabc, h_lrabc});
      if (format == "json") {
        json j;
        j["e_llr_load"] = energy_to_mah(e_load);
        j["e_llr_lrabc"] = energy_to_mah(e_lrabc);
        j["broadcast_ratio"] = ratios.broadcast_ratio.str();
        j["reply_ratio"] = ratios.reply_ratio.str();
        std::cout << j.dump(2) << '\n';
      } else {
        std::cout << "e_llr_load=" << energy_to_mah(e_load) << '\n'
                  << "e_llr_lrabc=" << energy_to_mah(e_lrabc) << '\n'
                  << "broadcast_ratio=" << ratios.broadcast_ratio.str() << '\n'
                  << "reply_ratio=" << ratios.reply_ratio.str() << '\n';
      }
      return 0;
    }

    if (*validate_cmd) {
      std::ifstream in(trace_path, std::ios::binary);
      if (!in) throw std::runtime_error("cannot open " + trace_path);
      std::ostringstream buf;
      buf << in.rdbuf();
      const EventTrace trace = EventTrace::from_text(buf.str());
      const ValidationReport report = validate_trace(trace);
      std::cout << report.summary() << '\n';
      for (const auto& v : report.violations) std::cout << "VIOLATION " << v << '\n';
      return report.ok() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
