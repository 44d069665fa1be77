// snp: contest service, offline analysis, payouts and cascade simulation.

#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "snp/analytics.hpp"
#include "snp/cascade.hpp"
#include "snp/contest.hpp"
#include "snp/error.hpp"
#include "snp/fixtures.hpp"
#include "snp/http_server.hpp"
#include "snp/payout.hpp"
#include "snp/rng.hpp"

namespace fs = std::filesystem;
using namespace snp;

namespace {

snp::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::io, "write failed: " + path);
}

int serve(const std::string& events, int port, const std::string& salt_env, const std::string& host) {
  ServiceConfig config = ServiceConfig::from_env(salt_env);
  if (config.salt.empty()) {
    spdlog::error("salt variable {} is unset or empty", salt_env);
    return 2;
  }
  config.events_path = events;
  if (port > 0) config.port = static_cast<std::uint16_t>(port);

  Contest contest(config);
  const std::string staff_url = contest.ensure_staff_link();
  spdlog::info("replayed {} events from {}; state {}", contest.last_seq(), events,
               contest.state_hash().substr(0, 12));
  if (!staff_url.empty()) spdlog::info("staff link: {}", staff_url);

  HttpServer server(contest);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  spdlog::info("listening on {}:{}", host, config.port);
  if (!server.listen(host, config.port)) {
    spdlog::error("cannot listen on {}:{}", host, config.port);
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recursive-incentive referral contest engine"};
  app.require_subcommand(1);

  // serve
  std::string events, salt_env = "SNP_SALT", host = "0.0.0.0";
  int port = 0;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP contest service");
  serve_cmd->add_option("--events", events, "Event log (JSON Lines); created if absent")->required();
  serve_cmd->add_option("--port", port, "Listen port (default SNP_PORT or 8080)");
  serve_cmd->add_option("--salt-env", salt_env, "Environment variable holding the email-hash salt");
  serve_cmd->add_option("--host", host, "Bind address");

  // analyze
  std::string log_path, report = "table1";
  bool as_json = false;
  auto* analyze_cmd = app.add_subcommand("analyze", "Replay a log and print a report");
  analyze_cmd->add_option("path", log_path, "Event log")->required();
  analyze_cmd->add_option("--report", report, "table1, tests or summary")
      ->check(CLI::IsMember({"table1", "tests", "summary"}));
  analyze_cmd->add_flag("--json", as_json, "Emit JSON instead of an aligned table");

  // export
  std::string format = "dot", out;
  auto* export_cmd = app.add_subcommand("export", "Export the referral network");
  export_cmd->add_option("path", log_path, "Event log")->required();
  export_cmd->add_option("--format", format, "dot, graphml or json");
  export_cmd->add_option("--out", out, "Output file (default stdout)");

  // payout
  std::vector<std::string> winners;
  std::string grand = "10000", base = "1000", decay = "0.5", min_unit = "0.01", ledger_format = "csv";
  std::optional<std::uint32_t> max_depth;
  auto* payout_cmd = app.add_subcommand("payout", "Compute the payout ledger for declared winners");
  payout_cmd->add_option("path", log_path, "Event log")->required();
  payout_cmd->add_option("--winner", winners, "Winner member or visitor id (repeatable)");
  payout_cmd->add_option("--grand", grand, "Winner award in major units");
  payout_cmd->add_option("--base", base, "Reward for the winner's direct referrer");
  payout_cmd->add_option("--decay", decay, "Per-degree factor, e.g. 0.5 or 1/2");
  payout_cmd->add_option("--min-unit", min_unit, "Smallest payable amount");
  payout_cmd->add_option("--max-depth", max_depth, "Maximum chain distance paid");
  payout_cmd->add_option("--format", ledger_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  payout_cmd->add_option("--out", out, "Output file (default stdout)");

  // simulate
  std::string model = "ws", incentive = "both", out_dir;
  std::uint32_t n = 5000, k = 6, m = 3, seeds = 10, trials = 1, max_logs = 10;
  double beta = 0.1, p_click = 0.5, p_join = 0.1, base_share = 0.25;
  std::uint64_t seed = 42;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate referral cascades on a synthetic graph");
  sim_cmd->add_option("--model", model, "ws (small world) or ba (scale free)")->check(CLI::IsMember({"ws", "ba"}));
  sim_cmd->add_option("--n", n, "Nodes");
  sim_cmd->add_option("--k", k, "Lattice degree (ws)");
  sim_cmd->add_option("--beta", beta, "Rewiring probability (ws)");
  sim_cmd->add_option("--m", m, "Edges per new node (ba)");
  sim_cmd->add_option("--incentive", incentive, "recursive, flat or both")
      ->check(CLI::IsMember({"recursive", "flat", "both"}));
  sim_cmd->add_option("--p-click", p_click, "Probability a shared link is clicked");
  sim_cmd->add_option("--p-join", p_join, "Probability a clicker joins");
  sim_cmd->add_option("--base-share", base_share, "Share probability scale");
  sim_cmd->add_option("--decay", decay, "Reward decay used by the recursive arm");
  sim_cmd->add_option("--seeds", seeds, "Seed members reached by the staff link");
  sim_cmd->add_option("--seed", seed, "RNG seed (graph, seeds and trials)");
  sim_cmd->add_option("--trials", trials, "Trials per incentive arm");
  sim_cmd->add_option("--max-logs", max_logs, "Event logs written per arm");
  sim_cmd->add_option("--out", out_dir, "Output directory")->required();

  // fixture
  std::string fixture_name;
  auto* fixture_cmd = app.add_subcommand("fixture", "Write a built-in fixture log");
  fixture_cmd->add_option("name", fixture_name, "balloon or field-study")
      ->required()
      ->check(CLI::IsMember({"balloon", "field-study"}));
  fixture_cmd->add_option("--out", out, "Output file")->required();

  // replay
  std::string snapshot_out;
  auto* replay_cmd = app.add_subcommand("replay", "Replay a log and print its state hash");
  replay_cmd->add_option("path", log_path, "Event log")->required();
  replay_cmd->add_option("--snapshot", snapshot_out, "Also write a state snapshot");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve_cmd) return serve(events, port, salt_env, host);

    if (*analyze_cmd) {
      const ContestState state = replay_file(log_path);
      if (report == "summary") {
        std::cout << (as_json ? summary_json(state).dump(2) + "\n" : format_summary(state));
      } else {
        const Table1Report t1 = build_table1(state);
        if (report == "table1") {
          std::cout << (as_json ? to_json(t1).dump(2) + "\n" : format_table1(t1));
        } else {
          const auto tests = significance_tests(t1);
          std::cout << (as_json ? tests_json(tests).dump(2) + "\n" : format_tests(tests));
        }
      }
      return 0;
    }

    if (*export_cmd) {
      const GraphFormat f = parse_graph_format(format);
      write_text(out, export_graph(replay_file(log_path).graph(), f));
      return 0;
    }

    if (*payout_cmd) {
      PayoutSchedule schedule;
      schedule.winner_award = Money::parse(grand);
      schedule.chain_base = Money::parse(base);
      schedule.decay = Rational::parse(decay);
      schedule.min_unit = Money::parse(min_unit);
      schedule.max_depth = max_depth;
      schedule.validate();
      const ContestState state = replay_file(log_path);
      const ReferralGraph& g = state.graph();
      std::vector<VisitorId> visitors;
      for (const auto& w : winners) {
        const VisitorId* v = g.find_member(w);
        const Participant* p = v ? g.find(*v) : g.find(w);
        if (p == nullptr || !p->membership) throw Error(ErrorCode::unknown_member, "no member '" + w + "'");
        visitors.push_back(p->id);
      }
      const PayoutLedger ledger = compute_payouts(visitors, g, schedule);
      write_text(out, ledger_format == "csv" ? ledger_csv(ledger) : ledger_json(ledger).dump(2) + "\n");
      return 0;
    }

    if (*sim_cmd) {
      GraphSpec spec;
      if (model == "ws") {
        spec.model = SmallWorld{n, k, beta};
      } else {
        spec.model = ScaleFree{n, m};
      }
      spec.seed = seed;
      const SocialGraph graph = generate_graph(spec);
      const auto seed_nodes = pick_seeds(graph.node_count(), seeds, mix_seed(seed, 1));
      fs::create_directories(out_dir);

      std::vector<IncentiveKind> arms;
      if (incentive != "flat") arms.push_back(IncentiveKind::recursive);
      if (incentive != "recursive") arms.push_back(IncentiveKind::flat);

      std::ofstream summary(fs::path(out_dir) / "summary.csv");
      summary << "trial,incentive,max_depth,recruits,indirect_recruits,total_informed\n";
      for (const IncentiveKind kind : arms) {
        IncentiveModel im;
        im.kind = kind;
        im.p_click = p_click;
        im.p_join = p_join;
        im.base_share = base_share;
        im.decay = Rational::parse(decay);
        im.validate();
        // Both arms share the trial seed stream, so trial i is a matched pair.
        const std::uint64_t trial_seed = mix_seed(seed, 2);
        for (const auto& t : run_trials(graph, im, seed_nodes, trial_seed, trials)) {
          summary << t.trial << ',' << to_string(t.incentive) << ',' << t.max_depth << ',' << t.recruits
                  << ',' << t.indirect_recruits << ',' << t.total_informed << '\n';
        }
        for (std::uint32_t i = 0; i < std::min(trials, max_logs); ++i) {
          const CascadeResult r = simulate(graph, im, seed_nodes, mix_seed(trial_seed, i));
          write_log(r.events, fs::path(out_dir) / (std::string(to_string(kind)) + "-" + std::to_string(i) + ".jsonl"));
        }
      }
      if (!summary) throw Error(ErrorCode::io, "cannot write summary.csv");
      std::cout << "wrote " << (fs::path(out_dir) / "summary.csv").string() << "\n";
      return 0;
    }

    if (*fixture_cmd) {
      write_log(fixture_name == "balloon" ? fixtures::balloon_chain() : fixtures::field_study(), out);
      return 0;
    }

    if (*replay_cmd) {
      const ContestState state = replay_file(log_path);
      if (!snapshot_out.empty()) write_snapshot(state, snapshot_out);
      std::cout << state.last_seq() << " " << state.state_hash() << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "snp: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "snp: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
