// Command-line front end: configuration resolution (defaults < file < env <
// flags), the channel/run/sweep subcommands, CSV + SVG + manifest emission.
// Exit codes: 0 success, 2 invalid input, 3 runtime failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "owlsim/channel.hpp"
#include "owlsim/common.hpp"
#include "owlsim/config.hpp"
#include "owlsim/csv.hpp"
#include "owlsim/manifest.hpp"
#include "owlsim/scenario.hpp"
#include "owlsim/svg.hpp"
#include "owlsim/version.hpp"

namespace fs = std::filesystem;
using owlsim::ValidationError;
using owlsim::scenario::ScenarioConfig;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir = "owlsim_out";
  std::string users_file;
  std::string scheme;
  std::string groups;
  std::uint64_t seed = 0;
  int trials = 0;
  int workers = 0;
  int users = 0;
  bool keep_trials = false;
  bool no_plot = false;
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::vector<owlsim::geometry::Vec3> read_users_file(const std::string& path,
                                                    const ScenarioConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open users file '" + path + "'");
  std::vector<owlsim::geometry::Vec3> users;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = owlsim::config::trim(line);
    if (line.empty()) continue;
    const auto parts = owlsim::config::split(line, ',');
    if (parts.size() != 2 && parts.size() != 3)
      throw ValidationError("users file line " + std::to_string(line_no) +
                            ": expected 'x, y' or 'x, y, z'");
    const double x = owlsim::config::parse_double("users file", parts[0]);
    const double y = owlsim::config::parse_double("users file", parts[1]);
    const double z = parts.size() == 3
                         ? owlsim::config::parse_double("users file", parts[2])
                         : cfg.scene.room.rx_plane_height_m;
    users.emplace_back(x, y, z);
  }
  if (users.empty())
    throw ValidationError("users file '" + path + "' lists no users");
  return users;
}

int cmd_channel(const CliOptions& opt, const ScenarioConfig& cfg) {
  cfg.validate();
  std::vector<owlsim::geometry::Vec3> users =
      opt.users_file.empty()
          ? owlsim::scenario::place_users(cfg.scene.room, cfg.num_users,
                                          cfg.placement, cfg.master_seed)
          : read_users_file(opt.users_file, cfg);
  owlsim::geometry::Scene scene = owlsim::geometry::build_scene(cfg.scene);
  if (cfg.pointing == owlsim::scenario::Pointing::Steered)
    owlsim::geometry::steer_at_users(scene, users);
  const auto gains = owlsim::channel::build_branch_gains(
      scene, users, cfg.gain_model_resolved());
  const auto cm = owlsim::channel::select_branch(gains, scene,
                                                 cfg.branch_policy,
                                                 cfg.gain_model);

  fs::create_directories(opt.out_dir);
  const fs::path csv_path = fs::path(opt.out_dir) / "channel.csv";
  const fs::path cfg_path = fs::path(opt.out_dir) / "resolved.cfg";
  const fs::path man_path = fs::path(opt.out_dir) / "channel.manifest.json";
  write_file(csv_path, owlsim::csv::channel_csv(cm));
  write_file(cfg_path, owlsim::config::serialize(cfg));
  write_file(man_path,
             owlsim::manifest::manifest_json(
                 cfg, "channel", {csv_path.string(), cfg_path.string()}));
  std::cout << "wrote " << csv_path.string() << "\n";
  return 0;
}

int emit_sweep(const CliOptions& opt, const ScenarioConfig& cfg,
               const owlsim::scenario::SweepResult& sweep,
               const std::string& command, const std::string& stem) {
  fs::create_directories(opt.out_dir);
  const fs::path csv_path = fs::path(opt.out_dir) / (stem + ".csv");
  const fs::path svg_path = fs::path(opt.out_dir) / (stem + ".svg");
  const fs::path trials_path = fs::path(opt.out_dir) / (stem + "_trials.csv");
  const fs::path cfg_path = fs::path(opt.out_dir) / "resolved.cfg";
  const fs::path man_path = fs::path(opt.out_dir) / (stem + ".manifest.json");

  std::vector<std::string> outputs;
  write_file(csv_path, owlsim::csv::sweep_csv(sweep));
  outputs.push_back(csv_path.string());
  if (!opt.no_plot) {
    write_file(svg_path, owlsim::svg::sweep_svg(sweep));
    outputs.push_back(svg_path.string());
  }
  if (cfg.keep_trials) {
    write_file(trials_path, owlsim::csv::trials_csv(sweep));
    outputs.push_back(trials_path.string());
  }
  write_file(cfg_path, owlsim::config::serialize(cfg));
  outputs.push_back(cfg_path.string());
  write_file(man_path,
             owlsim::manifest::manifest_json(cfg, command, outputs, &sweep));
  std::cout << "wrote " << csv_path.string() << "\n";
  for (const auto& s : sweep.skips)
    std::cout << "note: skipped " << s.scheme.label() << " G="
              << s.scheme.groups << " at " << sweep.param_name << "="
              << s.param << " (" << s.reason << ")\n";
  return 0;
}

int cmd_run(const CliOptions& opt, const ScenarioConfig& cfg) {
  const auto result = owlsim::scenario::run_scenario(cfg);
  owlsim::scenario::SweepResult sweep;
  sweep.param_name = "users";
  sweep.master_seed = cfg.master_seed;
  owlsim::scenario::append_points(sweep, cfg, result,
                                  static_cast<double>(cfg.num_users));
  return emit_sweep(opt, cfg, sweep, "run", "run");
}

int cmd_sweep_users(const CliOptions& opt, const ScenarioConfig& cfg) {
  cfg.validate();
  const auto sweep = owlsim::scenario::sweep_users(cfg, cfg.sweep_users);
  return emit_sweep(opt, cfg, sweep, "sweep-users", "sweep_users");
}

int cmd_sweep_waist(const CliOptions& opt, const ScenarioConfig& cfg) {
  cfg.validate();
  const auto sweep = owlsim::scenario::sweep_waist(cfg, cfg.sweep_waist_m);
  return emit_sweep(opt, cfg, sweep, "sweep-waist", "sweep_waist");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(owlsim::kToolName) +
               " - indoor optical wireless rate-splitting simulator"};
  app.set_version_flag("--version", owlsim::kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  CliOptions opt;
  app.add_option("--config", opt.config_path,
                 "configuration file (key = value, schema 1)");
  auto* o_seed =
      app.add_option("--seed", opt.seed, "master seed (overrides sim.seed)");
  auto* o_trials = app.add_option("--trials", opt.trials,
                                  "trial count (overrides sim.trials)");
  auto* o_workers = app.add_option(
      "--workers", opt.workers, "parallel trial workers (overrides sim.workers)");
  app.add_option("--out-dir", opt.out_dir, "output directory");
  auto* o_scheme = app.add_option("--scheme", opt.scheme, "rs | hrs | both");
  auto* o_groups = app.add_option(
      "--groups", opt.groups, "comma-separated HRS group counts, e.g. 5,10");
  app.add_flag("--keep-trials", opt.keep_trials,
               "also write raw per-trial rates");
  app.add_flag("--no-plot", opt.no_plot, "skip SVG rendering");

  auto* channel =
      app.add_subcommand("channel", "dump one channel matrix as CSV");
  channel->add_option("--users-file", opt.users_file,
                      "positions file: one 'x, y[, z]' line per user");
  auto* o_users_ch = channel->add_option(
      "--users", opt.users, "number of randomly placed users");
  auto* run = app.add_subcommand("run", "Monte-Carlo run at one configuration");
  auto* o_users_run =
      run->add_option("--users", opt.users, "number of users");
  auto* sweep_users_cmd = app.add_subcommand(
      "sweep-users", "rate versus user count (sweep.users list)");
  auto* sweep_waist_cmd = app.add_subcommand(
      "sweep-waist", "rate versus beam waist (sweep.waist list; Gaussian)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    ScenarioConfig cfg;
    if (!opt.config_path.empty())
      cfg = owlsim::config::parse_file(opt.config_path);
    owlsim::config::apply_env_overrides(cfg);
    if (o_seed->count()) cfg.master_seed = opt.seed;
    if (o_trials->count()) cfg.trials = opt.trials;
    if (o_workers->count()) cfg.workers = opt.workers;
    if (o_scheme->count()) owlsim::config::set_key(cfg, "scheme", opt.scheme);
    if (o_groups->count())
      owlsim::config::set_key(cfg, "hrs.groups", opt.groups);
    if (o_users_ch->count() || o_users_run->count())
      owlsim::config::set_key(cfg, "sim.users", std::to_string(opt.users));
    if (opt.keep_trials) cfg.keep_trials = true;

    if (channel->parsed()) return cmd_channel(opt, cfg);
    if (run->parsed()) return cmd_run(opt, cfg);
    if (sweep_users_cmd->parsed()) return cmd_sweep_users(opt, cfg);
    if (sweep_waist_cmd->parsed()) return cmd_sweep_waist(opt, cfg);
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 3;
  }
}
