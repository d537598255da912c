#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "owlsim/channel.hpp"
#include "owlsim/common.hpp"
#include "owlsim/geometry.hpp"
#include "owlsim/grouping.hpp"
#include "owlsim/optics.hpp"
#include "owlsim/precoding.hpp"
#include "owlsim/ratesplit.hpp"
#include "owlsim/rng.hpp"

namespace owlsim::scenario {

using geometry::Vec3;

enum class PlacementKind { UniformFloor, ClusteredGaussian };

struct PlacementModel {
  PlacementKind variant = PlacementKind::ClusteredGaussian;
  int cluster_count = 5;
  double cluster_sigma_m = 0.5;

  void validate() const {
    if (cluster_count < 1)
      throw ValidationError("placement.clusters must be at least 1");
    if (cluster_sigma_m < 0.0)
      throw ValidationError("placement.sigma_m must be nonnegative");
  }
};

enum class Pointing { Fixed, Steered };

/// One evaluation scheme: plain rate splitting, or hierarchical rate
/// splitting with a given group count.
struct SchemeSpec {
  ratesplit::Scheme kind = ratesplit::Scheme::Rs;
  int groups = 0;  // 0 for rs

  std::string label() const {
    return kind == ratesplit::Scheme::Rs ? "rs" : "hrs";
  }
  bool operator==(const SchemeSpec& o) const {
    return kind == o.kind && groups == o.groups;
  }
};

struct ScenarioConfig {
  geometry::SceneSpec scene;
  Pointing pointing = Pointing::Fixed;
  optics::GainModelKind gain_model = optics::GainModelKind::Lambertian;
  double semi_angle_deg = 15.0;  // sets the Lambertian order
  channel::BranchPolicy branch_policy = channel::BranchPolicy::MaxSumPower;
  precoding::CommonStrategy common_strategy =
      precoding::CommonStrategy::PrincipalDirection;
  PlacementModel placement;

  int num_users = 20;
  bool run_rs = true;
  bool run_hrs = true;
  std::vector<int> hrs_groups = {5, 10};
  double t = 0.8;
  double alpha = 0.8;
  double beta = 0.9;
  double total_power = 1.0;  // normalized symbol power P

  double nsd_a_per_rthz = 4.47e-12;
  double bandwidth_hz = 5e9;
  bool shot_noise = false;
  bool include_unserved_in_common_min = true;

  int trials = 200;
  std::uint64_t master_seed = 1;
  int workers = 1;
  bool keep_trials = false;

  std::vector<int> sweep_users = {2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
  std::vector<double> sweep_waist_m = {20e-6, 30e-6, 40e-6,
                                       50e-6, 60e-6, 70e-6, 80e-6};

  optics::GainModel gain_model_resolved() const {
    optics::GainModel m;
    m.variant = gain_model;
    if (gain_model == optics::GainModelKind::Lambertian)
      m.lambertian_order = optics::lambertian_order(semi_angle_deg);
    return m;
  }

  std::vector<SchemeSpec> schemes() const {
    std::vector<SchemeSpec> s;
    if (run_rs) s.push_back({ratesplit::Scheme::Rs, 0});
    if (run_hrs)
      for (int g : hrs_groups) s.push_back({ratesplit::Scheme::Hrs, g});
    return s;
  }

  void validate() const {
    geometry::build_scene(scene);  // throws on bad scene parameters
    placement.validate();
    if (num_users < 1) throw ValidationError("sim.users must be at least 1");
    if (trials < 1) throw ValidationError("sim.trials must be at least 1");
    if (workers < 1) throw ValidationError("sim.workers must be at least 1");
    if (t <= 0.0 || t > 1.0) throw ValidationError("rs.t must be in (0, 1]");
    if (alpha <= 0.0 || alpha > 1.0)
      throw ValidationError("hrs.alpha must be in (0, 1]");
    if (beta <= 0.0 || beta > 1.0)
      throw ValidationError("hrs.beta must be in (0, 1]");
    if (total_power <= 0.0)
      throw ValidationError("power.total must be positive");
    if (nsd_a_per_rthz <= 0.0)
      throw ValidationError("noise.nsd must be positive");
    if (bandwidth_hz <= 0.0)
      throw ValidationError("noise.bandwidth must be positive");
    if (gain_model == optics::GainModelKind::Lambertian)
      (void)optics::lambertian_order(semi_angle_deg);
    if (schemes().empty())
      throw ValidationError("no scheme selected (rs disabled, no hrs groups)");
    for (int g : hrs_groups)
      if (g < 1) throw ValidationError("hrs.groups entries must be >= 1");
  }
};

/// Seeded user placement on the receiver plane. Uniform draws cover the
/// whole floor; the clustered model scatters users round-robin around
/// uniformly placed cluster centers, resampling any draw that lands outside
/// the room.
inline std::vector<Vec3> place_users(const geometry::Room& room, int num_users,
                                     const PlacementModel& model,
                                     std::uint64_t seed) {
  model.validate();
  std::vector<Vec3> users;
  if (num_users <= 0) return users;
  Rng rng(seed);
  const double z = room.rx_plane_height_m;
  if (model.variant == PlacementKind::UniformFloor) {
    for (int i = 0; i < num_users; ++i)
      users.emplace_back(rng.uniform(0.0, room.length_m),
                         rng.uniform(0.0, room.width_m), z);
    return users;
  }
  std::vector<double> cx(model.cluster_count), cy(model.cluster_count);
  for (int c = 0; c < model.cluster_count; ++c) {
    cx[c] = rng.uniform(0.0, room.length_m);
    cy[c] = rng.uniform(0.0, room.width_m);
  }
  for (int i = 0; i < num_users; ++i) {
    const int c = i % model.cluster_count;
    double x = cx[c], y = cy[c];
    for (int attempt = 0; attempt < 10000; ++attempt) {
      x = cx[c] + model.cluster_sigma_m * rng.normal();
      y = cy[c] + model.cluster_sigma_m * rng.normal();
      if (room.contains_floor_point(x, y)) break;
      x = cx[c];
      y = cy[c];
    }
    users.emplace_back(x, y, z);
  }
  return users;
}

/// Per-user noise variance: thermal floor plus the optional shot term driven
/// by the received optical power on the selected branch.
inline Eigen::VectorXd noise_vector(const ScenarioConfig& cfg,
                                    const channel::ChannelMatrix& cm) {
  const double thermal =
      optics::noise_variance(cfg.nsd_a_per_rthz, cfg.bandwidth_hz);
  Eigen::VectorXd sigma2 =
      Eigen::VectorXd::Constant(cm.num_users(), thermal);
  if (cfg.shot_noise) {
    const double resp = cfg.scene.responsivity_a_per_w;
    const Eigen::VectorXd rcv = channel::received_optical_power(cm, resp);
    for (Eigen::Index k = 0; k < sigma2.size(); ++k)
      sigma2(k) +=
          optics::shot_noise_variance(rcv(k), resp, cfg.bandwidth_hz);
  }
  return sigma2;
}

inline std::vector<bool> common_min_mask(const ScenarioConfig& cfg,
                                         const channel::ChannelMatrix& cm) {
  if (cfg.include_unserved_in_common_min)
    return std::vector<bool>(static_cast<std::size_t>(cm.num_users()), true);
  return cm.served;
}

/// Rate-splitting evaluation of one channel instance.
inline ratesplit::RateReport evaluate_rs(const ScenarioConfig& cfg,
                                         const channel::ChannelMatrix& cm) {
  const auto prec = precoding::rs_precoders(cm.h, cfg.common_strategy);
  const auto split = ratesplit::RsPowerSplit::make(cfg.total_power, cfg.t,
                                                   cm.num_users());
  const auto sinrs =
      ratesplit::rs_sinrs(cm.h, prec, split, noise_vector(cfg, cm));
  return ratesplit::rs_rates(sinrs, cfg.bandwidth_hz,
                             common_min_mask(cfg, cm));
}

/// Hierarchical rate-splitting evaluation of one channel instance under a
/// given user grouping.
inline ratesplit::RateReport evaluate_hrs(const ScenarioConfig& cfg,
                                          const channel::ChannelMatrix& cm,
                                          const ratesplit::Grouping& grouping) {
  const auto prec =
      precoding::hrs_precoders(cm.h, grouping, cfg.common_strategy);
  const auto split = ratesplit::HrsPowerSplit::make(
      cfg.total_power, cfg.alpha, cfg.beta, cm.num_users(),
      grouping.group_count);
  const auto sinrs = ratesplit::hrs_sinrs(cm.h, prec, split, grouping,
                                          noise_vector(cfg, cm));
  return ratesplit::hrs_rates(sinrs, grouping, cfg.bandwidth_hz,
                              common_min_mask(cfg, cm));
}

struct SchemeOutcome {
  bool failed = false;
  std::string reason;
  ratesplit::RateReport report;
};

struct TrialRecord {
  int index = 0;
  std::uint64_t seed = 0;
  std::vector<SchemeOutcome> outcomes;  // aligned with ScenarioConfig::schemes()
};

/// One full Monte-Carlo trial: placement, channel assembly, then every
/// requested scheme on the same channel instance (paired evaluation).
inline TrialRecord run_trial(const ScenarioConfig& cfg,
                             const geometry::Scene& base_scene,
                             int trial_index) {
  TrialRecord rec;
  rec.index = trial_index;
  rec.seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(trial_index));
  const auto schemes = cfg.schemes();
  rec.outcomes.resize(schemes.size());
  std::vector<Vec3> users;
  channel::ChannelMatrix cm;
  try {
    users = place_users(cfg.scene.room, cfg.num_users, cfg.placement, rec.seed);
    geometry::Scene scene = base_scene;
    if (cfg.pointing == Pointing::Steered) geometry::steer_at_users(scene, users);
    const auto gains =
        channel::build_branch_gains(scene, users, cfg.gain_model_resolved());
    cm = channel::select_branch(gains, scene, cfg.branch_policy,
                                cfg.gain_model);
  } catch (const std::exception& e) {
    for (auto& o : rec.outcomes) {
      o.failed = true;
      o.reason = e.what();
    }
    return rec;
  }
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    auto& out = rec.outcomes[s];
    try {
      if (schemes[s].kind == ratesplit::Scheme::Rs) {
        out.report = evaluate_rs(cfg, cm);
      } else {
        if (schemes[s].groups > cfg.num_users)
          throw ValidationError("more groups than users");
        const auto grouping =
            ratesplit::group_users(users, schemes[s].groups, rec.seed);
        out.report = evaluate_hrs(cfg, cm, grouping);
      }
    } catch (const std::exception& e) {
      out.failed = true;
      out.reason = e.what();
    }
  }
  return rec;
}

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;
  double ci95_lo = 0.0;
  double ci95_hi = 0.0;
  int n = 0;
  int failures = 0;
};

/// Sample statistics with a normal-approximation 95% confidence interval.
inline Aggregate aggregate(const std::vector<double>& values, int failures = 0) {
  if (values.empty())
    throw InfeasibleError("aggregate: no successful trials to aggregate");
  Aggregate a;
  a.n = static_cast<int>(values.size());
  a.failures = failures;
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / a.n;
  if (a.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.stddev = std::sqrt(ss / (a.n - 1));
  }
  const double half = 1.96 * a.stddev / std::sqrt(static_cast<double>(a.n));
  a.ci95_lo = a.mean - half;
  a.ci95_hi = a.mean + half;
  return a;
}

struct SchemeAggregate {
  SchemeSpec scheme;
  Aggregate user_rate;  // statistics of the per-trial mean user rate, bits/s
  Aggregate sum_rate;   // statistics of the per-trial sum rate, bits/s
};

struct ScenarioResult {
  std::vector<SchemeSpec> schemes;
  std::vector<TrialRecord> trials;
  std::vector<SchemeAggregate> aggregates;
};

/// Runs cfg.trials seeded trials, optionally across a worker pool. Per-trial
/// seeds derive from (master_seed, trial index), every worker writes only its
/// own trial slots, and aggregation is a fixed-order reduction, so the result
/// is identical for any worker count.
inline ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  for (int g : cfg.hrs_groups)
    if (g > cfg.num_users)
      throw ValidationError("hrs.groups entry " + std::to_string(g) +
                            " exceeds the user count " +
                            std::to_string(cfg.num_users));
  const geometry::Scene base_scene = geometry::build_scene(cfg.scene);

  ScenarioResult result;
  result.schemes = cfg.schemes();
  result.trials.resize(static_cast<std::size_t>(cfg.trials));

  const int worker_count = std::min(cfg.workers, cfg.trials);
  if (worker_count <= 1) {
    for (int i = 0; i < cfg.trials; ++i)
      result.trials[static_cast<std::size_t>(i)] = run_trial(cfg, base_scene, i);
  } else {
    std::atomic<int> next{0};
    auto work = [&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= cfg.trials) return;
        result.trials[static_cast<std::size_t>(i)] =
            run_trial(cfg, base_scene, i);
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < worker_count; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  for (std::size_t s = 0; s < result.schemes.size(); ++s) {
    SchemeAggregate agg;
    agg.scheme = result.schemes[s];
    std::vector<double> user_rates, sum_rates;
    int failures = 0;
    for (const auto& trial : result.trials) {
      const auto& o = trial.outcomes[s];
      if (o.failed) {
        ++failures;
        continue;
      }
      user_rates.push_back(o.report.mean_user_rate_bps);
      sum_rates.push_back(o.report.sum_rate_bps);
    }
    agg.user_rate = aggregate(user_rates, failures);
    agg.sum_rate = aggregate(sum_rates, failures);
    result.aggregates.push_back(agg);
  }
  return result;
}

struct SweepPoint {
  double param = 0.0;
  SchemeSpec scheme;
  Aggregate user_rate;
  Aggregate sum_rate;
  std::vector<std::uint64_t> trial_seeds;   // only when keep_trials
  std::vector<double> trial_user_rates;     // only when keep_trials
  std::vector<double> trial_sum_rates;      // NaN entries mark failed trials
};

struct SweepSkip {
  double param = 0.0;
  SchemeSpec scheme;
  std::string reason;
};

struct SweepResult {
  std::string param_name;  // "users" or "beam_waist_um"
  std::vector<SweepPoint> points;
  std::vector<SweepSkip> skips;
  std::uint64_t master_seed = 0;
};

inline void append_points(SweepResult& sweep, const ScenarioConfig& cfg,
                          const ScenarioResult& run, double param) {
  for (std::size_t s = 0; s < run.schemes.size(); ++s) {
    SweepPoint p;
    p.param = param;
    p.scheme = run.schemes[s];
    p.user_rate = run.aggregates[s].user_rate;
    p.sum_rate = run.aggregates[s].sum_rate;
    if (cfg.keep_trials) {
      for (const auto& trial : run.trials) {
        const auto& o = trial.outcomes[s];
        p.trial_seeds.push_back(trial.seed);
        p.trial_user_rates.push_back(
            o.failed ? std::nan("") : o.report.mean_user_rate_bps);
        p.trial_sum_rates.push_back(o.failed ? std::nan("")
                                             : o.report.sum_rate_bps);
      }
    }
    sweep.points.push_back(std::move(p));
  }
}

/// Rate-versus-user-count sweep. Group counts stay fixed per scheme; points
/// where a scheme needs more groups than there are users are skipped and
/// recorded, not silently shrunk.
inline SweepResult sweep_users(const ScenarioConfig& cfg,
                               const std::vector<int>& k_values) {
  if (k_values.empty()) throw ValidationError("sweep_users: empty K list");
  for (std::size_t i = 1; i < k_values.size(); ++i)
    if (k_values[i] <= k_values[i - 1])
      throw ValidationError("sweep_users: K values must be ascending");
  SweepResult sweep;
  sweep.param_name = "users";
  sweep.master_seed = cfg.master_seed;
  for (int k : k_values) {
    ScenarioConfig point_cfg = cfg;
    point_cfg.num_users = k;
    point_cfg.hrs_groups.clear();
    for (int g : cfg.hrs_groups) {
      if (g <= k) {
        point_cfg.hrs_groups.push_back(g);
      } else {
        sweep.skips.push_back({static_cast<double>(k),
                               {ratesplit::Scheme::Hrs, g},
                               "needs more users than the sweep point has"});
      }
    }
    if (point_cfg.schemes().empty()) continue;
    append_points(sweep, point_cfg, run_scenario(point_cfg),
                  static_cast<double>(k));
  }
  return sweep;
}

/// Rate-versus-beam-waist sweep; only meaningful for the Gaussian beam
/// model, the Lambertian gain does not depend on the waist.
inline SweepResult sweep_waist(const ScenarioConfig& cfg,
                               const std::vector<double>& w0_values_m) {
  if (cfg.gain_model != optics::GainModelKind::GaussianBeam)
    throw ValidationError(
        "sweep_waist: requires gain.model = gaussian (beam waist has no "
        "effect on the Lambertian model)");
  if (w0_values_m.empty()) throw ValidationError("sweep_waist: empty list");
  for (std::size_t i = 0; i < w0_values_m.size(); ++i) {
    if (w0_values_m[i] <= 0.0)
      throw ValidationError("sweep_waist: waist values must be positive");
    if (i > 0 && w0_values_m[i] <= w0_values_m[i - 1])
      throw ValidationError("sweep_waist: waist values must be ascending");
  }
  SweepResult sweep;
  sweep.param_name = "beam_waist_um";
  sweep.master_seed = cfg.master_seed;
  for (double w0 : w0_values_m) {
    ScenarioConfig point_cfg = cfg;
    point_cfg.scene.beam_waist_m = w0;
    append_points(sweep, point_cfg, run_scenario(point_cfg), w0 * 1e6);
  }
  return sweep;
}

}  // namespace owlsim::scenario
