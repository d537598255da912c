#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <vector>

#include "owlsim/common.hpp"
#include "owlsim/geometry.hpp"
#include "owlsim/optics.hpp"

namespace owlsim::channel {

/// Per-user, per-branch, per-element optical gains: K x B x N, row-major in
/// (user, branch, element). Out-of-FOV entries are exactly zero.
struct BranchGains {
  int num_users = 0;
  int num_branches = 0;
  int num_elements = 0;
  std::vector<double> data;

  double& at(int k, int b, int n) {
    return data[(static_cast<std::size_t>(k) * num_branches + b) *
                    num_elements +
                n];
  }
  double at(int k, int b, int n) const {
    return data[(static_cast<std::size_t>(k) * num_branches + b) *
                    num_elements +
                n];
  }
};

enum class BranchPolicy { MaxSumPower, MaxMinGain };

/// Electrical channel matrix: row k = responsivity * element power * the
/// optical gains of user k's selected branch, in amps per unit transmit
/// symbol. Users whose gains vanish on every branch are flagged unserved
/// (selected_branch -1, all-zero row).
struct ChannelMatrix {
  Eigen::MatrixXd h;                // K x N
  std::vector<int> selected_branch; // per user, -1 when unserved
  std::vector<bool> served;
  optics::GainModelKind model_tag = optics::GainModelKind::Lambertian;

  int num_users() const { return static_cast<int>(h.rows()); }
  int num_elements() const { return static_cast<int>(h.cols()); }
};

inline double element_gain(const geometry::VcselElement& e,
                           const geometry::Vec3& rx,
                           const geometry::Vec3& normal,
                           const geometry::AdrBranch& branch,
                           const optics::GainModel& model) {
  const auto geom = geometry::los_geometry(e, rx, normal);
  if (model.variant == optics::GainModelKind::Lambertian)
    return optics::lambertian_gain(geom, model.lambertian_order,
                                   branch.area_m2, branch.fov_deg);
  return optics::gaussian_gain(geom, e.beam_waist_m, e.wavelength_m,
                               branch.area_m2, branch.fov_deg);
}

inline BranchGains build_branch_gains(const geometry::Scene& scene,
                                      const std::vector<geometry::Vec3>& users,
                                      const optics::GainModel& model) {
  model.validate();
  BranchGains g;
  g.num_users = static_cast<int>(users.size());
  g.num_branches = static_cast<int>(scene.adr.branches.size());
  g.num_elements = scene.element_count();
  g.data.assign(static_cast<std::size_t>(g.num_users) * g.num_branches *
                    g.num_elements,
                0.0);

  // Branch normals are user-independent (all receivers face straight up).
  std::vector<geometry::Vec3> normals;
  for (const auto& b : scene.adr.branches)
    normals.push_back(geometry::branch_normal(b.azimuth_deg, b.elevation_deg));

  for (int k = 0; k < g.num_users; ++k) {
    const auto& rx = users[k];
    if (!scene.room.contains_floor_point(rx.x(), rx.y()))
      throw ValidationError("build_branch_gains: user outside the room");
    for (int b = 0; b < g.num_branches; ++b) {
      int n = 0;
      for (const auto& unit : scene.units) {
        for (const auto& e : unit.elements) {
          g.at(k, b, n) =
              element_gain(e, rx, normals[b], scene.adr.branches[b], model);
          ++n;
        }
      }
    }
  }
  return g;
}

/// Pick one branch per user and fold responsivity and per-element optical
/// power into the electrical row. MaxSumPower maximizes sum of squared gains;
/// MaxMinGain maximizes the weakest per-element gain. Ties go to the lowest
/// branch index.
inline ChannelMatrix select_branch(const BranchGains& gains,
                                   const geometry::Scene& scene,
                                   BranchPolicy policy,
                                   optics::GainModelKind model_tag) {
  const int K = gains.num_users;
  const int B = gains.num_branches;
  const int N = gains.num_elements;
  ChannelMatrix cm;
  cm.h = Eigen::MatrixXd::Zero(K, N);
  cm.selected_branch.assign(K, -1);
  cm.served.assign(K, false);
  cm.model_tag = model_tag;

  std::vector<double> element_power(N);
  {
    int n = 0;
    for (const auto& unit : scene.units)
      for (const auto& e : unit.elements) element_power[n++] = e.optical_power_w;
  }
  const double resp = scene.adr.responsivity_a_per_w;

  for (int k = 0; k < K; ++k) {
    int best = -1;
    double best_score = -1.0;
    for (int b = 0; b < B; ++b) {
      double score;
      if (policy == BranchPolicy::MaxSumPower) {
        score = 0.0;
        for (int n = 0; n < N; ++n) score += gains.at(k, b, n) * gains.at(k, b, n);
      } else {
        score = std::numeric_limits<double>::infinity();
        for (int n = 0; n < N; ++n) score = std::min(score, gains.at(k, b, n));
      }
      if (score > best_score) {  // strict: ties keep the lowest index
        best_score = score;
        best = b;
      }
    }
    bool any = false;
    for (int n = 0; n < N; ++n)
      if (gains.at(k, best, n) > 0.0) any = true;
    if (!any) continue;  // unserved: zero row, branch -1
    cm.selected_branch[k] = best;
    cm.served[k] = true;
    for (int n = 0; n < N; ++n)
      cm.h(k, n) = resp * element_power[n] * gains.at(k, best, n);
  }
  return cm;
}

struct ConditionReport {
  Eigen::Index rank = 0;
  double condition_number = 0.0;
  double min_row_norm = 0.0;
};

inline ConditionReport condition_report(const ChannelMatrix& cm,
                                        const std::vector<int>& user_subset) {
  if (user_subset.empty())
    throw ValidationError("condition_report: empty user subset");
  Eigen::MatrixXd sub(user_subset.size(), cm.h.cols());
  for (std::size_t i = 0; i < user_subset.size(); ++i) {
    const int k = user_subset[i];
    if (k < 0 || k >= cm.num_users())
      throw ValidationError("condition_report: user index out of range");
    sub.row(static_cast<Eigen::Index>(i)) = cm.h.row(k);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub);
  ConditionReport r;
  r.rank = svd.rank();
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  r.condition_number = smin > 0.0 ? s(0) / smin
                                  : std::numeric_limits<double>::infinity();
  r.min_row_norm = sub.rowwise().norm().minCoeff();
  return r;
}

inline ConditionReport condition_report(const ChannelMatrix& cm) {
  std::vector<int> all(cm.num_users());
  for (int k = 0; k < cm.num_users(); ++k) all[k] = k;
  return condition_report(cm, all);
}

/// Total received optical power per user on its selected branch, in watts.
/// Row k of H is responsivity times per-element received power, so dividing
/// the row sum by the responsivity recovers the optical sum. Used by the
/// optional shot-noise term.
inline Eigen::VectorXd received_optical_power(const ChannelMatrix& cm,
                                              double responsivity_a_per_w) {
  return cm.h.rowwise().sum() / responsivity_a_per_w;
}

}  // namespace owlsim::channel
