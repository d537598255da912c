#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "owlsim/common.hpp"
#include "owlsim/grouping.hpp"
#include "owlsim/precoding.hpp"

namespace owlsim::ratesplit {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline double log2p1(double sinr) { return std::log2(1.0 + sinr); }

/// One common stream plus K private streams: P_c = P(1-t), P_k = P t / K.
struct RsPowerSplit {
  double total_p = 1.0;
  double t = 0.8;
  double p_common = 0.0;
  double p_private_each = 0.0;

  static RsPowerSplit make(double total_p, double t, int num_users) {
    if (total_p <= 0.0) throw ValidationError("power split: total power <= 0");
    if (t <= 0.0 || t > 1.0)
      throw ValidationError("power split: t must be in (0, 1]");
    if (num_users < 1) throw ValidationError("power split: no users");
    RsPowerSplit s;
    s.total_p = total_p;
    s.t = t;
    s.p_common = total_p * (1.0 - t);
    s.p_private_each = total_p * t / num_users;
    return s;
  }
};

/// Outer common, G inner commons, K privates:
/// P_oc = P(1-beta), P_ic,g = P beta (1-alpha) / G, P_gk = P beta alpha / K.
struct HrsPowerSplit {
  double total_p = 1.0;
  double alpha = 0.8;
  double beta = 0.9;
  double p_outer_common = 0.0;
  double p_inner_common_each = 0.0;
  double p_private_each = 0.0;

  static HrsPowerSplit make(double total_p, double alpha, double beta,
                            int num_users, int num_groups) {
    if (total_p <= 0.0) throw ValidationError("power split: total power <= 0");
    if (alpha <= 0.0 || alpha > 1.0)
      throw ValidationError("power split: alpha must be in (0, 1]");
    if (beta <= 0.0 || beta > 1.0)
      throw ValidationError("power split: beta must be in (0, 1]");
    if (num_users < 1 || num_groups < 1)
      throw ValidationError("power split: need users and groups");
    HrsPowerSplit s;
    s.total_p = total_p;
    s.alpha = alpha;
    s.beta = beta;
    s.p_outer_common = total_p * (1.0 - beta);
    s.p_inner_common_each = total_p * beta * (1.0 - alpha) / num_groups;
    s.p_private_each = total_p * beta * alpha / num_users;
    return s;
  }
};

struct RsSinrs {
  VectorXd common;   // gamma_c per user
  VectorXd priv;     // gamma_p per user
};

struct HrsSinrs {
  VectorXd outer_common;  // gamma_oc per user
  VectorXd inner_common;  // gamma_ic per user (its own group's inner stream)
  VectorXd priv;          // gamma_p per user
};

/// RS stream SINRs. The common-stream denominator deliberately includes every
/// private stream, the listener's own one too: the common message is decoded
/// first, before any cancellation. The private denominator excludes only the
/// user's own stream. Sums are explicit loops that skip the excluded term
/// rather than subtracting it, so no cancellation error enters.
inline RsSinrs rs_sinrs(const MatrixXd& H, const precoding::RsPrecoders& prec,
                        const RsPowerSplit& split, const VectorXd& sigma2) {
  const Eigen::Index K = H.rows();
  if (prec.private_precoders.cols() != K || prec.private_precoders.rows() != H.cols())
    throw ValidationError("rs_sinrs: precoder shape mismatch");
  if (sigma2.size() != K)
    throw ValidationError("rs_sinrs: noise vector shape mismatch");

  const MatrixXd a = H * prec.private_precoders;  // a(k,j) = h_k . w_j
  const VectorXd c = H * prec.common;

  RsSinrs out;
  out.common.resize(K);
  out.priv.resize(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    double all_priv = 0.0;
    for (Eigen::Index j = 0; j < K; ++j)
      all_priv += split.p_private_each * a(k, j) * a(k, j);
    out.common(k) =
        split.p_common * c(k) * c(k) / (all_priv + sigma2(k));
    double other_priv = 0.0;
    for (Eigen::Index j = 0; j < K; ++j) {
      if (j == k) continue;
      other_priv += split.p_private_each * a(k, j) * a(k, j);
    }
    out.priv(k) =
        split.p_private_each * a(k, k) * a(k, k) / (other_priv + sigma2(k));
  }
  return out;
}

inline RsSinrs rs_sinrs(const MatrixXd& H, const precoding::RsPrecoders& prec,
                        const RsPowerSplit& split, double sigma2) {
  return rs_sinrs(H, prec, split, VectorXd::Constant(H.rows(), sigma2));
}

/// HRS stream SINRs, one triple per user. Stage noise sets:
///   outer common: every private stream and every inner common stream;
///   inner common: every private stream and the other groups' inner commons;
///   private:      the other private streams and the other groups' inner
///                 commons.
/// As above, all denominators are accumulated term by term.
inline HrsSinrs hrs_sinrs(const MatrixXd& H,
                          const precoding::HrsPrecoders& prec,
                          const HrsPowerSplit& split, const Grouping& grouping,
                          const VectorXd& sigma2) {
  const Eigen::Index K = H.rows();
  const int G = grouping.group_count;
  grouping.validate(static_cast<int>(K));
  if (sigma2.size() != K)
    throw ValidationError("hrs_sinrs: noise vector shape mismatch");

  // Effective full-space precoding vectors: one private column per user,
  // one inner-common column per group.
  MatrixXd w_priv = MatrixXd::Zero(H.cols(), K);
  MatrixXd w_ic = MatrixXd::Zero(H.cols(), G);
  for (int g = 0; g < G; ++g) {
    const auto& members = grouping.members[g];
    for (std::size_t i = 0; i < members.size(); ++i)
      w_priv.col(members[i]) =
          prec.outer[g] * prec.inner[g].col(static_cast<Eigen::Index>(i));
    w_ic.col(g) = prec.outer[g] * prec.inner_common[g];
  }
  const MatrixXd xp = H * w_priv;   // xp(k,j) = h_k . (B w) of user j
  const MatrixXd xi = H * w_ic;     // xi(k,l) = h_k . (B_l w_ic,l)
  const VectorXd xo = H * prec.outer_common;

  HrsSinrs out;
  out.outer_common.resize(K);
  out.inner_common.resize(K);
  out.priv.resize(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const int g = grouping.assignments[k];
    double all_priv = 0.0;
    for (Eigen::Index j = 0; j < K; ++j)
      all_priv += split.p_private_each * xp(k, j) * xp(k, j);
    double all_ic = 0.0;
    for (int l = 0; l < G; ++l)
      all_ic += split.p_inner_common_each * xi(k, l) * xi(k, l);
    double other_ic = 0.0;
    for (int l = 0; l < G; ++l) {
      if (l == g) continue;
      other_ic += split.p_inner_common_each * xi(k, l) * xi(k, l);
    }
    double other_priv = 0.0;
    for (Eigen::Index j = 0; j < K; ++j) {
      if (j == k) continue;
      other_priv += split.p_private_each * xp(k, j) * xp(k, j);
    }
    out.outer_common(k) = split.p_outer_common * xo(k) * xo(k) /
                          (all_priv + all_ic + sigma2(k));
    out.inner_common(k) = split.p_inner_common_each * xi(k, g) * xi(k, g) /
                          (all_priv + other_ic + sigma2(k));
    out.priv(k) = split.p_private_each * xp(k, k) * xp(k, k) /
                  (other_priv + other_ic + sigma2(k));
  }
  return out;
}

inline HrsSinrs hrs_sinrs(const MatrixXd& H,
                          const precoding::HrsPrecoders& prec,
                          const HrsPowerSplit& split, const Grouping& grouping,
                          double sigma2) {
  return hrs_sinrs(H, prec, split, grouping,
                   VectorXd::Constant(H.rows(), sigma2));
}

struct RateReport {
  std::string scheme;     // "rs" or "hrs"
  int groups = 1;
  VectorXd sinr_common;   // gamma_c (rs) or gamma_oc (hrs)
  VectorXd sinr_inner;    // gamma_ic (hrs only, else empty)
  VectorXd sinr_private;
  VectorXd per_user_private_se;       // bits/s/Hz
  VectorXd per_user_common_share_se;  // bits/s/Hz
  VectorXd per_user_rate_bps;
  double common_se = 0.0;        // R_c or R_oc
  double inner_common_se = 0.0;  // sum over groups of R_ic,g (hrs only)
  double sum_se = 0.0;
  double sum_rate_bps = 0.0;
  double mean_user_rate_bps = 0.0;
};

/// Minimum over the users marked in `in_min`; the common rate is pinned by
/// its slowest intended decoder. Empty selection yields 0 (no decodable
/// common stream).
inline double min_over(const VectorXd& v, const std::vector<bool>& in_min) {
  double m = 0.0;
  bool any = false;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (!in_min[static_cast<std::size_t>(k)]) continue;
    m = any ? std::min(m, v(k)) : v(k);
    any = true;
  }
  return any ? m : 0.0;
}

/// RS rates: R_c = log2(1 + min_k gamma_c), R_k = log2(1 + gamma_p,k).
/// Each user counted in the common min receives an equal 1/K share of the
/// common rate; users excluded from the min (optional handling of unserved
/// users) receive none.
inline RateReport rs_rates(const RsSinrs& sinrs, double bandwidth_hz,
                           const std::vector<bool>& in_common_min) {
  const Eigen::Index K = sinrs.common.size();
  if (bandwidth_hz <= 0.0) throw ValidationError("rs_rates: bandwidth <= 0");
  RateReport r;
  r.scheme = "rs";
  r.sinr_common = sinrs.common;
  r.sinr_private = sinrs.priv;
  r.common_se = log2p1(min_over(sinrs.common, in_common_min));
  r.per_user_private_se.resize(K);
  r.per_user_common_share_se.resize(K);
  r.per_user_rate_bps.resize(K);
  double total_se = r.common_se;
  for (Eigen::Index k = 0; k < K; ++k) {
    r.per_user_private_se(k) = log2p1(sinrs.priv(k));
    r.per_user_common_share_se(k) =
        in_common_min[static_cast<std::size_t>(k)]
            ? r.common_se / static_cast<double>(K)
            : 0.0;
    r.per_user_rate_bps(k) =
        bandwidth_hz *
        (r.per_user_private_se(k) + r.per_user_common_share_se(k));
    total_se += r.per_user_private_se(k);
  }
  r.sum_se = total_se;
  r.sum_rate_bps = bandwidth_hz * total_se;
  r.mean_user_rate_bps =
      K > 0 ? r.per_user_rate_bps.sum() / static_cast<double>(K) : 0.0;
  return r;
}

inline RateReport rs_rates(const RsSinrs& sinrs, double bandwidth_hz) {
  return rs_rates(sinrs, bandwidth_hz,
                  std::vector<bool>(static_cast<std::size_t>(sinrs.common.size()), true));
}

/// HRS rates: R_oc = log2(1 + min over all users of gamma_oc), per-group
/// R_ic,g = log2(1 + min within the group of gamma_ic), private rates per
/// user. Shares: 1/K of the outer common, 1/K_g of the own group's inner
/// common, again restricted to users counted in the mins.
inline RateReport hrs_rates(const HrsSinrs& sinrs, const Grouping& grouping,
                            double bandwidth_hz,
                            const std::vector<bool>& in_common_min) {
  const Eigen::Index K = sinrs.outer_common.size();
  if (bandwidth_hz <= 0.0) throw ValidationError("hrs_rates: bandwidth <= 0");
  grouping.validate(static_cast<int>(K));
  RateReport r;
  r.scheme = "hrs";
  r.groups = grouping.group_count;
  r.sinr_common = sinrs.outer_common;
  r.sinr_inner = sinrs.inner_common;
  r.sinr_private = sinrs.priv;
  r.common_se = log2p1(min_over(sinrs.outer_common, in_common_min));

  std::vector<double> group_ic_se(grouping.group_count, 0.0);
  for (int g = 0; g < grouping.group_count; ++g) {
    double m = 0.0;
    bool any = false;
    for (int k : grouping.members[g]) {
      if (!in_common_min[static_cast<std::size_t>(k)]) continue;
      m = any ? std::min(m, sinrs.inner_common(k)) : sinrs.inner_common(k);
      any = true;
    }
    group_ic_se[g] = any ? log2p1(m) : 0.0;
    r.inner_common_se += group_ic_se[g];
  }

  r.per_user_private_se.resize(K);
  r.per_user_common_share_se.resize(K);
  r.per_user_rate_bps.resize(K);
  double total_se = r.common_se + r.inner_common_se;
  for (Eigen::Index k = 0; k < K; ++k) {
    const int g = grouping.assignments[k];
    r.per_user_private_se(k) = log2p1(sinrs.priv(k));
    double share = 0.0;
    if (in_common_min[static_cast<std::size_t>(k)]) {
      share = r.common_se / static_cast<double>(K) +
              group_ic_se[g] / static_cast<double>(grouping.sizes[g]);
    }
    r.per_user_common_share_se(k) = share;
    r.per_user_rate_bps(k) =
        bandwidth_hz * (r.per_user_private_se(k) + share);
    total_se += r.per_user_private_se(k);
  }
  r.sum_se = total_se;
  r.sum_rate_bps = bandwidth_hz * total_se;
  r.mean_user_rate_bps =
      K > 0 ? r.per_user_rate_bps.sum() / static_cast<double>(K) : 0.0;
  return r;
}

inline RateReport hrs_rates(const HrsSinrs& sinrs, const Grouping& grouping,
                            double bandwidth_hz) {
  return hrs_rates(sinrs, grouping, bandwidth_hz,
                   std::vector<bool>(static_cast<std::size_t>(sinrs.outer_common.size()), true));
}

enum class Scheme { Rs, Hrs };

/// Declarative successive-interference-cancellation plan: the stream decoded
/// at each stage and what remains as noise while decoding it. Tests check
/// the SINR denominators against these sets; the simulator itself treats the
/// plan as documentation of the decode order.
struct DecodeStage {
  std::string stream;
  std::vector<std::string> treated_as_noise;
};

inline std::vector<DecodeStage> decode_chain(Scheme scheme) {
  if (scheme == Scheme::Rs)
    return {{"common", {"all_private"}},
            {"private", {"other_private"}}};
  return {{"outer_common", {"all_inner_common", "all_private"}},
          {"inner_common", {"other_group_inner_common", "all_private"}},
          {"private", {"other_group_inner_common", "other_private"}}};
}

}  // namespace owlsim::ratesplit
