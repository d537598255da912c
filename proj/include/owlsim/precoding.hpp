#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <string>
#include <vector>

#include "owlsim/common.hpp"
#include "owlsim/grouping.hpp"

namespace owlsim::precoding {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Human-readable hint for rank failures: zero rows and near-duplicate row
/// pairs are the usual culprits (unserved users, co-located users).
inline std::string describe_rank_issue(const MatrixXd& H) {
  std::string msg;
  for (Eigen::Index k = 0; k < H.rows(); ++k)
    if (H.row(k).norm() == 0.0)
      msg += " user " + std::to_string(k) + " has a zero channel row;";
  for (Eigen::Index a = 0; a < H.rows(); ++a)
    for (Eigen::Index b = a + 1; b < H.rows(); ++b) {
      const double na = H.row(a).norm(), nb = H.row(b).norm();
      if (na == 0.0 || nb == 0.0) continue;
      if (std::abs(H.row(a).dot(H.row(b))) / (na * nb) > 1.0 - 1e-9)
        msg += " users " + std::to_string(a) + " and " + std::to_string(b) +
               " have parallel rows;";
    }
  if (msg.empty()) msg = " rows are linearly dependent;";
  return msg;
}

/// Scale-invariant regularizer used when plain zero-forcing hits a rank
/// failure: 1e-6 * trace(H H^T) / K.
inline double fallback_ridge(const MatrixXd& H) {
  return 1e-6 * H.rowwise().squaredNorm().sum() /
         static_cast<double>(H.rows());
}

/// Zero-forcing precoder: raw = H^T (H H^T + ridge I)^-1, columns normalized
/// to unit norm. With ridge 0 the cross terms h_k^T w_j (j != k) vanish up to
/// numerical tolerance and H W has a strictly positive diagonal.
inline MatrixXd zf_precoder(const MatrixXd& H, double ridge = 0.0) {
  const Eigen::Index K = H.rows(), N = H.cols();
  if (K == 0) throw ValidationError("zf_precoder: empty channel");
  if (K > N)
    throw InfeasibleError("zf_precoder: more users (" + std::to_string(K) +
                          ") than transmit elements (" + std::to_string(N) +
                          ")");
  MatrixXd gram = H * H.transpose();
  if (ridge > 0.0) gram.diagonal().array() += ridge;

  Eigen::LDLT<MatrixXd> ldlt(gram);
  const VectorXd d = ldlt.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || dmax == 0.0 ||
      d.minCoeff() <= dmax * 1e-13)
    throw RankError("zf_precoder: channel Gram matrix is singular;" +
                    describe_rank_issue(H));

  MatrixXd w = H.transpose() * ldlt.solve(MatrixXd::Identity(K, K));
  for (Eigen::Index j = 0; j < K; ++j) {
    const double norm = w.col(j).norm();
    if (norm == 0.0)
      throw RankError("zf_precoder: precoder column collapsed for user " +
                      std::to_string(j) + ";" + describe_rank_issue(H));
    w.col(j) /= norm;
  }
  return w;
}

inline MatrixXd zf_with_fallback(const MatrixXd& H, bool* used_fallback) {
  try {
    MatrixXd w = zf_precoder(H, 0.0);
    if (used_fallback) *used_fallback = false;
    return w;
  } catch (const RankError&) {
    if (used_fallback) *used_fallback = true;
    return zf_precoder(H, fallback_ridge(H));
  }
}

enum class CommonStrategy { PrincipalDirection, EqualGainMrt };

/// Unit-norm direction for a message every user must decode.
///
/// PrincipalDirection takes the dominant right-singular vector of H; when the
/// top singular value is (numerically) repeated, the row sum projected onto
/// the dominant subspace picks a deterministic member, falling back to the
/// first singular vector if that projection vanishes. The sign is fixed so
/// the summed array response is nonnegative. EqualGainMrt averages the
/// unit-normalized rows.
inline VectorXd common_precoder(const MatrixXd& H, CommonStrategy strategy) {
  if (H.rows() == 0 || H.norm() == 0.0)
    throw ValidationError("common_precoder: all-zero channel");
  VectorXd w;
  if (strategy == CommonStrategy::EqualGainMrt) {
    w = VectorXd::Zero(H.cols());
    for (Eigen::Index k = 0; k < H.rows(); ++k) {
      const double n = H.row(k).norm();
      if (n > 0.0) w += H.row(k).transpose() / n;
    }
  } else {
    Eigen::JacobiSVD<MatrixXd> svd(H, Eigen::ComputeThinV);
    const VectorXd& s = svd.singularValues();
    Eigen::Index degenerate = 1;
    while (degenerate < s.size() &&
           s(degenerate) >= s(0) * (1.0 - 1e-9))
      ++degenerate;
    if (degenerate == 1) {
      w = svd.matrixV().col(0);
    } else {
      const VectorXd sum = H.colwise().sum().transpose();
      const MatrixXd sub = svd.matrixV().leftCols(degenerate);
      w = sub * (sub.transpose() * sum);
      if (w.norm() <= 1e-12 * sum.norm() || w.norm() == 0.0)
        w = svd.matrixV().col(0);
    }
  }
  const double norm = w.norm();
  if (norm == 0.0)
    throw ValidationError("common_precoder: degenerate direction");
  w /= norm;
  if ((H * w).sum() < 0.0) w = -w;
  return w;
}

struct RsPrecoders {
  MatrixXd private_precoders;  // N x K, unit columns (zero for unserved users)
  VectorXd common;             // N, unit norm
  bool ridge_fallback = false;
};

inline std::vector<Eigen::Index> nonzero_rows(const MatrixXd& H) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index k = 0; k < H.rows(); ++k)
    if (H.row(k).norm() > 0.0) idx.push_back(k);
  return idx;
}

inline MatrixXd take_rows(const MatrixXd& H,
                          const std::vector<Eigen::Index>& idx) {
  MatrixXd sub(static_cast<Eigen::Index>(idx.size()), H.cols());
  for (std::size_t i = 0; i < idx.size(); ++i)
    sub.row(static_cast<Eigen::Index>(i)) = H.row(idx[i]);
  return sub;
}

/// Full RS precoder set. Users with an all-zero channel row get an all-zero
/// precoding column (they radiate nothing and collect nothing); zero-forcing
/// and the common direction are computed over the served rows only.
inline RsPrecoders rs_precoders(const MatrixXd& H, CommonStrategy strategy) {
  const auto served = nonzero_rows(H);
  if (served.empty())
    throw ValidationError("rs_precoders: every user has a zero channel row");
  RsPrecoders p;
  if (static_cast<Eigen::Index>(served.size()) == H.rows()) {
    p.private_precoders = zf_with_fallback(H, &p.ridge_fallback);
    p.common = common_precoder(H, strategy);
    return p;
  }
  const MatrixXd sub = take_rows(H, served);
  const MatrixXd w = zf_with_fallback(sub, &p.ridge_fallback);
  p.private_precoders = MatrixXd::Zero(H.cols(), H.rows());
  for (std::size_t i = 0; i < served.size(); ++i)
    p.private_precoders.col(served[i]) = w.col(static_cast<Eigen::Index>(i));
  p.common = common_precoder(sub, strategy);
  return p;
}

/// Per-group outer precoders B_g: an orthonormal basis of the null space of
/// the other groups' stacked rows, truncated to r_g = min(null dimension,
/// K_g + 1) columns that retain the most energy of the group's own rows.
/// When the null space is empty the precoder falls back to a regularized
/// variant (ridge on the stacked Gram matrix) and reports it via used_ridge.
inline std::vector<MatrixXd> block_diagonal_precoder(
    const MatrixXd& H, const ratesplit::Grouping& grouping,
    bool* used_ridge = nullptr) {
  const Eigen::Index N = H.cols();
  grouping.validate(static_cast<int>(H.rows()));
  if (used_ridge) *used_ridge = false;

  std::vector<MatrixXd> outer;
  for (int g = 0; g < grouping.group_count; ++g) {
    const auto& own = grouping.members[g];
    MatrixXd own_rows(own.size(), N);
    for (std::size_t i = 0; i < own.size(); ++i)
      own_rows.row(static_cast<Eigen::Index>(i)) = H.row(own[i]);

    Eigen::Index other_count = H.rows() - static_cast<Eigen::Index>(own.size());
    MatrixXd others(other_count, N);
    Eigen::Index r = 0;
    for (int l = 0; l < grouping.group_count; ++l) {
      if (l == g) continue;
      for (int k : grouping.members[l]) others.row(r++) = H.row(k);
    }

    const Eigen::Index want = static_cast<Eigen::Index>(own.size()) + 1;
    MatrixXd basis;  // orthonormal columns spanning the usable subspace
    if (other_count == 0) {
      basis = MatrixXd::Identity(N, N);
    } else {
      Eigen::JacobiSVD<MatrixXd> svd(others, Eigen::ComputeFullV);
      const VectorXd& s = svd.singularValues();
      const double smax = s.size() > 0 ? s(0) : 0.0;
      const double tol =
          smax * static_cast<double>(std::max(others.rows(), N)) * 1e-15;
      Eigen::Index rank = 0;
      while (rank < s.size() && s(rank) > tol) ++rank;
      const Eigen::Index null_dim = N - rank;
      if (null_dim == 0) {
        // No exact null space left: regularized fallback. Whiten by the
        // ridged Gram of the interference rows, maximize own-group energy
        // in the whitened metric, then re-orthonormalize.
        if (used_ridge) *used_ridge = true;
        MatrixXd gram = others.transpose() * others;
        const double ridge =
            1e-6 * gram.trace() / static_cast<double>(others.rows());
        gram.diagonal().array() += ridge;
        Eigen::LLT<MatrixXd> llt(gram);
        if (llt.info() != Eigen::Success)
          throw RankError("block_diagonal_precoder: ridge factorization failed");
        const MatrixXd u = llt.matrixU();  // gram = U^T U
        const MatrixXd whitened =
            u.triangularView<Eigen::Upper>().solve(MatrixXd::Identity(N, N));
        Eigen::JacobiSVD<MatrixXd> wsvd(own_rows * whitened,
                                        Eigen::ComputeFullV);
        const Eigen::Index rg = std::min<Eigen::Index>(N, want);
        MatrixXd raw = whitened * wsvd.matrixV().leftCols(rg);
        Eigen::HouseholderQR<MatrixXd> qr(raw);
        basis = qr.householderQ() * MatrixXd::Identity(N, rg);
        outer.push_back(basis);
        continue;
      }
      basis = svd.matrixV().rightCols(null_dim);
    }

    const Eigen::Index rg = std::min<Eigen::Index>(basis.cols(), want);
    if (own_rows.norm() == 0.0) {
      outer.push_back(basis.leftCols(rg));
      continue;
    }
    Eigen::JacobiSVD<MatrixXd> psvd(own_rows * basis, Eigen::ComputeFullV);
    outer.push_back(basis * psvd.matrixV().leftCols(rg));
  }
  return outer;
}

struct HrsPrecoders {
  std::vector<MatrixXd> outer;         // B_g: N x r_g, orthonormal columns
  std::vector<MatrixXd> inner;         // W_g: r_g x K_g, unit columns
  std::vector<VectorXd> inner_common;  // w_ic,g: r_g, unit norm
  VectorXd outer_common;               // w_oc: N, unit norm
  bool bd_ridge_fallback = false;
  bool zf_ridge_fallback = false;
};

/// Two-tier precoder set: outer block-diagonalizing bases, per-group inner
/// zero-forcing over the effective channels H_g B_g, one common direction
/// per group, and one outer common direction over the whole array. Unserved
/// users (zero rows) get zero inner columns; a fully unserved group gets
/// zero inner precoders and a zero inner-common vector.
inline HrsPrecoders hrs_precoders(const MatrixXd& H,
                                  const ratesplit::Grouping& grouping,
                                  CommonStrategy strategy) {
  const auto served = nonzero_rows(H);
  if (served.empty())
    throw ValidationError("hrs_precoders: every user has a zero channel row");
  HrsPrecoders p;
  p.outer = block_diagonal_precoder(H, grouping, &p.bd_ridge_fallback);
  for (int g = 0; g < grouping.group_count; ++g) {
    const auto& own = grouping.members[g];
    const MatrixXd& basis = p.outer[g];
    const Eigen::Index kg = static_cast<Eigen::Index>(own.size());
    MatrixXd eff(kg, basis.cols());
    for (Eigen::Index i = 0; i < kg; ++i)
      eff.row(i) = H.row(own[static_cast<std::size_t>(i)]) * basis;
    const auto active = nonzero_rows(eff);
    if (active.empty()) {
      p.inner.push_back(MatrixXd::Zero(basis.cols(), kg));
      p.inner_common.push_back(VectorXd::Zero(basis.cols()));
      continue;
    }
    bool used = false;
    if (static_cast<Eigen::Index>(active.size()) == kg) {
      p.inner.push_back(zf_with_fallback(eff, &used));
      p.inner_common.push_back(common_precoder(eff, strategy));
    } else {
      const MatrixXd sub = take_rows(eff, active);
      const MatrixXd w = zf_with_fallback(sub, &used);
      MatrixXd full = MatrixXd::Zero(basis.cols(), kg);
      for (std::size_t i = 0; i < active.size(); ++i)
        full.col(active[i]) = w.col(static_cast<Eigen::Index>(i));
      p.inner.push_back(std::move(full));
      p.inner_common.push_back(common_precoder(sub, strategy));
    }
    p.zf_ridge_fallback = p.zf_ridge_fallback || used;
  }
  p.outer_common = common_precoder(take_rows(H, served), strategy);
  return p;
}

}  // namespace owlsim::precoding
