#include <Eigen/Dense>
#include <catch2/catch_amalgamated.hpp>
#include <string>

#include "owlsim/common.hpp"
#include "owlsim/grouping.hpp"
#include "owlsim/precoding.hpp"
#include "owlsim/rng.hpp"

using namespace owlsim;
using namespace owlsim::precoding;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using Catch::Approx;

namespace {

MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols,
                       std::uint64_t seed) {
  Rng rng(seed);
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

ratesplit::Grouping contiguous_grouping(int users_per_group, int groups) {
  std::vector<int> assign;
  for (int g = 0; g < groups; ++g)
    for (int i = 0; i < users_per_group; ++i) assign.push_back(g);
  return ratesplit::finish_grouping(std::move(assign), groups);
}

}  // namespace

TEST_CASE("zero forcing on orthogonal rows returns the identity") {
  CHECK((zf_precoder(MatrixXd::Identity(2, 2)) - MatrixXd::Identity(2, 2))
            .norm() == Approx(0.0).margin(1e-12));
  MatrixXd scaled = MatrixXd::Zero(2, 2);
  scaled(0, 0) = 2.0;
  scaled(1, 1) = 3.0;
  CHECK((zf_precoder(scaled) - MatrixXd::Identity(2, 2)).norm() ==
        Approx(0.0).margin(1e-12));
}

TEST_CASE("zero forcing cancels cross-user terms on random channels") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const MatrixXd h = random_matrix(4, 40, seed);
    const MatrixXd w = zf_precoder(h);
    const MatrixXd hw = h * w;
    for (Eigen::Index k = 0; k < 4; ++k) {
      CHECK(w.col(k).norm() == Approx(1.0).margin(1e-10));
      CHECK(hw(k, k) > 0.0);
      for (Eigen::Index j = 0; j < 4; ++j)
        if (j != k) CHECK(std::abs(hw(k, j)) <= 1e-9 * h.row(k).norm());
    }
  }
}

TEST_CASE("zero forcing directions are invariant to row scaling") {
  const MatrixXd h = random_matrix(3, 8, 7);
  MatrixXd h2 = h;
  h2.row(1) *= 5.0;
  const MatrixXd w = zf_precoder(h);
  const MatrixXd w2 = zf_precoder(h2);
  for (Eigen::Index j = 0; j < 3; ++j) {
    const double align = std::abs(w.col(j).dot(w2.col(j)));
    CHECK(align == Approx(1.0).margin(1e-10));
  }
}

TEST_CASE("zero forcing rejects overloaded and singular channels") {
  CHECK_THROWS_AS(zf_precoder(random_matrix(5, 4, 1)), InfeasibleError);

  MatrixXd dup = random_matrix(3, 6, 2);
  dup.row(2) = dup.row(0);  // two co-located users
  try {
    zf_precoder(dup);
    FAIL("expected a rank error");
  } catch (const RankError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("0") != std::string::npos);
    CHECK(msg.find("2") != std::string::npos);
    CHECK(msg.find("parallel") != std::string::npos);
  }

  MatrixXd zero_row = random_matrix(2, 6, 3);
  zero_row.row(1).setZero();
  try {
    zf_precoder(zero_row);
    FAIL("expected a rank error");
  } catch (const RankError& e) {
    CHECK(std::string(e.what()).find("user 1") != std::string::npos);
  }
}

TEST_CASE("ridge fallback engages on rank-deficient channels") {
  MatrixXd dup = random_matrix(3, 6, 4);
  dup.row(2) = dup.row(0);
  bool used = false;
  const MatrixXd w = zf_with_fallback(dup, &used);
  CHECK(used);
  for (Eigen::Index j = 0; j < 3; ++j)
    CHECK(w.col(j).norm() == Approx(1.0).margin(1e-10));

  const MatrixXd ok = random_matrix(3, 6, 5);
  zf_with_fallback(ok, &used);
  CHECK_FALSE(used);
}

TEST_CASE("common precoder on a single user follows the channel direction") {
  MatrixXd h(1, 4);
  h << 1.0, 2.0, -1.0, 0.5;
  for (auto strat :
       {CommonStrategy::PrincipalDirection, CommonStrategy::EqualGainMrt}) {
    const VectorXd w = common_precoder(h, strat);
    const VectorXd expected = h.row(0).normalized();
    CHECK((w - expected).norm() == Approx(0.0).margin(1e-10));
  }
}

TEST_CASE("common precoder on identical rows returns the shared direction") {
  MatrixXd h(3, 4);
  h.row(0) << 2.0, 0.0, 1.0, 0.0;
  h.row(1) = h.row(0);
  h.row(2) = h.row(0);
  const VectorXd w = common_precoder(h, CommonStrategy::PrincipalDirection);
  CHECK((w - h.row(0).normalized().transpose()).norm() ==
        Approx(0.0).margin(1e-10));
}

TEST_CASE("common precoder balances orthogonal equal-norm rows") {
  MatrixXd h = MatrixXd::Zero(2, 4);
  h(0, 0) = 3.0;
  h(1, 1) = 3.0;
  const VectorXd w = common_precoder(h, CommonStrategy::PrincipalDirection);
  CHECK(w.norm() == Approx(1.0).margin(1e-12));
  CHECK(std::abs(h.row(0).dot(w)) ==
        Approx(std::abs(h.row(1).dot(w))).margin(1e-10));
  CHECK((h * w).sum() >= 0.0);
}

TEST_CASE("common precoder rejects an all-zero channel") {
  CHECK_THROWS_AS(common_precoder(MatrixXd::Zero(2, 4),
                                  CommonStrategy::PrincipalDirection),
                  ValidationError);
}

TEST_CASE("common precoder sign makes the summed response nonnegative") {
  for (std::uint64_t seed = 10; seed < 16; ++seed) {
    const MatrixXd h = random_matrix(4, 6, seed);
    for (auto strat :
         {CommonStrategy::PrincipalDirection, CommonStrategy::EqualGainMrt}) {
      const VectorXd w = common_precoder(h, strat);
      CHECK(w.norm() == Approx(1.0).margin(1e-10));
      CHECK((h * w).sum() >= -1e-12);
    }
  }
}

TEST_CASE("outer precoders have orthonormal columns and null the other groups") {
  const MatrixXd h = random_matrix(10, 40, 21);
  const auto grouping = contiguous_grouping(2, 5);
  bool used_ridge = true;
  const auto outer = block_diagonal_precoder(h, grouping, &used_ridge);
  CHECK_FALSE(used_ridge);
  REQUIRE(outer.size() == 5);
  for (int g = 0; g < 5; ++g) {
    const MatrixXd& b = outer[g];
    CHECK(b.rows() == 40);
    CHECK(b.cols() == 3);  // K_g + 1
    CHECK((b.transpose() * b - MatrixXd::Identity(b.cols(), b.cols())).norm() ==
          Approx(0.0).margin(1e-10));
    for (int l = 0; l < 5; ++l) {
      if (l == g) continue;
      MatrixXd rows(grouping.members[l].size(), 40);
      for (std::size_t i = 0; i < grouping.members[l].size(); ++i)
        rows.row(static_cast<Eigen::Index>(i)) = h.row(grouping.members[l][i]);
      CHECK((rows * b).norm() <= 1e-9 * rows.norm());
    }
  }
}

TEST_CASE("one group keeps an orthonormal basis of its own row space") {
  const MatrixXd h = random_matrix(4, 10, 22);
  const auto grouping = contiguous_grouping(4, 1);
  const auto outer = block_diagonal_precoder(h, grouping);
  REQUIRE(outer.size() == 1);
  const MatrixXd& b = outer[0];
  CHECK(b.cols() == 5);  // K + 1
  CHECK((b.transpose() * b - MatrixXd::Identity(5, 5)).norm() ==
        Approx(0.0).margin(1e-10));
  // projecting the rows onto the basis must lose nothing
  CHECK((h * b * b.transpose() - h).norm() <= 1e-9 * h.norm());
}

TEST_CASE("mutually orthogonal groups keep their own row spaces exactly") {
  MatrixXd h = MatrixXd::Zero(4, 8);
  h(0, 0) = 1.0;
  h(1, 1) = 2.0;
  h(2, 2) = 1.5;
  h(3, 3) = 0.5;
  const auto grouping = contiguous_grouping(2, 2);
  const auto outer = block_diagonal_precoder(h, grouping);
  CHECK((h.topRows(2) * outer[1]).norm() == Approx(0.0).margin(1e-12));
  CHECK((h.bottomRows(2) * outer[0]).norm() == Approx(0.0).margin(1e-12));
  // each group's own rows survive the projection
  CHECK((h.topRows(2) * outer[0]).norm() > 1.0);
  CHECK((h.bottomRows(2) * outer[1]).norm() > 0.5);
}

TEST_CASE("empty null space falls back to the ridged variant with a flag") {
  // three users on two elements: no group can null the other one exactly
  const MatrixXd h = random_matrix(3, 2, 23);
  std::vector<int> assign = {0, 0, 1};
  const auto grouping = ratesplit::finish_grouping(std::move(assign), 2);
  bool used_ridge = false;
  const auto outer = block_diagonal_precoder(h, grouping, &used_ridge);
  CHECK(used_ridge);
  for (const auto& b : outer) {
    CHECK((b.transpose() * b -
           MatrixXd::Identity(b.cols(), b.cols())).norm() ==
          Approx(0.0).margin(1e-9));
  }
}

TEST_CASE("full hrs precoder set satisfies the published contracts") {
  const MatrixXd h = random_matrix(10, 40, 24);
  const auto grouping = contiguous_grouping(2, 5);
  const auto p = hrs_precoders(h, grouping, CommonStrategy::PrincipalDirection);

  CHECK_FALSE(p.bd_ridge_fallback);
  CHECK(p.outer_common.norm() == Approx(1.0).margin(1e-10));
  REQUIRE(p.inner.size() == 5);
  for (int g = 0; g < 5; ++g) {
    const auto& members = grouping.members[g];
    const MatrixXd eff = [&] {
      MatrixXd rows(members.size(), 40);
      for (std::size_t i = 0; i < members.size(); ++i)
        rows.row(static_cast<Eigen::Index>(i)) = h.row(members[i]);
      return MatrixXd(rows * p.outer[g]);
    }();
    CHECK(p.inner_common[g].norm() == Approx(1.0).margin(1e-10));
    for (Eigen::Index j = 0; j < p.inner[g].cols(); ++j)
      CHECK(p.inner[g].col(j).norm() == Approx(1.0).margin(1e-10));
    const MatrixXd cross = eff * p.inner[g];
    for (Eigen::Index a = 0; a < cross.rows(); ++a)
      for (Eigen::Index b = 0; b < cross.cols(); ++b) {
        if (a == b) continue;
        CHECK(std::abs(cross(a, b)) <=
              1e-9 * h.row(members[static_cast<std::size_t>(a)]).norm());
      }
  }
}

TEST_CASE("singleton groups reduce the inner tier to the projected direction") {
  const MatrixXd h = random_matrix(3, 12, 25);
  const auto grouping = contiguous_grouping(1, 3);
  const auto p = hrs_precoders(h, grouping, CommonStrategy::PrincipalDirection);
  for (int g = 0; g < 3; ++g) {
    const VectorXd eff = (h.row(g) * p.outer[g]).transpose();
    const VectorXd dir = eff.normalized();
    // single private stream and the inner common both align with the user
    CHECK(std::abs(p.inner[g].col(0).dot(dir)) == Approx(1.0).margin(1e-9));
    CHECK(std::abs(p.inner_common[g].dot(dir)) == Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("unserved users receive zero precoding columns") {
  MatrixXd h = random_matrix(4, 10, 26);
  h.row(2).setZero();
  const auto p = rs_precoders(h, CommonStrategy::PrincipalDirection);
  CHECK(p.private_precoders.col(2).norm() == 0.0);
  for (Eigen::Index j : {0, 1, 3})
    CHECK(p.private_precoders.col(j).norm() == Approx(1.0).margin(1e-10));
  // zero-forcing still holds among the served users
  const MatrixXd hw = h * p.private_precoders;
  for (Eigen::Index k : {0, 1, 3})
    for (Eigen::Index j : {0, 1, 3})
      if (j != k) CHECK(std::abs(hw(k, j)) <= 1e-9 * h.row(k).norm());

  MatrixXd all_zero = MatrixXd::Zero(3, 10);
  CHECK_THROWS_AS(rs_precoders(all_zero, CommonStrategy::PrincipalDirection),
                  ValidationError);
}
