#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "labelnoise/experiment.hpp"
#include "labelnoise/loss.hpp"
#include "support.hpp"

using labelnoise::ConfusionMatrix;
using labelnoise::ErrorKind;
using labelnoise::Orientation;
using labelnoise::UniformRng;
using Catch::Matchers::WithinAbs;

TEST_CASE("correct_loss_multiclass with the identity is a no-op") {
  const ConfusionMatrix identity = labelnoise::build_validated(
      Eigen::MatrixXd::Identity(3, 3), Orientation::Forward);
  const std::vector<double> losses = {0.5, -1.0, 2.0};
  const std::vector<double> corrected =
      labelnoise::correct_loss_multiclass(losses, identity);
  for (int i = 0; i < 3; ++i) {
    CHECK_THAT(corrected[i], WithinAbs(losses[i], 1e-14));
  }
}

TEST_CASE("binary closed form follows the flip rates") {
  // kappa_plus = Pr(weak=-1 | y=+1), kappa_minus = Pr(weak=+1 | y=-1).
  const auto [pos, neg] = labelnoise::correct_loss_binary(0.0, 1.0, 0.3, 0.1);
  CHECK_THAT(pos, WithinAbs(-0.5, 1e-15));
  CHECK_THAT(neg, WithinAbs(7.0 / 6.0, 1e-15));
}

TEST_CASE("binary rates summing to one are singular") {
  CHECK(testsupport::thrown_kind(
            [] { labelnoise::correct_loss_binary(1.0, 0.0, 0.6, 0.4); }) ==
        ErrorKind::Singular);
}

TEST_CASE("noise-free binary correction is a no-op") {
  const auto [pos, neg] = labelnoise::correct_loss_binary(0.7, 0.2, 0.0, 0.0);
  CHECK_THAT(pos, WithinAbs(0.7, 0.0));
  CHECK_THAT(neg, WithinAbs(0.2, 0.0));
}

TEST_CASE("binary and multiclass paths agree across the kappa grid") {
  UniformRng rng(1001);
  for (double kp = 0.0; kp <= 1.0; kp += 0.1) {
    for (double km = 0.0; km <= 1.0; km += 0.1) {
      if (std::abs(1.0 - kp - km) < 1e-6) continue;
      const double lp = rng.next() * 20.0 - 10.0;
      const double ln = rng.next() * 20.0 - 10.0;
      const auto [pos, neg] = labelnoise::correct_loss_binary(lp, ln, kp, km);
      const ConfusionMatrix fwd = labelnoise::binary_from_kappas(kp, km);
      const std::vector<double> multi =
          labelnoise::correct_loss_multiclass({lp, ln}, fwd);
      REQUIRE_THAT(multi[0], WithinAbs(pos, 1e-12));
      REQUIRE_THAT(multi[1], WithinAbs(neg, 1e-12));
    }
  }
}

TEST_CASE("the decoupled class of the GPS matrix keeps a zero loss") {
  const ConfusionMatrix fwd = labelnoise::build_validated(
      testsupport::table_forward(), Orientation::Forward);
  const std::vector<double> corrected =
      labelnoise::correct_loss_multiclass({1.0, 0.0, 0.0}, fwd);
  CHECK_THAT(corrected[2], WithinAbs(0.0, 1e-14));
  // Block structure: the 2x2 inverse applies to the first two classes.
  CHECK_THAT(corrected[0], WithinAbs(1.5, 1e-12));
  CHECK_THAT(corrected[1], WithinAbs(-0.28 / 0.48, 1e-12));
}

TEST_CASE("flipped regime (kappa sum above one) stays finite and unbiased") {
  const ConfusionMatrix fwd = labelnoise::binary_from_kappas(0.7, 0.6);
  const std::vector<double> losses = {1.0, -2.0};
  const std::vector<double> corrected =
      labelnoise::correct_loss_multiclass(losses, fwd);
  for (double v : corrected) CHECK(std::isfinite(v));
  for (std::size_t y = 0; y < 2; ++y) {
    CHECK_THAT(labelnoise::expected_weak_loss(corrected, fwd, y),
               WithinAbs(losses[y], 1e-10));
  }
}

TEST_CASE("expected_weak_loss with the identity picks the true entry") {
  const ConfusionMatrix identity = labelnoise::build_validated(
      Eigen::MatrixXd::Identity(3, 3), Orientation::Forward);
  const std::vector<double> corrected = {0.1, 0.2, 0.3};
  for (std::size_t y = 0; y < 3; ++y) {
    CHECK_THAT(labelnoise::expected_weak_loss(corrected, identity, y),
               WithinAbs(corrected[y], 0.0));
  }
}

TEST_CASE("unbiasedness on the equal-diagonal example") {
  const ConfusionMatrix fwd = labelnoise::equal_diag_matrix(3, 0.8);
  const std::vector<double> corrected =
      labelnoise::correct_loss_multiclass({1.0, 2.0, 3.0}, fwd);
  CHECK_THAT(labelnoise::expected_weak_loss(corrected, fwd, 2),
             WithinAbs(3.0, 1e-10));
}

TEST_CASE("unbiasedness holds for random losses and matrices") {
  UniformRng rng(8080);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 3;
    const ConfusionMatrix fwd = testsupport::random_forward(rng, k);
    std::vector<double> losses(k);
    for (double& l : losses) l = rng.next() * 20.0 - 10.0;
    const std::vector<double> corrected =
        labelnoise::correct_loss_multiclass(losses, fwd);
    for (std::size_t y = 0; y < k; ++y) {
      REQUIRE_THAT(labelnoise::expected_weak_loss(corrected, fwd, y),
                   WithinAbs(losses[y], 1e-8));
    }
  }
}

TEST_CASE("corrected magnitudes diverge as the kappa sum approaches one") {
  // Near the singular line the correction blows up like 1/|1 - k+ - k-|;
  // the log-log slope against the gap is -1.
  std::vector<std::pair<double, double>> points;
  for (double gap : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const auto [pos, neg] =
        labelnoise::correct_loss_binary(0.0, 1.0, 0.5, 0.5 - gap);
    points.emplace_back(gap, std::max(std::abs(pos), std::abs(neg)));
  }
  const double slope = labelnoise::fit_loglog_slope(points);
  CHECK_THAT(slope, WithinAbs(-1.0, 0.05));
}

TEST_CASE("loss ops reject misuse") {
  const ConfusionMatrix backward = labelnoise::build_validated(
      Eigen::MatrixXd::Identity(3, 3), Orientation::Backward);
  CHECK(testsupport::thrown_kind([&] {
          labelnoise::correct_loss_multiclass({1.0, 2.0, 3.0}, backward);
        }) == ErrorKind::WrongOrientation);

  const ConfusionMatrix fwd = labelnoise::build_validated(
      Eigen::MatrixXd::Identity(3, 3), Orientation::Forward);
  CHECK(testsupport::thrown_kind(
            [&] { labelnoise::correct_loss_multiclass({1.0}, fwd); }) ==
        ErrorKind::DimensionMismatch);
  CHECK(testsupport::thrown_kind(
            [&] { labelnoise::expected_weak_loss({1.0, 2.0, 3.0}, fwd, 5); }) ==
        ErrorKind::DimensionMismatch);
}
