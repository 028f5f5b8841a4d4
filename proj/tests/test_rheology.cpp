#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "icevp/random.hpp"
#include "icevp/rheology.hpp"
#include "icevp/sampling.hpp"

using namespace icevp;

namespace {
RheologyParams with_mode(DeltaMode mode, double eps) {
  return RheologyParams::make(2.0, 2e-9, 2e-4, eps, mode);
}
}  // namespace

TEST_CASE("tensor algebra") {
  const SymTensor2 a{1.0, 2.0, 3.0};
  const SymTensor2 b{4.0, 5.0, 6.0};
  CHECK(ddot(a, b) == 42.0);  // off-diagonal counted twice: 4 + 20 + 18
  CHECK(norm(SymTensor2{3.0, 0.0, 4.0}) == 5.0);
  CHECK(trace(a) == 4.0);

  const SymTensor2 d = deviator(a);
  CHECK(trace(d) == 0.0);
  CHECK(d.xx == -1.0);
  CHECK(d.xy == 2.0);
  CHECK(deviator(SymTensor2::identity()).xx == 0.0);
  CHECK((a + b).yy == 9.0);
  CHECK((a - b).xx == -3.0);
  CHECK((2.0 * a).xy == 4.0);
  CHECK(SymTensor2{}.is_zero());
}

TEST_CASE("d_lambda and delta_p hand values") {
  const RheologyParams p = with_mode(DeltaMode::CutoffBoth, 0.0);
  REQUIRE(p.lambda == 0.5);

  // z = [[2,1],[1,0]]: tr = 2, dev = [[1,1],[1,-1]].
  const SymTensor2 z{2.0, 1.0, 0.0};
  const SymTensor2 D = d_lambda(z, p);
  CHECK(D.xx == 2.5);
  CHECK(D.xy == 0.5);
  CHECK(D.yy == 1.5);

  // delta_p^2 = lambda |dev|^2 + tr^2 = 0.5 * 4 + 4 = 6 and equals D : z.
  CHECK(delta_p(z, p) == doctest::Approx(std::sqrt(6.0)).epsilon(1e-15));
  CHECK(ddot(D, z) == doctest::Approx(6.0).epsilon(1e-15));
}

TEST_CASE("delta_p bounds and the D:z identity at random") {
  const RheologyParams p = with_mode(DeltaMode::CutoffBoth, 0.0);
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const SymTensor2 z = random_sym_any_band(rng, p);
    const double dp = delta_p(z, p);
    const double nz = norm(z);
    CHECK(dp >= std::sqrt(p.lambda) * nz * (1.0 - 1e-14));
    CHECK(dp <= std::sqrt(2.0) * nz * (1.0 + 1e-14));
    CHECK(ddot(d_lambda(z, p), z) ==
          doctest::Approx(dp * dp).epsilon(1e-13));
  }
}

TEST_CASE("delta_from_dp branch table") {
  const double lo = 2e-9, hi = 2e-4;
  SUBCASE("cutoff clamps both ends") {
    const RheologyParams p = with_mode(DeltaMode::CutoffBoth, 0.0);
    CHECK(delta_from_dp(1e-12, p) == lo);
    CHECK(delta_from_dp(1e-6, p) == 1e-6);
    CHECK(delta_from_dp(1.0, p) == hi);
    CHECK(delta_from_dp(lo, p) == lo);
    CHECK(delta_from_dp(hi, p) == hi);
  }
  SUBCASE("plastic is the identity") {
    const RheologyParams p = with_mode(DeltaMode::Plastic, 0.0);
    CHECK(delta_from_dp(0.0, p) == 0.0);
    CHECK(delta_from_dp(3.5, p) == 3.5);
  }
  SUBCASE("eps floor without upper bound") {
    const RheologyParams p = with_mode(DeltaMode::EpsOnly, 1e-8);
    CHECK(delta_from_dp(0.0, p) == std::sqrt(1e-8));
    CHECK(delta_from_dp(1.0, p) == std::sqrt(1e-8 + 1.0));
  }
  SUBCASE("eps floor capped at delta_hi") {
    const RheologyParams p = with_mode(DeltaMode::EpsUpper, 1e-10);
    CHECK(delta_from_dp(0.0, p) == std::sqrt(1e-10));
    CHECK(delta_from_dp(1.0, p) == hi);
  }
  SUBCASE("comparison variant floors at delta_hi instead") {
    const RheologyParams p = with_mode(DeltaMode::EpsUpperMax, 1e-10);
    CHECK(delta_from_dp(0.0, p) == hi);
    CHECK(delta_from_dp(1.0, p) == std::sqrt(1e-10 + 1.0));
  }
  SUBCASE("eps with both clamps") {
    const RheologyParams p = with_mode(DeltaMode::EpsBoth, 1e-20);
    CHECK(delta_from_dp(0.0, p) == lo);  // 1e-10 clamped up
    CHECK(delta_from_dp(1e-6, p) == std::sqrt(1e-20 + 1e-6 * 1e-6));
    CHECK(delta_from_dp(1.0, p) == hi);
  }
}

TEST_CASE("stress at the rest state is one-sided") {
  const RheologyParams p = with_mode(DeltaMode::CutoffBoth, 0.0);
  const double P = 2.0;

  // Pure dilation inside the band: dev z = 0, tr z = 2e-6 > 0 -> sigma = 0.
  const SymTensor2 expand{1e-6, 0.0, 1e-6};
  const SymTensor2 s_pos = sigma(P, expand, p);
  CHECK(s_pos.xx == 0.0);
  CHECK(s_pos.xy == 0.0);
  CHECK(s_pos.yy == 0.0);

  // Pure compression: sigma = -P Id, not zero.
  const SymTensor2 s_neg = sigma(P, SymTensor2{-1e-6, 0.0, -1e-6}, p);
  CHECK(s_neg.xx == -2.0);
  CHECK(s_neg.xy == 0.0);
  CHECK(s_neg.yy == -2.0);
}

TEST_CASE("sigma degenerate points") {
  CHECK(sigma(3.0, SymTensor2{}, with_mode(DeltaMode::Plastic, 0.0)).is_zero());
  CHECK_THROWS_AS(sigma(3.0, SymTensor2{}, with_mode(DeltaMode::EpsOnly, 0.0)),
                  std::domain_error);
  CHECK_THROWS_AS(
      yield_residual(3.0, SymTensor2{}, with_mode(DeltaMode::Plastic, 0.0)),
      std::domain_error);
  CHECK_THROWS_AS(sigma(-1.0, SymTensor2::identity(),
                        with_mode(DeltaMode::CutoffBoth, 0.0)),
                  ConfigError);
}

TEST_CASE("yield residual vanishes relative to (P^2/4) max(1, ratio^2)") {
  Rng rng(5);
  for (DeltaMode mode : {DeltaMode::CutoffBoth, DeltaMode::Plastic,
                         DeltaMode::EpsOnly, DeltaMode::EpsUpper,
                         DeltaMode::EpsUpperMax, DeltaMode::EpsBoth}) {
    const double eps =
        (mode == DeltaMode::CutoffBoth || mode == DeltaMode::Plastic) ? 0.0
                                                                      : 1e-8;
    const RheologyParams p = with_mode(mode, eps);
    for (int i = 0; i < 3000; ++i) {
      const SymTensor2 z = random_sym_any_band(rng, p);
      const double P = rng.log_uniform(1e-2, 1e4);
      const double ratio = delta_p(z, p) / delta_reg(z, p);
      const double scale = 0.25 * P * P * std::max(1.0, ratio * ratio);
      CHECK(std::abs(yield_residual(P, z, p)) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("scalar profile is nondecreasing in every mode") {
  Rng rng(17);
  for (DeltaMode mode : {DeltaMode::CutoffBoth, DeltaMode::Plastic,
                         DeltaMode::EpsOnly, DeltaMode::EpsUpper,
                         DeltaMode::EpsUpperMax, DeltaMode::EpsBoth}) {
    const double eps =
        (mode == DeltaMode::CutoffBoth || mode == DeltaMode::Plastic) ? 0.0
                                                                      : 1e-8;
    const RheologyParams p = with_mode(mode, eps);
    std::vector<double> xs;
    for (int i = 0; i < 500; ++i) xs.push_back(rng.log_uniform(1e-13, 1.0));
    std::sort(xs.begin(), xs.end());
    double prev = 0.0;
    for (double x : xs) {
      const double f = scalar_profile(x, p);
      CHECK(f >= prev * (1.0 - 1e-14));
      prev = f;
    }
  }
  CHECK(scalar_profile(0.0, with_mode(DeltaMode::Plastic, 0.0)) == 1.0);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(RheologyParams::make(0.0, 2e-9, 2e-4, 0.0,
                                       DeltaMode::CutoffBoth)
                      .validate(),
                  ConfigError);
  CHECK_THROWS_AS(
      RheologyParams::make(2.0, 0.0, 2e-4, 0.0, DeltaMode::CutoffBoth)
          .validate(),
      ConfigError);
  CHECK_THROWS_AS(
      RheologyParams::make(2.0, 2e-4, 2e-9, 0.0, DeltaMode::CutoffBoth)
          .validate(),
      ConfigError);
  CHECK_THROWS_AS(
      RheologyParams::make(2.0, 2e-9, 2e-4, -1.0, DeltaMode::EpsOnly)
          .validate(),
      ConfigError);
  CHECK_THROWS_AS(
      RheologyParams::make(2.0, 2e-9, 2e-4, 1e-8, DeltaMode::CutoffBoth)
          .validate(),
      ConfigError);

  RheologyParams p = with_mode(DeltaMode::CutoffBoth, 0.0);
  p.lambda = 0.51;  // out of sync with e_bar
  CHECK_THROWS_AS(p.validate(), ConfigError);

  // make() derives lambda = 2 / e_bar^2 exactly.
  CHECK(RheologyParams::make(2.0, 2e-9, 2e-4, 0.0, DeltaMode::CutoffBoth)
            .lambda == 0.5);
}

TEST_CASE("mode names round trip") {
  for (DeltaMode mode : {DeltaMode::CutoffBoth, DeltaMode::Plastic,
                         DeltaMode::EpsOnly, DeltaMode::EpsUpper,
                         DeltaMode::EpsUpperMax, DeltaMode::EpsBoth})
    CHECK(delta_mode_from_string(to_string(mode)) == mode);
  CHECK_THROWS_AS(delta_mode_from_string("viscous"), ConfigError);
}

TEST_CASE("band samplers land where asked") {
  const RheologyParams p = with_mode(DeltaMode::CutoffBoth, 0.0);
  Rng rng(23);
  for (int i = 0; i < 500; ++i) {
    const double dp_below = delta_p(random_sym_in_band(rng, p, DeltaBand::Below), p);
    CHECK(dp_below <= p.delta_lo * (1.0 + 1e-12));
    CHECK(dp_below >= 1e-3 * p.delta_lo * (1.0 - 1e-12));
    const double dp_in = delta_p(random_sym_in_band(rng, p, DeltaBand::Inside), p);
    CHECK(dp_in >= p.delta_lo * (1.0 - 1e-12));
    CHECK(dp_in <= p.delta_hi * (1.0 + 1e-12));
    const double dp_above = delta_p(random_sym_in_band(rng, p, DeltaBand::Above), p);
    CHECK(dp_above >= p.delta_hi * (1.0 - 1e-12));
  }
}
