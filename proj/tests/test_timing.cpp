#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "chainbell/timing.hpp"

using namespace chainbell;

namespace {
constexpr double c = kSpeedOfLight;
}

TEST(BoostedTime, IdentityAndOnAxis) {
  const SpacetimeEvent e{3.5, 1234.0};
  EXPECT_EQ(boosted_time(e, FrameVelocity{0.0}), 3.5);
  const FrameVelocity f{0.6};
  EXPECT_DOUBLE_EQ(boosted_time({2.0, 0.0}, f), 2.0 * f.gamma());
}

TEST(BoostedTime, OffAxisEvent) {
  // t' = gamma (0 - 0.5 * 1 s) with gamma = 1/sqrt(0.75)
  EXPECT_NEAR(boosted_time({0.0, c * 1.0}, FrameVelocity{0.5}), -0.5773502691896258, 1e-12);
}

TEST(BoostedTime, RejectsLuminalFrames) {
  EXPECT_THROW(FrameVelocity{1.0}, InputError);
  EXPECT_THROW(FrameVelocity{-1.2}, InputError);
  EXPECT_THROW(boosted_time({0, 0}, FrameVelocity{0.1}, 0.0), InputError);
}

TEST(BoostedTime, InverseBoostRestoresEvent) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> beta(-0.99, 0.99), t(-1e-3, 1e-3), x(-1e5, 1e5);
  for (int k = 0; k < 1000; ++k) {
    const SpacetimeEvent e{t(rng), x(rng)};
    const double b = beta(rng);
    const auto back = boost(boost(e, FrameVelocity{b}), FrameVelocity{-b});
    EXPECT_NEAR(back.t, e.t, 1e-12);
    EXPECT_NEAR(back.x, e.x, 1e-12 * std::max(1.0, std::abs(e.x)) * 1e3);
  }
}

TEST(IsSpacelike, Cases) {
  EXPECT_TRUE(is_spacelike({0, 0}, {0, 10}));
  EXPECT_FALSE(is_spacelike({0, 0}, {1e-6, 0}));
  EXPECT_TRUE(is_spacelike({0, 0}, {1.0, 2 * c}));
  EXPECT_FALSE(is_spacelike({0, 0}, {1.0, c}));  // lightlike
}

TEST(BeforeBefore, RecedingAnalyzersEachFirst) {
  // x_A < x_B, simultaneous in the lab. A frame moving in -x sees A first.
  const auto r = before_before_holds({0, 0}, {0, 30}, FrameVelocity{-0.5}, FrameVelocity{0.5});
  EXPECT_TRUE(r.holds);
  EXPECT_TRUE(r.spacelike);
  EXPECT_LT(r.a_frame_t_a, r.a_frame_t_b);
  EXPECT_LT(r.b_frame_t_b, r.b_frame_t_a);
}

TEST(BeforeBefore, ApproachingAnalyzersEachSeeTheOtherFirst) {
  const auto r = before_before_holds({0, 0}, {0, 30}, FrameVelocity{0.5}, FrameVelocity{-0.5});
  EXPECT_FALSE(r.holds);
  EXPECT_FALSE(r.a_first_in_a_frame);
  EXPECT_FALSE(r.b_first_in_b_frame);
  EXPECT_EQ(r.reason, "neither analyzer first in its own frame");
}

TEST(BeforeBefore, RestingAnalyzersHaveNoStrictOrder) {
  const auto r = before_before_holds({0, 0}, {0, 30}, FrameVelocity{0.0}, FrameVelocity{0.0});
  EXPECT_FALSE(r.holds);
}

TEST(BeforeBefore, TimelikePairNeverHolds) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> beta(-0.999, 0.999);
  const SpacetimeEvent a{0, 0}, b{1e-6, 100};  // c * 1 us = 300 m > 100 m
  for (int k = 0; k < 1000; ++k) {
    const FrameVelocity fa{beta(rng)}, fb{beta(rng)};
    const auto r = before_before_holds(a, b, fa, fb);
    EXPECT_FALSE(r.holds);
    EXPECT_EQ(r.reason, "invariant order");
    EXPECT_LT(boosted_time(a, fa), boosted_time(b, fa));  // order is frame independent
  }
}

TEST(BeforeBefore, SpacelikePairsAlwaysAdmitAConfiguration) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> dt(-1e-7, 1e-7), dx(50.0, 500.0), margin(1e-3, 0.5);
  for (int k = 0; k < 1000; ++k) {
    const SpacetimeEvent a{dt(rng), 0.0};
    const SpacetimeEvent b{dt(rng), dx(rng)};
    if (!is_spacelike(a, b)) continue;
    const auto ta = min_speed_for_priority(a.t - b.t, b.x - a.x);
    const auto tb = min_speed_for_priority(b.t - a.t, a.x - b.x);
    const double sa = ta.min_speed + margin(rng) * (1 - ta.min_speed);
    const double sb = tb.min_speed + margin(rng) * (1 - tb.min_speed);
    const auto r = before_before_holds(a, b, FrameVelocity{ta.direction * sa}, FrameVelocity{tb.direction * sb});
    EXPECT_TRUE(r.holds) << k;
  }
}

TEST(MinSpeedForPriority, Values) {
  EXPECT_EQ(min_speed_for_priority(0.0, 10.0).min_speed, 0.0);
  EXPECT_EQ(min_speed_for_priority(0.0, 10.0).direction, -1);
  const auto t = min_speed_for_priority(0.3 * 10.0 / c, 10.0);
  EXPECT_NEAR(t.min_speed, 0.3, 1e-12);
  // Boundary: the local event becomes first just past the threshold.
  const SpacetimeEvent local{0.3 * 10.0 / c, 0.0}, remote{0.0, 10.0};
  EXPECT_FALSE(boosted_time(local, FrameVelocity{-0.29}) < boosted_time(remote, FrameVelocity{-0.29}));
  EXPECT_TRUE(boosted_time(local, FrameVelocity{-0.31}) < boosted_time(remote, FrameVelocity{-0.31}));
  EXPECT_GT(min_speed_for_priority(0.999999 * 10.0 / c, 10.0).min_speed, 0.99999);
  EXPECT_THROW(min_speed_for_priority(10.0 / c, 10.0), InputError);
  EXPECT_THROW(min_speed_for_priority(1.0, 10.0), InputError);
}
