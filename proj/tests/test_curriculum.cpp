#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "spinequad/curriculum.hpp"

using namespace spinequad;

TEST_CASE("ramp_command applies the per-step acceleration clamp") {
  CHECK(ramp_command(0.0, 5.0, 2.0, 0.02) == Catch::Approx(0.04).margin(1e-15));
  CHECK(ramp_command(1.0, 1.0, 2.0, 0.02) == 1.0);
  // Within one step of the target: lands exactly on it, no overshoot.
  CHECK(ramp_command(0.99, 1.0, 2.0, 0.02) == 1.0);
  CHECK(ramp_command(1.01, 1.0, 2.0, 0.02) == 1.0);
  CHECK(ramp_command(5.0, 0.0, 2.0, 0.02) == Catch::Approx(4.96).margin(1e-15));
}

TEST_CASE("ramp_command rejects non-positive a_max and dt") {
  CHECK_THROWS_AS(ramp_command(0, 1, 0.0, 0.02), ArgumentError);
  CHECK_THROWS_AS(ramp_command(0, 1, -1.0, 0.02), ArgumentError);
  CHECK_THROWS_AS(ramp_command(0, 1, 2.0, 0.0), ArgumentError);
  CHECK_THROWS_AS(ramp_command(0, 1, 2.0, -0.1), ArgumentError);
}

TEST_CASE("ramp fuzz: step size never exceeds a_max*dt over 1e5 steps") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> tgt(-8.0, 8.0);
  std::uniform_real_distribution<double> acc(0.1, 10.0);
  std::uniform_real_distribution<double> step(1e-3, 0.05);
  double v = 0.0;
  double target = tgt(rng);
  for (int i = 0; i < 100000; ++i) {
    if (i % 50 == 0) target = tgt(rng);
    const double a = acc(rng);
    const double dt = step(rng);
    const double next = ramp_command(v, target, a, dt);
    CHECK(std::abs(next - v) <= a * dt);
    v = next;
  }
}

TEST_CASE("ramp converges within the step bound and then stays fixed") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int k = 0; k < 100; ++k) {
    double v = u(rng);
    const double target = u(rng);
    const double a = 2.0, dt = 0.02;
    const int bound =
        static_cast<int>(std::ceil(std::abs(target - v) / (a * dt)));
    int steps = 0;
    while (v != target && steps <= bound + 1) {
      v = ramp_command(v, target, a, dt);
      ++steps;
    }
    CHECK(v == target);
    CHECK(steps <= bound);
    CHECK(ramp_command(v, target, a, dt) == target);
  }
}

TEST_CASE("update_curriculum applies thresholds independently") {
  CurriculumState c;
  SECTION("linear advances, angular holds") {
    const CurriculumState next = update_curriculum(c, 0.85, 0.3);
    CHECK(next.linear_fraction == Catch::Approx(0.2).margin(1e-15));
    CHECK(next.angular_fraction == 0.1);
  }
  SECTION("cap at 1.0") {
    c.linear_fraction = 1.0;
    const CurriculumState next = update_curriculum(c, 0.99, 0.99);
    CHECK(next.linear_fraction == 1.0);
  }
  SECTION("below threshold leaves the fraction unchanged") {
    c.linear_fraction = 0.5;
    const CurriculumState next = update_curriculum(c, 0.75, 0.0);
    CHECK(next.linear_fraction == 0.5);
  }
  SECTION("angular threshold is the looser 0.6") {
    const CurriculumState next = update_curriculum(c, 0.0, 0.65);
    CHECK(next.angular_fraction == Catch::Approx(0.2).margin(1e-15));
    CHECK(next.linear_fraction == 0.1);
  }
}

TEST_CASE("update_curriculum rejects metrics outside [0,1]") {
  CurriculumState c;
  CHECK_THROWS_AS(update_curriculum(c, -0.1, 0.5), ArgumentError);
  CHECK_THROWS_AS(update_curriculum(c, 0.5, 1.2), ArgumentError);
  CHECK_THROWS_AS(update_curriculum(c, std::nan(""), 0.5), ArgumentError);
}

TEST_CASE("fractions are non-decreasing and reach exactly 1.0 in 9 bumps") {
  CurriculumState c;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double prev_lin = c.linear_fraction, prev_ang = c.angular_fraction;
  for (int i = 0; i < 500; ++i) {
    c = update_curriculum(c, u(rng), u(rng));
    CHECK(c.linear_fraction >= prev_lin);
    CHECK(c.angular_fraction >= prev_ang);
    CHECK(c.linear_fraction <= 1.0);
    CHECK(c.angular_fraction <= 1.0);
    prev_lin = c.linear_fraction;
    prev_ang = c.angular_fraction;
  }

  CurriculumState d;
  for (int i = 0; i < 9; ++i) d = update_curriculum(d, 0.95, 0.95);
  CHECK(d.linear_fraction == 1.0);  // exact, not just approximately
  CHECK(d.angular_fraction == 1.0);
}

TEST_CASE("sample_command draws from the fraction-scaled ranges") {
  CurriculumState c;  // fractions 0.1, full linear [0, 7]
  std::mt19937_64 rng(123);
  for (int i = 0; i < 500; ++i) {
    const Command cmd = sample_command(c, rng, TaskKind::kLocomotion);
    CHECK(cmd.vx_target >= 0.0);
    CHECK(cmd.vx_target <= 0.7);
    CHECK(cmd.wz_target >= -0.8);
    CHECK(cmd.wz_target <= 0.8);
    CHECK(cmd.a_max_linear >= c.a_max_linear_min);
    CHECK(cmd.a_max_linear <= c.a_max_linear_max);
    CHECK(cmd.vy_target == 0.0);
  }
}

TEST_CASE("sample_command is deterministic under a fixed seed") {
  CurriculumState c;
  std::mt19937_64 a(77), b(77);
  for (int i = 0; i < 50; ++i) {
    const Command ca = sample_command(c, a, TaskKind::kTurning, 1.0);
    const Command cb = sample_command(c, b, TaskKind::kTurning, 1.0);
    CHECK(ca.vx_target == cb.vx_target);
    CHECK(ca.wz_target == cb.wz_target);
    CHECK(ca.a_max_linear == cb.a_max_linear);
    CHECK(ca.a_max_angular == cb.a_max_angular);
    CHECK(ca.wz_activation_time == cb.wz_activation_time);
  }
}

TEST_CASE("turning task holds wz at zero until the sampled delay elapses") {
  CurriculumState c;
  std::mt19937_64 rng(31);
  Command cmd = sample_command(c, rng, TaskKind::kTurning, /*episode_start=*/0.0);
  CHECK(cmd.wz_activation_time >= c.turn_delay_min);
  CHECK(cmd.wz_activation_time <= c.turn_delay_max);
  cmd.wz_target = 0.5;  // force a visible ramp
  const double dt = 0.02;
  double t = 0.0;
  bool saw_hold = false, saw_ramp = false;
  for (int i = 0; i < 200; ++i) {
    step_command(cmd, t, dt);
    if (t < cmd.wz_activation_time) {
      CHECK(cmd.wz == 0.0);
      saw_hold = true;
    }
    if (t >= cmd.wz_activation_time + 0.1) {
      CHECK(cmd.wz > 0.0);
      saw_ramp = true;
    }
    t += dt;
  }
  CHECK(saw_hold);
  CHECK(saw_ramp);
}

TEST_CASE("locomotion task ramps wz immediately") {
  Command cmd;
  cmd.wz_target = 1.0;
  cmd.a_max_angular = 5.0;
  step_command(cmd, 0.0, 0.02);
  CHECK(cmd.wz == Catch::Approx(0.1).margin(1e-15));
}

TEST_CASE("merge_curricula takes the element-wise max fraction") {
  CurriculumState a, b;
  a.linear_fraction = 0.4;
  b.linear_fraction = 0.2;
  a.angular_fraction = 0.1;
  b.angular_fraction = 0.3;
  const CurriculumState m = merge_curricula(a, b);
  CHECK(m.linear_fraction == 0.4);
  CHECK(m.angular_fraction == 0.3);
}
