#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "smcsim/kinematics.hpp"
#include "smcsim/trajectory.hpp"
#include "support.hpp"

using namespace smcsim;

namespace {

JointVector vec(std::initializer_list<double> values) {
  JointVector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace

TEST_SUITE("trajectory") {
  TEST_CASE("constant segment") {
    const JointVector q = vec({0.3, -0.1});
    const JointTrajectory t = quintic_segment(q, q, 1.0, 0.01);
    CHECK(t.samples.size() == 101);
    for (const auto& s : t.samples) {
      CHECK(s.position == q);
      CHECK(s.velocity.isZero(0.0));
      CHECK(s.acceleration.isZero(0.0));
    }
  }

  TEST_CASE("quintic midpoint and boundaries") {
    const JointTrajectory t = quintic_segment(vec({0.0}), vec({1.0}), 2.0, 1e-3);
    REQUIRE(t.samples.size() == 2001);
    CHECK(t.samples[1000].t == doctest::Approx(1.0));
    CHECK(t.samples[1000].position[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(t.samples.front().position[0] == 0.0);
    CHECK(t.samples.back().position[0] == doctest::Approx(1.0).epsilon(1e-14));
    for (const auto* s : {&t.samples.front(), &t.samples.back()}) {
      CHECK(std::abs(s->velocity[0]) < 1e-12);
      CHECK(std::abs(s->acceleration[0]) < 1e-12);
    }
    // 10 u^3 - 15 u^4 + 6 u^5 peaks at 15/8 of the mean speed.
    double peak = 0.0;
    for (const auto& s : t.samples) peak = std::max(peak, s.velocity[0]);
    CHECK(peak == doctest::Approx(15.0 / 16.0));
  }

  TEST_CASE("nonic blend boundaries") {
    for (double u : {0.0, 1.0}) {
      const BlendValue b = evaluate_blend(BlendProfile::nonic, u);
      CHECK(b.s == doctest::Approx(u));
      CHECK(std::abs(b.ds) < 1e-12);
      CHECK(std::abs(b.d2s) < 1e-12);
      CHECK(std::abs(b.d3s) < 1e-12);
      CHECK(std::abs(b.d4s) < 1e-12);
    }
    CHECK(evaluate_blend(BlendProfile::nonic, 0.5).s == doctest::Approx(0.5));
    CHECK(parse_blend_profile("nonic") == BlendProfile::nonic);
    CHECK(parse_blend_profile(to_string(BlendProfile::quintic)) == BlendProfile::quintic);
    CHECK_THROWS_AS(parse_blend_profile("cubic"), TrajectoryError);
  }

  TEST_CASE("blend derivatives match finite differences") {
    for (auto profile : {BlendProfile::quintic, BlendProfile::nonic}) {
      const double h = 1e-5;
      for (double u : {0.1, 0.37, 0.5, 0.81}) {
        const BlendValue a = evaluate_blend(profile, u - h), b = evaluate_blend(profile, u + h);
        const BlendValue c = evaluate_blend(profile, u);
        CHECK((b.s - a.s) / (2 * h) == doctest::Approx(c.ds).epsilon(1e-8));
        CHECK((b.ds - a.ds) / (2 * h) == doctest::Approx(c.d2s).epsilon(1e-8));
        CHECK((b.d2s - a.d2s) / (2 * h) == doctest::Approx(c.d3s).epsilon(1e-7));
        CHECK((b.d3s - a.d3s) / (2 * h) == doctest::Approx(c.d4s).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("segment errors") {
    const JointVector a = vec({0.0}), b = vec({1.0});
    CHECK_THROWS_AS(quintic_segment(a, b, 0.0, 1e-3), TrajectoryError);
    CHECK_THROWS_AS(quintic_segment(a, b, -1.0, 1e-3), TrajectoryError);
    CHECK_THROWS_AS(quintic_segment(a, b, 1.0, 0.0), TrajectoryError);
    CHECK_THROWS_AS(quintic_segment(a, b, 1.0, 2.0), TrajectoryError);
    CHECK_THROWS_AS(quintic_segment(a, b, 1.0, 0.3), TrajectoryError);
    CHECK_THROWS_AS(quintic_segment(a, vec({1.0, 2.0}), 1.0, 0.1), TrajectoryError);
  }

  TEST_CASE("two waypoints equal one segment") {
    const JointVector a = vec({0.1, -0.2, 0.3}), b = vec({0.4, 0.0, -0.1});
    const JointTrajectory w = waypoint_trajectory({a, b}, {1.5}, 1e-3);
    const JointTrajectory q = quintic_segment(a, b, 1.5, 1e-3);
    REQUIRE(w.samples.size() == q.samples.size());
    for (std::size_t k = 0; k < w.samples.size(); ++k) {
      CHECK(w.samples[k].t == q.samples[k].t);
      CHECK(w.samples[k].position == q.samples[k].position);
      CHECK(w.samples[k].velocity == q.samples[k].velocity);
    }
  }

  TEST_CASE("waypoint loop closure and junction continuity") {
    const JointVector a = vec({0.0, 0.5}), b = vec({1.0, -0.5});
    for (auto profile : {BlendProfile::quintic, BlendProfile::nonic}) {
      const JointTrajectory t = waypoint_trajectory({a, b, a}, {1.0, 2.0}, 1e-3, profile);
      REQUIRE(t.samples.size() == 3001);
      CHECK((t.samples.back().position - a).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(t.end_time() == doctest::Approx(3.0));
      const auto& j = t.samples[1000];
      CHECK((j.position - b).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(j.velocity.cwiseAbs().maxCoeff() < 1e-12);
      CHECK(j.acceleration.cwiseAbs().maxCoeff() < 1e-12);
      for (std::size_t k = 1; k < t.samples.size(); ++k)
        CHECK(t.samples[k].t > t.samples[k - 1].t);
    }
  }

  TEST_CASE("waypoint errors") {
    const JointVector a = vec({0.0}), b = vec({1.0});
    CHECK_THROWS_AS(waypoint_trajectory({a}, {}, 1e-3), TrajectoryError);
    CHECK_THROWS_AS(waypoint_trajectory({a, b}, {1.0, 1.0}, 1e-3), TrajectoryError);
    CHECK_THROWS_AS(waypoint_trajectory({a, vec({1.0, 2.0})}, {1.0}, 1e-3), TrajectoryError);
    CHECK_THROWS_AS(waypoint_trajectory({a, b}, {-1.0}, 1e-3), TrajectoryError);
    CHECK_THROWS_AS(waypoint_trajectory({a, vec({NAN})}, {1.0}, 1e-3), TrajectoryError);
  }

  TEST_CASE("limits respected when waypoints respect them") {
    const RobotModel m = ur5e_like();
    std::mt19937_64 rng(40);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<JointVector> wps;
      for (int i = 0; i < 4; ++i) wps.push_back(testing::random_q(m, rng));
      const JointTrajectory t = waypoint_trajectory(wps, {0.5, 1.0, 0.7}, 1e-3, BlendProfile::nonic);
      for (const auto& s : t.samples)
        for (int j = 0; j < m.dof(); ++j) {
          CHECK(s.position[j] >= m.limits.joints[j].position_min);
          CHECK(s.position[j] <= m.limits.joints[j].position_max);
        }
    }
  }

  TEST_CASE("numeric differentiation of velocity is second order") {
    const JointTrajectory coarse = quintic_segment(vec({0.0}), vec({1.0}), 1.0, 1e-2);
    const JointTrajectory fine = quintic_segment(vec({0.0}), vec({1.0}), 1.0, 5e-3);
    auto worst = [](const JointTrajectory& t) {
      double err = 0.0;
      for (std::size_t k = 1; k + 1 < t.samples.size(); ++k) {
        const double fd = (t.samples[k + 1].velocity[0] - t.samples[k - 1].velocity[0]) / (2 * t.dt);
        err = std::max(err, std::abs(fd - t.samples[k].acceleration[0]));
      }
      return err;
    };
    const double ratio = worst(coarse) / worst(fine);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.1));
  }

  TEST_CASE("sample") {
    const JointTrajectory t = quintic_segment(vec({0.0, 1.0}), vec({1.0, -1.0}), 1.0, 0.01);
    const Reference first = sample(t, 0.0);
    CHECK(first.position == t.samples.front().position);
    for (std::size_t k : {std::size_t{7}, std::size_t{50}, std::size_t{100}}) {
      const Reference r = sample(t, t.samples[k].t);
      CHECK(r.position == t.samples[k].position);
      CHECK(r.velocity == t.samples[k].velocity);
      CHECK(r.acceleration == t.samples[k].acceleration);
    }
    JointTrajectory ramp;
    ramp.dt = 0.5;
    for (int k = 0; k < 3; ++k)
      ramp.samples.push_back({0.5 * k, vec({2.0 * k}), vec({4.0}), vec({0.0})});
    CHECK(sample(ramp, 0.75).position[0] == doctest::Approx(3.0));
    CHECK_THROWS_AS(sample(t, -0.1), TrajectoryError);
    CHECK_THROWS_AS(sample(t, 1.5), TrajectoryError);
    CHECK_THROWS_AS(sample(JointTrajectory{}, 0.0), TrajectoryError);
  }

  TEST_CASE("csv round trip") {
    const JointTrajectory t = waypoint_trajectory({vec({0.0, 0.2}), vec({0.3, -0.4}), vec({0.1, 0.0})}, {0.2, 0.3}, 0.01);
    std::stringstream buf;
    write_trajectory_csv(buf, t);
    std::string header;
    std::getline(std::istringstream(buf.str()) >> std::ws, header);
    CHECK(header == "t,q1,q2,qd1,qd2,qdd1,qdd2");
    const JointTrajectory back = read_trajectory_csv(buf);
    REQUIRE(back.samples.size() == t.samples.size());
    CHECK(back.dt == doctest::Approx(t.dt));
    for (std::size_t k = 0; k < t.samples.size(); ++k) {
      CHECK(back.samples[k].position == t.samples[k].position);
      CHECK(back.samples[k].velocity == t.samples[k].velocity);
      CHECK(back.samples[k].acceleration == t.samples[k].acceleration);
    }
    std::istringstream bad("t,x\n0,1\n");
    CHECK_THROWS_AS(read_trajectory_csv(bad), TrajectoryError);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_trajectory_csv(empty), TrajectoryError);
  }

  TEST_CASE("cartesian path round trip through forward kinematics") {
    const RobotModel m = ur5e_like();
    JointVector a(6), b(6);
    a << 0.0, -0.8, 1.0, -0.5, 0.6, 0.2;
    b << 0.2, -0.7, 0.9, -0.4, 0.7, 0.3;
    const double dt = 1e-2;
    const JointTrajectory truth = quintic_segment(a, b, 1.0, dt);
    CartesianPath path;
    for (std::size_t k = 0; k < truth.samples.size(); k += 5) {
      path.waypoints.push_back(forward_kinematics(m, truth.samples[k].position));
      if (k > 0) path.segment_durations.push_back(5 * dt);
    }
    const JointTrajectory recovered = cartesian_to_joint(m, path, a, dt);
    REQUIRE(recovered.samples.size() == truth.samples.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < truth.samples.size(); ++k)
      worst = std::max(worst, (recovered.samples[k].position - truth.samples[k].position).cwiseAbs().maxCoeff());
    CHECK(worst < 1e-3);
  }

  TEST_CASE("cartesian samples reproduce the interpolated pose") {
    const RobotModel m = ur5e_like();
    JointVector a(6);
    a << 0.0, -0.8, 1.0, -0.5, 0.6, 0.2;
    const Pose p0 = forward_kinematics(m, a);
    Pose p1 = p0;
    p1.position += Vector3d(0.05, -0.03, 0.02);
    CartesianPath path{{p0, p1}, {0.5}};
    const JointTrajectory t = cartesian_to_joint(m, path, a, 1e-2);
    for (const auto& s : t.samples) {
      const double u = s.t / 0.5;
      const Vector3d expected = p0.position + u * (p1.position - p0.position);
      CHECK((forward_kinematics(m, s.position).position - expected).norm() < 1e-5);
    }
  }

  TEST_CASE("static cartesian pose") {
    const RobotModel m = ur5e_like();
    JointVector a(6);
    a << 0.1, -0.9, 1.1, -0.6, 0.5, 0.0;
    const Pose p = forward_kinematics(m, a);
    const JointTrajectory t = cartesian_to_joint(m, CartesianPath{{p, p}, {0.3}}, a, 1e-2);
    for (const auto& s : t.samples) {
      CHECK((s.position - a).cwiseAbs().maxCoeff() < 1e-9);
      CHECK(s.velocity.cwiseAbs().maxCoeff() < 1e-6);
    }
  }

  TEST_CASE("unreachable cartesian waypoint names the sample") {
    const RobotModel m = ur5e_like();
    JointVector a(6);
    a << 0.0, -0.8, 1.0, -0.5, 0.6, 0.2;
    const Pose p0 = forward_kinematics(m, a);
    Pose far = p0;
    far.position = Vector3d(3.0, 0.0, 0.5);
    try {
      cartesian_to_joint(m, CartesianPath{{p0, far}, {1.0}}, a, 1e-2);
      FAIL("expected TrajectoryError");
    } catch (const TrajectoryError& e) {
      CHECK(std::string(e.what()).find("sample") != std::string::npos);
    }
  }
}
