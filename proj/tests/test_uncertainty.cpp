#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "slidesim/trace_io.hpp"
#include "slidesim/uncertainty.hpp"

using namespace slidesim;

TEST_CASE("identify: perfect estimator yields zero uncertainties") {
  const UncertaintySample s = identify({0, 2, 10}, {0.1, 0, 0}, {0, 2, 10},
                                       ft_to_com_torque({0, 2, 10}, {0.1, 0, 0},
                                                        default_ft_to_com_vector()));
  CHECK(norm(s.force) == 0.0);
  CHECK(norm(s.torque) == 0.0);
}

TEST_CASE("identify: force error comparable to the push") {
  const UncertaintySample s = identify({0, 0, 10}, {}, {}, {});
  CHECK(norm(s.force - Vec3{0, 0, 10}) == 0.0);
}

TEST_CASE("identify: torque from a pure force offset matches the CoM transform") {
  const Vec3 f_meas{2.0, -1.0, 9.0};
  const Vec3 p_ft{0, 0, -0.12};
  const UncertaintySample s = identify(f_meas, {}, f_meas, {}, p_ft);
  // Same force seen by both: only the lever-arm torque survives.
  CHECK(norm(s.force) == 0.0);
  CHECK(norm(s.torque - cross(f_meas, p_ft)) < 1e-15);
}

TEST_CASE("synthesize: zero magnitudes, determinism, stationary std") {
  SynthesisParams zero;
  const UncertaintyTrace z = synthesize(1.0, 0.01, zero, 7);
  for (const Vec3& f : z.force) CHECK(norm(f) == 0.0);

  SynthesisParams p;
  p.force[0] = {1.5, 0.5, 0.0, 10.0};
  p.force[2] = {4.0, 0.5, 0.0, 10.0};
  p.torque[0] = {0.15, 0.5, 0.0, 10.0};
  const UncertaintyTrace a = synthesize(60.0, 0.01, p, 42);
  const UncertaintyTrace b = synthesize(60.0, 0.01, p, 42);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a.force[i] == b.force[i]);
    CHECK(a.torque[i] == b.torque[i]);
  }

  // Sample std within 15% of the configured std per axis.
  const auto sample_std = [&](auto getter) {
    double mean = 0.0;
    for (size_t i = 0; i < a.size(); ++i) mean += getter(i);
    mean /= static_cast<double>(a.size());
    double var = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
      const double d = getter(i) - mean;
      var += d * d;
    }
    return std::sqrt(var / static_cast<double>(a.size()));
  };
  CHECK(std::abs(sample_std([&](size_t i) { return a.force[i].x; }) - 1.5) < 0.15 * 1.5);
  CHECK(std::abs(sample_std([&](size_t i) { return a.force[i].z; }) - 4.0) < 0.15 * 4.0);
  CHECK(std::abs(sample_std([&](size_t i) { return a.torque[i].x; }) - 0.15) < 0.15 * 0.15);
  CHECK(norm(a.force[0] - Vec3{a.force[0].x, 0.0, a.force[0].z}) == 0.0);  // silent axes stay 0
}

TEST_CASE("resample: identity, upsampling, and end-hold rule") {
  SynthesisParams p;
  p.force[0] = {1.0, 0.3, 0.0, 1.0};
  const UncertaintyTrace src = synthesize(1.0, 0.02, p, 3);

  const UncertaintyTrace same = resample(src, 0.02);
  REQUIRE(same.size() == src.size());
  for (size_t i = 0; i < src.size(); ++i) CHECK(same.force[i] == src.force[i]);

  // 50 Hz -> 100 Hz: each interior sample is duplicated once.
  const UncertaintyTrace up = resample(src, 0.01);
  REQUIRE(up.size() == 2 * src.size() - 1);
  for (size_t i = 0; i + 1 < src.size(); ++i) {
    CHECK(up.force[2 * i] == src.force[i]);
    CHECK(up.force[2 * i + 1] == src.force[i]);
  }
  CHECK(up.force.back() == src.force.back());

  // First and last values are preserved and queries past the end hold.
  CHECK(up.force.front() == src.force.front());
  CHECK(src.sample_at(src.time.back() + 5.0).force == src.force.back());

  CHECK_THROWS_AS(resample(UncertaintyTrace{}, 0.01), std::invalid_argument);
}

TEST_CASE("inject: planar selectors and spatial subtraction") {
  const UncertaintySample s{{0.5, 9.0, -1.25}, {0.2, 7.0, -3.0}};
  const PlanarWrench w = inject(PlanarWrench{2.0, -15.0, 1.0}, s);
  CHECK(w.fx == 1.5);             // f_x - [1 0 0] F_unc
  CHECK(w.fz == -15.0 - -1.25);   // f_z - [0 0 1] F_unc
  CHECK(w.tau == 1.0 - 0.2);      // tau - [1 0 0] tau_unc; y/z ignored

  const PlanarWrench unchanged = inject(PlanarWrench{2.0, -15.0, 1.0}, UncertaintySample{});
  CHECK(unchanged.fx == 2.0);
  CHECK(unchanged.fz == -15.0);
  CHECK(unchanged.tau == 1.0);

  const SpatialWrench sw =
      inject(SpatialWrench{{1, 2, 3}, {4, 5, 6}}, UncertaintySample{{1, 1, 1}, {2, 2, 2}});
  CHECK(norm(sw.force - Vec3{0, 1, 2}) == 0.0);
  CHECK(norm(sw.torque - Vec3{2, 3, 4}) == 0.0);
}

TEST_CASE("inject is linear in the uncertainty sample") {
  for (std::uint64_t k = 0; k < 100; ++k) {
    const UncertaintySample s1{{rng::gaussian(1, 0, k), rng::gaussian(1, 1, k),
                                rng::gaussian(1, 2, k)},
                               {rng::gaussian(1, 3, k), rng::gaussian(1, 4, k),
                                rng::gaussian(1, 5, k)}};
    const UncertaintySample s2{{rng::gaussian(2, 0, k), rng::gaussian(2, 1, k),
                                rng::gaussian(2, 2, k)},
                               {rng::gaussian(2, 3, k), rng::gaussian(2, 4, k),
                                rng::gaussian(2, 5, k)}};
    const PlanarWrench w{rng::gaussian(3, 0, k), rng::gaussian(3, 1, k),
                         rng::gaussian(3, 2, k)};
    const UncertaintySample sum{s1.force + s2.force, s1.torque + s2.torque};
    const PlanarWrench lhs = inject(inject(w, s1), s2);
    const PlanarWrench rhs = inject(w, sum);
    CHECK(std::abs(lhs.fx - rhs.fx) < 1e-12);
    CHECK(std::abs(lhs.fz - rhs.fz) < 1e-12);
    CHECK(std::abs(lhs.tau - rhs.tau) < 1e-12);
  }
}

TEST_CASE("sensor noise: identity at sigma 0, zero stays zero, calibrated std") {
  const std::array<double, 2> f{10.0, 0.0};
  const NoiseModel off{0.0, 5};
  CHECK(sensor_noise(f, off, 3) == f);

  const NoiseModel on{0.10, 5};
  CHECK(sensor_noise(std::array{0.0, 0.0}, on, 9) == std::array{0.0, 0.0});

  // Empirical std of the corruption on a constant 10 N stream: 1.0 N within
  // 10% over 1e4 samples.
  double mean = 0.0, var = 0.0;
  const int n = 10000;
  std::vector<double> vals;
  vals.reserve(n);
  for (int i = 0; i < n; ++i)
    vals.push_back(sensor_noise(std::array{10.0}, on, static_cast<std::uint64_t>(i))[0]);
  for (double v : vals) mean += v;
  mean /= n;
  for (double v : vals) var += (v - mean) * (v - mean);
  const double stddev = std::sqrt(var / n);
  CHECK(std::abs(stddev - 1.0) < 0.1);

  // Pure in (seed, step): same arguments, same value.
  CHECK(sensor_noise(std::array{10.0}, on, 123)[0] == sensor_noise(std::array{10.0}, on, 123)[0]);
  CHECK(sensor_noise(std::array{10.0}, on, 123)[0] != sensor_noise(std::array{10.0}, on, 124)[0]);
}

TEST_CASE("uncertainty trace CSV round trip") {
  SynthesisParams p;
  p.force[1] = {2.0, 0.7, 0.5, 8.0};
  p.torque[2] = {0.1, 0.4, 0.0, 1.0};
  const UncertaintyTrace t = synthesize(2.0, 0.01, p, 11);
  const std::string text = uncertainty_trace_to_csv(t);
  std::istringstream in(text);
  const UncertaintyTrace back =
      read_uncertainty_trace(csv::read_table(in), TraceProvenance::synthetic);
  REQUIRE(back.size() == t.size());
  for (size_t i = 0; i < t.size(); ++i) {
    CHECK(back.time[i] == t.time[i]);
    CHECK(back.force[i] == t.force[i]);
    CHECK(back.torque[i] == t.torque[i]);
  }
}

TEST_CASE("identify over a measured table") {
  csv::Table table;
  table.header = {"t",   "fmx", "fmy", "fmz", "tmx", "tmy", "tmz",
                  "fex", "fey", "fez", "tex", "tey", "tez"};
  table.rows = {{0.0, 0, 0, 10, 0, 0, 0, 0, 0, 0, 0, 0, 0},
                {0.01, 1, 0, 10, 0, 0, 0, 1, 0, 2, 0, 0.12, 0}};
  const UncertaintyTrace t = identify_from_table(table);
  REQUIRE(t.size() == 2);
  CHECK(t.provenance == TraceProvenance::measured);
  CHECK(norm(t.force[0] - Vec3{0, 0, 10}) == 0.0);
  // Row 2: tau_com = (1,0,10) x (0,0,-0.12) = (0, 0.12, 0), minus tau_est.
  CHECK(norm(t.force[1] - Vec3{0, 0, 8}) == 0.0);
  CHECK(norm(t.torque[1] - Vec3{0, 0.12 - 0.12, 0}) < 1e-15);
}
