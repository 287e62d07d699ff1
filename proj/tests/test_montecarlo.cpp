#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "thermodeco/montecarlo.hpp"

using namespace thermodeco;
namespace c = thermodeco::constants;

namespace {

ParticleModel particle(double t0, double cv_kB) {
  ParticleModel p;
  p.effective_area = 5e-18;
  p.heat_capacity = std::isinf(cv_kB) ? kInfiniteHeatCapacity : ParticleModel::heat_capacity_from_kB(cv_kB);
  p.mass = 1e6 * c::amu;
  p.initial_temperature = t0;
  return p;
}

BeamGeometry geometry(double d, double tof) {
  BeamGeometry g;
  g.slit_separation = d;
  g.flight_distance = 1.0;
  g.longitudinal_velocity = 100.0;
  g.mass = 1e6 * c::amu;
  return g.with_time_of_flight(tof);
}

// Time of flight giving V = target when the exponent is linear in tau (C_V infinite).
double tof_for_visibility(double d, const EmissionModel& m, double target) {
  return -std::log(target) / visibility_exponent_thermal(geometry(d, 1.0), m, false);
}

}  // namespace

TEST(MonteCarlo, DeterministicAndWorkerInvariant) {
  const auto m = EmissionModel::greybody(particle(1500.0, INFINITY));
  const auto g = geometry(1e-7, 1e-3);
  const auto a = estimate_visibility(g, m, EmissionMode::poisson_cooling, 500, 7, 1);
  const auto b = estimate_visibility(g, m, EmissionMode::poisson_cooling, 500, 7, 3);
  const auto d = estimate_visibility(g, m, EmissionMode::poisson_cooling, 500, 8, 1);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_EQ(a.mean_events, b.mean_events);
  EXPECT_NE(a.mean, d.mean);
  const TrajectorySimulator sim(g, m, EmissionMode::poisson_cooling);
  const auto t1 = sim.simulate(7, 42, true);
  const auto t2 = sim.simulate(7, 42, true);
  EXPECT_EQ(t1.fringe_factor, t2.fringe_factor);
  EXPECT_EQ(t1.event_count, t2.event_count);
}

TEST(MonteCarlo, RejectsTooFewTrials) {
  const auto m = EmissionModel::greybody(particle(1500.0, INFINITY));
  EXPECT_THROW(estimate_visibility(geometry(1e-7, 1e-3), m, EmissionMode::poisson_cooling, 99, 1), std::invalid_argument);
}

TEST(MonteCarlo, NoEmissionGivesUnitVisibility) {
  std::istringstream in("omega_rad_per_s,sigma_abs_m2\n1e14,0\n2e14,0\n");
  const auto m = EmissionModel::tabulated(particle(1500.0, INFINITY), SpectrumTable::parse(in));
  const auto e = estimate_visibility(geometry(1e-7, 1e-3), m, EmissionMode::poisson_cooling, 200, 1);
  EXPECT_EQ(e.mean, 1.0);
  EXPECT_EQ(e.std_error, 0.0);
  EXPECT_EQ(e.mean_events, 0.0);
}

TEST(MonteCarlo, EventCountsArePoisson) {
  const auto m = EmissionModel::greybody(particle(1500.0, INFINITY));
  const double tof = 3.0 / m.total_rate(1500.0);
  const auto e = estimate_visibility(geometry(1e-7, tof), m, EmissionMode::poisson_cooling, 20000, 3);
  const double expected = m.total_rate(1500.0) * tof;
  const double se = std::sqrt(expected / 20000.0);
  EXPECT_NEAR(e.mean_events, expected, 4.0 * se);
  EXPECT_NEAR(e.event_variance / expected, 1.0, 0.05);
}

TEST(MonteCarlo, EventCountScalesWithArea) {
  auto p = particle(1500.0, INFINITY);
  const auto m1 = EmissionModel::greybody(p);
  p.effective_area *= 2.0;
  const auto m2 = EmissionModel::greybody(p);
  const double tof = 2.0 / m1.total_rate(1500.0);
  const auto e1 = estimate_visibility(geometry(1e-7, tof), m1, EmissionMode::poisson_cooling, 10000, 5);
  const auto e2 = estimate_visibility(geometry(1e-7, tof), m2, EmissionMode::poisson_cooling, 10000, 5);
  EXPECT_NEAR(e2.mean_events / e1.mean_events, 2.0, 0.1);
}

TEST(MonteCarlo, EventsInsideFlightAndFactorsBounded) {
  const auto m = EmissionModel::greybody(particle(2500.0, 12000.0));
  const double tof = 2.2e-6;
  const TrajectorySimulator sim(geometry(5e-8, tof), m, EmissionMode::poisson_cooling);
  for (std::uint64_t k = 0; k < 200; ++k) {
    const auto r = sim.simulate(11, k, true);
    EXPECT_EQ(r.events.size(), r.event_count);
    EXPECT_LE(std::abs(r.fringe_factor), 1.0);
    double previous = 0.0;
    for (const auto& ev : r.events) {
      EXPECT_GT(ev.time, 0.0);
      EXPECT_LT(ev.time, tof);
      EXPECT_GE(ev.time, previous);
      EXPECT_GT(ev.omega, 0.0);
      previous = ev.time;
    }
  }
}

TEST(MonteCarlo, MatchesAnalyticWithoutCooling) {
  const auto m = EmissionModel::greybody(particle(1500.0, INFINITY));
  const double tof = tof_for_visibility(1e-7, m, 0.5);
  const auto g = geometry(1e-7, tof);
  const double analytic = visibility_thermal(g, m, false);
  EXPECT_NEAR(analytic, 0.5, 1e-6);
  const auto e = estimate_visibility(g, m, EmissionMode::poisson_cooling, 20000, 17);
  EXPECT_LT(std::abs(e.mean - analytic), 3.0 * e.std_error);
}

TEST(MonteCarlo, MatchesAnalyticWithCooling) {
  const auto m = EmissionModel::greybody(particle(2500.0, 12000.0));
  const auto g = geometry(5e-8, 2.2e-6);
  const double analytic = visibility_thermal(g, m, true);
  EXPECT_GT(analytic, 0.1);
  EXPECT_LT(analytic, 0.9);
  const auto e = estimate_visibility(g, m, EmissionMode::poisson_cooling, 20000, 2024);
  EXPECT_LT(std::abs(e.mean - analytic), 3.0 * e.std_error);
}

TEST(MonteCarlo, MicrocanonicalCloseToPoisson) {
  const auto m = EmissionModel::greybody(particle(2500.0, 12000.0));
  const auto g = geometry(5e-8, 2.2e-6);
  const auto a = estimate_visibility(g, m, EmissionMode::poisson_cooling, 20000, 99);
  const auto b = estimate_visibility(g, m, EmissionMode::microcanonical, 20000, 99);
  EXPECT_NEAR(b.mean / a.mean, 1.0, 0.05);
}

TEST(MonteCarlo, MicrocanonicalConservesEnergy) {
  const double cv = ParticleModel::heat_capacity_from_kB(12000.0);
  const auto m = EmissionModel::greybody(particle(2500.0, 12000.0));
  const TrajectorySimulator sim(geometry(5e-8, 1e-4), m, EmissionMode::microcanonical);
  for (std::uint64_t k = 0; k < 50; ++k) {
    const auto r = sim.simulate(3, k, true);
    double sum = 0.0;
    for (const auto& ev : r.events) sum += c::hbar * ev.omega;
    EXPECT_NEAR(r.emitted_energy, sum, 1e-12 * sum);
    EXPECT_NEAR(r.final_temperature, 2500.0 - r.emitted_energy / cv, 1e-9 * 2500.0);
  }
}
