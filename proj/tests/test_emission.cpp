#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "thermodeco/emission.hpp"

using namespace thermodeco;
namespace c = thermodeco::constants;

namespace {

ParticleModel aerosol_particle(double t0 = 1000.0) {
  ParticleModel p;
  p.effective_area = 5e-18;
  p.heat_capacity = ParticleModel::heat_capacity_from_kB(12000.0);
  p.mass = 1e6 * c::amu;
  p.initial_temperature = t0;
  return p;
}

ParticleModel infinite_cv(double t0 = 1000.0) {
  ParticleModel p = aerosol_particle(t0);
  p.heat_capacity = kInfiniteHeatCapacity;
  return p;
}

SpectrumTable constant_table(double sigma, double omega_max = 1e17) {
  return SpectrumTable({{0.0, sigma}, {omega_max, sigma}});
}

// 2 A (k_B T / hbar)^3 / (2 pi c)^2
double greybody_total(double area, double t) {
  const double w = c::k_B * t / c::hbar;
  return 2.0 * area * w * w * w / std::pow(2.0 * c::pi * c::c, 2);
}

}  // namespace

TEST(Particle, Validation) {
  EXPECT_NO_THROW(aerosol_particle().validate());
  auto bad = aerosol_particle();
  bad.effective_area = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = aerosol_particle();
  bad.mass = -1.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = aerosol_particle();
  bad.heat_capacity = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = aerosol_particle();
  bad.initial_temperature = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  EXPECT_NO_THROW(infinite_cv().validate());
}

TEST(Particle, SmallHeatCapacityWarns) {
  auto p = aerosol_particle();
  EXPECT_TRUE(p.warnings().empty());
  p.heat_capacity = ParticleModel::heat_capacity_from_kB(15.0);
  EXPECT_FALSE(p.warnings().empty());
  EXPECT_NEAR(p.heat_capacity_in_kB(), 15.0, 1e-12);
}

TEST(Spectrum, ParseAndInterpolate) {
  std::istringstream in("# comment\nomega_rad_per_s,sigma_abs_m2\n1e14,0\n2e14,2e-20\n3e14,0\n");
  const auto t = SpectrumTable::parse(in);
  EXPECT_EQ(t.points().size(), 3u);
  EXPECT_DOUBLE_EQ(t.sigma_abs(1.5e14), 1e-20);
  EXPECT_EQ(t.sigma_abs(0.5e14), 0.0);
  EXPECT_EQ(t.sigma_abs(4e14), 0.0);
  EXPECT_DOUBLE_EQ(t.max_sigma(), 2e-20);
}

TEST(Spectrum, ParseErrors) {
  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return SpectrumTable::parse(in, "test");
  };
  EXPECT_THROW(parse("omega,sigma\n1,2\n2,3\n"), std::invalid_argument);
  EXPECT_THROW(parse("omega_rad_per_s,sigma_abs_m2\n2,0\n1,0\n"), std::invalid_argument);
  EXPECT_THROW(parse("omega_rad_per_s,sigma_abs_m2\n1,0\n"), std::invalid_argument);
  EXPECT_THROW(parse("omega_rad_per_s,sigma_abs_m2\n1,-1\n2,0\n"), std::invalid_argument);
  EXPECT_THROW(parse("omega_rad_per_s,sigma_abs_m2\n1,0,3\n2,0\n"), std::invalid_argument);
  EXPECT_THROW(parse("omega_rad_per_s,sigma_abs_m2\n1,x\n2,0\n"), std::invalid_argument);
  EXPECT_THROW(SpectrumTable::load("/nonexistent/spectrum.csv"), std::invalid_argument);
}

TEST(SpectralRate, ZeroFrequency) {
  const auto m = EmissionModel::greybody(aerosol_particle());
  EXPECT_EQ(m.spectral_rate(0.0, 1000.0), 0.0);
}

TEST(SpectralRate, BoltzmannFactor) {
  const auto m = EmissionModel::greybody(infinite_cv());
  const double t = 800.0;
  const double w = c::k_B * t / c::hbar;  // u = 1
  const double prefactor = 5e-18 * w * w / std::pow(2.0 * c::pi * c::c, 2);
  EXPECT_NEAR(m.spectral_rate(w, t) / prefactor, 0.367879441171442322, 1e-14);
}

TEST(SpectralRate, LogDomainAgrees) {
  const auto m = EmissionModel::greybody(aerosol_particle());
  const double direct = m.spectral_rate(1e14, 1000.0);
  EXPECT_NEAR(std::exp(m.log_spectral_rate(1e14, 1000.0)) / direct, 1.0, 1e-12);
  EXPECT_GT(direct, 0.0);
}

TEST(SpectralRate, NonNegativeAndIncreasingInT) {
  const auto m = EmissionModel::greybody(infinite_cv());
  for (double w = 1e12; w < 1e16; w *= 1.7) {
    double prev = 0.0;
    for (double t : {50.0, 100.0, 300.0, 1000.0, 3000.0, 10000.0}) {
      const double r = m.spectral_rate(w, t);
      EXPECT_GE(r, 0.0);
      if (prev > 0.0) {
        EXPECT_GT(r, prev) << w << " " << t;
      } else {
        EXPECT_GE(r, prev) << w << " " << t;
      }
      prev = r;
    }
  }
}

TEST(SpectralRate, RejectsBadInput) {
  const auto m = EmissionModel::greybody(aerosol_particle());
  EXPECT_THROW(m.spectral_rate(-1.0, 300.0), std::domain_error);
  EXPECT_THROW(m.spectral_rate(1e14, 0.0), std::domain_error);
}

TEST(TotalRate, GreybodyClosedForm) {
  const auto m = EmissionModel::greybody(infinite_cv());
  EXPECT_NEAR(m.total_rate(1000.0) / greybody_total(5e-18, 1000.0), 1.0, 1e-9);
  EXPECT_NEAR(m.total_rate(600.0) / m.total_rate(300.0), 8.0, 8e-9);
}

TEST(TotalRate, ZeroTable) {
  const auto m = EmissionModel::tabulated(aerosol_particle(), constant_table(0.0));
  EXPECT_FALSE(m.emits());
  EXPECT_EQ(m.total_rate(1000.0), 0.0);
  EXPECT_EQ(m.energy_loss_rate(1000.0), 0.0);
}

TEST(EnergyLoss, FourthPowerScaling) {
  const auto m = EmissionModel::greybody(infinite_cv());
  EXPECT_NEAR(m.energy_loss_rate(2000.0) / m.energy_loss_rate(1000.0), 16.0, 16e-9);
  // Finite C_V keeps the T^4 law because the reduced density does not depend on T.
  const auto f = EmissionModel::greybody(aerosol_particle());
  EXPECT_NEAR(f.energy_loss_rate(2000.0) / f.energy_loss_rate(1000.0), 16.0, 16e-9);
}

TEST(EnergyLoss, HeatCapacityTermSuppresses) {
  const auto finite = EmissionModel::greybody(aerosol_particle());
  const auto inf = EmissionModel::greybody(infinite_cv());
  EXPECT_LT(finite.energy_loss_rate(1000.0), inf.energy_loss_rate(1000.0));
  const auto off = finite.with_heat_capacity_term(false);
  EXPECT_NEAR(off.energy_loss_rate(1000.0) / inf.energy_loss_rate(1000.0), 1.0, 1e-12);
}

TEST(Rates, IncreaseWithTemperature) {
  const auto m = EmissionModel::greybody(aerosol_particle());
  double r_prev = 0.0, p_prev = 0.0;
  for (double t : {100.0, 300.0, 1000.0, 3000.0}) {
    EXPECT_GT(m.total_rate(t), r_prev);
    EXPECT_GT(m.energy_loss_rate(t), p_prev);
    r_prev = m.total_rate(t);
    p_prev = m.energy_loss_rate(t);
  }
}

TEST(Tabulated, ConstantCrossSectionMatchesGreybody) {
  for (const auto& p : {aerosol_particle(), infinite_cv()}) {
    const auto grey = EmissionModel::greybody(p);
    const auto tab = EmissionModel::tabulated(p, constant_table(p.effective_area / 4.0));
    for (double t : {300.0, 1000.0, 3000.0}) {
      EXPECT_NEAR(tab.total_rate(t) / grey.total_rate(t), 1.0, 1e-6);
      EXPECT_NEAR(tab.energy_loss_rate(t) / grey.energy_loss_rate(t), 1.0, 1e-6);
    }
    EXPECT_NEAR(tab.spectral_rate(2e14, 1000.0) / grey.spectral_rate(2e14, 1000.0), 1.0, 1e-12);
  }
}

TEST(Tabulated, GappedSpectrumIsAccurate) {
  // Band above w_c only: compare against a dense Riemann sum.
  const double wc = 2.0 * c::pi * c::c / 800e-9;
  const auto p = infinite_cv();
  const auto m = EmissionModel::tabulated(p, SpectrumTable({{wc, 0.0}, {wc * 1.0000001, 1e-20}, {1e17, 1e-20}}));
  const double t = 1500.0;
  const double total = m.total_rate(t);
  const double top = wc + 60.0 * c::k_B * t / c::hbar;
  const int n = 1000000;
  const double h = (top - wc) / n;
  long double sum = 0.0L;
  for (int i = 0; i < n; ++i) sum += m.spectral_rate(wc + (i + 0.5) * h, t);
  EXPECT_NEAR(total / static_cast<double>(sum * h), 1.0, 1e-6);
}

TEST(CoolingCorrection, Values) {
  EXPECT_NEAR(cooling_correction(12000.0), 1.0 - 10.0 / 12000.0 + 105.0 / 144e6, 1e-15);
  EXPECT_NEAR(cooling_correction(1000.0), 0.990105, 1e-12);
}

TEST(Cool, InfiniteHeatCapacityIsConstant) {
  const auto tr = cool(EmissionModel::greybody(infinite_cv()), 1.0);
  EXPECT_TRUE(tr.constant());
  EXPECT_EQ(tr.temperature(0.5), 1000.0);
  EXPECT_THROW(analytic_cooling(infinite_cv(), 0.1), std::invalid_argument);
}

TEST(Cool, ZeroDurationSingleSample) {
  const auto tr = cool(EmissionModel::greybody(aerosol_particle()), 0.0);
  ASSERT_EQ(tr.sample_times().size(), 1u);
  EXPECT_EQ(tr.sample_temperatures().front(), 1000.0);
}

TEST(Cool, MatchesAnalyticLaw) {
  const auto p = aerosol_particle();
  const auto tr = cool(EmissionModel::greybody(p), 0.01);
  for (int i = 0; i <= 20; ++i) {
    const double t = 0.01 * i / 20.0;
    EXPECT_NEAR(tr.temperature(t) / analytic_cooling(p, t), 1.0, 5e-3) << t;
  }
  EXPECT_EQ(analytic_cooling(p, 0.0), 1000.0);
}

TEST(Cool, PinnedValueAtTenMilliseconds) {
  // First-run value of the ODE at t = 10 ms, cross-checked against the analytic law.
  const auto p = aerosol_particle();
  const double numeric = cool(EmissionModel::greybody(p), 0.01).temperature(0.01);
  EXPECT_NEAR(numeric / analytic_cooling(p, 0.01), 1.0, 5e-3);
  EXPECT_NEAR(numeric, 274.4126, 1e-3);
}

TEST(Cool, MonotoneAndEnergyConserving) {
  const auto p = aerosol_particle(2000.0);
  const auto m = EmissionModel::greybody(p);
  const double span = 1e-3;
  const auto tr = cool(m, span);
  const auto temps = tr.sample_temperatures();
  for (std::size_t i = 1; i < temps.size(); ++i) {
    EXPECT_LE(temps[i], temps[i - 1]);
    EXPECT_GT(temps[i], 0.0);
  }
  const double radiated =
      numerics::integrate_piecewise([&](double t) { return m.energy_loss_rate(tr.temperature(t)); }, tr.sample_times());
  EXPECT_NEAR(p.heat_capacity * (2000.0 - tr.temperature(span)) / radiated, 1.0, 1e-6);
}

TEST(AnalyticCooling, CubeRootAsymptotics) {
  const auto p = aerosol_particle();
  EXPECT_NEAR(analytic_cooling(p, 8e6) / analytic_cooling(p, 1e6), 0.5, 0.005);
}
