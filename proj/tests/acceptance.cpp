// Acceptance checks, one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "thermodeco/decoherence.hpp"
#include "thermodeco/interference.hpp"
#include "thermodeco/io/config.hpp"
#include "thermodeco/io/tasks.hpp"
#include "thermodeco/montecarlo.hpp"
#include "thermodeco/numerics/roots.hpp"

using namespace thermodeco;
namespace c = thermodeco::constants;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      out_.pass = false;
      if (!out_.detail.empty()) out_.detail += "; ";
      out_.detail += what;
    }
  }
  void note(const std::string& what) { notes_ += (notes_.empty() ? "" : "; ") + what; }
  Outcome result() const { return {out_.pass, out_.pass ? notes_ : out_.detail}; }

 private:
  Outcome out_;
  std::string notes_;
};

std::string fmt(const char* f, double a, double b = 0.0, double c2 = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c2);
  return buf;
}

BeamGeometry beam(double d, double mass) {
  BeamGeometry g;
  g.slit_separation = d;
  g.flight_distance = 1.0;
  g.longitudinal_velocity = 100.0;
  g.mass = mass;
  return g;
}

ParticleModel aerosol_particle(double t0) {
  ParticleModel p;
  p.effective_area = 5e-18;
  p.heat_capacity = ParticleModel::heat_capacity_from_kB(12000.0);
  p.mass = 1e6 * c::amu;
  p.initial_temperature = t0;
  return p;
}

Outcome virus_temperature() {
  Check ck;
  ParticleModel v;
  v.mass = 5e7 * c::amu;
  v.effective_area = 4.0 * v.mass * 7.5e3;
  v.initial_temperature = 30.0;
  auto solve = [&](double d, double tau) {
    const auto g = beam(d, v.mass);
    return numerics::find_root([&](double t) { return 1.0 / decoherence_time_closed(g, v, t) - 1.0 / tau; }, {1.0, 1000.0}, 1e-12);
  };
  const double t1 = solve(0.5e-6, 0.1), t2 = solve(1e-6, 1.0);
  ck.expect(std::abs(t1 - 39.7) <= 1.0, fmt("T(0.5um, 0.1s) = %.3f K", t1));
  ck.expect(std::abs(t2 - 19.0) <= 0.3, fmt("T(1um, 1s) = %.3f K", t2));
  ck.note(fmt("T = %.2f K and %.2f K", t1, t2));
  return ck.result();
}

Outcome closed_vs_quadrature() {
  Check ck;
  const auto p = aerosol_particle(1000.0);
  const auto m = EmissionModel::greybody(p);
  double worst = 0.0;
  for (double t : {100.0, 300.0, 1000.0, 3000.0}) {
    for (double d : {50e-9, 1e-6}) {
      const auto g = beam(d, p.mass);
      const double a = decoherence_time_closed(g, p, t);
      const double b = decoherence_time_quadrature(g, m, t);
      worst = std::max(worst, std::abs(b / a - 1.0));
    }
  }
  ck.expect(worst <= 1e-6, fmt("max relative difference %.3e", worst));
  ck.note(fmt("max relative difference %.2e", worst));
  return ck.result();
}

Outcome small_x_limit() {
  Check ck;
  const double x = 1e-3;
  const double f = scaling_function(x) / std::pow(x, 5);
  ck.expect(std::abs(f - 4.0 / 3.0) <= 1e-5, fmt("f(x)/x^5 = %.10f", f));
  ParticleModel p = aerosol_particle(1000.0);
  const auto g = beam(1e-6, p.mass);
  for (double xr : {1e-3, 0.01, 0.05, 0.1, 0.2, 0.3}) {
    const double t = xr * c::hbar * c::c / (c::k_B * g.slit_separation);
    const double rel = std::abs(decoherence_time_smallx(g, p, t) / decoherence_time_closed(g, p, t) - 1.0);
    ck.expect(rel <= xr * xr, fmt("x = %g: relative difference %.3e", xr, rel));
  }
  ck.note(fmt("f(x)/x^5 - 4/3 = %.1e at x = 1e-3", f - 4.0 / 3.0));
  return ck.result();
}

Outcome aerosol_sweep() {
  Check ck;
  const std::string text = R"({
    "particle": {"effective_area": "5e-18 m2", "heat_capacity": "12000 kB", "mass": "1e6 amu",
                 "temperatures": {"from": "300 K", "to": "5000 K", "count": 25, "spacing": "log"}},
    "geometry": {"slit_separations": ["50 nm", "100 nm", "500 nm", "1 um"],
                 "flight_distance": "1 m", "velocity": "100 m/s"},
    "task": {"max_time": "1000 s"}})";
  const auto cfg = io::parse_config(text, "tau-sweep");
  const auto result = io::run_tau_sweep(cfg);
  const auto& t = result.table("tau_sweep.csv");
  std::map<double, std::vector<std::pair<double, std::pair<double, double>>>> by_d;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string status = t.text(i, "status");
    ck.expect(status == "ok" || status == "cooled:no_crossing", "row status " + status);
    if (status.rfind("error", 0) == 0) continue;
    by_d[t.number(i, "slit_separation_m")].push_back({t.number(i, "T0_K"), {t.number(i, "tau_cooled_s"), t.number(i, "tau_uncooled_s")}});
  }
  double max_ratio_small = 0.0, max_ratio_large = 0.0;
  for (const auto& [d, rows] : by_d) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double cooled = rows[i].second.first, uncooled = rows[i].second.second;
      ck.expect(cooled >= uncooled, fmt("cooled < uncooled at d = %g, T = %g", d, rows[i].first));
      const double ratio = cooled / uncooled;
      if (d < 60e-9 && std::isfinite(ratio)) max_ratio_small = std::max(max_ratio_small, ratio);
      if (d > 400e-9) {
        max_ratio_large = std::max(max_ratio_large, ratio);
        ck.expect(ratio <= 1.05, fmt("cooled/uncooled %.4f at d = %g m, T = %.1f K", ratio, d, rows[i].first));
      }
      if (i > 0) {
        ck.expect(uncooled < rows[i - 1].second.second, fmt("uncooled not decreasing in T at d = %g, T = %g", d, rows[i].first));
        const double prev = rows[i - 1].second.first;
        ck.expect(cooled < prev || std::isinf(prev),
                  fmt("cooled not decreasing in T at d = %g, T = %g", d, rows[i].first));
      }
    }
  }
  // Monotone in d at each temperature.
  std::vector<double> ds;
  for (const auto& kv : by_d) ds.push_back(kv.first);
  for (std::size_t k = 1; k < ds.size(); ++k) {
    const auto& lo = by_d[ds[k - 1]];
    const auto& hi = by_d[ds[k]];
    for (std::size_t i = 0; i < std::min(lo.size(), hi.size()); ++i) {
      ck.expect(hi[i].second.second < lo[i].second.second, fmt("uncooled not decreasing in d at T = %g", hi[i].first));
      ck.expect(hi[i].second.first <= lo[i].second.first, fmt("cooled not decreasing in d at T = %g", hi[i].first));
    }
  }
  ck.expect(max_ratio_small > 1.2, fmt("cooled/uncooled at most %.4f for d = 50 nm", max_ratio_small));
  ck.note(fmt("max ratio %.3f (50 nm, finite), %.4f (>= 500 nm)", max_ratio_small, max_ratio_large));
  return ck.result();
}

Outcome monte_carlo() {
  Check ck;
  const auto m = EmissionModel::greybody(aerosol_particle(1500.0));
  const auto g0 = beam(1e-7, 1e6 * c::amu);
  for (double target : {0.9, 0.5, 0.1}) {
    const double tau = numerics::find_root(
        [&](double lt) { return std::log(visibility_thermal(g0.with_time_of_flight(std::exp(lt)), m, true)) - std::log(target); },
        {std::log(1e-7), std::log(1e-1)}, 1e-10);
    const auto g = g0.with_time_of_flight(std::exp(tau));
    const double v = visibility_thermal(g, m, true);
    const auto e = estimate_visibility(g, m, EmissionMode::poisson_cooling, 100000, 20240 + static_cast<int>(target * 10));
    const double z = (e.mean - v) / e.std_error;
    ck.expect(std::abs(z) <= 3.0, fmt("V = %.4f, MC %.4f, z = %.2f", v, e.mean, z));
    ck.note(fmt("V %.3f z %.2f", v, z));
  }
  return ck.result();
}

Outcome cooling_law() {
  Check ck;
  double worst = 0.0;
  for (double cv : {1000.0, 3000.0, 12000.0, 1e5}) {
    for (double t0 : {500.0, 2000.0}) {
      ParticleModel p = aerosol_particle(t0);
      p.heat_capacity = ParticleModel::heat_capacity_from_kB(cv);
      double span = 1e-6;
      while (analytic_cooling(p, span) > 0.45 * t0) span *= 2.0;
      const auto tr = cool(EmissionModel::greybody(p), span);
      for (int i = 0; i <= 400; ++i) {
        const double t = span * i / 400.0;
        const double ta = analytic_cooling(p, t);
        if (ta < 0.5 * t0) break;
        worst = std::max(worst, std::abs(tr.temperature(t) / ta - 1.0));
      }
    }
  }
  ck.expect(worst <= 5e-3, fmt("max relative difference %.3e", worst));
  ck.note(fmt("max relative difference %.2e", worst));
  return ck.result();
}

Outcome pattern_pipeline() {
  Check ck;
  ParticleModel p = aerosol_particle(1000.0);
  p.mass = 720.0 * c::amu;
  const auto g = beam(1e-6, p.mass);
  const auto base = EmissionModel::greybody(p);
  const double t0 = numerics::find_root([&](double t) { return visibility_thermal(g, base.with_initial_temperature(t), true) - 0.5; }, {100.0, 1000.0}, 1e-8);
  const auto m = base.with_initial_temperature(t0);
  const double v = visibility_thermal(g, m, true);
  const double period = g.fringe_period();
  const ScreenGrid sg{period / 16.0, 16 * 40};
  const auto pattern = far_field_pattern(ApertureModel::double_slit(1e-6, 5e-8), g, sg);
  const double nyq = c::pi * c::hbar / sg.spacing;
  const double q_fringe = 2.0 * c::pi * c::hbar / period;
  const auto half = static_cast<std::size_t>(std::ceil(40.0 * nyq / q_fringe));
  const auto kernel = build_kernel(g, m, true, MomentumGrid{nyq / static_cast<double>(half), half});
  const auto blurred = apply_decoherence(pattern, kernel);
  const ScreenWindow w{-4.0 * period, 4.0 * period};
  const double ratio = extract_visibility(blurred, w) / extract_visibility(pattern, w) / v;
  ck.expect(std::abs(ratio - 1.0) <= 0.02, fmt("extracted/analytic = %.5f", ratio));
  ck.expect(std::abs(kernel.area() - 1.0) <= 1e-6, fmt("kernel area %.9f", kernel.area()));
  double mx = 0.0, mn = INFINITY;
  for (double x : blurred.values) {
    mx = std::max(mx, x);
    mn = std::min(mn, x);
  }
  ck.expect(mn >= -1e-9 * mx, fmt("minimum %.3e of max %.3e", mn, mx));

  ParticleModel hot = p;
  hot.heat_capacity = kInfiniteHeatCapacity;
  hot.mass = 1e6 * c::amu;
  hot.initial_temperature = 300.0;
  const auto gh = beam(1e-6, hot.mass);
  const double kT = c::k_B * 300.0, pz = gh.longitudinal_momentum();
  const double sigma2 = 2.0 * hot.mass * hot.effective_area * std::pow(kT, 5) *
                        std::pow(gh.flight_distance / (c::hbar * pz), 3) / (3.0 * c::pi * c::pi * std::pow(c::c, 4));
  const double q_width = c::hbar / std::sqrt(sigma2);
  const auto gk = build_kernel(gh, EmissionModel::greybody(hot), false, MomentumGrid{8.0 * q_width / 200.0, 200});
  const double mom = gk.second_moment() / sigma2;
  ck.expect(std::abs(mom - 1.0) <= 0.02, fmt("second moment / sigma^2 = %.5f", mom));
  ck.note(fmt("V ratio %.4f, area-1 %.1e, moment %.4f", ratio, kernel.area() - 1.0, mom));
  return ck.result();
}

Outcome factor_two() {
  Check ck;
  double worst = 0.0;
  for (double t0 : {500.0, 1500.0, 3000.0}) {
    for (bool cooling : {false, true}) {
      const auto m = EmissionModel::greybody(aerosol_particle(t0));
      auto g = beam(5e-7, 1e6 * c::amu).with_time_of_flight(1e-4);
      const double e1 = visibility_exponent_thermal(g, m, cooling);
      g.coherence_slit_distance = g.flight_distance;
      const double e2 = visibility_exponent_thermal(g, m, cooling);
      worst = std::max(worst, std::abs(e2 / (2.0 * e1) - 1.0));
    }
  }
  ck.expect(worst <= 1e-9, fmt("max relative deviation %.3e", worst));
  ck.note(fmt("max relative deviation %.1e", worst));
  return ck.result();
}

Outcome band_gap() {
  Check ck;
  ParticleModel p;
  p.effective_area = 1e-22;
  p.mass = 840.0 * c::amu;
  p.heat_capacity = ParticleModel::heat_capacity_from_kB(204.0);
  p.initial_temperature = 3000.0;
  const double wc = 2.0 * c::pi * c::c / 800e-9;
  std::ostringstream os;
  os.precision(17);
  os << "omega_rad_per_s,sigma_abs_m2\n" << wc << ",0\n" << wc * (1.0 + 1e-7) << ",2.5e-23\n" << wc * 1000.0 << ",2.5e-23\n";
  std::istringstream is(os.str());
  const auto model = EmissionModel::tabulated(p, SpectrumTable::parse(is));
  const auto g = beam(500e-9, p.mass);
  double worst = 0.0;
  for (double t : {2500.0, 3000.0, 3500.0, 4000.0, 5000.0}) {
    const auto m = model.with_initial_temperature(t);
    for (bool cooling : {false, true}) {
      const auto a = invert_for_time(g, m, cooling, 1e3);
      const auto b = invert_for_time(g.with_slit_separation(1e-6), m, cooling, 1e3);
      if (!a.reached || !b.reached) {
        ck.expect(false, fmt("no crossing at T = %g", t));
        continue;
      }
      worst = std::max(worst, a.tau / b.tau);
    }
  }
  ck.expect(worst <= 1.3, fmt("tau(500 nm)/tau(1 um) up to %.4f", worst));
  ck.note(fmt("max tau(500 nm)/tau(1 um) %.3f over 2500-5000 K", worst));
  return ck.result();
}

}  // namespace

int main() {
  std::setvbuf(stdout, nullptr, _IONBF, 0);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"virus temperature", virus_temperature},
      {"closed form vs quadrature", closed_vs_quadrature},
      {"small-x limit", small_x_limit},
      {"tau sweep properties", aerosol_sweep},
      {"Monte Carlo vs analytic", monte_carlo},
      {"cooling law", cooling_law},
      {"pattern pipeline", pattern_pipeline},
      {"factor-2 rule", factor_two},
      {"band-gapped spectrum", band_gap},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %zu (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
