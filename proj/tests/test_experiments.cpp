#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "bfam/experiments.hpp"
#include "bfam/spectral.hpp"
#include "support.hpp"

using namespace bfam;
using testing::gaussian;

namespace {

SolverConfig config(double dt) {
  SolverConfig c;
  c.dt = dt;
  c.T = 1.0;
  c.snapshot_stride = 1000000;
  return c;
}

NonUniformityConfig small_setup(int N) {
  const Grid g = make_grid(10, N);
  NonUniformityConfig cfg{.u0 = build_bump(0, 5, 2, 0.3, g), .v = gaussian(g, 2.5, 2), .params = BParams(2, 2)};
  cfg.R = 4;
  cfg.n_values = {1, 2, 4, 8};
  cfg.solver = config(5e-3);
  return cfg;
}

}  // namespace

TEST_CASE("build_bump") {
  const Grid g = make_grid(20, 1024);
  CHECK(sup_norm(build_bump(1, 2, 2, 0.0, g)) == 0.0);
  for (double s : {-0.4, 0.5, 2.0}) {
    const Field w = build_bump(1, 2, s, 0.125, g);
    CHECK(std::abs(hs_norm(w, s) - 0.125) <= 1e-10 * 0.125);
  }
  const Field w = build_bump(-3, 1.5, 2, 1.0, g);
  const double peak = sup_norm(w);
  for (int j = 0; j < g.n_points; ++j)
    if (std::abs(g.x(j) + 3) >= 1.5) CHECK(std::abs(w[j]) <= 1e-13 * peak);
  CHECK_THROWS_AS(build_bump(0, 3 * g.spacing, 2, 1, g), std::invalid_argument);
  CHECK_THROWS_AS(build_bump(14, 2, 2, 1, g), std::invalid_argument);
  CHECK_THROWS_AS(build_bump(0, 1, 2, -1, g), std::invalid_argument);
}

TEST_CASE("estimate_probe_geometry") {
  const Grid g = make_grid(10, 256);
  NonUniformityConfig cfg{.u0 = Field::zeros(g), .v = gaussian(g, 0.2, 1.5, 1.0), .params = BParams(2, 2)};
  cfg.solver = config(0.02);
  const ProbeGeometry geo = estimate_probe_geometry(cfg);
  CHECK(std::abs(geo.x0_est - 1.0) <= g.spacing / 2);
  const double expect = 0.2 / hs_norm(cfg.v, 2);
  MESSAGE("m_est " << geo.m_est << " vs max|v|/|v|_s " << expect);
  CHECK(geo.m_est == doctest::Approx(expect).epsilon(1e-3));
  CHECK(geo.L_est == doctest::Approx(1.5).epsilon(1e-12));

  NonUniformityConfig zero = cfg;
  zero.v = Field::zeros(g);
  CHECK_THROWS_AS(estimate_probe_geometry(zero), DegenerateProbe);

  SUBCASE("stable under step halving") {
    NonUniformityConfig c2 = cfg;
    c2.u0 = gaussian(g, 0.3, 2.0, -1.0);
    const double m1 = estimate_probe_geometry(c2).m_est;
    c2.eps_dexp /= 2;
    const double m2 = estimate_probe_geometry(c2).m_est;
    CHECK(testing::rel(m2, m1) <= 0.05);
  }
}

TEST_CASE("nonuniformity_experiment") {
  const NonUniformityConfig cfg = small_setup(1024);
  const ExperimentReport rep = nonuniformity_experiment(cfg);
  REQUIRE(rep.rows.size() == 4u);
  const double vnorm = hs_norm(cfg.v, 2);
  CHECK(rep.v_norm == vnorm);
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    MESSAGE("n=" << r.n << " r_n=" << r.r_n << " in=" << r.input_distance << " out=" << r.output_distance
                 << " gap=" << r.witness_gap << " resolved=" << r.resolved_ok);
    CHECK(r.input_distance == doctest::Approx(vnorm / r.n).epsilon(1e-12));
    CHECK(r.r_n * r.n == doctest::Approx(rep.rows[0].r_n).epsilon(1e-14));
    if (i > 0) CHECK(r.r_n < rep.rows[i - 1].r_n);
    if (!r.resolved_ok) CHECK(std::isnan(r.output_distance));
  }
  CHECK(rep.rows.back().resolved_ok == false);
  CHECK(rep.resolved().size() >= 2u);
  CHECK(rep.witness_bound_holds());
  CHECK(rep.disjoint_holds());
  CHECK(rep.separation_persists());

  SUBCASE("separation per unit R") {
    NonUniformityConfig half = cfg;
    half.R = cfg.R / 2;
    half.n_values = {1, 2};
    const ExperimentReport other = nonuniformity_experiment(half);
    const double c4 = rep.rows[0].output_distance / cfg.R, c2 = other.rows[0].output_distance / half.R;
    MESSAGE("output separation / R: R=" << cfg.R << " " << c4 << "  R=" << half.R << " " << c2);
    CHECK(c4 > 0);
    CHECK(c2 > 0);
    CHECK(std::max(c4, c2) / std::min(c4, c2) < 10);
  }

  SUBCASE("deterministic") {
    const ExperimentReport again = nonuniformity_experiment(cfg);
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
      if (!rep.rows[i].resolved_ok) continue;
      CHECK(again.rows[i].output_distance == rep.rows[i].output_distance);
      CHECK(again.rows[i].witness_gap == rep.rows[i].witness_gap);
    }
  }
}

TEST_CASE("scaling_check and time_one_map") {
  const Grid g = make_grid(20, 256);
  const BParams p(2, 2);
  const Field u0 = gaussian(g, 0.5, 2);
  CHECK(scaling_check(u0, 1.0, 0.5, p, config(0.01)) == 0.0);
  CHECK(scaling_check(Field::zeros(g), 2.0, 0.5, p, config(0.01)) == 0.0);
  CHECK(scaling_check(u0, 2.0, 0.5, p, config(0.01)) <= 1e-6);
  CHECK(scaling_check(u0, 3.0, 0.5, p, config(0.01)) <= 1e-6);
  CHECK_THROWS_AS(scaling_check(u0, 0.0, 0.5, p, config(0.01)), std::invalid_argument);

  CHECK(sup_norm(time_one_map(Field::zeros(g), p, config(0.1))) == 0.0);
  SolverConfig capped = config(0.01);
  capped.blowup_norm_cap = 0.1;
  CHECK_THROWS_AS(time_one_map(u0, p, capped), OutsideDomain);

  SUBCASE("continuity along a shrinking perturbation") {
    const Field base = time_one_map(u0, p, config(0.01));
    const Field delta = gaussian(g, 0.2, 1.0, 1.0);
    double prev = 1e300;
    for (double eps : {1.0, 0.1, 0.01, 0.001}) {
      const double d = hs_norm(time_one_map(u0 + eps * delta, p, config(0.01)) - base, 2);
      CHECK(d < prev);
      prev = d;
    }
    CHECK(prev <= 1e-2 * hs_norm(delta, 2));
  }
}
