// vim:ts=2:et
//===========================================================================//
//                             "test_core.cpp":                              //
//            Series/panel containers, window resolution, utilities          //
//===========================================================================//
#include "pacov/core.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace pacov;

namespace
{
  TickSeries make_series(std::vector<double> t, std::vector<double> p,
                         std::string id = "X")
  {
    return TickSeries(std::move(id), std::move(t), std::move(p));
  }
}

//===========================================================================//
// TickSeries:                                                               //
//===========================================================================//
TEST_CASE("tick series invariants", "[core]")
{
  auto s = make_series({0.0, 0.25, 0.5, 1.0}, {4.0, 4.1, 4.05, 4.2});
  CHECK(s.count()         == 4);
  CHECK(s.returns_count() == 3);

  auto r = s.tick_returns();
  REQUIRE(r.size() == 3);
  CHECK(r[0] == Catch::Approx( 0.10).epsilon(1e-12));
  CHECK(r[1] == Catch::Approx(-0.05).epsilon(1e-12));
  CHECK(r[2] == Catch::Approx( 0.15).epsilon(1e-12));

  // Length mismatch, too few ticks, non-increasing times, out-of-range
  // times, non-finite prices:
  CHECK_THROWS_AS(make_series({0.0, 0.5}, {1.0}),               DataError);
  CHECK_THROWS_AS(make_series({0.5}, {1.0}),                    DataError);
  CHECK_THROWS_AS(make_series({0.0, 0.5, 0.5}, {1., 2., 3.}),   DataError);
  CHECK_THROWS_AS(make_series({0.0, 1.5}, {1.0, 2.0}),          DataError);
  CHECK_THROWS_AS(make_series({-.1, 0.5}, {1.0, 2.0}),          DataError);
  CHECK_THROWS_AS(
    make_series({0.0, 0.5}, {1.0, std::numeric_limits<double>::infinity()}),
    DataError);
}

//===========================================================================//
// SyncedPanel:                                                              //
//===========================================================================//
TEST_CASE("synced panel invariants and log returns", "[core]")
{
  Matrix p(4, 2);
  p << 0.0, 1.0,
       0.1, 1.2,
       0.3, 1.1,
       0.2, 1.4;
  std::vector<double> t{0.0, 0.3, 0.6, 1.0};

  SyncedPanel panel(t, p, SyncTag::calendar);
  CHECK(panel.n() == 3);
  CHECK(panel.d() == 2);
  CHECK(panel.tag() == SyncTag::calendar);

  Matrix r = log_returns(panel);
  REQUIRE(r.rows() == 3);
  REQUIRE(r.cols() == 2);
  CHECK(r(0, 0) == Catch::Approx( 0.1).epsilon(1e-12));
  CHECK(r(2, 1) == Catch::Approx( 0.3).epsilon(1e-12));
  CHECK(r(1, 0) == Catch::Approx( 0.2).epsilon(1e-12));

  // Row/time mismatch and single-point panels are rejected:
  CHECK_THROWS_AS(SyncedPanel({0.0, 0.5, 1.0}, p, SyncTag::calendar),
                  DataError);
  Matrix one(1, 2);
  one << 0.0, 0.0;
  CHECK_THROWS_AS(SyncedPanel({0.0}, one, SyncTag::calendar), DataError);
}

//===========================================================================//
// Window resolution:                                                        //
//===========================================================================//
TEST_CASE("window length resolution", "[core]")
{
  // Balanced case: kn = floor(theta sqrt(n)):
  {
    PreAvgConfig cfg;
    cfg.theta = 1.0;
    CHECK(resolve_kn(cfg, 23400) == 152);   // floor(sqrt(23400)) = 152
    CHECK(resolve_kn(cfg, 900)   == 30);
  }
  // Rational theta landing exactly on an integer must not lose it to
  // floating-point truncation:
  {
    PreAvgConfig cfg;
    cfg.theta = 1.0 / 3.0;
    CHECK(resolve_kn(cfg, 900) == 10);
  }
  // Exponent-shifted window: kn = floor(theta n^(1/2 + delta)):
  {
    PreAvgConfig cfg;
    cfg.theta = 0.15;
    cfg.delta = 0.1;
    long const expect =
      long(std::floor(0.15 * std::pow(23400.0, 0.6) + 1e-9));
    CHECK(resolve_kn(cfg, 23400) == expect);
  }
  // Explicit window short-circuits the rule:
  {
    PreAvgConfig cfg;
    cfg.explicit_kn = 31;
    CHECK(resolve_kn(cfg, 23400) == 31);
  }
  // Clamping to [2, n-1] is flagged:
  {
    PreAvgConfig cfg;
    cfg.theta = 0.01;
    auto res = resolve_kn_checked(cfg, 100);
    CHECK(res.kn == 2);
    CHECK(res.clamped);

    cfg.theta = 50.0;
    res = resolve_kn_checked(cfg, 100);
    CHECK(res.kn == 99);
    CHECK(res.clamped);
  }
  // Parameter validation:
  {
    PreAvgConfig cfg;
    CHECK_THROWS_AS(resolve_kn(cfg, 3), DataError);
    cfg.theta = 0.0;
    CHECK_THROWS_AS(resolve_kn(cfg, 100), DataError);
    cfg.theta = 1.0;
    cfg.delta = 0.5;
    CHECK_THROWS_AS(resolve_kn(cfg, 100), DataError);
    cfg.delta = -0.1;
    CHECK_THROWS_AS(resolve_kn(cfg, 100), DataError);
  }
}

//===========================================================================//
// Symmetrization and estimates:                                             //
//===========================================================================//
TEST_CASE("estimate container symmetrizes exactly", "[core]")
{
  Matrix m(2, 2);
  m << 1.0, 0.3000000001,
       0.2999999999, 2.0;
  auto est = make_cov_estimate(m, "test", 10, 100, false, false);
  CHECK(est.matrix(0, 1) == est.matrix(1, 0));
  CHECK(est.matrix(0, 1) == Catch::Approx(0.3).epsilon(1e-9));
  CHECK(est.estimator_name == "test");
  CHECK(est.kn_used == 10);
  CHECK(est.n_used  == 100);

  Matrix id = Matrix::Identity(3, 3);
  CHECK(min_eigenvalue(id) == Catch::Approx(1.0).epsilon(1e-12));
  Matrix neg(2, 2);
  neg << 1.0, 2.0,
         2.0, 1.0;
  CHECK(min_eigenvalue(neg) == Catch::Approx(-1.0).epsilon(1e-12));
}
