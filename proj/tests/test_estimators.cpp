// vim:ts=2:et
//===========================================================================//
//                          "test_estimators.cpp":                           //
//           Covariance estimators: deterministic oracles and edges          //
//===========================================================================//
#include "pacov/estimators.hpp"
#include "pacov/sync.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace pacov;

namespace
{
  // Panel with a uniform grid wrapped around given log prices:
  SyncedPanel panel_of(Matrix const& prices,
                       SyncTag tag = SyncTag::native_synchronous)
  {
    std::vector<double> t(std::size_t(prices.rows()));
    for (long i = 0; i < prices.rows(); ++i)
      t[std::size_t(i)] = double(i) / double(prices.rows() - 1);
    return SyncedPanel(std::move(t), prices, tag);
  }

  Matrix random_walk(std::mt19937_64& rng, long points, long d,
                     double step = 0.01)
  {
    std::normal_distribution<double> gauss(0.0, step);
    Matrix p(points, d);
    for (long k = 0; k < d; ++k)
    {
      p(0, k) = 0.0;
      for (long i = 1; i < points; ++i)
        p(i, k) = p(i - 1, k) + gauss(rng);
    }
    return p;
  }

  // Independent overlap oracle: plain double loop with the raw predicate:
  double brute_overlap(IntervalValues const& a, IntervalValues const& b)
  {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j)
        if (std::max(a.lo[i], b.lo[j]) < std::min(a.hi[i], b.hi[j]))
          acc += a.val[i] * b.val[j];
    return acc;
  }
}

//===========================================================================//
// Realised and noise covariance:                                            //
//===========================================================================//
TEST_CASE("realised covariance of a single return is its outer product",
          "[estimators]")
{
  Matrix p(2, 2);
  p << 0.0, 0.0,
       0.3, -0.1;
  auto est = realised_cov(panel_of(p));
  CHECK(est.estimator_name == "rv");
  CHECK(est.psd_guaranteed);
  CHECK(est.matrix(0, 0) == Catch::Approx(0.09).epsilon(1e-12));
  CHECK(est.matrix(0, 1) == Catch::Approx(-0.03).epsilon(1e-12));
  CHECK(est.matrix(1, 1) == Catch::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("noise covariance halves the mean return outer product",
          "[estimators]")
{
  // Univariate returns {+a, -a}: (a^2 + a^2) / (2*2) = a^2/2:
  double const a = 0.25;
  Matrix p(3, 1);
  p << 0.0, a, 0.0;
  auto est = noise_cov(panel_of(p));
  CHECK(est.matrix(0, 0) == Catch::Approx(a * a / 2.0).epsilon(1e-12));
  CHECK(est.n_used == 2);

  Matrix flat = Matrix::Constant(5, 2, 1.3);
  CHECK(noise_cov(panel_of(flat)).matrix.norm() == 0.0);
}

//===========================================================================//
// Balanced modulated estimator:                                             //
//===========================================================================//
TEST_CASE("balanced estimator vanishes on constant prices", "[estimators]")
{
  Matrix p = Matrix::Constant(40, 2, 0.7);
  auto est = mrc_balanced(panel_of(p), WeightScheme::make_min());
  CHECK(est.matrix.norm() == 0.0);
  CHECK(est.bias_corrected);
  CHECK_FALSE(est.psd_guaranteed);
}

TEST_CASE("balanced estimator matches a scalar-loop recomputation",
          "[estimators]")
{
  std::mt19937_64 rng(7);
  long const n  = 12;
  long const kn = 4;
  Matrix p = random_walk(rng, n + 1, 1, 0.1);
  auto panel  = panel_of(p);
  auto scheme = WeightScheme::make_min();

  PreAvgConfig cfg;
  cfg.explicit_kn = kn;
  auto est = mrc_balanced(panel, scheme, cfg);

  // Independent elementwise recomputation of the full chain:
  auto fc = finite_sample_constants(scheme, kn);
  std::vector<double> r(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i)
    r[std::size_t(i)] = p(i + 1, 0) - p(i, 0);

  double raw = 0.0;
  for (long i = 0; i <= n - kn + 1; ++i)
  {
    double acc = 0.0;
    for (long j = 1; j <= kn - 1; ++j)
      acc += scheme.g(double(j) / double(kn)) * r[std::size_t(i + j - 1)];
    raw += acc * acc;
  }
  double const theta2 = double(kn) * double(kn) / double(n);
  double psi_hat = 0.0;
  for (double v : r)
    psi_hat += v * v;
  psi_hat /= 2.0 * double(n);

  double expect = double(n) / double(n - kn + 2) * raw /
                  (fc.psi2 * double(kn));
  expect -= fc.psi1 / (theta2 * fc.psi2) * psi_hat;
  expect /= 1.0 - fc.psi1 / (theta2 * fc.psi2 * 2.0 * double(n));

  CHECK(est.matrix(0, 0) == Catch::Approx(expect).epsilon(1e-12));
  CHECK(est.kn_used == kn);
  CHECK(est.n_used  == n);
}

TEST_CASE("balanced estimator satisfies the polarization identity",
          "[estimators]")
{
  std::mt19937_64 rng(17);
  long const n = 300;
  Matrix p = random_walk(rng, n + 1, 2, 0.02);

  Matrix plus  = p.col(0) + p.col(1);
  Matrix minus = p.col(0) - p.col(1);

  auto scheme = WeightScheme::make_min();
  PreAvgConfig cfg;   // theta = 1

  auto joint = mrc_balanced(panel_of(p),     scheme, cfg);
  auto mp    = mrc_balanced(panel_of(plus),  scheme, cfg);
  auto mm    = mrc_balanced(panel_of(minus), scheme, cfg);

  double const polarized = 0.25 * (mp.matrix(0, 0) - mm.matrix(0, 0));
  CHECK(joint.matrix(0, 1) ==
        Catch::Approx(polarized).margin(1e-10 * std::fabs(polarized) +
                                        1e-14));
}

TEST_CASE("balanced estimator rejects a positive delta", "[estimators]")
{
  Matrix p = Matrix::Zero(30, 1);
  PreAvgConfig cfg;
  cfg.delta = 0.1;
  CHECK_THROWS_AS(mrc_balanced(panel_of(p), WeightScheme::make_min(), cfg),
                  DataError);
}

//===========================================================================//
// Longer-window positive estimator:                                         //
//===========================================================================//
TEST_CASE("longer-window estimator stays positive semi-definite",
          "[estimators]")
{
  std::mt19937_64 rng(23);
  PreAvgConfig cfg;
  cfg.delta = 0.1;

  for (int rep = 0; rep < 25; ++rep)
  {
    long const n = 40 + long(rng() % 200);
    Matrix p = random_walk(rng, n + 1, 3, 0.05);
    auto est = mrc_psd(panel_of(p), WeightScheme::make_min(), cfg);
    CHECK(est.psd_guaranteed);
    CHECK_FALSE(est.bias_corrected);
    CHECK(min_eigenvalue(est.matrix) >= -1e-12 * est.matrix.trace());
  }

  PreAvgConfig bad;   // delta = 0
  Matrix p = Matrix::Zero(30, 1);
  CHECK_THROWS_AS(mrc_psd(panel_of(p), WeightScheme::make_min(), bad),
                  DataError);
}

//===========================================================================//
// Kernel re-expression:                                                     //
//===========================================================================//
TEST_CASE("kernel weights: flat interior, flat-top implied kernel",
          "[estimators]")
{
  auto scheme = WeightScheme::make_min();
  long const kn = 10;
  long const n  = 200;
  auto kf = build_kernel_form(scheme, kn, n);

  REQUIRE(long(kf.delta0.size()) == n);
  REQUIRE(long(kf.deltah.size()) == kn - 2);

  // Interior lag-0 weights are identical (ramp-in before, ramp-out after):
  double const mid = kf.delta0[std::size_t(kn - 1)];
  for (long i = kn - 1; i <= n - kn + 2; ++i)
    CHECK(kf.delta0[std::size_t(i - 1)] == mid);
  CHECK(kf.delta0[0] < mid);
  CHECK(kf.delta0[std::size_t(n - 1)] < mid);

  // Flat-top conditions of the implied kernel, checked numerically:
  CHECK(kf.implied_kernel(0.0) == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(kf.implied_kernel(1.0) == Catch::Approx(0.0).margin(1e-12));
  double const h = 1e-4;
  CHECK(std::fabs((kf.implied_kernel(h) - kf.implied_kernel(0.0)) / h)
        < 1e-3);
  CHECK(std::fabs((kf.implied_kernel(1.0) - kf.implied_kernel(1.0 - h)) / h)
        < 1e-3);

  CHECK_THROWS_AS(build_kernel_form(scheme, 10, 19), DataError);
}

TEST_CASE("ramp scheme implies the classic smooth second-order kernel",
          "[estimators]")
{
  // k(s) = phi2(s)/psi2 for g = min(x,1-x) is the Parzen kernel:
  //   1 - 6s^2 + 6s^3 on [0,1/2],  2(1-s)^3 on [1/2,1]:
  auto scheme = WeightScheme::make_min();
  for (int q = 0; q <= 100; ++q)
  {
    double const s = double(q) / 100.0;
    double const parzen = (s <= 0.5)
                        ? 1.0 - 6.0 * s * s + 6.0 * s * s * s
                        : 2.0 * (1.0 - s) * (1.0 - s) * (1.0 - s);
    CHECK(implied_kernel(scheme, s) ==
          Catch::Approx(parzen).margin(1e-8));
  }
}

TEST_CASE("kernel form reproduces the balanced estimator pre-rescaling",
          "[estimators]")
{
  std::mt19937_64 rng(31);
  auto scheme = WeightScheme::make_min();

  MrcOptions pre;
  pre.sample_size_factor = false;
  pre.bias_correct       = true;
  pre.rescale            = false;

  for (long kn : {4L, 10L, 31L})
  {
    long const n = 200;
    Matrix p = random_walk(rng, n + 1, 1, 0.03);
    auto panel = panel_of(p);

    PreAvgConfig cfg;
    cfg.explicit_kn = kn;

    auto viaK = mrc_kernel_form(panel, scheme, cfg);
    auto viaP = mrc_balanced(panel, scheme, cfg, pre);
    double const rel =
      std::fabs(viaK.matrix(0, 0) - viaP.matrix(0, 0)) /
      std::fabs(viaP.matrix(0, 0));
    CHECK(rel < 1e-10);
  }

  // Multivariate equivalence:
  {
    long const n = 120;
    Matrix p = random_walk(rng, n + 1, 2, 0.03);
    auto panel = panel_of(p);
    PreAvgConfig cfg;
    cfg.explicit_kn = 8;
    auto viaK = mrc_kernel_form(panel, scheme, cfg);
    auto viaP = mrc_balanced(panel, scheme, cfg, pre);
    CHECK((viaK.matrix - viaP.matrix).norm() / viaP.matrix.norm() < 1e-10);
  }

  // Degenerate window kn = 2 (no off-diagonal lags at all):
  {
    long const n = 20;
    Matrix p = random_walk(rng, n + 1, 1, 0.03);
    auto panel = panel_of(p);
    PreAvgConfig cfg;
    cfg.explicit_kn = 2;
    auto viaK = mrc_kernel_form(panel, scheme, cfg);
    auto viaP = mrc_balanced(panel, scheme, cfg, pre);
    CHECK(viaK.matrix(0, 0) ==
          Catch::Approx(viaP.matrix(0, 0)).epsilon(1e-12));
  }
}

//===========================================================================//
// Overlap-indicator estimators:                                             //
//===========================================================================//
TEST_CASE("classic overlap estimator on identical grids is realised "
          "covariance", "[estimators]")
{
  std::mt19937_64 rng(41);
  Matrix p = random_walk(rng, 25, 2, 0.1);
  auto panel = panel_of(p);

  std::vector<double> t = panel.grid_times();
  std::vector<double> p1(25), p2(25);
  for (long i = 0; i < 25; ++i)
  {
    p1[std::size_t(i)] = p(i, 0);
    p2[std::size_t(i)] = p(i, 1);
  }
  TickSeries a("A", t, p1);
  TickSeries b("B", t, p2);

  double const hy = hy_classic(a, b);
  auto   const rv = realised_cov(panel);
  CHECK(hy == Catch::Approx(rv.matrix(0, 1)).epsilon(1e-12));
}

TEST_CASE("classic overlap estimator: hand-traced asynchronous case",
          "[estimators]")
{
  // a-returns: 1 on (0, 0.4],  2 on (0.4, 0.8]
  // b-returns: 5 on (0.1, 0.5], 1 on (0.5, 0.9]
  // Overlaps: (r1,s1): 1*5; (r2,s1): 2*5; (r2,s2): 2*1  ->  17:
  TickSeries a("A", {0.0, 0.4, 0.8}, {0.0, 1.0, 3.0});
  TickSeries b("B", {0.1, 0.5, 0.9}, {0.0, 5.0, 6.0});
  CHECK(hy_classic(a, b) == Catch::Approx(17.0).epsilon(1e-14));
  CHECK(hy_classic(b, a) == Catch::Approx(17.0).epsilon(1e-14));
}

TEST_CASE("two-pointer overlap sweep equals brute force bit-for-bit",
          "[estimators]")
{
  std::mt19937_64 rng(53);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  for (int rep = 0; rep < 50; ++rep)
  {
    auto make_iv = [&](std::size_t cnt)
    {
      std::vector<double> t(cnt + 1);
      t[0] = uni(rng) * 0.05;
      for (std::size_t i = 1; i <= cnt; ++i)
        t[i] = t[i - 1] + 1e-4 + uni(rng) * 0.04;
      IntervalValues iv;
      // Window length 3 intervals, clamped at the tail:
      for (std::size_t i = 0; i + 1 <= cnt; ++i)
      {
        iv.lo.push_back(t[i]);
        iv.hi.push_back(t[std::min(i + 3, cnt)]);
        iv.val.push_back(gauss(rng));
      }
      return iv;
    };

    auto const A = make_iv(5 + rng() % 45);
    auto const B = make_iv(5 + rng() % 45);

    // Exact equality required (same products, same order):
    CHECK(overlap_product_sum(A, B) == brute_overlap(A, B));
    CHECK(overlap_product_sum(A, A) == brute_overlap(A, A));
  }
}

TEST_CASE("pre-averaged overlap estimator against a full brute-force "
          "pipeline", "[estimators]")
{
  std::mt19937_64 rng(61);
  std::normal_distribution<double> gauss(0.0, 0.02);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  auto make_series = [&](std::string id, std::size_t ticks)
  {
    std::vector<double> t(ticks), p(ticks);
    t[0] = uni(rng) * 0.02;
    p[0] = 0.0;
    for (std::size_t i = 1; i < ticks; ++i)
    {
      t[i] = t[i - 1] + 1e-4 + uni(rng) * (0.9 / double(ticks));
      p[i] = p[i - 1] + gauss(rng);
    }
    return TickSeries(std::move(id), std::move(t), std::move(p));
  };

  auto a = make_series("A", 40);
  auto b = make_series("B", 28);
  auto scheme = WeightScheme::make_min();

  PreAvgConfig cfg;
  cfg.explicit_kn = 5;
  auto est = hy_preavg({a, b}, scheme, cfg);
  CHECK(est.estimator_name == "hy-preavg");
  CHECK(est.kn_used == 5);
  CHECK(est.n_used  == 39 + 27);

  // Brute pipeline: scalar pre-averaging, explicit window intervals,
  // double-loop overlap scan, explicit normalizer:
  long const kn = 5;
  auto brute_windows = [&](TickSeries const& s)
  {
    long const nr = s.returns_count();
    auto  r  = s.tick_returns();
    IntervalValues iv;
    for (long i = 0; i <= nr - kn + 1; ++i)
    {
      double acc = 0.0;
      for (long j = 1; j <= kn - 1; ++j)
        acc += scheme.g(double(j) / double(kn)) * r[std::size_t(i + j - 1)];
      iv.lo.push_back(s.times()[std::size_t(i)]);
      iv.hi.push_back(s.times()[std::size_t(std::min(i + kn, nr))]);
      iv.val.push_back(acc);
    }
    return iv;
  };

  double wsum = 0.0;
  for (long j = 1; j <= kn - 1; ++j)
    wsum += scheme.g(double(j) / double(kn));

  auto const wa = brute_windows(a);
  auto const wb = brute_windows(b);
  double const e01 = brute_overlap(wa, wb) / (wsum * wsum);
  double const e00 = brute_overlap(wa, wa) / (wsum * wsum);
  double const e11 = brute_overlap(wb, wb) / (wsum * wsum);

  CHECK(est.matrix(0, 1) == Catch::Approx(e01).margin(1e-13));
  CHECK(est.matrix(0, 0) == Catch::Approx(e00).margin(1e-13));
  CHECK(est.matrix(1, 1) == Catch::Approx(e11).margin(1e-13));

  // Window too long for the shorter series:
  PreAvgConfig toolong;
  toolong.explicit_kn = 30;
  CHECK_THROWS_AS(hy_preavg({a, b}, scheme, toolong), DataError);
}

//===========================================================================//
// Derived statistics:                                                       //
//===========================================================================//
TEST_CASE("slope and correlation transforms", "[estimators]")
{
  auto est_of = [](Matrix m)
  {
    return make_cov_estimate(std::move(m), "test", 0, 1, false, false);
  };

  CHECK(*beta_of(est_of(Matrix::Identity(2, 2)), 0, 1).beta == 0.0);
  CHECK(*corr_of(est_of(Matrix::Identity(2, 2)), 0, 1).corr == 0.0);

  Matrix m1(2, 2);
  m1 << 1.0, 0.91,
        0.91, 1.0;
  CHECK(*corr_of(est_of(m1), 0, 1).corr ==
        Catch::Approx(0.91).epsilon(1e-14));

  Matrix m2(2, 2);
  m2 << 4.0, 2.0,
        2.0, 4.0;
  CHECK(*beta_of(est_of(m2), 0, 1).beta ==
        Catch::Approx(0.5).epsilon(1e-14));
  CHECK(*corr_of(est_of(m2), 0, 1).corr ==
        Catch::Approx(0.5).epsilon(1e-14));

  Matrix bad(2, 2);
  bad << 0.0, 0.0,
         0.0, 1.0;
  CHECK_THROWS_AS(beta_of(est_of(bad), 0, 1), NumericError);
  CHECK_THROWS_AS(corr_of(est_of(bad), 0, 1), NumericError);
  CHECK_THROWS_AS(beta_of(est_of(m2), 0, 5), DataError);
}

//===========================================================================//
// Sampling-scheme diagnostics:                                              //
//===========================================================================//
TEST_CASE("scheme diagnostics on constructed grids", "[estimators]")
{
  auto grid = [](long cnt) -> std::vector<double>
  {
    std::vector<double> t(static_cast<std::size_t>(cnt));
    for (long i = 0; i < cnt; ++i)
      t[std::size_t(i)] = double(i) / double(cnt - 1);
    return t;
  };
  auto flat = [](long cnt)
  {
    return std::vector<double>(std::size_t(cnt), 0.0);
  };

  // Identical equidistant grids:
  TickSeries a("A", grid(11), flat(11));
  TickSeries b("B", grid(11), flat(11));
  auto diag = scheme_diagnostics({a, b});
  CHECK(diag.k_hat == 1.0);
  CHECK(diag.c_hat == Catch::Approx(1.0).epsilon(1e-9));
  CHECK_FALSE(diag.warning);

  // One series 10x denser:
  TickSeries dense("D", grid(101), flat(101));
  auto diag2 = scheme_diagnostics({a, dense});
  CHECK(diag2.k_hat == Catch::Approx(10.0));

  // Single irregular gap sets the spacing ratio:
  TickSeries gap("G", {0.0, 0.1, 0.3}, {0.0, 0.0, 0.0});
  auto diag3 = scheme_diagnostics({gap, a});
  CHECK(diag3.c_hat == Catch::Approx(2.0).epsilon(1e-12));

  CHECK_THROWS_AS(scheme_diagnostics({a}), DataError);
}
