// vim:ts=2:et
//===========================================================================//
//                             "estimators.hpp":                             //
//     Covariance estimators: realised, noise, modulated pre-averaging,      //
//           kernel re-expression, and overlap-indicator variants            //
//===========================================================================//
#pragma once

#include "pacov/core.hpp"
#include "pacov/preavg.hpp"
#include "pacov/weights.hpp"

namespace pacov
{
  //=========================================================================//
  // "realised_cov": plain sum of return outer products:                     //
  //=========================================================================//
  inline CovEstimate realised_cov(SyncedPanel const& a_panel)
  {
    Matrix const r = log_returns(a_panel);
    Matrix       m = r.transpose() * r;
    auto est = make_cov_estimate(std::move(m), "rv", 0, a_panel.n(),
                                 false, true, to_string(a_panel.tag()));
    return est;
  }

  //=========================================================================//
  // "noise_cov": half the average return outer product:                     //
  //=========================================================================//
  // Consistent for the noise covariance at high frequency, where the noise
  // dominates each individual return:
  //
  inline NoiseCovEstimate noise_cov(Matrix const& a_returns)
  {
    long const n = a_returns.rows();
    if (n < 1)
      throw DataError("noise_cov: need at least one return");
    NoiseCovEstimate out;
    out.matrix =
      symmetrize(a_returns.transpose() * a_returns / (2.0 * double(n)));
    out.n_used = n;
    return out;
  }

  inline NoiseCovEstimate noise_cov(SyncedPanel const& a_panel)
  {
    return noise_cov(log_returns(a_panel));
  }

  //=========================================================================//
  // "MrcOptions":                                                           //
  //=========================================================================//
  // The estimator chain is factored so the kernel re-expression (which has
  // no small-sample factor and no final rescaling) can be compared against
  // the exact same arithmetic:
  //
  struct MrcOptions
  {
    bool sample_size_factor = true;   // n / (n - kn + 2) on the raw sum
    bool bias_correct       = true;   // subtract the noise-induced bias
    bool rescale            = true;   // final 1/(1 - psi1/(theta^2 psi2 2n))
  };

  //=========================================================================//
  // "mrc_balanced":                                                         //
  //=========================================================================//
  // Modulated realised covariance with the balanced window kn ~ theta
  // sqrt(n).  Raw pre-averaged sum, small-sample factor, noise bias
  // subtraction and final rescaling; theta^2 is recovered from the realized
  // window as kn^2/n so window and correction never drift apart.  All
  // constants are the finite-sample Riemann versions:
  //
  inline CovEstimate
  mrc_balanced
  (
    SyncedPanel  const& a_panel,
    WeightScheme const& a_scheme,
    PreAvgConfig const& a_config = PreAvgConfig(),
    MrcOptions   const& a_opts   = MrcOptions()
  )
  {
    if (a_config.delta != 0.0)
      throw DataError("mrc_balanced: delta must be 0 (use mrc_psd)");

    long const n  = a_panel.n();
    long const kn = resolve_kn(a_config, n);
    auto const fc = a_scheme.finite_constants(kn);

    double const dn     = double(n);
    double const theta2 = double(kn) * double(kn) / dn;
    double const ratio  = fc->psi1 / (theta2 * fc->psi2);

    Matrix const pbar = preaveraged_panel(a_panel, a_scheme, kn);
    Matrix m = pbar.transpose() * pbar / (fc->psi2 * double(kn));

    if (a_opts.sample_size_factor)
      m *= dn / double(n - kn + 2);

    if (a_opts.bias_correct)
      m -= ratio * noise_cov(a_panel).matrix;

    if (a_opts.rescale)
      m /= 1.0 - ratio / (2.0 * dn);

    auto est = make_cov_estimate(std::move(m), "mrc", kn, n,
                                 a_opts.bias_correct, false,
                                 to_string(a_panel.tag()));
    est.psd_warning = min_eigenvalue(est.matrix) < 0.0;
    return est;
  }

  //=========================================================================//
  // "mrc_psd":                                                              //
  //=========================================================================//
  // Longer window kn ~ theta n^(1/2+delta), delta in (0, 1/2): the noise
  // bias vanishes asymptotically on its own, no correction is subtracted,
  // and the estimate stays a positively weighted sum of outer products:
  //
  inline CovEstimate
  mrc_psd
  (
    SyncedPanel  const& a_panel,
    WeightScheme const& a_scheme,
    PreAvgConfig const& a_config
  )
  {
    if (!(a_config.delta > 0.0 && a_config.delta < 0.5))
      throw DataError("mrc_psd: delta must lie in (0, 1/2)");

    long const n  = a_panel.n();
    long const kn = resolve_kn(a_config, n);
    auto const fc = a_scheme.finite_constants(kn);

    Matrix const pbar = preaveraged_panel(a_panel, a_scheme, kn);
    Matrix m = (double(n) / double(n - kn + 2)) *
               (pbar.transpose() * pbar) / (fc->psi2 * double(kn));

    return make_cov_estimate(std::move(m), "mrc-psd", kn, n, false, true,
                             to_string(a_panel.tag()));
  }

  //=========================================================================//
  // "implied_kernel": k(s) = phi2(s)/psi2 (flat-top by construction):       //
  //=========================================================================//
  inline double implied_kernel(WeightScheme const& a_scheme, double a_s)
  {
    return a_scheme.phi2(a_s) / a_scheme.constants().psi2;
  }

  //=========================================================================//
  // "KernelForm":                                                           //
  //=========================================================================//
  // The autocovariance re-expression of the balanced estimator: per-lag
  // weights delta0[i] (i = 1..n, stored 0-based) and deltah[h-1][i-1]
  // (h = 1..kn-2, i = 1..n-h), three-piece in i (ramp-in, flat interior,
  // ramp-out), with the noise-bias term folded into the lag-0 weights:
  //
  struct KernelForm
  {
    long                kn = 0;
    long                n  = 0;
    WeightScheme        scheme;
    std::vector<double> delta0;                // length n
    std::vector<std::vector<double>> deltah;   // [h-1], length n-h

    double implied_kernel(double a_s) const
      { return pacov::implied_kernel(scheme, a_s); }
  };

  inline KernelForm
  build_kernel_form(WeightScheme const& a_scheme, long a_kn, long a_n)
  {
    if (a_kn < 2 || a_n < 2 * a_kn)
      throw DataError("build_kernel_form: need kn >= 2 and n >= 2 kn "
                      "(boundary ramps must not overlap)");

    auto const fc = a_scheme.finite_constants(a_kn);
    long const   kn   = a_kn;
    long const   n    = a_n;
    double const dkn  = double(kn);
    double const dn   = double(n);
    double const th2  = dkn * dkn / dn;
    double const norm = 1.0 / (fc->psi2 * dkn);
    double const bias = fc->psi1 / (th2 * fc->psi2 * 2.0 * dn);

    // Window weights g(j/kn), extended by zero beyond the window:
    std::vector<double> gv(std::size_t(kn) + 1, 0.0);
    for (long j = 0; j <= kn; ++j)
      gv[std::size_t(j)] = a_scheme.g(double(j) / dkn);
    auto gext = [&](long j) -> double
      { return (j >= 0 && j <= kn) ? gv[std::size_t(j)] : 0.0; };

    KernelForm kf;
    kf.kn     = kn;
    kf.n      = n;
    kf.scheme = a_scheme;

    // Lag 0: prefix sums of g^2 for the ramp-in, reversed-index tail sums
    // for the ramp-out:
    std::vector<double> pre0(std::size_t(kn), 0.0);     // pre0[i], i<=kn-1
    for (long i = 1; i <= kn - 1; ++i)
      pre0[std::size_t(i)] =
        pre0[std::size_t(i - 1)] + gv[std::size_t(i)] * gv[std::size_t(i)];
    std::vector<double> tail0(std::size_t(kn), 0.0);    // tail0[q], q<=kn-1
    for (long q = 1; q <= kn - 1; ++q)
      tail0[std::size_t(q)] =
        tail0[std::size_t(q - 1)] +
        gv[std::size_t(kn - q)] * gv[std::size_t(kn - q)];

    kf.delta0.assign(std::size_t(n), 0.0);
    for (long i = 1; i <= n; ++i)
    {
      double core = 0.0;
      if (i <= kn - 2)
        core = pre0[std::size_t(i)];
      else if (i <= n - kn + 2)
        core = pre0[std::size_t(kn - 1)];
      else
        core = tail0[std::size_t(n - i + 1)];
      kf.delta0[std::size_t(i - 1)] = norm * core - bias;
    }

    // Lags h = 1..kn-2:
    kf.deltah.resize(std::size_t(std::max<long>(kn - 2, 0)));
    for (long h = 1; h <= kn - 2; ++h)
    {
      std::vector<double> preh(std::size_t(kn), 0.0);
      for (long j = 1; j <= kn - 1; ++j)
        preh[std::size_t(j)] =
          preh[std::size_t(j - 1)] + gv[std::size_t(j)] * gext(j + h);
      std::vector<double> tailh(std::size_t(kn), 0.0);
      for (long q = 1; q <= kn - 1; ++q)
        tailh[std::size_t(q)] =
          tailh[std::size_t(q - 1)] +
          gv[std::size_t(kn - q)] * gext(kn - q + h);

      auto& row = kf.deltah[std::size_t(h - 1)];
      row.assign(std::size_t(n - h), 0.0);
      for (long i = 1; i <= n - h; ++i)
      {
        double core = 0.0;
        if (i <= kn - h - 2)
          core = preh[std::size_t(i)];
        else if (i <= n - kn + 2)
          core = preh[std::size_t(kn - h - 1)];
        else
          core = tailh[std::size_t(n - i + 1)];
        row[std::size_t(i - 1)] = norm * core;
      }
    }
    return kf;
  }

  //=========================================================================//
  // "mrc_kernel_form":                                                      //
  //=========================================================================//
  // Evaluates the re-expression directly on return autocovariances.  By
  // construction it reproduces mrc_balanced with the small-sample factor
  // and final rescaling switched off (exactly, in exact arithmetic):
  //
  inline CovEstimate
  mrc_kernel_form
  (
    SyncedPanel  const& a_panel,
    WeightScheme const& a_scheme,
    PreAvgConfig const& a_config = PreAvgConfig()
  )
  {
    if (a_config.delta != 0.0)
      throw DataError("mrc_kernel_form: delta must be 0");

    long const n  = a_panel.n();
    long const kn = resolve_kn(a_config, n);
    auto const kf = build_kernel_form(a_scheme, kn, n);

    Matrix const r = log_returns(a_panel);
    long const   d = a_panel.d();

    Matrix m = Matrix::Zero(d, d);
    for (long i = 1; i <= n; ++i)
      m.noalias() += kf.delta0[std::size_t(i - 1)] *
                     (r.row(i - 1).transpose() * r.row(i - 1));
    for (long h = 1; h <= kn - 2; ++h)
    {
      auto const& row = kf.deltah[std::size_t(h - 1)];
      for (long i = 1; i <= n - h; ++i)
      {
        double const w = row[std::size_t(i - 1)];
        m.noalias() += w * (r.row(i - 1).transpose() * r.row(i + h - 1) +
                            r.row(i + h - 1).transpose() * r.row(i - 1));
      }
    }

    auto est = make_cov_estimate(std::move(m), "mrc-kernel", kn, n, true,
                                 false, to_string(a_panel.tag()));
    est.psd_warning = min_eigenvalue(est.matrix) < 0.0;
    return est;
  }

  //=========================================================================//
  // Interval-overlap accumulation (shared by the indicator estimators):     //
  //=========================================================================//
  // Values v_i living on half-open intervals (lo_i, hi_i], with lo and hi
  // each non-decreasing.  The sum of v_i w_j over overlapping pairs runs as
  // a two-pointer sweep in O(|A| + pairs); products accumulate in (i, j)
  // lexicographic order, which a brute-force double loop reproduces
  // bit-for-bit:
  //
  struct IntervalValues
  {
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<double> val;

    std::size_t size() const { return val.size(); }
  };

  inline double
  overlap_product_sum(IntervalValues const& a_a, IntervalValues const& a_b)
  {
    std::size_t const na = a_a.size();
    std::size_t const nb = a_b.size();
    double acc    = 0.0;
    std::size_t jstart = 0;
    for (std::size_t i = 0; i < na; ++i)
    {
      double const alo = a_a.lo[i];
      double const ahi = a_a.hi[i];
      while (jstart < nb && a_b.hi[jstart] <= alo)
        ++jstart;
      for (std::size_t j = jstart; j < nb && a_b.lo[j] < ahi; ++j)
      {
        // NB: hi is non-decreasing, so b.hi[j] >= b.hi[jstart] > alo and
        // the pair overlaps:
        assert(std::max(alo, a_b.lo[j]) < std::min(ahi, a_b.hi[j]));
        acc += a_a.val[i] * a_b.val[j];
      }
    }
    return acc;
  }

  //=========================================================================//
  // "hy_classic":                                                           //
  //=========================================================================//
  // Sum of raw return products over overlapping one-tick intervals:         //
  //
  inline double hy_classic(TickSeries const& a_a, TickSeries const& a_b)
  {
    auto to_intervals = [](TickSeries const& s) -> IntervalValues
    {
      IntervalValues iv;
      long const nr = s.returns_count();
      iv.lo.resize(std::size_t(nr));
      iv.hi.resize(std::size_t(nr));
      iv.val = s.tick_returns();
      for (long i = 1; i <= nr; ++i)
      {
        iv.lo[std::size_t(i - 1)] = s.times()[std::size_t(i - 1)];
        iv.hi[std::size_t(i - 1)] = s.times()[std::size_t(i)];
      }
      return iv;
    };
    return overlap_product_sum(to_intervals(a_a), to_intervals(a_b));
  }

  //=========================================================================//
  // "hy_preavg":                                                            //
  //=========================================================================//
  // Pre-averaged overlap-indicator estimator on raw (non-synchronized)
  // tick series.  One universal window kn is resolved from the pooled
  // return count n = sum_k n_k; each series contributes pre-averaged
  // returns on tick-index windows i = 0..n_k-kn+1 with time support
  // (t_i, t_{min(i+kn, n_k)}]:
  //
  namespace details
  {
    inline IntervalValues
    hy_intervals(TickSeries const& a_s, WeightScheme const& a_scheme,
                 long a_kn)
    {
      long const nr = a_s.returns_count();
      assert(nr >= a_kn);

      Vector const pbar =
        preaveraged_returns(a_s.tick_returns(), a_scheme, a_kn);
      long const m = nr - a_kn + 2;
      assert(pbar.size() == m);

      IntervalValues iv;
      iv.lo.resize(std::size_t(m));
      iv.hi.resize(std::size_t(m));
      iv.val.resize(std::size_t(m));
      for (long i = 0; i < m; ++i)
      {
        long const hi_idx = std::min(i + a_kn, nr);
        iv.lo[std::size_t(i)]  = a_s.times()[std::size_t(i)];
        iv.hi[std::size_t(i)]  = a_s.times()[std::size_t(hi_idx)];
        iv.val[std::size_t(i)] = pbar(i);
      }
      return iv;
    }
  }

  inline CovEstimate
  hy_preavg
  (
    std::vector<TickSeries> const& a_series,
    WeightScheme            const& a_scheme,
    PreAvgConfig            const& a_config = PreAvgConfig()
  )
  {
    if (a_config.delta != 0.0)
      throw DataError("hy_preavg: delta must be 0");
    long const d = long(a_series.size());
    if (d < 1)
      throw DataError("hy_preavg: no series given");

    long n = 0;
    for (auto const& s : a_series)
      n += s.returns_count();
    long const kn = resolve_kn(a_config, n);

    for (auto const& s : a_series)
      if (s.returns_count() < kn)
        throw DataError("hy_preavg: series '" + s.asset_id() + "' has " +
                        std::to_string(s.returns_count()) +
                        " returns < kn=" + std::to_string(kn));

    auto const fc   = a_scheme.finite_constants(kn);
    double const wsum = fc->psi_hy * double(kn);   // sum of window weights
    double const norm = 1.0 / (wsum * wsum);

    std::vector<IntervalValues> ivs;
    ivs.reserve(std::size_t(d));
    for (auto const& s : a_series)
      ivs.push_back(details::hy_intervals(s, a_scheme, kn));

    Matrix m(d, d);
    for (long k = 0; k < d; ++k)
      for (long l = k; l < d; ++l)
      {
        double const v = norm *
          overlap_product_sum(ivs[std::size_t(k)], ivs[std::size_t(l)]);
        m(k, l) = v;
        m(l, k) = v;
      }

    return make_cov_estimate(std::move(m), "hy-preavg", kn, n, false, false,
                             "ticks");
  }

  //=========================================================================//
  // "beta_of" / "corr_of":                                                  //
  //=========================================================================//
  struct DerivedStats
  {
    std::optional<double> beta;   // M[i][j] / M[i][i]
    std::optional<double> corr;   // M[i][j] / sqrt(M[i][i] M[j][j])
    long i = 0;
    long j = 0;
  };

  inline DerivedStats beta_of(CovEstimate const& a_est, long a_i, long a_j)
  {
    auto const& m = a_est.matrix;
    if (a_i < 0 || a_j < 0 || a_i >= m.rows() || a_j >= m.cols())
      throw DataError("beta_of: index out of range");
    if (!(m(a_i, a_i) > 0.0))
      throw NumericError("beta_of: non-positive variance entry");
    DerivedStats out;
    out.i    = a_i;
    out.j    = a_j;
    out.beta = m(a_i, a_j) / m(a_i, a_i);
    return out;
  }

  inline DerivedStats corr_of(CovEstimate const& a_est, long a_i, long a_j)
  {
    auto const& m = a_est.matrix;
    if (a_i < 0 || a_j < 0 || a_i >= m.rows() || a_j >= m.cols())
      throw DataError("corr_of: index out of range");
    if (!(m(a_i, a_i) > 0.0 && m(a_j, a_j) > 0.0))
      throw NumericError("corr_of: non-positive variance entry");
    DerivedStats out;
    out.i    = a_i;
    out.j    = a_j;
    out.corr = m(a_i, a_j) / std::sqrt(m(a_i, a_i) * m(a_j, a_j));
    return out;
  }

  //=========================================================================//
  // "scheme_diagnostics":                                                   //
  //=========================================================================//
  // Sampling-scheme regularity report: K_hat is the largest number of one
  // series' ticks falling inside a single tick interval of another series;
  // c_hat is the worst per-series max/min spacing ratio.  Large values
  // strain the asymptotic sampling conditions, so they only raise a
  // warning (threshold 50, a heuristic):
  //
  struct SchemeDiagnostics
  {
    double k_hat   = 0.0;
    double c_hat   = 0.0;
    bool   warning = false;
  };

  inline SchemeDiagnostics
  scheme_diagnostics(std::vector<TickSeries> const& a_series)
  {
    if (a_series.size() < 2)
      throw DataError("scheme_diagnostics: need at least 2 series");

    SchemeDiagnostics out;

    for (auto const& s : a_series)
    {
      double mx = 0.0;
      double mn = std::numeric_limits<double>::infinity();
      auto const& t = s.times();
      for (std::size_t i = 1; i < t.size(); ++i)
      {
        double const dt = t[i] - t[i - 1];
        mx = std::max(mx, dt);
        mn = std::min(mn, dt);
      }
      out.c_hat = std::max(out.c_hat, mx / mn);
    }

    for (auto const& host : a_series)
      for (auto const& guest : a_series)
      {
        if (&host == &guest)
          continue;
        auto const& ht = host.times();
        auto const& gt = guest.times();
        std::size_t j  = 0;
        for (std::size_t i = 1; i < ht.size(); ++i)
        {
          // Count guest ticks in (ht[i-1], ht[i]]:
          while (j < gt.size() && gt[j] <= ht[i - 1])
            ++j;
          std::size_t cnt = 0;
          std::size_t jj  = j;
          while (jj < gt.size() && gt[jj] <= ht[i])
          {
            ++cnt;
            ++jj;
          }
          out.k_hat = std::max(out.k_hat, double(cnt));
        }
      }

    out.warning = out.k_hat > 50.0 || out.c_hat > 50.0;
    return out;
  }
}
// namespace pacov
