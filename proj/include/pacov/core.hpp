// vim:ts=2:et
//===========================================================================//
//                                "core.hpp":                                //
//         Domain types shared by the pre-averaging covariance kit           //
//===========================================================================//
#pragma once

#include <Eigen/Dense>

#include <cassert>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pacov
{
  using Matrix = Eigen::MatrixXd;
  using Vector = Eigen::VectorXd;

  //=========================================================================//
  // Error taxonomy:                                                         //
  //=========================================================================//
  // "DataError":    malformed or contract-violating inputs (bad files, bad
  //                 series, out-of-range windows).  CLI exit code 2.
  // "NumericError": a computation that cannot be completed (singular system,
  //                 non-positive variance where one is required).  Exit 3.
  //
  struct DataError:    public std::runtime_error
    { using std::runtime_error::runtime_error; };
  struct NumericError: public std::runtime_error
    { using std::runtime_error::runtime_error; };

  //=========================================================================//
  // "symmetrize":                                                           //
  //=========================================================================//
  // (M + M') / 2, which is exactly symmetric in floating point because IEEE
  // addition is commutative:
  //
  inline Matrix symmetrize(Matrix const& a_m)
  {
    assert(a_m.rows() == a_m.cols());
    return 0.5 * (a_m + a_m.transpose());
  }

  inline bool is_finite(double a_x) { return std::isfinite(a_x); }

  //=========================================================================//
  // "TickSeries":                                                           //
  //=========================================================================//
  // One asset's irregular observation times (fractions of the trading
  // session, in [0,1]) and log-prices.  Times are strictly increasing;
  // duplicate timestamps must be resolved upstream (ingest aggregates them).
  // Immutable after construction.
  //
  class TickSeries
  {
  private:
    std::string         m_assetID;
    std::vector<double> m_times;
    std::vector<double> m_logPrices;

  public:
    TickSeries() = default;

    TickSeries
    (
      std::string         a_asset_id,
      std::vector<double> a_times,
      std::vector<double> a_log_prices
    )
    : m_assetID  (std::move(a_asset_id)),
      m_times    (std::move(a_times)),
      m_logPrices(std::move(a_log_prices))
    {
      if (m_times.size() != m_logPrices.size())
        throw DataError("TickSeries(" + m_assetID +
                        "): times/log_prices length mismatch");
      if (m_times.size() < 2)
        throw DataError("TickSeries(" + m_assetID + "): need >= 2 ticks");

      for (std::size_t i = 0; i < m_times.size(); ++i)
      {
        if (!(m_times[i] >= 0.0 && m_times[i] <= 1.0))
          throw DataError("TickSeries(" + m_assetID +
                          "): time outside [0,1]");
        if (!is_finite(m_logPrices[i]))
          throw DataError("TickSeries(" + m_assetID +
                          "): non-finite log-price");
        if (i > 0 && !(m_times[i] > m_times[i - 1]))
          throw DataError("TickSeries(" + m_assetID +
                          "): times not strictly increasing");
      }
    }

    std::string         const& asset_id()   const { return m_assetID;   }
    std::vector<double> const& times()      const { return m_times;     }
    std::vector<double> const& log_prices() const { return m_logPrices; }

    // Number of observation points; the series carries count-1 returns:
    long count()         const { return long(m_times.size()); }
    long returns_count() const { return long(m_times.size()) - 1; }

    // Tick-time log-returns (count-1 of them):
    std::vector<double> tick_returns() const
    {
      std::vector<double> r(m_logPrices.size() - 1);
      for (std::size_t i = 1; i < m_logPrices.size(); ++i)
        r[i - 1] = m_logPrices[i] - m_logPrices[i - 1];
      return r;
    }
  };

  //=========================================================================//
  // "SyncedPanel":                                                          //
  //=========================================================================//
  // d assets on a common strictly-increasing time grid (n+1 points => n
  // return rows).  This is the input shape for the synchronous estimators.
  //
  enum class SyncTag { calendar, refresh_time, native_synchronous };

  inline char const* to_string(SyncTag a_tag)
  {
    switch (a_tag)
    {
      case SyncTag::calendar:     return "calendar";
      case SyncTag::refresh_time: return "refresh_time";
      default:                    return "native_synchronous";
    }
  }

  class SyncedPanel
  {
  private:
    std::vector<double> m_gridTimes;  // n+1 points
    Matrix              m_logPrices;  // (n+1) x d
    SyncTag             m_tag;

  public:
    SyncedPanel() : m_tag(SyncTag::native_synchronous) {}

    SyncedPanel
    (
      std::vector<double> a_grid_times,
      Matrix              a_log_prices,
      SyncTag             a_tag
    )
    : m_gridTimes(std::move(a_grid_times)),
      m_logPrices(std::move(a_log_prices)),
      m_tag      (a_tag)
    {
      if (long(m_gridTimes.size()) != m_logPrices.rows())
        throw DataError("SyncedPanel: grid/prices row count mismatch");
      if (m_gridTimes.size() < 2)
        throw DataError("SyncedPanel: need >= 2 grid points");
      if (m_logPrices.cols() < 1)
        throw DataError("SyncedPanel: need >= 1 asset");

      for (std::size_t i = 1; i < m_gridTimes.size(); ++i)
        if (!(m_gridTimes[i] > m_gridTimes[i - 1]))
          throw DataError("SyncedPanel: grid times not strictly increasing");
      if (!m_logPrices.allFinite())
        throw DataError("SyncedPanel: non-finite log-price");
    }

    std::vector<double> const& grid_times() const { return m_gridTimes; }
    Matrix              const& log_prices() const { return m_logPrices; }
    SyncTag             tag()               const { return m_tag;       }

    long n() const { return long(m_gridTimes.size()) - 1; }  // # returns
    long d() const { return m_logPrices.cols(); }
  };

  //=========================================================================//
  // "PreAvgConfig" and Window Resolution:                                   //
  //=========================================================================//
  // kn = floor(theta * n^(1/2+delta)); delta = 0 is the balanced window,
  // delta in (0, 1/2) the longer PSD-preserving window.  "explicit_kn"
  // overrides the rule.  The resolved kn is clamped to [2, n-1].
  //
  struct PreAvgConfig
  {
    double              theta = 1.0;
    double              delta = 0.0;
    std::optional<long> explicit_kn;
  };

  struct KnResolution
  {
    long kn      = 0;
    bool clamped = false;
  };

  inline KnResolution resolve_kn_checked(PreAvgConfig const& a_cfg, long a_n)
  {
    if (a_n < 4)
      throw DataError("resolve_kn: n < 4");
    if (!(a_cfg.theta > 0.0))
      throw DataError("resolve_kn: theta must be positive");
    if (!(a_cfg.delta >= 0.0 && a_cfg.delta < 0.5))
      throw DataError("resolve_kn: delta outside [0, 1/2)");

    long kn;
    if (a_cfg.explicit_kn)
      kn = *a_cfg.explicit_kn;
    else
      // NB: the small epsilon keeps exact-integer products (e.g. theta=1/3,
      // n=900 => 10) from dropping a unit through representation error:
      kn = long(std::floor(
             a_cfg.theta * std::pow(double(a_n), 0.5 + a_cfg.delta) + 1e-9));

    KnResolution res;
    res.kn      = std::min(std::max(kn, 2L), a_n - 1);
    res.clamped = (res.kn != kn);
    return res;
  }

  inline long resolve_kn(PreAvgConfig const& a_cfg, long a_n)
    { return resolve_kn_checked(a_cfg, a_n).kn; }

  //=========================================================================//
  // Estimate Containers:                                                    //
  //=========================================================================//
  // Estimates carry provenance (kn, n, scheme) so downstream inference can
  // reconstruct the constants that were used.
  //
  struct CovEstimate
  {
    Matrix      matrix;                 // d x d, exactly symmetric
    std::string estimator_name;
    std::string scheme_name;            // empty when no pre-averaging
    long        kn_used        = 0;     // 0 when no pre-averaging
    long        n_used         = 0;
    bool        bias_corrected = false;
    bool        psd_guaranteed = false;
    bool        psd_warning    = false; // set when a non-PSD result surfaced
  };

  inline CovEstimate make_cov_estimate
  (
    Matrix             a_m,
    std::string        a_name,
    long               a_kn,
    long               a_n,
    bool               a_bias_corrected,
    bool               a_psd_guaranteed,
    std::string        a_scheme = std::string()
  )
  {
    CovEstimate est;
    est.matrix         = symmetrize(std::move(a_m));
    est.estimator_name = std::move(a_name);
    est.scheme_name    = std::move(a_scheme);
    est.kn_used        = a_kn;
    est.n_used         = a_n;
    est.bias_corrected = a_bias_corrected;
    est.psd_guaranteed = a_psd_guaranteed;
    return est;
  }

  struct NoiseCovEstimate
  {
    Matrix matrix;      // d x d symmetric PSD, the half mean outer product
    long   n_used = 0;
  };

  //=========================================================================//
  // "log_returns":                                                          //
  //=========================================================================//
  // Row i of the result is price row i+1 minus price row i; n rows:
  //
  inline Matrix log_returns(SyncedPanel const& a_panel)
  {
    long n = a_panel.n();
    Matrix const& p = a_panel.log_prices();
    return p.bottomRows(n) - p.topRows(n);
  }

  //=========================================================================//
  // Smallest eigenvalue of a symmetric matrix (PSD checks):                 //
  //=========================================================================//
  inline double min_eigenvalue(Matrix const& a_m)
  {
    assert(a_m.rows() == a_m.cols());
    Eigen::SelfAdjointEigenSolver<Matrix> es(a_m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
}
// namespace pacov
