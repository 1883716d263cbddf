// vim:ts=2:et
//===========================================================================//
//                              "inference.hpp":                             //
//      Feasible inference: fourth-moment statistic, weight-combination      //
//      asymptotic variance, quarticity, window tuning, and intervals        //
//===========================================================================//
#pragma once

#include "pacov/core.hpp"
#include "pacov/estimators.hpp"
#include "pacov/preavg.hpp"
#include "pacov/weights.hpp"

#include <array>

namespace pacov
{
  //=========================================================================//
  // "normal_quantile":                                                      //
  //=========================================================================//
  // Inverse standard-normal CDF: rational initial guess (relative accuracy
  // ~1e-9) plus one Halley step through erfc, giving close to full double
  // precision:
  //
  inline double normal_quantile(double a_p)
  {
    if (!(a_p > 0.0 && a_p < 1.0))
      throw DataError("normal_quantile: p must lie in (0,1)");

    static constexpr double A[6] =
    {
      -3.969683028665376e+01,  2.209460984245205e+02,
      -2.759285104469687e+02,  1.383577518672690e+02,
      -3.066479806614716e+01,  2.506628277459239e+00
    };
    static constexpr double B[5] =
    {
      -5.447609879822406e+01,  1.615858368580409e+02,
      -1.556989798598866e+02,  6.680131188771972e+01,
      -1.328068155288572e+01
    };
    static constexpr double C[6] =
    {
      -7.784894002430293e-03, -3.223964580411365e-01,
      -2.400758277161838e+00, -2.549732539343734e+00,
       4.374664141464968e+00,  2.938163982698783e+00
    };
    static constexpr double D[4] =
    {
       7.784695709041462e-03,  3.224671290700398e-01,
       2.445134137142996e+00,  3.754408661907416e+00
    };
    constexpr double p_low  = 0.02425;
    constexpr double p_high = 1.0 - p_low;

    double x = 0.0;
    if (a_p < p_low)
    {
      double const q = std::sqrt(-2.0 * std::log(a_p));
      x = (((((C[0]*q + C[1])*q + C[2])*q + C[3])*q + C[4])*q + C[5]) /
          ((((D[0]*q + D[1])*q + D[2])*q + D[3])*q + 1.0);
    }
    else if (a_p <= p_high)
    {
      double const q = a_p - 0.5;
      double const r = q * q;
      x = (((((A[0]*r + A[1])*r + A[2])*r + A[3])*r + A[4])*r + A[5]) * q /
          (((((B[0]*r + B[1])*r + B[2])*r + B[3])*r + B[4])*r + 1.0);
    }
    else
    {
      double const q = std::sqrt(-2.0 * std::log(1.0 - a_p));
      x = -(((((C[0]*q + C[1])*q + C[2])*q + C[3])*q + C[4])*q + C[5]) /
           ((((D[0]*q + D[1])*q + D[2])*q + D[3])*q + 1.0);
    }

    // Halley polish: e = Phi(x) - p, with Phi via erfc:
    double const e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - a_p;
    double const u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
  }

  //=========================================================================//
  // "v_n": the fourth-moment statistic of pre-averaged returns:             //
  //=========================================================================//
  // chi_i = vec(Ybar_i Ybar_iᵀ) (column-major; index (k,k') -> k*d + k'),
  //
  //   V = sum_{i=0}^{n-kn+1} chi_i chi_iᵀ
  //     - (1/2) sum_{i=0}^{n-2kn+1} (chi_i chi_{i+kn}ᵀ + chi_{i+kn} chi_iᵀ).
  //
  // The subtracted lag term removes the squared-mean contribution; despite
  // that subtraction the statistic is used as-is (no PSD repair):
  //
  inline Matrix
  v_n(SyncedPanel const& a_panel, long a_kn, WeightScheme const& a_scheme)
  {
    long const n = a_panel.n();
    long const d = a_panel.d();
    if (n < 2 * a_kn)
      throw DataError("v_n: need n >= 2 kn, got n=" + std::to_string(n) +
                      ", kn=" + std::to_string(a_kn));

    Matrix const pbar = preaveraged_panel(a_panel, a_scheme, a_kn);
    long const m  = n - a_kn + 2;        // windows
    long const m2 = n - 2 * a_kn + 2;    // lagged pairs
    assert(pbar.rows() == m);

    Matrix x(m, d * d);
    for (long i = 0; i < m; ++i)
      for (long k = 0; k < d; ++k)
        for (long kp = 0; kp < d; ++kp)
          x(i, k * d + kp) = pbar(i, k) * pbar(i, kp);

    Matrix v = x.transpose() * x;
    auto const head = x.topRows(m2);
    auto const lagk = x.middleRows(a_kn, m2);
    v.noalias() -= 0.5 * (head.transpose() * lagk +
                          lagk.transpose() * head);
    return symmetrize(v);
  }

  //=========================================================================//
  // "WeightTriple":                                                         //
  //=========================================================================//
  // Three weight schemes whose (a_B, a_M, a_N) coefficient rows span R^3,
  // plus the combination weights C that make sum_k C_k V(g_k) estimate the
  // asymptotic variance of the balanced estimator built from g0:
  //
  struct WeightTriple
  {
    WeightScheme    g1, g2, g3;
    Eigen::Matrix3d A  = Eigen::Matrix3d::Zero();
    Eigen::Vector3d C  = Eigen::Vector3d::Zero();   // avar combination
    Eigen::Vector3d Ciq = Eigen::Vector3d::Zero();  // quarticity combination
    double          condition_number = 0.0;
    double          theta            = 0.0;

    std::array<std::string, 3> names() const
      { return {g1.name(), g2.name(), g3.name()}; }
  };

  inline WeightTriple
  build_weight_triple
  (
    WeightScheme const& a_g1,
    WeightScheme const& a_g2,
    WeightScheme const& a_g3,
    double              a_theta,
    WeightScheme const& a_g0
  )
  {
    if (!(a_theta > 0.0))
      throw DataError("build_weight_triple: theta must be positive");

    WeightTriple t;
    t.g1    = a_g1;
    t.g2    = a_g2;
    t.g3    = a_g3;
    t.theta = a_theta;

    double const th2 = a_theta * a_theta;
    WeightScheme const* gs[3] = {&a_g1, &a_g2, &a_g3};
    for (int r = 0; r < 3; ++r)
    {
      auto const& c = gs[r]->constants();
      t.A(r, 0) = th2 * c.psi2 * c.psi2;    // Brownian-squared coefficient
      t.A(r, 1) = c.psi1 * c.psi2;          // mixed coefficient
      t.A(r, 2) = c.psi1 * c.psi1 / th2;    // noise-squared coefficient
    }

    // Condition of the row-equilibrated matrix: the row scale is absorbed
    // exactly by the combination weights, so the meaningful degeneracy
    // measure is row collinearity, not magnitude spread:
    Eigen::Matrix3d eq = t.A;
    for (int r = 0; r < 3; ++r)
    {
      double const s = eq.row(r).cwiseAbs().maxCoeff();
      if (s > 0.0)
        eq.row(r) /= s;
    }
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(eq);
    double const smin = svd.singularValues()(2);
    double const smax = svd.singularValues()(0);
    t.condition_number =
      (smin > 0.0) ? smax / smin : std::numeric_limits<double>::infinity();
    if (!(t.condition_number < 1e12))
      throw NumericError("build_weight_triple: coefficient matrix is "
                         "singular (condition number " +
                         std::to_string(t.condition_number) + ")");

    // Target rows (from the estimation scheme g0):  C A = target  =>
    // C = Aᵀ⁻¹ targetᵀ, solved through the SVD:
    auto const& c0 = a_g0.constants();
    double const p22 = c0.psi2 * c0.psi2;
    Eigen::Vector3d target;
    target << 2.0 * c0.Phi22 * a_theta / p22,
              2.0 * c0.Phi12 / (p22 * a_theta),
              2.0 * c0.Phi11 / (p22 * th2 * a_theta);
    t.C = Eigen::Matrix3d(t.A.transpose()).fullPivLu().solve(target);

    Eigen::Vector3d iq_target;
    iq_target << 1.0, 0.0, 0.0;
    t.Ciq = Eigen::Matrix3d(t.A.transpose()).fullPivLu().solve(iq_target);
    return t;
  }

  // The stock triple; g0 is the scheme the covariance estimator itself
  // uses (the ramp, unless caller says otherwise):
  inline WeightTriple
  default_weight_triple
  (
    double              a_theta,
    WeightScheme const& a_g0 = WeightScheme::make_min()
  )
  {
    return build_weight_triple(WeightScheme::make_sine(1),
                               WeightScheme::make_power(1, 1),
                               WeightScheme::make_power(2, 1),
                               a_theta, a_g0);
  }

  //=========================================================================//
  // "AvarEstimate":                                                         //
  //=========================================================================//
  struct AvarEstimate
  {
    Matrix                     matrix;       // d^2 x d^2
    double                     theta_used = 0.0;
    std::array<std::string, 3> triple_names;
    long                       kn_used = 0;
    long                       n_used  = 0;

    // Index of the (k,l) covariance entry in the d^2 flattening:
    long index(long a_k, long a_l, long a_d) const
      { return a_k * a_d + a_l; }
  };

  //=========================================================================//
  // "avar_mrc":                                                             //
  //=========================================================================//
  // C-weighted sum of the three V statistics, all evaluated at one shared
  // window kn resolved from the panel:
  //
  inline AvarEstimate
  avar_mrc
  (
    SyncedPanel  const& a_panel,
    PreAvgConfig const& a_config,
    WeightTriple const& a_triple
  )
  {
    long const n  = a_panel.n();
    long const kn = resolve_kn(a_config, n);

    AvarEstimate out;
    out.matrix = a_triple.C(0) * v_n(a_panel, kn, a_triple.g1) +
                 a_triple.C(1) * v_n(a_panel, kn, a_triple.g2) +
                 a_triple.C(2) * v_n(a_panel, kn, a_triple.g3);
    out.theta_used   = a_triple.theta;
    out.triple_names = a_triple.names();
    out.kn_used      = kn;
    out.n_used       = n;
    return out;
  }

  //=========================================================================//
  // "integrated_quarticity":                                                //
  //=========================================================================//
  // Same machinery with the (1,0,0) target: isolates the Brownian-squared
  // component (the integrated Lambda array; d=1: integrated quarticity*2):
  //
  inline Matrix
  integrated_quarticity
  (
    SyncedPanel  const& a_panel,
    PreAvgConfig const& a_config,
    WeightTriple const& a_triple
  )
  {
    long const n  = a_panel.n();
    long const kn = resolve_kn(a_config, n);
    return a_triple.Ciq(0) * v_n(a_panel, kn, a_triple.g1) +
           a_triple.Ciq(1) * v_n(a_panel, kn, a_triple.g2) +
           a_triple.Ciq(2) * v_n(a_panel, kn, a_triple.g3);
  }

  //=========================================================================//
  // "theta_star":                                                           //
  //=========================================================================//
  // One-shot minimizer of the univariate asymptotic-variance proxy
  //
  //   (4/psi2^2) (Phi22 theta IQ + 2 Phi12 Psi^2 IV / theta
  //                + Phi11 Psi^4 / theta^3),
  //
  // whose first-order condition in x = theta^2 is the quadratic
  //   Phi22 IQ x^2 - 2 Phi12 Psi^2 IV x - 3 Phi11 Psi^4 = 0.
  // A Newton polish of the FOC (up to max_iter steps) absorbs any rounding
  // in the closed-form root.  psi = 0 degenerates (objective decreasing
  // to theta -> 0), so the configured floor is returned:
  //
  inline double
  theta_star
  (
    double              a_iv,
    double              a_iq,
    double              a_psi,
    WeightScheme const& a_scheme,
    long                a_max_iter  = 8,
    double              a_tol       = 1e-12,
    double              a_min_theta = 0.1
  )
  {
    if (!(a_iv > 0.0) || !(a_iq > 0.0))
      throw DataError("theta_star: IV and IQ must be positive");
    if (a_psi < 0.0)
      throw DataError("theta_star: psi must be non-negative");
    if (a_psi == 0.0)
      return a_min_theta;

    auto const& c   = a_scheme.constants();
    double const p2 = a_psi * a_psi;
    double const p4 = p2 * p2;
    double const qa = c.Phi22 * a_iq;
    double const qb = -2.0 * c.Phi12 * p2 * a_iv;
    double const qc = -3.0 * c.Phi11 * p4;

    double x = (-qb + std::sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa);

    // FOC(x) = qa x^2 + qb x + qc; Newton in x:
    for (long it = 0; it < a_max_iter; ++it)
    {
      double const f  = qa * x * x + qb * x + qc;
      double const fp = 2.0 * qa * x + qb;
      if (fp == 0.0)
        break;
      double const step = f / fp;
      x -= step;
      if (std::fabs(step) < a_tol * std::fabs(x))
        break;
    }
    // No floor when psi > 0: the quadratic root stands on its own:
    return std::sqrt(std::max(x, 0.0));
  }

  //=========================================================================//
  // Confidence intervals (delta-method, n^(-1/4) scaling):                  //
  //=========================================================================//
  enum class StatKind { covariance, beta, correlation };

  inline std::string to_string(StatKind a_kind)
  {
    switch (a_kind)
    {
    case StatKind::covariance:  return "covariance";
    case StatKind::beta:        return "beta";
    case StatKind::correlation: return "correlation";
    default:                    return "?";
    }
  }

  struct ConfInterval
  {
    double   point      = 0.0;
    double   half_width = 0.0;
    double   level      = 0.0;
    StatKind statistic_kind = StatKind::covariance;
    bool     valid      = true;    // false when the variance estimate < 0

    double lo() const { return point - half_width; }
    double hi() const { return point + half_width; }
  };

  namespace details
  {
    inline ConfInterval
    make_interval(double a_point, double a_var_term, long a_n,
                  double a_level, StatKind a_kind)
    {
      if (!(a_level > 0.0 && a_level < 1.0))
        throw DataError("confidence level must lie in (0,1)");
      ConfInterval ci;
      ci.point          = a_point;
      ci.level          = a_level;
      ci.statistic_kind = a_kind;
      if (a_var_term < 0.0)
      {
        ci.valid      = false;
        ci.half_width = 0.0;
        return ci;
      }
      double const z = normal_quantile(0.5 * (1.0 + a_level));
      ci.half_width  = z * std::pow(double(a_n), -0.25) *
                       std::sqrt(a_var_term);
      return ci;
    }
  }

  //-------------------------------------------------------------------------//
  // "ci_cov": interval for the (i,j) covariance entry:                      //
  //-------------------------------------------------------------------------//
  inline ConfInterval
  ci_cov(CovEstimate const& a_est, AvarEstimate const& a_avar,
         long a_i, long a_j, double a_level = 0.95)
  {
    long const d = a_est.matrix.rows();
    if (a_i < 0 || a_j < 0 || a_i >= d || a_j >= d)
      throw DataError("ci_cov: index out of range");
    long const r = a_i * d + a_j;
    return details::make_interval(a_est.matrix(a_i, a_j),
                                  a_avar.matrix(r, r), a_est.n_used,
                                  a_level, StatKind::covariance);
  }

  //-------------------------------------------------------------------------//
  // "ci_beta": interval for beta^{(ji)} = M_ij / M_ii:                      //
  //-------------------------------------------------------------------------//
  inline ConfInterval
  ci_beta(CovEstimate const& a_est, AvarEstimate const& a_avar,
          long a_i, long a_j, double a_level = 0.95)
  {
    long const d = a_est.matrix.rows();
    if (a_i < 0 || a_j < 0 || a_i >= d || a_j >= d)
      throw DataError("ci_beta: index out of range");
    auto const& m = a_est.matrix;
    if (!(m(a_i, a_i) > 0.0))
      throw NumericError("ci_beta: non-positive variance entry");

    double const beta = m(a_i, a_j) / m(a_i, a_i);
    long const  ij = a_i * d + a_j;
    long const  ii = a_i * d + a_i;
    auto const& av = a_avar.matrix;

    // gamma = [[A_{ij,ij}, A_{ij,ii}], [A_{ij,ii}, A_{ii,ii}]],
    // g_n = (1, -beta) gamma (1, -beta)ᵀ:
    double const gn = av(ij, ij)
                    - 2.0 * beta * av(ij, ii)
                    + beta * beta * av(ii, ii);
    double const var_term = gn / (m(a_i, a_i) * m(a_i, a_i));
    return details::make_interval(beta, var_term, a_est.n_used, a_level,
                                  StatKind::beta);
  }

  //-------------------------------------------------------------------------//
  // "ci_corr": interval for rho^{(ji)} = M_ij / sqrt(M_ii M_jj):            //
  //-------------------------------------------------------------------------//
  inline ConfInterval
  ci_corr(CovEstimate const& a_est, AvarEstimate const& a_avar,
          long a_i, long a_j, double a_level = 0.95)
  {
    long const d = a_est.matrix.rows();
    if (a_i < 0 || a_j < 0 || a_i >= d || a_j >= d)
      throw DataError("ci_corr: index out of range");
    auto const& m = a_est.matrix;
    if (!(m(a_i, a_i) > 0.0 && m(a_j, a_j) > 0.0))
      throw NumericError("ci_corr: non-positive variance entry");

    double const mii = m(a_i, a_i);
    double const mjj = m(a_j, a_j);
    double const rho = m(a_i, a_j) / std::sqrt(mii * mjj);
    double const beta_ji = m(a_i, a_j) / mii;   // regression of j on i
    double const beta_ij = m(a_i, a_j) / mjj;   // regression of i on j

    long const ii = a_i * d + a_i;
    long const ij = a_i * d + a_j;
    long const jj = a_j * d + a_j;
    auto const& av = a_avar.matrix;

    // gbar over (ii, ij, jj), v = (-beta_ji/2, 1, -beta_ij/2):
    double const v0 = -0.5 * beta_ji;
    double const v2 = -0.5 * beta_ij;
    double const hn =
        v0 * v0 * av(ii, ii) + av(ij, ij) + v2 * v2 * av(jj, jj)
      + 2.0 * v0 *      av(ii, ij)
      + 2.0 * v0 * v2 * av(ii, jj)
      + 2.0 * v2 *      av(ij, jj);
    double const var_term = hn / (mii * mjj);
    return details::make_interval(rho, var_term, a_est.n_used, a_level,
                                  StatKind::correlation);
  }
}
// namespace pacov
