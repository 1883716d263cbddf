// vim:ts=2:et
//===========================================================================//
//                               "preavg.hpp":                               //
//          Rolling weighted pre-averaging of high-frequency returns         //
//===========================================================================//
#pragma once

#include "pacov/core.hpp"
#include "pacov/weights.hpp"

namespace pacov
{
  //=========================================================================//
  // "preavg_weights":                                                       //
  //=========================================================================//
  // The window weight vector w_j = g(j/kn), j = 1..kn-1 (the j = 0 and
  // j = kn weights vanish by the endpoint contract on g):
  //
  inline std::vector<double>
  preavg_weights(WeightScheme const& a_scheme, long a_kn)
  {
    if (a_kn < 2)
      throw DataError("preavg_weights: kn must be >= 2");
    std::vector<double> w(std::size_t(a_kn - 1));
    for (long j = 1; j <= a_kn - 1; ++j)
      w[std::size_t(j - 1)] = a_scheme.g(double(j) / double(a_kn));
    return w;
  }

  //=========================================================================//
  // "preaveraged_returns":                                                  //
  //=========================================================================//
  // Input:  an n x d matrix of one-step returns (row m = increment m+1).
  // Output: an (n - kn + 2) x d matrix whose row i (i = 0..n-kn+1) is
  //
  //     sum_{j=1}^{kn-1} g(j/kn) * returns.row(i + j - 1),
  //
  // i.e. the weighted local average of increments i+1 .. i+kn-1.  Each
  // weight multiplies a contiguous row block, so the accumulation runs as
  // kn-1 vectorized block AXPYs:
  //
  inline Matrix
  preaveraged_returns
  (
    Matrix       const& a_returns,
    WeightScheme const& a_scheme,
    long                a_kn
  )
  {
    long const n = a_returns.rows();
    long const d = a_returns.cols();
    if (a_kn < 2 || a_kn > n)
      throw DataError("preaveraged_returns: need 2 <= kn <= n, got kn=" +
                      std::to_string(a_kn) + ", n=" + std::to_string(n));

    long const m = n - a_kn + 2;
    auto const w = preavg_weights(a_scheme, a_kn);

    Matrix out = Matrix::Zero(m, d);
    for (long j = 1; j <= a_kn - 1; ++j)
      out.noalias() += w[std::size_t(j - 1)] *
                       a_returns.middleRows(j - 1, m);
    return out;
  }

  // Univariate convenience overload:
  inline Vector
  preaveraged_returns
  (
    std::vector<double> const& a_returns,
    WeightScheme        const& a_scheme,
    long                       a_kn
  )
  {
    Matrix r(long(a_returns.size()), 1);
    for (long i = 0; i < r.rows(); ++i)
      r(i, 0) = a_returns[std::size_t(i)];
    return preaveraged_returns(r, a_scheme, a_kn).col(0);
  }

  //=========================================================================//
  // "preaveraged_panel":                                                    //
  //=========================================================================//
  // The usual entry point: difference a synchronized panel and pre-average:
  //
  inline Matrix
  preaveraged_panel
  (
    SyncedPanel  const& a_panel,
    WeightScheme const& a_scheme,
    long                a_kn
  )
  {
    return preaveraged_returns(log_returns(a_panel), a_scheme, a_kn);
  }
}
// namespace pacov
