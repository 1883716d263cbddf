// vim:ts=2:et
//===========================================================================//
//                                "sync.hpp":                                //
//        Synchronization of non-synchronous tick series onto grids          //
//===========================================================================//
#pragma once

#include "pacov/core.hpp"

namespace pacov
{
  //=========================================================================//
  // "SyncSpec":                                                             //
  //=========================================================================//
  struct SyncSpec
  {
    SyncTag kind         = SyncTag::refresh_time;
    long    calendar_n   = 390;     // grid cells when kind == calendar
    bool    include_open = false;   // calendar only: backfill the open
  };

  namespace details
  {
    // Last index with times[idx] <= cutoff, starting the scan at a_from
    // (monotone two-pointer helper); -1 when no such index:
    inline long
    advance_to(std::vector<double> const& a_times, long a_from,
               double a_cutoff)
    {
      long idx = a_from;
      long const n = long(a_times.size());
      while (idx + 1 < n && a_times[std::size_t(idx + 1)] <= a_cutoff)
        ++idx;
      if (idx >= 0 && a_times[std::size_t(idx)] > a_cutoff)
        return -1;
      return idx;
    }
  }

  //=========================================================================//
  // "refresh_time_sync":                                                    //
  //=========================================================================//
  // Grid point 1 is the latest of the assets' first tick times; each next
  // grid point is the latest of the first tick times strictly beyond the
  // previous one.  The grid ends when some asset runs out of fresh ticks.
  // Prices are the last observations at or before each grid time:
  //
  inline SyncedPanel
  refresh_time_sync(std::vector<TickSeries> const& a_series)
  {
    long const d = long(a_series.size());
    if (d < 1)
      throw DataError("refresh_time_sync: no series given");

    std::vector<double> grid;
    auto prices =
      std::vector<std::vector<double>>(static_cast<std::size_t>(d));

    // Per-asset cursor: index of the last tick known to be <= current
    // grid time:
    std::vector<long> cur(static_cast<std::size_t>(d), 0);

    // First grid time = max over assets of their first tick time:
    double tau = 0.0;
    for (auto const& s : a_series)
      tau = std::max(tau, s.times().front());

    for (;;)
    {
      for (long k = 0; k < d; ++k)
      {
        auto const& t = a_series[std::size_t(k)].times();
        cur[std::size_t(k)] =
          details::advance_to(t, cur[std::size_t(k)], tau);
        assert(cur[std::size_t(k)] >= 0);
        prices[std::size_t(k)].push_back(
          a_series[std::size_t(k)].log_prices()[
            std::size_t(cur[std::size_t(k)])]);
      }
      grid.push_back(tau);

      // Next grid time: latest of the first times strictly beyond tau;
      // stop when any asset is exhausted:
      double next = tau;
      bool   have = true;
      for (long k = 0; k < d && have; ++k)
      {
        auto const& t   = a_series[std::size_t(k)].times();
        long const  nxt = cur[std::size_t(k)] + 1;
        if (nxt >= long(t.size()))
          have = false;
        else
          next = std::max(next, t[std::size_t(nxt)]);
      }
      if (!have)
        break;
      tau = next;
    }

    if (long(grid.size()) < 2)
      throw DataError("refresh_time_sync: fewer than 2 refresh times");

    Matrix p(long(grid.size()), d);
    for (long k = 0; k < d; ++k)
      for (long m = 0; m < long(grid.size()); ++m)
        p(m, k) = prices[std::size_t(k)][std::size_t(m)];

    return SyncedPanel(std::move(grid), std::move(p), SyncTag::refresh_time);
  }

  //=========================================================================//
  // "previous_tick_sync":                                                   //
  //=========================================================================//
  // Uniform grid u_m = m / calendar_n, m = 0..calendar_n, with each asset
  // valued at its last tick at or before u_m.  Leading grid points where
  // some asset has no prior tick are dropped, unless include_open is set,
  // in which case they take that asset's first available price:
  //
  inline SyncedPanel
  previous_tick_sync
  (
    std::vector<TickSeries> const& a_series,
    long                           a_calendar_n,
    bool                           a_include_open = false
  )
  {
    long const d = long(a_series.size());
    if (d < 1)
      throw DataError("previous_tick_sync: no series given");
    if (a_calendar_n < 1)
      throw DataError("previous_tick_sync: calendar_n must be >= 1");

    long const gp = a_calendar_n + 1;      // grid points incl. both ends

    // First usable grid row (default mode): all assets must have a tick at
    // or before the grid time:
    long first = 0;
    if (!a_include_open)
    {
      double t0 = 0.0;
      for (auto const& s : a_series)
        t0 = std::max(t0, s.times().front());
      // Smallest m with m / calendar_n >= t0:
      first = long(std::ceil(t0 * double(a_calendar_n) - 1e-12));
      first = std::max(first, 0L);
    }
    if (gp - first < 2)
      throw DataError("previous_tick_sync: fewer than 2 usable grid points");

    std::vector<double> grid(std::size_t(gp - first));
    Matrix p(gp - first, d);

    for (long m = first; m < gp; ++m)
      grid[std::size_t(m - first)] = double(m) / double(a_calendar_n);

    for (long k = 0; k < d; ++k)
    {
      auto const& t  = a_series[std::size_t(k)].times();
      auto const& lp = a_series[std::size_t(k)].log_prices();
      long cur = 0;
      for (long m = first; m < gp; ++m)
      {
        double const u   = double(m) / double(a_calendar_n);
        long const   idx = details::advance_to(t, cur, u);
        if (idx < 0)
        {
          assert(a_include_open);
          p(m - first, k) = lp.front();   // backfilled open
        }
        else
        {
          cur = idx;
          p(m - first, k) = lp[std::size_t(idx)];
        }
      }
    }

    return SyncedPanel(std::move(grid), std::move(p), SyncTag::calendar);
  }

  //=========================================================================//
  // "make_synchronous_panel":                                               //
  //=========================================================================//
  // For series already observed on a common grid (e.g. simulated without
  // asynchronicity); time grids must agree exactly:
  //
  inline SyncedPanel
  make_synchronous_panel(std::vector<TickSeries> const& a_series)
  {
    long const d = long(a_series.size());
    if (d < 1)
      throw DataError("make_synchronous_panel: no series given");

    auto const& t0 = a_series.front().times();
    for (auto const& s : a_series)
      if (s.times() != t0)
        throw DataError("make_synchronous_panel: time grids differ");

    Matrix p(long(t0.size()), d);
    for (long k = 0; k < d; ++k)
      for (long m = 0; m < long(t0.size()); ++m)
        p(m, k) = a_series[std::size_t(k)].log_prices()[std::size_t(m)];

    return SyncedPanel(t0, std::move(p), SyncTag::native_synchronous);
  }

  //=========================================================================//
  // "synchronize": dispatch on a SyncSpec:                                  //
  //=========================================================================//
  inline SyncedPanel
  synchronize(std::vector<TickSeries> const& a_series, SyncSpec const& a_spec)
  {
    switch (a_spec.kind)
    {
    case SyncTag::refresh_time:
      return refresh_time_sync(a_series);
    case SyncTag::calendar:
      return previous_tick_sync(a_series, a_spec.calendar_n,
                                a_spec.include_open);
    case SyncTag::native_synchronous:
      return make_synchronous_panel(a_series);
    default:
      throw DataError("synchronize: unknown synchronization kind");
    }
  }
}
// namespace pacov
