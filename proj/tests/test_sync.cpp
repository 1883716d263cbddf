// vim:ts=2:et
//===========================================================================//
//                             "test_sync.cpp":                              //
//              Refresh-time and previous-tick synchronization               //
//===========================================================================//
#include "pacov/sync.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace pacov;

namespace
{
  TickSeries ts(std::string id, std::vector<double> t, std::vector<double> p)
  {
    return TickSeries(std::move(id), std::move(t), std::move(p));
  }
}

//===========================================================================//
// Refresh-time:                                                             //
//===========================================================================//
TEST_CASE("refresh-time grid and prices on a worked example", "[sync]")
{
  auto a = ts("A", {0.1, 0.4, 0.5, 0.9}, {1.0, 2.0, 3.0, 4.0});
  auto b = ts("B", {0.2, 0.3, 0.8},      {10.0, 20.0, 30.0});

  auto panel = refresh_time_sync({a, b});
  CHECK(panel.tag() == SyncTag::refresh_time);

  // Grid: 0.2 (latest first tick), then 0.4 = max(0.4, 0.3), then
  // 0.8 = max(0.5, 0.8); B is exhausted beyond 0.8, so the grid stops:
  auto const& g = panel.grid_times();
  REQUIRE(g.size() == 3);
  CHECK(g[0] == Catch::Approx(0.2));
  CHECK(g[1] == Catch::Approx(0.4));
  CHECK(g[2] == Catch::Approx(0.8));

  // Last-at-or-before prices:
  auto const& p = panel.log_prices();
  CHECK(p(0, 0) == 1.0);  CHECK(p(0, 1) == 10.0);
  CHECK(p(1, 0) == 2.0);  CHECK(p(1, 1) == 20.0);
  CHECK(p(2, 0) == 3.0);  CHECK(p(2, 1) == 30.0);
}

TEST_CASE("refresh-time with a single asset reduces to its own grid",
          "[sync]")
{
  auto a     = ts("A", {0.1, 0.4, 0.9}, {1.0, 2.0, 3.0});
  auto panel = refresh_time_sync({a});
  REQUIRE(panel.n() == 2);
  CHECK(panel.grid_times() == std::vector<double>{0.1, 0.4, 0.9});
  CHECK(panel.log_prices()(1, 0) == 2.0);
}

TEST_CASE("refresh-time needs at least two grid points", "[sync]")
{
  // B's ticks all come after A's last tick, so only one refresh time forms:
  auto a = ts("A", {0.1, 0.2},  {1.0, 2.0});
  auto b = ts("B", {0.9, 0.95}, {10.0, 20.0});
  CHECK_THROWS_AS(refresh_time_sync({a, b}), DataError);
  CHECK_THROWS_AS(refresh_time_sync(std::vector<TickSeries>{}), DataError);
}

//===========================================================================//
// Previous-tick:                                                            //
//===========================================================================//
TEST_CASE("previous-tick trims leading cells without a prior tick", "[sync]")
{
  auto a = ts("A", {0.1, 0.3, 0.6},  {1.0, 2.0, 3.0});
  auto b = ts("B", {0.2, 0.55, 0.9}, {10.0, 20.0, 30.0});

  auto panel = previous_tick_sync({a, b}, 4);
  CHECK(panel.tag() == SyncTag::calendar);

  // u = 0 has no prior tick for either asset -> dropped; the rest remain:
  auto const& g = panel.grid_times();
  REQUIRE(g.size() == 4);
  CHECK(g[0] == Catch::Approx(0.25));
  CHECK(g[3] == Catch::Approx(1.0));

  auto const& p = panel.log_prices();
  CHECK(p(0, 0) == 1.0);  CHECK(p(0, 1) == 10.0);   // u=0.25: A@0.1, B@0.2
  CHECK(p(1, 0) == 2.0);  CHECK(p(1, 1) == 10.0);   // u=0.50: A@0.3, B@0.2
  CHECK(p(2, 0) == 3.0);  CHECK(p(2, 1) == 20.0);   // u=0.75: A@0.6, B@0.55
  CHECK(p(3, 0) == 3.0);  CHECK(p(3, 1) == 30.0);   // u=1.00: A@0.6, B@0.9
}

TEST_CASE("previous-tick can backfill the open instead of trimming",
          "[sync]")
{
  auto a = ts("A", {0.1, 0.3, 0.6},  {1.0, 2.0, 3.0});
  auto b = ts("B", {0.2, 0.55, 0.9}, {10.0, 20.0, 30.0});

  auto panel = previous_tick_sync({a, b}, 4, /*include_open=*/true);
  REQUIRE(panel.grid_times().size() == 5);
  CHECK(panel.grid_times()[0] == 0.0);

  // The open takes each asset's first available price:
  CHECK(panel.log_prices()(0, 0) == 1.0);
  CHECK(panel.log_prices()(0, 1) == 10.0);
}

TEST_CASE("previous-tick boundary alignment and failure modes", "[sync]")
{
  // First tick exactly on a grid time: that grid time is usable:
  auto a = ts("A", {0.25, 0.7}, {1.0, 2.0});
  auto p = previous_tick_sync({a}, 4);
  CHECK(p.grid_times().front() == Catch::Approx(0.25));

  // Too few usable grid points:
  auto late = ts("A", {0.6, 0.9}, {1.0, 2.0});
  CHECK_THROWS_AS(previous_tick_sync({late}, 1), DataError);
  CHECK_THROWS_AS(previous_tick_sync({a}, 0),    DataError);
  CHECK_THROWS_AS(previous_tick_sync(std::vector<TickSeries>{}, 4),
                  DataError);
}

//===========================================================================//
// Native-synchronous and dispatch:                                          //
//===========================================================================//
TEST_CASE("synchronous panel assembly checks grid equality", "[sync]")
{
  auto a = ts("A", {0.0, 0.5, 1.0}, {1.0, 2.0, 3.0});
  auto b = ts("B", {0.0, 0.5, 1.0}, {4.0, 5.0, 6.0});
  auto c = ts("C", {0.0, 0.6, 1.0}, {4.0, 5.0, 6.0});

  auto panel = make_synchronous_panel({a, b});
  CHECK(panel.tag() == SyncTag::native_synchronous);
  CHECK(panel.d()   == 2);
  CHECK(panel.log_prices()(2, 1) == 6.0);

  CHECK_THROWS_AS(make_synchronous_panel({a, c}), DataError);
}

TEST_CASE("synchronize dispatches on the spec", "[sync]")
{
  auto a = ts("A", {0.1, 0.4, 0.5, 0.9}, {1.0, 2.0, 3.0, 4.0});
  auto b = ts("B", {0.2, 0.3, 0.8},      {10.0, 20.0, 30.0});

  SyncSpec rt;
  rt.kind = SyncTag::refresh_time;
  CHECK(synchronize({a, b}, rt).tag() == SyncTag::refresh_time);

  SyncSpec cal;
  cal.kind       = SyncTag::calendar;
  cal.calendar_n = 4;
  CHECK(synchronize({a, b}, cal).tag() == SyncTag::calendar);
  CHECK(synchronize({a, b}, cal).n()   == 3);
}
