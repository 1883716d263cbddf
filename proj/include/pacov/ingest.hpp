// vim:ts=2:et
//===========================================================================//
//                                "ingest.hpp":                              //
//    Tick-data cleaning pipeline: trade/quote filter rules, timestamp       //
//    aggregation, accounting reports, and liquidity diagnostics             //
//===========================================================================//
#pragma once

#include "pacov/core.hpp"
#include "pacov/estimators.hpp"
#include "pacov/sync.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace pacov
{
  //=========================================================================//
  // Raw records and configuration:                                          //
  //=========================================================================//
  enum class RecordKind { trade, quote };

  struct RawTickRecord
  {
    long        time_sec   = 0;     // seconds since midnight
    RecordKind  kind       = RecordKind::trade;
    double      price      = 0.0;   // trades
    double      size       = 0.0;
    double      bid        = 0.0;   // quotes
    double      ask        = 0.0;
    double      bid_size   = 0.0;
    double      ask_size   = 0.0;
    std::string exchange;
    long        correction = 0;     // trades: non-zero = corrected
    std::string condition;          // trades: sale condition code
  };

  struct SessionWindow
  {
    long open_sec  = 9 * 3600 + 30 * 60;   // 09:30:00
    long close_sec = 16 * 3600;            // 16:00:00

    void validate() const
    {
      if (open_sec < 0 || close_sec <= open_sec || close_sec >= 24 * 3600)
        throw DataError("SessionWindow: need 0 <= open < close < 24h");
    }

    // Wall-clock second -> fraction of the session in [0,1]:
    double fraction(long a_sec) const
    {
      return double(a_sec - open_sec) / double(close_sec - open_sec);
    }
  };

  struct TradeFilterConfig
  {
    SessionWindow session;
    std::string   exchange;          // empty = keep every venue
    // Sale conditions treated as regular; anything else is abnormal:
    std::vector<std::string> allowed_conditions = {"", "@", "E", "F"};
  };

  struct QuoteFilterConfig
  {
    SessionWindow session;
    std::string   exchange;          // empty = keep every venue
    double        spread_mult = 10.0;  // x daily median spread cutoff
  };

  //=========================================================================//
  // "CleaningReport":                                                       //
  //=========================================================================//
  // Row accounting: every input row is either emitted, deleted by exactly
  // one rule (the first violated, in pipeline order), or absorbed into an
  // identical-timestamp aggregate:
  //
  struct CleaningReport
  {
    long input_rows         = 0;
    long output_rows        = 0;
    long deleted_exchange   = 0;
    long deleted_session    = 0;
    long deleted_zero_price = 0;   // trades: price; quotes: bid or ask
    long deleted_correction = 0;   // trades only: corrected / abnormal
    long deleted_spread     = 0;   // quotes only: negative or wide
    long aggregated_rows    = 0;   // rows absorbed by aggregation

    bool identity_holds() const
    {
      return input_rows == output_rows + deleted_exchange + deleted_session +
                           deleted_zero_price + deleted_correction +
                           deleted_spread + aggregated_rows;
    }

    std::string text() const
    {
      std::ostringstream os;
      os << "input\t"             << input_rows         << "\n"
         << "deleted_exchange\t"  << deleted_exchange   << "\n"
         << "deleted_session\t"   << deleted_session    << "\n"
         << "deleted_zero_price\t"<< deleted_zero_price << "\n"
         << "deleted_correction\t"<< deleted_correction << "\n"
         << "deleted_spread\t"    << deleted_spread     << "\n"
         << "aggregated\t"        << aggregated_rows    << "\n"
         << "output\t"            << output_rows        << "\n";
      return os.str();
    }
  };

  //=========================================================================//
  // Delimited-text parsing:                                                 //
  //=========================================================================//
  // Comma-separated, named header columns, no quoting; timestamps are
  // strict HH:MM:SS wall-clock.  Trades: {timestamp, price, size, exch,
  // corr, cond}; quotes: {timestamp, bid, ask, bsize, asize, exch}:
  //
  namespace details
  {
    inline std::vector<std::string> split_csv(std::string const& a_line)
    {
      std::vector<std::string> out;
      std::size_t start = 0;
      while (true)
      {
        std::size_t const pos = a_line.find(',', start);
        if (pos == std::string::npos)
        {
          out.push_back(a_line.substr(start));
          return out;
        }
        out.push_back(a_line.substr(start, pos - start));
        start = pos + 1;
      }
    }

    inline long parse_hms(std::string const& a_text, long a_line)
    {
      auto bad = [&]()
      {
        throw DataError("line " + std::to_string(a_line) +
                        ": bad timestamp '" + a_text + "' (want HH:MM:SS)");
      };
      if (a_text.size() != 8 || a_text[2] != ':' || a_text[5] != ':')
        bad();
      for (std::size_t i : {0u, 1u, 3u, 4u, 6u, 7u})
        if (!std::isdigit(static_cast<unsigned char>(a_text[i])))
          bad();
      long const h = 10 * (a_text[0] - '0') + (a_text[1] - '0');
      long const m = 10 * (a_text[3] - '0') + (a_text[4] - '0');
      long const s = 10 * (a_text[6] - '0') + (a_text[7] - '0');
      if (h > 23 || m > 59 || s > 59)
        bad();
      return h * 3600 + m * 60 + s;
    }

    inline double parse_real(std::string const& a_text, char const* a_field,
                             long a_line)
    {
      try
      {
        std::size_t used = 0;
        double const v = std::stod(a_text, &used);
        if (used == a_text.size() && std::isfinite(v))
          return v;
      }
      catch (std::exception const&) {}
      throw DataError("line " + std::to_string(a_line) + ": bad " +
                      a_field + " '" + a_text + "'");
    }

    inline long parse_int(std::string const& a_text, char const* a_field,
                          long a_line)
    {
      try
      {
        std::size_t used = 0;
        long const v = std::stol(a_text, &used);
        if (used == a_text.size())
          return v;
      }
      catch (std::exception const&) {}
      throw DataError("line " + std::to_string(a_line) + ": bad " +
                      a_field + " '" + a_text + "'");
    }

    // Header line -> column index per required name:
    inline std::map<std::string, std::size_t>
    parse_header(std::string const& a_line,
                 std::vector<std::string> const& a_required)
    {
      auto const cols = split_csv(a_line);
      std::map<std::string, std::size_t> index;
      for (std::size_t i = 0; i < cols.size(); ++i)
        index[cols[i]] = i;
      for (auto const& name : a_required)
        if (index.find(name) == index.end())
          throw DataError("header: missing column '" + name + "'");
      return index;
    }

    inline std::string chomp(std::string a_line)
    {
      if (!a_line.empty() && a_line.back() == '\r')
        a_line.pop_back();
      return a_line;
    }
  }

  inline std::vector<RawTickRecord> parse_trades_csv(std::istream& a_in)
  {
    std::string line;
    if (!std::getline(a_in, line))
      throw DataError("trades: empty input");
    auto const idx = details::parse_header(
      details::chomp(line),
      {"timestamp", "price", "size", "exch", "corr", "cond"});

    std::vector<RawTickRecord> out;
    long lineno = 1;
    while (std::getline(a_in, line))
    {
      ++lineno;
      line = details::chomp(line);
      if (line.empty())
        continue;
      auto const f = details::split_csv(line);
      if (f.size() < idx.size())
        throw DataError("line " + std::to_string(lineno) +
                        ": too few fields");
      RawTickRecord r;
      r.kind       = RecordKind::trade;
      r.time_sec   = details::parse_hms(f[idx.at("timestamp")], lineno);
      r.price      = details::parse_real(f[idx.at("price")], "price", lineno);
      r.size       = details::parse_real(f[idx.at("size")],  "size",  lineno);
      r.exchange   = f[idx.at("exch")];
      r.correction = details::parse_int(f[idx.at("corr")], "corr", lineno);
      r.condition  = f[idx.at("cond")];
      out.push_back(std::move(r));
    }
    return out;
  }

  inline std::vector<RawTickRecord> parse_quotes_csv(std::istream& a_in)
  {
    std::string line;
    if (!std::getline(a_in, line))
      throw DataError("quotes: empty input");
    auto const idx = details::parse_header(
      details::chomp(line),
      {"timestamp", "bid", "ask", "bsize", "asize", "exch"});

    std::vector<RawTickRecord> out;
    long lineno = 1;
    while (std::getline(a_in, line))
    {
      ++lineno;
      line = details::chomp(line);
      if (line.empty())
        continue;
      auto const f = details::split_csv(line);
      if (f.size() < idx.size())
        throw DataError("line " + std::to_string(lineno) +
                        ": too few fields");
      RawTickRecord r;
      r.kind     = RecordKind::quote;
      r.time_sec = details::parse_hms(f[idx.at("timestamp")], lineno);
      r.bid      = details::parse_real(f[idx.at("bid")],   "bid",   lineno);
      r.ask      = details::parse_real(f[idx.at("ask")],   "ask",   lineno);
      r.bid_size = details::parse_real(f[idx.at("bsize")], "bsize", lineno);
      r.ask_size = details::parse_real(f[idx.at("asize")], "asize", lineno);
      r.exchange = f[idx.at("exch")];
      out.push_back(std::move(r));
    }
    return out;
  }

  inline std::vector<RawTickRecord>
  parse_trades_csv_file(std::string const& a_path)
  {
    std::ifstream in(a_path);
    if (!in)
      throw DataError("cannot open trades file: " + a_path);
    return parse_trades_csv(in);
  }

  inline std::vector<RawTickRecord>
  parse_quotes_csv_file(std::string const& a_path)
  {
    std::ifstream in(a_path);
    if (!in)
      throw DataError("cannot open quotes file: " + a_path);
    return parse_quotes_csv(in);
  }

  //=========================================================================//
  // "clean_trades":                                                         //
  //=========================================================================//
  // Filter order: exchange -> session -> zero price -> corrected/abnormal;
  // survivors sorted by time, identical timestamps aggregated to one tick
  // at the volume-weighted average price (equal weights when the group's
  // total size is zero), then log prices on session-fraction times:
  //
  inline std::pair<TickSeries, CleaningReport>
  clean_trades
  (
    std::vector<RawTickRecord> const& a_records,
    TradeFilterConfig const&          a_config,
    std::string const&                a_id = "TRD"
  )
  {
    a_config.session.validate();
    auto const& allow = a_config.allowed_conditions;

    CleaningReport rep;
    rep.input_rows = long(a_records.size());

    std::vector<RawTickRecord const*> kept;
    for (auto const& r : a_records)
    {
      if (!a_config.exchange.empty() && r.exchange != a_config.exchange)
        { ++rep.deleted_exchange; continue; }
      if (r.time_sec < a_config.session.open_sec ||
          r.time_sec > a_config.session.close_sec)
        { ++rep.deleted_session; continue; }
      if (!(r.price > 0.0))
        { ++rep.deleted_zero_price; continue; }
      if (r.correction != 0 ||
          std::find(allow.begin(), allow.end(), r.condition) == allow.end())
        { ++rep.deleted_correction; continue; }
      kept.push_back(&r);
    }
    std::stable_sort(kept.begin(), kept.end(),
                     [](RawTickRecord const* a, RawTickRecord const* b)
                       { return a->time_sec < b->time_sec; });

    std::vector<double> times, prices;
    for (std::size_t i = 0; i < kept.size(); )
    {
      std::size_t j = i;
      double wsum = 0.0, pw = 0.0, psum = 0.0;
      while (j < kept.size() && kept[j]->time_sec == kept[i]->time_sec)
      {
        wsum += kept[j]->size;
        pw   += kept[j]->price * kept[j]->size;
        psum += kept[j]->price;
        ++j;
      }
      double const px = wsum > 0.0 ? pw / wsum : psum / double(j - i);
      times.push_back(a_config.session.fraction(kept[i]->time_sec));
      prices.push_back(std::log(px));
      rep.aggregated_rows += long(j - i) - 1;
      i = j;
    }
    rep.output_rows = long(times.size());

    if (times.size() < 2)
      throw DataError("clean_trades: fewer than 2 ticks survive the filters");
    return {TickSeries(a_id, std::move(times), std::move(prices)), rep};
  }

  //=========================================================================//
  // "clean_quotes":                                                         //
  //=========================================================================//
  // Filter order: exchange -> session -> zero bid/ask -> negative spread ->
  // spread wider than spread_mult x the daily median (median over rows that
  // survive the preceding rules); survivors aggregated per timestamp with
  // per-side volume weighting, emitted as log mid-quotes:
  //
  inline std::pair<TickSeries, CleaningReport>
  clean_quotes
  (
    std::vector<RawTickRecord> const& a_records,
    QuoteFilterConfig const&          a_config,
    std::string const&                a_id = "QTE"
  )
  {
    a_config.session.validate();

    CleaningReport rep;
    rep.input_rows = long(a_records.size());

    std::vector<RawTickRecord const*> kept;
    for (auto const& r : a_records)
    {
      if (!a_config.exchange.empty() && r.exchange != a_config.exchange)
        { ++rep.deleted_exchange; continue; }
      if (r.time_sec < a_config.session.open_sec ||
          r.time_sec > a_config.session.close_sec)
        { ++rep.deleted_session; continue; }
      if (!(r.bid > 0.0) || !(r.ask > 0.0))
        { ++rep.deleted_zero_price; continue; }
      if (r.ask < r.bid)
        { ++rep.deleted_spread; continue; }
      kept.push_back(&r);
    }

    if (!kept.empty())
    {
      auto spreads = std::vector<double>();
      spreads.reserve(kept.size());
      for (auto const* r : kept)
        spreads.push_back(r->ask - r->bid);
      std::sort(spreads.begin(), spreads.end());
      std::size_t const h = spreads.size() / 2;
      double const median = spreads.size() % 2 == 1
        ? spreads[h] : 0.5 * (spreads[h - 1] + spreads[h]);

      auto tail = std::remove_if(
        kept.begin(), kept.end(),
        [&](RawTickRecord const* r)
          { return r->ask - r->bid > a_config.spread_mult * median; });
      rep.deleted_spread += long(kept.end() - tail);
      kept.erase(tail, kept.end());
    }

    std::stable_sort(kept.begin(), kept.end(),
                     [](RawTickRecord const* a, RawTickRecord const* b)
                       { return a->time_sec < b->time_sec; });

    std::vector<double> times, prices;
    for (std::size_t i = 0; i < kept.size(); )
    {
      std::size_t j = i;
      double bw = 0.0, bpw = 0.0, bsum = 0.0;
      double aw = 0.0, apw = 0.0, asum = 0.0;
      while (j < kept.size() && kept[j]->time_sec == kept[i]->time_sec)
      {
        bw  += kept[j]->bid_size;
        bpw += kept[j]->bid * kept[j]->bid_size;
        bsum+= kept[j]->bid;
        aw  += kept[j]->ask_size;
        apw += kept[j]->ask * kept[j]->ask_size;
        asum+= kept[j]->ask;
        ++j;
      }
      double const m = double(j - i);
      double const bid = bw > 0.0 ? bpw / bw : bsum / m;
      double const ask = aw > 0.0 ? apw / aw : asum / m;
      times.push_back(a_config.session.fraction(kept[i]->time_sec));
      prices.push_back(std::log(0.5 * (bid + ask)));
      rep.aggregated_rows += long(j - i) - 1;
      i = j;
    }
    rep.output_rows = long(times.size());

    if (times.size() < 2)
      throw DataError("clean_quotes: fewer than 2 ticks survive the filters");
    return {TickSeries(a_id, std::move(times), std::move(prices)), rep};
  }

  //=========================================================================//
  // "noise_ratio":                                                          //
  //=========================================================================//
  // Liquidity diagnostic gamma-hat = sqrt(n omega2-hat / IV-hat).  The
  // noise variance is the negated lag-1 autocovariance of full-frequency
  // returns (clamped at zero): it centers on omega^2 under i.i.d. noise and
  // on zero for a noise-free semimartingale.  IV-hat is the realised
  // variance on a sparse previous-tick calendar grid:
  //
  inline double noise_ratio(TickSeries const& a_series, long a_sparse_n)
  {
    if (a_sparse_n < 2 || a_series.count() <= a_sparse_n)
      throw DataError("noise_ratio: need series length > sparse_n >= 2");

    auto const& lp = a_series.log_prices();
    long const n = a_series.returns_count();
    double acc = 0.0;
    for (long i = 1; i < n; ++i)
      acc += (lp[std::size_t(i)]     - lp[std::size_t(i) - 1]) *
             (lp[std::size_t(i) + 1] - lp[std::size_t(i)]);
    double const omega2 = std::max(0.0, -acc / double(n - 1));

    SyncedPanel const sparse =
      synchronize({a_series}, SyncSpec{SyncTag::calendar, a_sparse_n, false});
    double const iv = realised_cov(sparse).matrix(0, 0);
    if (!(iv > 0.0))
      throw DataError("noise_ratio: sparse realised variance is not "
                      "positive");
    return std::sqrt(double(n) * omega2 / iv);
  }

  //=========================================================================//
  // Serialization:                                                          //
  //=========================================================================//
  // {time_fraction, log_price} rows, tab-delimited, full precision:
  //
  inline void write_tick_series(std::ostream& a_out, TickSeries const& a_ts)
  {
    a_out.precision(17);
    a_out << "time\tlog_price\n";
    for (long i = 0; i < a_ts.count(); ++i)
      a_out << a_ts.times()[std::size_t(i)] << "\t"
            << a_ts.log_prices()[std::size_t(i)] << "\n";
  }

  // Inverse of write_tick_series; leading '#' comment lines are skipped so
  // cleaning reports feed straight into estimation:
  inline TickSeries
  read_tick_series(std::istream& a_in, std::string const& a_id)
  {
    std::string line;
    long lineno = 0;
    do
    {
      if (!std::getline(a_in, line))
        throw DataError("tick series '" + a_id + "': no header found");
      ++lineno;
      line = details::chomp(line);
    } while (line.empty() || line[0] == '#');

    if (line != "time\tlog_price")
      throw DataError("tick series '" + a_id + "': bad header '" + line +
                      "'");
    std::vector<double> times, prices;
    while (std::getline(a_in, line))
    {
      ++lineno;
      line = details::chomp(line);
      if (line.empty())
        continue;
      std::size_t const tab = line.find('\t');
      if (tab == std::string::npos)
        throw DataError("tick series '" + a_id + "' line " +
                        std::to_string(lineno) + ": missing delimiter");
      times.push_back(
        details::parse_real(line.substr(0, tab), "time", lineno));
      prices.push_back(
        details::parse_real(line.substr(tab + 1), "log_price", lineno));
    }
    return TickSeries(a_id, std::move(times), std::move(prices));
  }

  inline TickSeries read_tick_series_file(std::string const& a_path)
  {
    std::ifstream in(a_path);
    if (!in)
      throw DataError("cannot open tick file: " + a_path);
    std::string id = a_path;
    if (auto const slash = id.find_last_of('/'); slash != std::string::npos)
      id = id.substr(slash + 1);
    if (auto const dot = id.find_last_of('.'); dot != std::string::npos)
      id = id.substr(0, dot);
    return read_tick_series(in, id);
  }
}
// namespace pacov
