// vim:ts=2:et
//===========================================================================//
//                                 "sim.hpp":                                //
//   Monte Carlo laboratory: SV factor model with OU log-volatility, exact   //
//   OU transitions, Euler price paths, heteroscedastic noise, Poisson       //
//   non-synchronous sampling, the true-avar oracle, and the bake-off        //
//   harness with bias/rmse summary tables                                   //
//===========================================================================//
#pragma once

#include "pacov/core.hpp"
#include "pacov/estimators.hpp"
#include "pacov/sync.hpp"
#include "pacov/weights.hpp"

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <sstream>
#include <thread>

namespace pacov
{
  //=========================================================================//
  // Seed derivation:                                                        //
  //=========================================================================//
  // Streams are split per (rep, purpose, asset) from one master seed, so
  // results are deterministic under any parallel schedule and scenario
  // cells share innovations (common random numbers):
  //
  inline std::uint64_t splitmix64(std::uint64_t a_x)
  {
    a_x += 0x9e3779b97f4a7c15ULL;
    a_x = (a_x ^ (a_x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    a_x = (a_x ^ (a_x >> 27)) * 0x94d049bb133111ebULL;
    return a_x ^ (a_x >> 31);
  }

  inline std::uint64_t
  mix_seed(std::uint64_t a_master, std::uint64_t a_rep,
           std::uint64_t a_purpose, std::uint64_t a_asset)
  {
    std::uint64_t h = splitmix64(a_master ^ 0x9e3779b97f4a7c15ULL);
    h = splitmix64(h ^ (a_rep     + 0x00000100000001b3ULL));
    h = splitmix64(h ^ (a_purpose + 0x517cc1b727220a95ULL));
    h = splitmix64(h ^ (a_asset   + 0x2545f4914f6cdd1dULL));
    return h;
  }

  //=========================================================================//
  // Model configuration:                                                    //
  //=========================================================================//
  // dX = a dt + rho sigma dB + sqrt(1-rho^2) sigma dW   (W common factor),
  // sigma_t = exp(beta0 + beta1 vrho_t),
  // d vrho  = alpha vrho dt + dB                        (same B as price).
  //
  // The default tuple normalizes volatility: E \int sigma^2 = 1 because
  // beta0 = beta1^2 / (2 alpha):
  //
  struct SvAssetParams
  {
    double a     =  0.03;
    double beta0 = -5.0 / 16.0;
    double beta1 =  1.0 / 8.0;
    double alpha = -1.0 / 40.0;
    double rho   = -0.3;
  };

  struct SvModelConfig
  {
    std::vector<SvAssetParams> assets = {SvAssetParams{}, SvAssetParams{}};
    long                       grid_N = 23400;   // seconds in the session
    std::uint64_t         master_seed = 42;      // carried into harness runs

    long d() const { return long(assets.size()); }

    void validate() const
    {
      if (assets.empty())
        throw DataError("SvModelConfig: need at least one asset");
      if (grid_N < 2)
        throw DataError("SvModelConfig: grid_N must be >= 2");
      for (auto const& p : assets)
      {
        if (!(p.alpha < 0.0))
          throw DataError("SvModelConfig: alpha must be negative "
                          "(mean reversion)");
        if (!(std::fabs(p.rho) < 1.0))
          throw DataError("SvModelConfig: |rho| must be < 1");
      }
    }
  };

  //=========================================================================//
  // Log-volatility state:                                                   //
  //=========================================================================//
  // Exact OU transition over a step of length dt (Gaussian conditional law,
  // no discretization error):  x' = e^{alpha dt} x + s(dt) Z,
  // s(dt)^2 = (e^{2 alpha dt} - 1) / (2 alpha):
  //
  inline double
  ou_exact_step(double a_alpha, double a_dt, double a_x, double a_z)
  {
    double const decay = std::exp(a_alpha * a_dt);
    double const var   = std::expm1(2.0 * a_alpha * a_dt) / (2.0 * a_alpha);
    return decay * a_x + std::sqrt(var) * a_z;
  }

  // Full state path of length N+1 on [0,1] with dt = 1/N; the start is
  // drawn from the stationary law N(0, 1/(-2 alpha)):
  inline std::vector<double>
  simulate_varrho(SvAssetParams const& a_params, long a_n,
                  std::mt19937_64& a_rng)
  {
    if (!(a_params.alpha < 0.0))
      throw DataError("simulate_varrho: alpha must be negative");
    if (a_n < 1)
      throw DataError("simulate_varrho: need at least one step");

    std::normal_distribution<double> gauss(0.0, 1.0);
    double const dt = 1.0 / double(a_n);

    auto path = std::vector<double>(std::size_t(a_n) + 1);
    path[0] = std::sqrt(1.0 / (-2.0 * a_params.alpha)) * gauss(a_rng);
    for (long j = 1; j <= a_n; ++j)
      path[std::size_t(j)] =
        ou_exact_step(a_params.alpha, dt, path[std::size_t(j) - 1],
                      gauss(a_rng));
    return path;
  }

  //=========================================================================//
  // "simulate_paths":                                                       //
  //=========================================================================//
  struct SimulatedPaths
  {
    Matrix x;         // (N+1) x d efficient log prices
    Matrix sigma;     // (N+1) x d spot volatilities
    Matrix true_cov;  // d x d integrated covariance (left-endpoint Riemann)
    long   grid_N = 0;
  };

  // Euler scheme on the N-grid with sigma frozen at the left endpoint.
  // Per step the draw order is fixed (common factor first, then one draw
  // per asset); each asset's draw feeds both its price innovation and its
  // volatility-state transition (the perfect-correlation clause):
  //
  inline SimulatedPaths
  simulate_paths(SvModelConfig const& a_config, std::mt19937_64& a_rng)
  {
    a_config.validate();
    long const n = a_config.grid_N;
    long const d = a_config.d();
    double const dt  = 1.0 / double(n);
    double const sdt = std::sqrt(dt);
    std::normal_distribution<double> gauss(0.0, 1.0);

    SimulatedPaths out;
    out.grid_N = n;
    out.x      = Matrix::Zero(n + 1, d);
    out.sigma  = Matrix::Zero(n + 1, d);

    auto vrho = std::vector<double>(std::size_t(d));
    for (long k = 0; k < d; ++k)
    {
      auto const& p = a_config.assets[std::size_t(k)];
      vrho[std::size_t(k)] =
        std::sqrt(1.0 / (-2.0 * p.alpha)) * gauss(a_rng);
      out.sigma(0, k) = std::exp(p.beta0 + p.beta1 * vrho[std::size_t(k)]);
    }

    for (long j = 1; j <= n; ++j)
    {
      double const zw = gauss(a_rng);
      for (long k = 0; k < d; ++k)
      {
        auto const& p  = a_config.assets[std::size_t(k)];
        double const zb = gauss(a_rng);
        double const sg = out.sigma(j - 1, k);
        out.x(j, k) = out.x(j - 1, k) + p.a * dt +
                      sg * sdt * (p.rho * zb +
                                  std::sqrt(1.0 - p.rho * p.rho) * zw);
        vrho[std::size_t(k)] =
          ou_exact_step(p.alpha, dt, vrho[std::size_t(k)], zb);
        out.sigma(j, k) = std::exp(p.beta0 + p.beta1 * vrho[std::size_t(k)]);
      }
    }

    out.true_cov = Matrix::Zero(d, d);
    for (long k = 0; k < d; ++k)
      for (long l = 0; l < d; ++l)
      {
        double acc = 0.0;
        for (long j = 0; j < n; ++j)
          acc += out.sigma(j, k) * out.sigma(j, l);
        acc /= double(n);
        if (k != l)
        {
          auto const& pk = a_config.assets[std::size_t(k)];
          auto const& pl = a_config.assets[std::size_t(l)];
          acc *= std::sqrt(1.0 - pk.rho * pk.rho) *
                 std::sqrt(1.0 - pl.rho * pl.rho);
        }
        out.true_cov(k, l) = acc;
      }
    return out;
  }

  //=========================================================================//
  // "add_noise":                                                            //
  //=========================================================================//
  // Y = X + eps, eps i.i.d. N(0, omega^2), with the noise variance tied to
  // the realized volatility level: omega^2 = gamma^2 sqrt((1/N) sum sigma^4)
  // (right-endpoint sum, j = 1..N):
  //
  struct NoiseConfig
  {
    double gamma_sq = 0.0;
  };

  struct NoisyPath
  {
    Vector y;
    double omega_sq = 0.0;
  };

  inline NoisyPath
  add_noise(Vector const& a_x, Vector const& a_sigma,
            NoiseConfig const& a_noise, std::mt19937_64& a_rng)
  {
    if (a_x.size() != a_sigma.size() || a_x.size() < 2)
      throw DataError("add_noise: paths must be aligned, length >= 2");
    if (a_noise.gamma_sq < 0.0)
      throw DataError("add_noise: gamma_sq must be >= 0");

    long const n = a_x.size() - 1;
    NoisyPath out;
    if (a_noise.gamma_sq == 0.0)
    {
      out.y = a_x;                       // exactly noise-free
      return out;
    }
    double quart = 0.0;
    for (long j = 1; j <= n; ++j)
      quart += std::pow(a_sigma(j), 4.0);
    out.omega_sq = a_noise.gamma_sq * std::sqrt(quart / double(n));

    std::normal_distribution<double> gauss(0.0, std::sqrt(out.omega_sq));
    out.y = a_x;
    for (long j = 0; j <= n; ++j)
      out.y(j) += gauss(a_rng);
    return out;
  }

  struct NoisyPanel
  {
    Matrix              y;
    std::vector<double> omega_sq;
  };

  inline NoisyPanel
  add_noise(Matrix const& a_x, Matrix const& a_sigma,
            NoiseConfig const& a_noise, std::mt19937_64& a_rng)
  {
    if (a_x.rows() != a_sigma.rows() || a_x.cols() != a_sigma.cols())
      throw DataError("add_noise: paths must be aligned");
    NoisyPanel out;
    out.y = Matrix(a_x.rows(), a_x.cols());
    for (long k = 0; k < a_x.cols(); ++k)
    {
      auto res = add_noise(Vector(a_x.col(k)), Vector(a_sigma.col(k)),
                           a_noise, a_rng);
      out.y.col(k) = res.y;
      out.omega_sq.push_back(res.omega_sq);
    }
    return out;
  }

  //=========================================================================//
  // "poisson_sample":                                                       //
  //=========================================================================//
  // Exponential(lambda seconds) waiting times accumulated over the session
  // and snapped to the nearest index of the complete N-second record;
  // duplicate snaps collapse to one tick.  The expected tick count is the
  // number of occupied one-second cells, N (1 - exp(-1/lambda)), which is
  // ~ N/lambda once lambda is a few seconds or more:
  //
  inline TickSeries
  poisson_sample(Vector const& a_y, double a_lambda, std::mt19937_64& a_rng,
                 std::string const& a_id = "SIM")
  {
    if (!(a_lambda >= 1.0))
      throw DataError("poisson_sample: lambda must be >= 1 second");
    if (a_y.size() < 2)
      throw DataError("poisson_sample: path too short");

    long const n = a_y.size() - 1;       // session length in seconds
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    std::vector<double> times, prices;
    double t = 0.0;
    long last = -1;
    while (true)
    {
      t += -a_lambda * std::log1p(-u01(a_rng));
      if (t > double(n))
        break;
      long j = std::llround(t);
      j = std::min(std::max(j, long(1)), n);   // snap to grid, skip the open
      if (j == last)
        continue;
      last = j;
      times.push_back(double(j) / double(n));
      prices.push_back(a_y(j));
    }
    if (times.size() < 2)
      throw DataError("poisson_sample: fewer than 2 ticks drawn "
                      "(lambda too large for the session)");
    return TickSeries(a_id, std::move(times), std::move(prices));
  }

  //=========================================================================//
  // "true_avar":                                                            //
  //=========================================================================//
  // Oracle asymptotic covariance of the vectorized balanced estimator,
  // assembled from the known spot-volatility paths and noise covariance.
  // The three d^2 x d^2 arrays have Wick-product structure over index pairs
  // (k,l) x (k',l'):
  //   Lambda = Sig^{kk'}Sig^{ll'} + Sig^{kl'}Sig^{lk'}        (time-varying)
  //   ThetaA = Sig^{kk'}Psi^{ll'} + Sig^{kl'}Psi^{k'l}
  //          + Sig^{k'l}Psi^{kl'} + Sig^{ll'}Psi^{kk'}        (time-varying)
  //   Upsil  = Psi^{kk'}Psi^{ll'} + Psi^{kl'}Psi^{lk'}        (constant)
  // and
  //   avar = (2/psi2^2) (Phi22 th \int Lambda + (Phi12/th) \int ThetaA
  //                      + (Phi11/th^3) Upsil):
  //
  struct TrueAvarOracle
  {
    Matrix avar;          // d^2 x d^2
    Matrix int_lambda;    // \int Lambda_s ds
    Matrix int_theta;     // \int Theta_s ds
    Matrix upsilon;       // Upsilon
  };

  inline TrueAvarOracle
  true_avar
  (
    Matrix const&              a_sigma,    // (N+1) x d spot vols
    std::vector<double> const& a_rho,      // per-asset factor loadings
    Matrix const&              a_psi,      // d x d noise covariance
    double                     a_theta,
    WeightScheme const&        a_scheme
  )
  {
    long const d = a_sigma.cols();
    long const n = a_sigma.rows() - 1;
    if (n < 1 || long(a_rho.size()) != d ||
        a_psi.rows() != d || a_psi.cols() != d)
      throw DataError("true_avar: inconsistent inputs");
    if (!(a_theta > 0.0))
      throw DataError("true_avar: theta must be positive");

    auto slot = [d](long a, long b) { return a * d + b; };

    Matrix il = Matrix::Zero(d * d, d * d);
    Matrix it = Matrix::Zero(d * d, d * d);
    Matrix sp(d, d);
    for (long j = 0; j < n; ++j)          // left-endpoint Riemann sum
    {
      for (long k = 0; k < d; ++k)
        for (long l = 0; l < d; ++l)
        {
          double v = a_sigma(j, k) * a_sigma(j, l);
          if (k != l)
            v *= std::sqrt(1.0 - a_rho[std::size_t(k)] *
                                 a_rho[std::size_t(k)]) *
                 std::sqrt(1.0 - a_rho[std::size_t(l)] *
                                 a_rho[std::size_t(l)]);
          sp(k, l) = v;
        }
      for (long k = 0; k < d; ++k)
        for (long l = 0; l < d; ++l)
          for (long kp = 0; kp < d; ++kp)
            for (long lp = 0; lp < d; ++lp)
            {
              il(slot(k, l), slot(kp, lp)) +=
                sp(k, kp) * sp(l, lp) + sp(k, lp) * sp(l, kp);
              it(slot(k, l), slot(kp, lp)) +=
                sp(k, kp) * a_psi(l, lp) + sp(k, lp) * a_psi(kp, l) +
                sp(kp, l) * a_psi(k, lp) + sp(l, lp) * a_psi(k, kp);
            }
    }
    il /= double(n);
    it /= double(n);

    Matrix up = Matrix::Zero(d * d, d * d);
    for (long k = 0; k < d; ++k)
      for (long l = 0; l < d; ++l)
        for (long kp = 0; kp < d; ++kp)
          for (long lp = 0; lp < d; ++lp)
            up(slot(k, l), slot(kp, lp)) =
              a_psi(k, kp) * a_psi(l, lp) + a_psi(k, lp) * a_psi(l, kp);

    auto const& c   = a_scheme.constants();
    double const p22 = c.psi2 * c.psi2;
    TrueAvarOracle out;
    out.int_lambda = il;
    out.int_theta  = it;
    out.upsilon    = up;
    out.avar = (2.0 / p22) *
               (c.Phi22 * a_theta * il +
                (c.Phi12 / a_theta) * it +
                (c.Phi11 / (a_theta * a_theta * a_theta)) * up);
    return out;
  }

  //=========================================================================//
  // Monte Carlo harness:                                                    //
  //=========================================================================//
  struct McScenario
  {
    double              gamma_sq = 0.0;
    std::vector<double> lambdas;          // per-asset mean gap in seconds;
                                          // 0 = synchronous complete record

    std::string label() const
    {
      std::ostringstream os;
      os << "gamma2=" << gamma_sq << " lam=(";
      for (std::size_t i = 0; i < lambdas.size(); ++i)
        os << (i ? "," : "") << lambdas[i];
      os << ")";
      return os.str();
    }
  };

  enum class EstKind { realised, mrc, mrc_psd, hy_preavg };

  struct EstimatorSpec
  {
    std::string  name;
    EstKind      kind   = EstKind::mrc;
    SyncSpec     sync;                    // panel-based estimators only
    PreAvgConfig config;
    WeightScheme scheme = WeightScheme::make_min();
  };

  struct McCell
  {
    std::string scenario;
    std::string estimator;
    long   reps_total   = 0;
    long   reps_used    = 0;
    long   failures     = 0;
    long   psd_warnings = 0;
    double mean_n       = 0.0;   // average sample size seen by the estimator
    double bias_cov  = 0.0, rmse_cov  = 0.0;
    double bias_corr = 0.0, rmse_corr = 0.0;
    double bias_beta = 0.0, rmse_beta = 0.0;
  };

  struct McSummary
  {
    std::vector<McCell>      cells;       // scenario-major, estimator-minor
    std::vector<std::string> scenario_labels;
    std::vector<std::string> estimator_names;
    long          reps        = 0;
    std::uint64_t master_seed = 0;

    McCell const& cell(std::size_t a_scenario, std::size_t a_est) const
      { return cells[a_scenario * estimator_names.size() + a_est]; }

    // Delimited text, one panel per target, scenarios x (bias, rmse) pairs:
    std::string table() const
    {
      std::ostringstream os;
      os.setf(std::ios::fixed);
      os.precision(6);
      os << "# monte-carlo summary\n"
         << "# reps=" << reps << " master_seed=" << master_seed << "\n";
      struct Panel
      {
        char const* title;
        double McCell::* bias;
        double McCell::* rmse;
      };
      Panel const panels[3] =
      {
        {"covariance",  &McCell::bias_cov,  &McCell::rmse_cov},
        {"correlation", &McCell::bias_corr, &McCell::rmse_corr},
        {"beta",        &McCell::bias_beta, &McCell::rmse_beta}
      };
      for (auto const& p : panels)
      {
        os << "# panel: " << p.title << "\n";
        os << "scenario";
        for (auto const& e : estimator_names)
          os << "\t" << e << ":bias\t" << e << ":rmse";
        os << "\n";
        for (std::size_t s = 0; s < scenario_labels.size(); ++s)
        {
          os << scenario_labels[s];
          for (std::size_t e = 0; e < estimator_names.size(); ++e)
          {
            auto const& c = cell(s, e);
            os << "\t" << c.*(p.bias) << "\t" << c.*(p.rmse);
          }
          os << "\n";
        }
      }
      return os.str();
    }
  };

  namespace details
  {
    struct RepOutcome
    {
      bool   ok   = false;
      bool   psd  = false;
      double n_used = 0.0;
      double e_cov = 0.0, e_corr = 0.0, e_beta = 0.0;
    };

    inline long mc_threads(long a_requested)
    {
      if (a_requested > 0)
        return a_requested;
      if (char const* env = std::getenv("PACOV_THREADS"))
      {
        long const v = std::atol(env);
        if (v > 0)
          return v;
      }
      unsigned const hc = std::thread::hardware_concurrency();
      return hc > 0 ? long(hc) : 1;
    }

    // One (scenario, estimator) evaluation on pre-sampled tick series:
    inline CovEstimate
    run_estimator(EstimatorSpec const& a_spec,
                  std::vector<TickSeries> const& a_ticks)
    {
      if (a_spec.kind == EstKind::hy_preavg)
        return hy_preavg(a_ticks, a_spec.scheme, a_spec.config);

      SyncedPanel const panel = synchronize(a_ticks, a_spec.sync);
      switch (a_spec.kind)
      {
      case EstKind::realised:
        return realised_cov(panel);
      case EstKind::mrc:
        return mrc_balanced(panel, a_spec.scheme, a_spec.config);
      case EstKind::mrc_psd:
        return mrc_psd(panel, a_spec.scheme, a_spec.config);
      default:
        throw DataError("run_estimator: unknown estimator kind");
      }
    }
  }

  //-------------------------------------------------------------------------//
  // "run_monte_carlo":                                                      //
  //-------------------------------------------------------------------------//
  // Replications are independent work units; per-rep streams are derived
  // from (master_seed, rep, purpose, asset), so the summary is bit-stable
  // under any thread count.  The efficient path is simulated once per rep
  // and shared across all scenario cells; noise and sampling streams are
  // re-seeded identically per cell, which couples the cells (common random
  // numbers).  Estimator failures exclude the rep from that cell's moments
  // and are counted:
  //
  inline McSummary
  run_monte_carlo
  (
    SvModelConfig const&              a_config,
    std::vector<McScenario> const&    a_scenarios,
    std::vector<EstimatorSpec> const& a_estimators,
    long                              a_reps,
    std::uint64_t                     a_master_seed,
    long                              a_threads = 0
  )
  {
    a_config.validate();
    if (a_reps < 1)
      throw DataError("run_monte_carlo: reps must be >= 1");
    if (a_scenarios.empty() || a_estimators.empty())
      throw DataError("run_monte_carlo: need scenarios and estimators");
    for (auto const& s : a_scenarios)
    {
      if (long(s.lambdas.size()) != a_config.d())
        throw DataError("run_monte_carlo: scenario lambda count != assets");
      for (double lam : s.lambdas)
        if (lam != 0.0 && !(lam >= 1.0))
          throw DataError("run_monte_carlo: lambda must be 0 (complete "
                          "record) or >= 1 second");
    }

    std::size_t const ns = a_scenarios.size();
    std::size_t const ne = a_estimators.size();
    auto slots = std::vector<details::RepOutcome>(
      ns * ne * std::size_t(a_reps));

    std::atomic<long> next{0};
    auto worker = [&]()
    {
      while (true)
      {
        long const rep = next.fetch_add(1);
        if (rep >= a_reps)
          return;

        auto const urep = std::uint64_t(rep);
        std::mt19937_64 path_rng(mix_seed(a_master_seed, urep, 0, 0));
        SimulatedPaths const paths = simulate_paths(a_config, path_rng);

        double const t00 = paths.true_cov(0, 0);
        bool const multi = a_config.d() > 1;
        double const tcv = multi ? paths.true_cov(0, 1)       : t00;
        double const t11 = multi ? paths.true_cov(1, 1)       : t00;
        double const tcr = tcv / std::sqrt(t00 * t11);
        double const tbe = tcv / t00;

        for (std::size_t s = 0; s < ns; ++s)
        {
          auto const& sc = a_scenarios[s];

          // Noise and ticks, re-seeded per cell for coupling:
          bool sampled = true;
          auto ticks = std::vector<TickSeries>();
          try
          {
            NoiseConfig const nc{sc.gamma_sq};
            for (long k = 0; k < a_config.d(); ++k)
            {
              std::mt19937_64 noise_rng(
                mix_seed(a_master_seed, urep, 1, std::uint64_t(k)));
              auto const noisy =
                add_noise(Vector(paths.x.col(k)),
                          Vector(paths.sigma.col(k)), nc, noise_rng);
              double const lam = sc.lambdas[std::size_t(k)];
              if (lam == 0.0)
              {
                // Synchronous complete record: a tick at every grid node:
                long const gn = paths.grid_N;
                std::vector<double> tt(std::size_t(gn) + 1);
                std::vector<double> pp(std::size_t(gn) + 1);
                for (long j = 0; j <= gn; ++j)
                {
                  tt[std::size_t(j)] = double(j) / double(gn);
                  pp[std::size_t(j)] = noisy.y(j);
                }
                ticks.emplace_back("A" + std::to_string(k),
                                   std::move(tt), std::move(pp));
              }
              else
              {
                std::mt19937_64 tick_rng(
                  mix_seed(a_master_seed, urep, 2, std::uint64_t(k)));
                ticks.push_back(
                  poisson_sample(noisy.y, lam, tick_rng,
                                 "A" + std::to_string(k)));
              }
            }
          }
          catch (DataError const&)   { sampled = false; }
          catch (NumericError const&){ sampled = false; }

          for (std::size_t e = 0; e < ne; ++e)
          {
            auto& slot = slots[(s * ne + e) * std::size_t(a_reps) +
                               std::size_t(rep)];
            if (!sampled)
              continue;
            try
            {
              CovEstimate const est =
                details::run_estimator(a_estimators[e], ticks);
              long const j = multi ? 1 : 0;
              double const m00 = est.matrix(0, 0);
              double const mcv = est.matrix(0, j);
              double const m11 = est.matrix(j, j);
              if (!(m00 > 0.0) || !(m11 > 0.0))
                throw NumericError("non-positive variance estimate");
              slot.e_cov  = mcv - tcv;
              slot.e_corr = mcv / std::sqrt(m00 * m11) - tcr;
              slot.e_beta = mcv / m00 - tbe;
              slot.psd    = est.psd_warning;
              slot.n_used = double(est.n_used);
              slot.ok     = true;
            }
            catch (DataError const&)    {}
            catch (NumericError const&) {}
          }
        }
      }
    };

    long const nthreads =
      std::min<long>(details::mc_threads(a_threads), a_reps);
    if (nthreads <= 1)
      worker();
    else
    {
      auto pool = std::vector<std::thread>();
      pool.reserve(std::size_t(nthreads));
      for (long t = 0; t < nthreads; ++t)
        pool.emplace_back(worker);
      for (auto& t : pool)
        t.join();
    }

    McSummary out;
    out.reps        = a_reps;
    out.master_seed = a_master_seed;
    for (auto const& s : a_scenarios)
      out.scenario_labels.push_back(s.label());
    for (auto const& e : a_estimators)
      out.estimator_names.push_back(e.name);

    for (std::size_t s = 0; s < ns; ++s)
      for (std::size_t e = 0; e < ne; ++e)
      {
        McCell cell;
        cell.scenario   = out.scenario_labels[s];
        cell.estimator  = out.estimator_names[e];
        cell.reps_total = a_reps;

        double sc = 0, qc = 0, sr = 0, qr = 0, sb = 0, qb = 0;
        for (long rep = 0; rep < a_reps; ++rep)
        {
          auto const& slot = slots[(s * ne + e) * std::size_t(a_reps) +
                                   std::size_t(rep)];
          if (!slot.ok)
          {
            ++cell.failures;
            continue;
          }
          ++cell.reps_used;
          cell.psd_warnings += slot.psd ? 1 : 0;
          cell.mean_n += slot.n_used;
          sc += slot.e_cov;  qc += slot.e_cov  * slot.e_cov;
          sr += slot.e_corr; qr += slot.e_corr * slot.e_corr;
          sb += slot.e_beta; qb += slot.e_beta * slot.e_beta;
        }
        if (cell.reps_used > 0)
        {
          double const m = double(cell.reps_used);
          cell.mean_n   /= m;
          cell.bias_cov  = sc / m;  cell.rmse_cov  = std::sqrt(qc / m);
          cell.bias_corr = sr / m;  cell.rmse_corr = std::sqrt(qr / m);
          cell.bias_beta = sb / m;  cell.rmse_beta = std::sqrt(qb / m);
        }
        out.cells.push_back(std::move(cell));
      }
    return out;
  }
}
// namespace pacov
