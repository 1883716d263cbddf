// vim:ts=2:et
//===========================================================================//
//                               "weights.hpp":                              //
//      Pre-averaging weight functions and their associated constants        //
//===========================================================================//
#pragma once

#include "pacov/core.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace pacov
{
  //=========================================================================//
  // Composite Gauss-Legendre Quadrature:                                    //
  //=========================================================================//
  // 16-node rule per panel; exact for polynomials up to degree 31 on each
  // panel, which covers every power-law weight of practical order, and
  // converges superexponentially for the sine class.
  //
  namespace quadrature
  {
    // Abscissas/weights for [-1,1] (symmetric halves spelled out):
    inline constexpr double nodes16[16] =
    {
      -0.9894009349916499, -0.9445750230732326, -0.8656312023878318,
      -0.7554044083550030, -0.6178762444026438, -0.4580167776572274,
      -0.2816035507792589, -0.0950125098376374,  0.0950125098376374,
       0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
       0.7554044083550030,  0.8656312023878318,  0.9445750230732326,
       0.9894009349916499
    };
    inline constexpr double weights16[16] =
    {
      0.0271524594117541, 0.0622535239386479, 0.0951585116824928,
      0.1246289712555339, 0.1495959888165767, 0.1691565193950025,
      0.1826034150449236, 0.1894506104550685, 0.1894506104550685,
      0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
      0.1246289712555339, 0.0951585116824928, 0.0622535239386479,
      0.0271524594117541
    };

    template <typename F>
    double integrate(F&& a_f, double a_lo, double a_hi, int a_panels)
    {
      assert(a_panels > 0);
      if (!(a_hi > a_lo))
        return 0.0;

      double const h   = (a_hi - a_lo) / double(a_panels);
      double       sum = 0.0;
      for (int p = 0; p < a_panels; ++p)
      {
        double const mid  = a_lo + (double(p) + 0.5) * h;
        double const half = 0.5 * h;
        double       acc  = 0.0;
        for (int q = 0; q < 16; ++q)
          acc += weights16[q] * a_f(mid + half * nodes16[q]);
        sum += half * acc;
      }
      return sum;
    }
  }
  // namespace quadrature

  //=========================================================================//
  // "WeightConstants":                                                      //
  //=========================================================================//
  // psi1 = phi1(0) = int g'^2, psi2 = phi2(0) = int g^2, Phi_ij the cross
  // integrals of phi_i*phi_j, int_g = int g (the asymptotic normalizer of
  // the overlap-indicator estimator):
  //
  struct WeightConstants
  {
    double psi1  = 0.0;
    double psi2  = 0.0;
    double Phi11 = 0.0;
    double Phi12 = 0.0;
    double Phi22 = 0.0;
    double int_g = 0.0;
  };

  //=========================================================================//
  // "FiniteSampleConstants":                                                //
  //=========================================================================//
  // The Riemann analogs actually used in estimator formulas, evaluated at a
  // concrete window length kn.  phi1/phi2 are indexed by lag j = 0..kn-1.
  //
  struct FiniteSampleConstants
  {
    long                kn = 0;
    double              psi1 = 0.0, psi2 = 0.0;
    std::vector<double> phi1, phi2;
    double              Phi11 = 0.0, Phi12 = 0.0, Phi22 = 0.0;
    double              psi_hy = 0.0;   // (1/kn) sum_{h=1}^{kn-1} g(h/kn)
  };

  //=========================================================================//
  // "WeightScheme":                                                         //
  //=========================================================================//
  // A weight function g on [0,1] with g(0) = g(1) = 0, its derivative, the
  // asymptotic constants (closed-form when registered, composite quadrature
  // otherwise), and a per-kn cache of the finite-sample constants.
  // Copyable value type; copies share the immutable implementation.
  //
  class WeightScheme
  {
  public:
    using Fn = std::function<double(double)>;

  private:
    struct Impl
    {
      std::string     name;
      Fn              g;
      Fn              g_prime;
      Fn              phi1_closed;    // empty when no closed form
      Fn              phi2_closed;
      WeightConstants constants;
      bool            closed_forms = false;

      // Finite-sample constant cache, keyed by kn.  Idempotent recomputation
      // under contention is fine; the mutex only prevents torn map state:
      mutable std::mutex                                       cache_mx;
      mutable std::map<long,
                std::shared_ptr<FiniteSampleConstants const>>  cache;
    };

    std::shared_ptr<Impl> m_impl;

    explicit WeightScheme(std::shared_ptr<Impl> a_impl)
    : m_impl(std::move(a_impl)) {}

    //-----------------------------------------------------------------------//
    // Numeric phi/Phi machinery:                                            //
    //-----------------------------------------------------------------------//
    static double phi1_numeric(Fn const& a_gp, double a_s)
    {
      if (a_s <= -1.0 || a_s >= 1.0)
        return 0.0;
      double s = std::max(a_s, 0.0);
      return quadrature::integrate(
        [&](double u) { return a_gp(u) * a_gp(u - s); }, s, 1.0, 64);
    }

    static double phi2_numeric(Fn const& a_g, double a_s)
    {
      if (a_s <= -1.0 || a_s >= 1.0)
        return 0.0;
      double s = std::max(a_s, 0.0);
      return quadrature::integrate(
        [&](double u) { return a_g(u) * a_g(u - s); }, s, 1.0, 64);
    }

    static std::shared_ptr<Impl> build
    (
      std::string a_name,
      Fn          a_g,
      Fn          a_gp,
      Fn          a_phi1,          // may be empty
      Fn          a_phi2,          // may be empty
      std::optional<WeightConstants> a_closed
    )
    {
      auto impl     = std::make_shared<Impl>();
      impl->name    = std::move(a_name);
      impl->g       = std::move(a_g);
      impl->g_prime = std::move(a_gp);

      // Contract checks (machine precision at the endpoints):
      if (std::fabs(impl->g(0.0)) > 1e-12 || std::fabs(impl->g(1.0)) > 1e-12)
        throw DataError("WeightScheme(" + impl->name +
                        "): g(0) and g(1) must vanish");

      if (a_closed)
      {
        impl->constants    = *a_closed;
        impl->phi1_closed  = std::move(a_phi1);
        impl->phi2_closed  = std::move(a_phi2);
        impl->closed_forms = bool(impl->phi1_closed) && bool(impl->phi2_closed);
      }
      else
      {
        WeightConstants c;
        c.psi2  = quadrature::integrate(
          [&](double x) { double v = impl->g(x); return v * v; }, 0.0, 1.0,
          512);
        c.psi1  = quadrature::integrate(
          [&](double x) { double v = impl->g_prime(x); return v * v; }, 0.0,
          1.0, 512);
        c.int_g = quadrature::integrate(impl->g, 0.0, 1.0, 512);

        auto const& g  = impl->g;
        auto const& gp = impl->g_prime;
        auto f11 = [&](double s)
          { double v = phi1_numeric(gp, s); return v * v; };
        auto f12 = [&](double s)
          { return phi1_numeric(gp, s) * phi2_numeric(g, s); };
        auto f22 = [&](double s)
          { double v = phi2_numeric(g, s); return v * v; };
        c.Phi11 = quadrature::integrate(f11, 0.0, 1.0, 128);
        c.Phi12 = quadrature::integrate(f12, 0.0, 1.0, 128);
        c.Phi22 = quadrature::integrate(f22, 0.0, 1.0, 128);

        impl->constants = c;
      }

      if (!(impl->constants.psi2 > 0.0))
        throw DataError("WeightScheme(" + impl->name +
                        "): int g^2 must be positive");
      return impl;
    }

  public:
    WeightScheme() = default;

    //-----------------------------------------------------------------------//
    // Factories:                                                            //
    //-----------------------------------------------------------------------//
    // The canonical two-sided ramp g(x) = min(x, 1-x), with its closed-form
    // constants and phi functions registered:
    //
    static WeightScheme make_min()
    {
      static WeightScheme const singleton = []()
      {
        WeightConstants c;
        c.psi1  = 1.0;
        c.psi2  = 1.0 / 12.0;
        c.Phi11 = 1.0 / 6.0;
        c.Phi12 = 1.0 / 96.0;
        c.Phi22 = 151.0 / 80640.0;
        c.int_g = 0.25;

        Fn g  = [](double x)
        {
          if (x <= 0.0 || x >= 1.0) return 0.0;
          return std::min(x, 1.0 - x);
        };
        Fn gp = [](double x)
        {
          if (x <= 0.0 || x >= 1.0) return 0.0;
          return (x < 0.5) ? 1.0 : -1.0;
        };
        // phi1(s) = 1-3s on [0,1/2], s-1 on [1/2,1]:
        Fn p1 = [](double s)
        {
          if (s < 0.0 || s > 1.0) return 0.0;
          return (s <= 0.5) ? (1.0 - 3.0 * s) : (s - 1.0);
        };
        // phi2(s) = 1/12 - s^2/2 + s^3/2 on [0,1/2], (1-s)^3/6 on [1/2,1]:
        Fn p2 = [](double s)
        {
          if (s < 0.0 || s > 1.0) return 0.0;
          if (s <= 0.5)
            return 1.0 / 12.0 - 0.5 * s * s + 0.5 * s * s * s;
          double u = 1.0 - s;
          return u * u * u / 6.0;
        };
        return WeightScheme(
          build("min", std::move(g), std::move(gp), std::move(p1),
                std::move(p2), c));
      }();
      return singleton;
    }

    // g(x) = x^a (1-x)^b, a,b >= 1.  Constants by quadrature (exact here,
    // since all integrands are polynomial):
    //
    static WeightScheme make_power(int a_a, int a_b)
    {
      if (a_a < 1 || a_b < 1)
        throw DataError("make_power: exponents must be >= 1");

      static std::mutex mx;
      static std::map<std::pair<int, int>, WeightScheme> registry;
      std::lock_guard<std::mutex> lock(mx);
      auto it = registry.find({a_a, a_b});
      if (it != registry.end())
        return it->second;

      double const a = double(a_a);
      double const b = double(a_b);
      Fn g  = [a, b](double x)
      {
        if (x <= 0.0 || x >= 1.0) return 0.0;
        return std::pow(x, a) * std::pow(1.0 - x, b);
      };
      Fn gp = [a, b](double x)
      {
        if (x <= 0.0 || x >= 1.0) return 0.0;
        // d/dx x^a (1-x)^b = x^(a-1) (1-x)^(b-1) (a(1-x) - bx):
        return std::pow(x, a - 1.0) * std::pow(1.0 - x, b - 1.0) *
               (a * (1.0 - x) - b * x);
      };
      std::string name =
        "power:" + std::to_string(a_a) + "," + std::to_string(a_b);
      WeightScheme ws(build(std::move(name), std::move(g), std::move(gp),
                            Fn(), Fn(), std::nullopt));
      registry.emplace(std::make_pair(a_a, a_b), ws);
      return ws;
    }

    // g(x) = sin(c pi x), integer c >= 1:
    //
    static WeightScheme make_sine(int a_c)
    {
      if (a_c < 1)
        throw DataError("make_sine: c must be >= 1");

      static std::mutex mx;
      static std::map<int, WeightScheme> registry;
      std::lock_guard<std::mutex> lock(mx);
      auto it = registry.find(a_c);
      if (it != registry.end())
        return it->second;

      double const c  = double(a_c);
      double const pi = 3.14159265358979323846;
      Fn g  = [c, pi](double x)
      {
        if (x <= 0.0 || x >= 1.0) return 0.0;
        return std::sin(c * pi * x);
      };
      Fn gp = [c, pi](double x)
      {
        if (x <= 0.0 || x >= 1.0) return 0.0;
        return c * pi * std::cos(c * pi * x);
      };
      WeightScheme ws(build("sine:" + std::to_string(a_c), std::move(g),
                            std::move(gp), Fn(), Fn(), std::nullopt));
      registry.emplace(a_c, ws);
      return ws;
    }

    // Free-form scheme; constants always numeric:
    //
    static WeightScheme custom(std::string a_name, Fn a_g, Fn a_gp)
    {
      return WeightScheme(build(std::move(a_name), std::move(a_g),
                                std::move(a_gp), Fn(), Fn(), std::nullopt));
    }

    //-----------------------------------------------------------------------//
    // Accessors:                                                            //
    //-----------------------------------------------------------------------//
    bool valid() const { return bool(m_impl); }

    std::string const& name() const
    {
      assert(m_impl);
      return m_impl->name;
    }

    // g and g' are 0 outside [0,1] by convention:
    double g(double a_x)       const { assert(m_impl); return m_impl->g(a_x); }
    double g_prime(double a_x) const
      { assert(m_impl); return m_impl->g_prime(a_x); }

    WeightConstants const& constants() const
    {
      assert(m_impl);
      return m_impl->constants;
    }

    bool has_closed_forms() const
      { assert(m_impl); return m_impl->closed_forms; }

    // phi1/phi2 as functions of s (0 outside [0,1]):
    double phi1(double a_s) const
    {
      assert(m_impl);
      if (a_s < 0.0 || a_s > 1.0)
        return 0.0;
      return m_impl->phi1_closed ? m_impl->phi1_closed(a_s)
                                 : phi1_numeric(m_impl->g_prime, a_s);
    }

    double phi2(double a_s) const
    {
      assert(m_impl);
      if (a_s < 0.0 || a_s > 1.0)
        return 0.0;
      return m_impl->phi2_closed ? m_impl->phi2_closed(a_s)
                                 : phi2_numeric(m_impl->g, a_s);
    }

    //-----------------------------------------------------------------------//
    // "finite_constants": Riemann constants at window kn, cached:           //
    //-----------------------------------------------------------------------//
    std::shared_ptr<FiniteSampleConstants const>
    finite_constants(long a_kn) const
    {
      assert(m_impl);
      if (a_kn < 2)
        throw DataError("finite_constants: kn must be >= 2");

      {
        std::lock_guard<std::mutex> lock(m_impl->cache_mx);
        auto it = m_impl->cache.find(a_kn);
        if (it != m_impl->cache.end())
          return it->second;
      }

      auto fc = std::make_shared<FiniteSampleConstants>();
      fc->kn  = a_kn;

      long const   kn  = a_kn;
      double const dkn = double(kn);

      // Tabulate g on the window grid once; gv[i] = g(i/kn), i = 0..kn:
      std::vector<double> gv(std::size_t(kn) + 1);
      for (long i = 0; i <= kn; ++i)
        gv[std::size_t(i)] = m_impl->g(double(i) / dkn);

      // psi1 = kn * sum_{i=1}^{kn} (g(i/kn) - g((i-1)/kn))^2:
      double s1 = 0.0;
      for (long i = 1; i <= kn; ++i)
      {
        double const d = gv[std::size_t(i)] - gv[std::size_t(i - 1)];
        s1 += d * d;
      }
      fc->psi1 = dkn * s1;

      // psi2 = (1/kn) sum_{i=1}^{kn-1} g(i/kn)^2:
      double s2 = 0.0;
      for (long i = 1; i <= kn - 1; ++i)
        s2 += gv[std::size_t(i)] * gv[std::size_t(i)];
      fc->psi2 = s2 / dkn;

      // psi_hy = (1/kn) sum_{h=1}^{kn-1} g(h/kn):
      double shy = 0.0;
      for (long h = 1; h <= kn - 1; ++h)
        shy += gv[std::size_t(h)];
      fc->psi_hy = shy / dkn;

      // Lagged sums: phi1(j) over increment products, phi2(j) over level
      // products (the product form is the Riemann analog of the phi2
      // integral), j = 0..kn-1:
      fc->phi1.assign(std::size_t(kn), 0.0);
      fc->phi2.assign(std::size_t(kn), 0.0);
      for (long j = 0; j <= kn - 1; ++j)
      {
        double p1 = 0.0;
        double p2 = 0.0;
        for (long i = j + 1; i <= kn - 1; ++i)
        {
          double const di  =
            gv[std::size_t(i - 1)] - gv[std::size_t(i)];
          double const dij =
            gv[std::size_t(i - j - 1)] - gv[std::size_t(i - j)];
          p1 += di * dij;
          p2 += gv[std::size_t(i)] * gv[std::size_t(i - j)];
        }
        fc->phi1[std::size_t(j)] = p1;
        fc->phi2[std::size_t(j)] = p2;
      }

      // The Phi aggregates (half-weighted j = 0 term):
      double a11 = 0.0, a12 = 0.0, a22 = 0.0;
      for (long j = 0; j <= kn - 1; ++j)
      {
        double const p1 = fc->phi1[std::size_t(j)];
        double const p2 = fc->phi2[std::size_t(j)];
        a11 += p1 * p1;
        a12 += p1 * p2;
        a22 += p2 * p2;
      }
      double const h1 = fc->phi1[0];
      double const h2 = fc->phi2[0];
      fc->Phi11 = dkn * (a11 - 0.5 * h1 * h1);
      fc->Phi12 = (a12 - 0.5 * h1 * h2) / dkn;
      fc->Phi22 = (a22 - 0.5 * h2 * h2) / (dkn * dkn * dkn);

      std::lock_guard<std::mutex> lock(m_impl->cache_mx);
      auto [it, inserted] = m_impl->cache.emplace(a_kn, std::move(fc));
      (void) inserted;   // a concurrent recomputation may have won; use it
      return it->second;
    }
  };

  //=========================================================================//
  // Free-function spelling used throughout the estimator formulas:          //
  //=========================================================================//
  inline FiniteSampleConstants const&
  finite_sample_constants_ref
  (
    WeightScheme const& a_scheme,
    long                a_kn,
    std::shared_ptr<FiniteSampleConstants const>& a_keep_alive
  )
  {
    a_keep_alive = a_scheme.finite_constants(a_kn);
    return *a_keep_alive;
  }

  inline FiniteSampleConstants
  finite_sample_constants(WeightScheme const& a_scheme, long a_kn)
    { return *a_scheme.finite_constants(a_kn); }
}
// namespace pacov
