#include <cmath>
#include <random>

#include "doctest.h"
#include "fpcav/cavity.hpp"
#include "fpcav/errors.hpp"

using namespace fpcav;

namespace {

CavityConfig symmetric(double L, double R, double finesse) {
  CavityConfig c;
  c.L = L;
  c.R1 = -R;
  c.R2 = R;
  auto [r, t] = mirror_from_finesse(finesse, FinesseConvention::log);
  c.r1 = c.r2 = r;
  c.t1 = c.t2 = t;
  return c;
}

// Power series J_p(x) = Σ (-1)^m (x/2)^{2m+p} / (m! (m+p)!)
double bessel_series(int p, double x) {
  double term = std::pow(x / 2, p) / std::tgamma(p + 1.0), s = term;
  for (int m = 1; m < 60; ++m) {
    term *= -(x / 2) * (x / 2) / (m * double(m + p));
    s += term;
  }
  return s;
}

}  // namespace

TEST_CASE("field amplitude") {
  CavityConfig c = symmetric(0.05, 0.1, 500);
  c.lambda = 1e-6;
  c.power = 1.0;
  const auto g = derive_geometry(c);
  const double expect = std::sqrt(1.0 / (phys::hbar * 2 * phys::pi * phys::c / 1e-6));
  CHECK(g.E_amp == doctest::Approx(expect).epsilon(1e-14));
  CHECK(std::abs(g.E_amp - 2.5e9) / 2.5e9 < 0.15);
  CHECK(g.calE == doctest::Approx(c.t1 * g.E_amp));
}

TEST_CASE("geometry") {
  SUBCASE("confocal symmetric") {
    const auto g = derive_geometry(symmetric(0.1, 0.1, 500));
    CHECK(g.phi_G == doctest::Approx(phys::pi / 2).epsilon(1e-14));
    CHECK(g.b == doctest::Approx(0.05));
    CHECK(g.x0 == doctest::Approx(0.05));
  }
  SUBCASE("symmetric near-concentric spot sizes") {
    const double L = 0.05, R = 0.0250001;
    const auto g = derive_geometry(symmetric(L, R, 500));
    const double gg = 1 - L / R;
    // standard symmetric result w_std² = (Lλ/π)/sqrt(1-g²), with w = w_std/√2
    const double wstd2 = (L * 1.064e-6 / phys::pi) / std::sqrt(1 - gg * gg);
    CHECK(g.w1 == doctest::Approx(std::sqrt(wstd2 / 2)).epsilon(1e-12));
    CHECK(g.w2 == doctest::Approx(g.w1));
    CHECK(g.phi_G == doctest::Approx(std::acos(gg)));
    CHECK(g.phi_G > phys::pi / 2);
    CHECK(g.x0 == doctest::Approx(L / 2));
  }
  SUBCASE("unstable geometry is rejected") {
    CHECK_THROWS_AS(derive_geometry(symmetric(0.05, 0.02, 500)), ConfigError);
    CavityConfig c = symmetric(0.05, 0.1, 500);
    c.demod_k = 2;
    CHECK_THROWS_AS(derive_geometry(c), ConfigError);
  }
  SUBCASE("finesse bookkeeping") {
    CavityConfig c = symmetric(0.05, 0.1, 500);
    c.r1 = c.r2 = 0.99686;
    const auto g = derive_geometry(c);
    CHECK(g.R_loop == doctest::Approx(0.99373).epsilon(1e-5));
    CHECK(g.finesse_log == doctest::Approx(-phys::pi / std::log(0.99686 * 0.99686)));
    CHECK(g.finesse_log == doctest::Approx(500.0).epsilon(0.01));
    CHECK(g.finesse_standard == doctest::Approx(phys::pi * 0.99686 / (1 - 0.99686 * 0.99686)));
    CHECK(g.finesse_pi_lnR == doctest::Approx(-phys::pi * std::log(0.99686 * 0.99686)));
    auto [rs, ts] = mirror_from_finesse(500, FinesseConvention::standard);
    CHECK(phys::pi * rs / (1 - rs * rs) == doctest::Approx(500.0).epsilon(1e-12));
    CHECK(rs * rs + ts * ts == doctest::Approx(1.0));
  }
}

TEST_CASE("harmonic weights") {
  auto h0 = harmonic_weights(0.0, 1e-12);
  CHECK(h0.size() == 1);
  CHECK(h0.at(0) == 1.0);
  auto h = harmonic_weights(0.1, 1e-12);
  CHECK(h.at(0) == doctest::Approx(0.997502).epsilon(1e-6));
  CHECK(h.at(1) == doctest::Approx(0.049938).epsilon(1e-5));
  int pmax = 0;
  double sum = 0.0;
  for (auto [p, j] : h) {
    pmax = std::max(pmax, p);
    CHECK(std::abs(j - (p >= 0 ? bessel_series(p, 0.1) : ((-p) % 2 ? -1 : 1) * bessel_series(-p, 0.1))) <
          1e-15);
    CHECK(h.at(-p) == doctest::Approx((p % 2 ? -1.0 : 1.0) * j));
    sum += j * j;
  }
  CHECK(pmax == 6);  // J_7(0.1) ≈ 1.5e-13 falls below the cutoff
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("green function against geometric series") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  int checked = 0;
  while (checked < 25) {
    CavityConfig c = symmetric(0.02 + 0.08 * u(rng), 0.1 + 0.2 * u(rng), 50 + 100 * u(rng));
    c.psi = (u(rng) - 0.5) * 0.5;
    c.mod_depth = 0.3;
    c.mod_freq = 2e7 * u(rng);
    const Cavity cav(c, 3);
    const int p = int(u(rng) * 5) - 2;
    const double om = 1e8 * (u(rng) - 0.5);
    const ModeDiagonal g = cav.green(p, om);
    for (int i = 0; i < cav.basis().dim(); ++i) {
      const cplx z = cav.R_p(p) * std::exp(-I * c.psi) * std::exp(I * om * cav.geometry().tau) *
                     std::exp(-I * (2.0 * cav.basis().mode(i).order() * cav.geometry().phi_G));
      cplx s = 0.0, zn = 1.0;
      for (int n = 0; n < 100000; ++n) {
        s += zn;
        zn *= z;
      }
      CHECK(std::abs(g(i) - s) < 1e-10 * std::abs(s));
    }
    ++checked;
  }
}

TEST_CASE("green function limits") {
  CavityConfig c = symmetric(0.05, 0.1, 500);
  c.r1 = c.r2 = 1e-9;
  c.t1 = c.t2 = 0.5;
  Cavity empty(c, 2);
  for (int i = 0; i < empty.basis().dim(); ++i) CHECK(std::abs(empty.green(0, 0.0)(i) - 1.0) < 1e-8);

  c = symmetric(0.05, 0.1, 500);
  Cavity cav(c, 2);
  const double R = cav.geometry().R_loop;
  CHECK(std::abs(cav.green(0, 0.0)(0) - 1.0 / (1.0 - R)) < 1e-9 / (1 - R));
  const double airy = c.t1 * c.t1 / ((1 - R) * (1 - R));
  CHECK(std::norm(c.t1 * cav.green(0, 0.0)(0)) == doctest::Approx(airy).epsilon(1e-12));
  CHECK(std::abs(cav.green_out(0, 0.0)(0) * c.t1 * c.t1) ==
        doctest::Approx(std::abs(c.t1 * c.t1 / (1 - R) - c.r1)));
  c.psi = phys::pi;
  Cavity off(c, 2);
  CHECK(std::abs(off.green_out(0, 0.0)(0) - (1 / (1 + R) - c.r1 / (c.t1 * c.t1))) < 1e-12);

  // diagonal entry of 𝔊 with identity generator
  c.psi = 0.01;
  Cavity cv(c, 2);
  const ModeMatrix one = ModeMatrix::Identity(cv.basis().dim(), cv.basis().dim());
  const ModeMatrix gp = cv.green_perturb(1, 3e5, one);
  const ModeDiagonal g = cv.green(1, 3e5);
  for (int i = 0; i < cv.basis().dim(); ++i)
    CHECK(std::abs(gp(i, i) - cv.loop(1) * cv.phi()(i) * g(i) * g(i)) < 1e-12 * std::abs(gp(i, i)));
  CHECK(cv.green_perturb(0, 0.0, ModeMatrix::Zero(6, 6)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pole handling") {
  CavityConfig c = symmetric(0.05, 0.1, 500);
  c.r1 = c.r2 = 1.0 - 1e-12;
  c.t1 = c.t2 = 1e-6;
  Cavity cav(c, 0);
  CHECK_THROWS_AS(cav.green(0, 0.0), SingularityError);
}

TEST_CASE("first-order perturbation of the resummed resolvent") {
  CavityConfig c = symmetric(0.05, 0.08, 200);
  c.psi = 0.004;
  const Cavity cav(c, 3);
  const ModeMatrix X = cav.quadratures().Xy + 0.3 * cav.quadratures().Yz;
  const int d = cav.basis().dim();
  auto full = [&](double eps) {
    const ModeMatrix P = (ModeMatrix::Identity(d, d) - I * eps * X);
    const ModeMatrix T = cav.loop(0) * cav.phi().asDiagonal() * P;
    return ModeMatrix((ModeMatrix::Identity(d, d) - T).inverse());
  };
  auto slope = [&](double h) { return ModeMatrix((full(h) - full(-h)) / (2 * h)); };
  const double h = 1e-5;
  const ModeMatrix rich = (4.0 * slope(h / 2) - slope(h)) / 3.0;
  const ModeMatrix lin = -I * cav.green_perturb(0, 0.0, X);
  CHECK((rich - lin).cwiseAbs().maxCoeff() < 1e-7 * lin.cwiseAbs().maxCoeff());
}

TEST_CASE("dagger operations") {
  const double tau = 3e-9;
  auto f = [&](cplx w) { return std::exp(I * w * tau); };
  const cplx w(2e6, 0.0);
  CHECK(std::abs(im_dagger(f, w)) < 1e-15);
  CHECK(std::abs(re_dagger(f, w) - f(w)) < 1e-15);
  auto g = [](cplx x) { return cplx(std::pow(x.real(), 3) + 2.0, 0.0); };
  CHECK(std::abs(im_dagger(g, w) - (g(w) - g(-w)) / (2.0 * I)) < 1e-6);
  auto h = [](cplx x) { return cplx(1.0, 2.0) * x + 3.0 * I; };
  const cplx ww(1.5, -0.3);
  CHECK(std::abs(re_dagger(h, ww) + I * im_dagger(h, ww) - h(ww)) < 1e-14);

  CavityConfig c = symmetric(0.05, 0.1, 300);
  c.psi = 0.002;
  const Cavity cav(c, 2);
  auto G = [&](cplx x) { return ModeMatrix(cav.green(0, x).asDiagonal()); };
  const ModeMatrix re = re_dagger(G, w), im = im_dagger(G, w);
  const ModeMatrix expect_dag = cav.green(0, -w).conjugate().asDiagonal();
  CHECK((re - I * im - expect_dag).cwiseAbs().maxCoeff() < 1e-10);
}
