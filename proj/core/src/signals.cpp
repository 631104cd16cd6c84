#include "fpcav/signals.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace fpcav {

namespace {

ModeVector project(const ModeMatrix* Q, const ModeVector& x) { return Q ? ModeVector(*Q * x) : x; }

const ModeMatrix& quadrant_cached(const Cavity& cav, Axis axis);

}  // namespace

const ModeMatrix& quadrant_detector(const Cavity& cav, Axis axis) { return quadrant_cached(cav, axis); }

double demod_static(const Cavity& cav, const ModeVector& v1, const ModeMatrix* Q) {
  const int k = cav.config().demod_k;
  const cplx ephi = std::exp(I * cav.config().demod_phase);
  cplx acc = 0.0;
  for (const auto& [p, J] : cav.harmonics()) {
    const double Jm = cav.bessel(p - k);
    if (Jm == 0.0) continue;
    const ModeVector a = cav.green_out(p, 0.0).cwiseProduct(v1);
    const ModeVector b = cav.green_out(p - k, 0.0).cwiseProduct(v1);
    acc += 2.0 * Jm * J * ephi * a.dot(project(Q, b));
  }
  return acc.imag();
}

double dp_static(const Cavity& cav, const ModeVector& v1) { return demod_static(cav, v1, nullptr); }

double qd_static(const Cavity& cav, const ModeVector& v1, Axis axis) {
  return demod_static(cav, v1, &quadrant_cached(cav, axis));
}

double qd_dc(const Cavity& cav, const ModeVector& v1, Axis axis) {
  const ModeMatrix& Q = quadrant_cached(cav, axis);
  double acc = 0.0;
  for (const auto& [p, J] : cav.harmonics()) {
    const ModeVector a = cav.green_out(p, 0.0).cwiseProduct(v1);
    acc += J * J * a.dot(Q * a).real();
  }
  return acc;
}

namespace {

cplx demod_raw(const Cavity& cav, const ModeVector& v1, cplx omega, const ModeMatrix* Q,
               const ModeMatrix& gen) {
  const int k = cav.config().demod_k;
  const double phi = cav.config().demod_phase;
  cplx acc = 0.0;
  for (const auto& [p, J] : cav.harmonics()) {
    const ModeVector a = project(Q, cav.green_out(p, 0.0).cwiseProduct(v1));
    for (int sgn : {+1, -1}) {
      const int h = p + sgn * k;
      const double Jh = cav.bessel(h);
      if (Jh == 0.0) continue;
      const ModeVector b = cav.green(h, omega).cwiseProduct(cav.phi()).cwiseProduct(
          gen * cav.green(h, 0.0).cwiseProduct(v1));
      acc += double(sgn) * 2.0 * Jh * J * std::exp(-I * (sgn * phi)) * cav.loop(h) * a.dot(b);
    }
  }
  return acc;
}

cplx demod_mu_raw(const Cavity& cav, const ModeVector& v1, cplx omega, const ModeMatrix* Q) {
  const int k = cav.config().demod_k;
  const cplx ephi = std::exp(I * cav.config().demod_phase);
  cplx acc = 0.0;
  for (const auto& [p, J] : cav.harmonics()) {
    const double Jm = cav.bessel(p - k);
    if (Jm == 0.0) continue;
    const ModeVector a0 = cav.green_out(p, 0.0).cwiseProduct(v1);
    const ModeVector b0 = cav.green_out(p - k, 0.0).cwiseProduct(v1);
    const ModeVector aw = cav.green_out(p, -std::conj(omega)).cwiseProduct(v1);
    const ModeVector bw = cav.green_out(p - k, omega).cwiseProduct(v1);
    acc += 2.0 * Jm * J * ephi * (a0.dot(project(Q, bw)) + aw.dot(project(Q, b0)));
  }
  return acc;
}

SignalSet coefficients(const Cavity& cav, const ModeVector& v1, cplx omega, const ModeMatrix* Q,
                       const std::vector<MirrorProfile>& profiles) {
  SignalSet s;
  s.omega = omega;
  s.s_static = demod_static(cav, v1, Q);
  const cplx wm = -std::conj(omega);
  const cplx mu_p = demod_mu_raw(cav, v1, omega, Q), mu_m = demod_mu_raw(cav, v1, wm, Q);
  s.s_mu = (mu_p - std::conj(mu_m)) / (2.0 * I);
  const auto gens = generator_set(cav);
  auto re_d = [&](const ModeMatrix& gen) {
    return (demod_raw(cav, v1, omega, Q, gen) + std::conj(demod_raw(cav, v1, wm, Q, gen))) / 2.0;
  };
  for (int i = 0; i < kGenCount; ++i) s.s_vec[i] = re_d(gens[i]);
  for (const auto& pr : profiles) s.s_def.push_back(re_d(cav.to_frame(pr.sigma, pr.mirror, 1)));
  return s;
}

}  // namespace

cplx demod_coefficient(const Cavity& cav, const ModeVector& v1, cplx omega, const ModeMatrix* Q,
                       const ModeMatrix& gen) {
  return (demod_raw(cav, v1, omega, Q, gen) +
          std::conj(demod_raw(cav, v1, -std::conj(omega), Q, gen))) / 2.0;
}

DPSignalSet dp_coefficients(const Cavity& cav, const ModeVector& v1, cplx omega,
                            const std::vector<MirrorProfile>& profiles) {
  return coefficients(cav, v1, omega, nullptr, profiles);
}

QDSignalSet qd_coefficients(const Cavity& cav, const ModeVector& v1, cplx omega, Axis axis,
                            const std::vector<MirrorProfile>& profiles) {
  return coefficients(cav, v1, omega, &quadrant_cached(cav, axis), profiles);
}

namespace {

const ModeMatrix& quadrant_cached(const Cavity& cav, Axis axis) {
  // Q_q depends only on the basis order; cache per (n_max, axis).
  static std::mutex m;
  static std::map<std::pair<int, int>, ModeMatrix> cache;
  std::lock_guard<std::mutex> lock(m);
  const auto key = std::make_pair(cav.basis().n_max(), axis == Axis::y ? 0 : 1);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, quadrant_matrix(cav.basis(), axis)).first;
  return it->second;
}

}  // namespace

}  // namespace fpcav
