#include "forster/time_domain.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <fmt/format.h>

#include "forster/errors.hpp"

namespace forster {

std::complex<double> ResolvedGate::coefficient(double omega) const {
  std::complex<double> sum{0.0, 0.0};
  for (const auto& ch : channels) sum += ch.c3 * ch.c3 / std::complex<double>(ch.defect - omega, -gamma_p);
  return sum;
}

namespace {

using cd = std::complex<double>;

struct CellPropagator {
  Eigen::MatrixXcd step;  // exp(A dt) for (E, P, S, PB_1..K)
};

}  // namespace

OracleResult transmission_time_oracle(const PropagationParams& params, const std::optional<ResolvedGate>& gate,
                                      Point2 line, const OracleSettings& s) {
  params.validate();
  if (!(s.dz > 0.0) || !(s.light_speed > 0.0) || s.dt < 0.0)
    throw ConfigError("time-domain oracle: dz and light_speed must be > 0 and dt >= 0");
  const double dt = s.dt > 0.0 ? s.dt : s.dz / s.light_speed;
  const double courant = s.light_speed * dt / s.dz;
  if (courant > 1.0 + 1e-12)
    throw ConfigError(fmt::format("time-domain oracle: CFL violated (light_speed * dt / dz = {:.4g} > 1)", courant));

  const double z0 = params.density.z_min();
  const double z1 = params.density.z_max();
  const auto cells = static_cast<std::size_t>(std::ceil((z1 - z0) / s.dz - 1e-9));
  const double dz = (z1 - z0) / static_cast<double>(cells);
  const double g_sim = params.g * std::sqrt(s.light_speed / params.c);
  const std::size_t k_channels = gate ? gate->channels.size() : 0;
  const std::size_t dim = 3 + k_channels;
  const double line_density = params.density.transverse(line.norm());
  const cd i{0.0, 1.0};

  // Precompute the exact local propagator of every cell.
  std::vector<CellPropagator> props(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    const double z = z0 + (static_cast<double>(c) + 0.5) * dz;
    const double coupling = g_sim * std::sqrt(line_density * params.density.longitudinal(z));
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
    a(0, 1) = -i * coupling;
    a(1, 0) = -i * coupling;
    a(1, 1) = -params.gamma;
    a(1, 2) = -i * params.omega_rabi;
    a(2, 1) = -i * params.omega_rabi;
    a(2, 2) = -params.gamma_s;
    if (gate) {
      const Point2 d = line - gate->position.transverse();
      const double dzg = z - gate->position.z;
      const double r = std::max(std::sqrt(d.x * d.x + d.y * d.y + dzg * dzg), params.r_min);
      for (std::size_t k = 0; k < k_channels; ++k) {
        const double v = gate->channels[k].c3 / (r * r * r);
        a(2, 3 + k) = -i * v;
        a(3 + k, 2) = -i * v;
        a(3 + k, 3 + k) = -gate->gamma_p - i * gate->channels[k].defect;
      }
    }
    props[c].step = (a * dt).exp();
  }

  // Rough arrival time of the steady field: vacuum transit plus the EIT group delay.
  const double om2 = params.omega_rabi * params.omega_rabi;
  const double group_delay = (z1 - z0) / s.light_speed +
                             params.g * params.g / params.c * params.density.effective_length() * line_density / om2;
  const double min_time = s.ramp_time + 3.0 * group_delay + 5.0 / params.gamma;

  std::vector<Eigen::VectorXcd> state(cells, Eigen::VectorXcd::Zero(dim));
  Eigen::VectorXcd tmp(dim);
  std::vector<cd> field(cells);
  OracleResult out;
  out.cells = cells;
  out.courant = courant;

  const auto input = [&](double t) {
    double envelope = 1.0;
    if (t < s.ramp_time) {
      const double x = std::sin(0.5 * kPi * t / s.ramp_time);
      envelope = x * x;
    }
    return envelope * std::exp(-i * params.omega * t);
  };

  double t = 0.0;
  long step = 0;
  double next_check = min_time;
  double last_intensity = -1.0;
  const long max_steps = static_cast<long>(std::ceil(s.max_time / dt));
  while (step < max_steps) {
    // local coupling and relaxation
    for (std::size_t c = 0; c < cells; ++c) {
      tmp.noalias() = props[c].step * state[c];
      state[c] = tmp;
    }
    t += dt;
    ++step;
    // upwind advection of the photon amplitude
    for (std::size_t c = 0; c < cells; ++c) field[c] = state[c](0);
    const cd boundary = input(t);
    for (std::size_t c = 0; c < cells; ++c) {
      const cd upstream = c == 0 ? boundary : field[c - 1];
      state[c](0) = field[c] - courant * (field[c] - upstream);
    }
    if (t >= next_check) {
      const double intensity = std::norm(state[cells - 1](0));
      if (last_intensity >= 0.0 &&
          std::abs(intensity - last_intensity) <= s.settle_tolerance * std::max(intensity, 1e-6)) {
        // remove the vacuum phase of the (slowed) transit so the phase matches the envelope solution
        const cd vacuum = std::exp(i * params.omega * (z1 - z0) / s.light_speed);
        out.transmission = TransmissionResult::from_amplitude(state[cells - 1](0) / input(t) / vacuum);
        out.final_time = t;
        out.steps = step;
        return out;
      }
      last_intensity = intensity;
      next_check += s.settle_window;
    }
  }
  throw NumericalError(fmt::format("time-domain oracle: no steady state within {} us (last |E_out|^2 = {:.6g})",
                                   s.max_time, last_intensity));
}

}  // namespace forster
