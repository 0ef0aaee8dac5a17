#include "forster/propagation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "forster/errors.hpp"
#include "forster/simd/kernels.hpp"

namespace forster {

DensityProfile DensityProfile::uniform(double half_length, double radius) {
  DensityProfile p;
  p.shape = Shape::Uniform;
  p.half_length = half_length;
  p.radius = radius;
  return p;
}

DensityProfile DensityProfile::gaussian(double half_length, double radius) {
  DensityProfile p;
  p.shape = Shape::Gaussian;
  p.half_length = half_length;
  p.radius = radius;
  return p;
}

double DensityProfile::longitudinal(double z) const noexcept {
  if (z < z_min() || z > z_max()) return 0.0;
  if (shape == Shape::Uniform) return 1.0;
  const double u = z / half_length;
  return std::exp(-u * u);
}

double DensityProfile::transverse(double b) const noexcept {
  if (radius <= 0.0) return 1.0;
  const double u = b / radius;
  return std::exp(-u * u);
}

double DensityProfile::z_min() const noexcept { return -z_max(); }

double DensityProfile::z_max() const noexcept {
  return shape == Shape::Uniform ? half_length : cutoff * half_length;
}

double DensityProfile::effective_length() const noexcept {
  if (shape == Shape::Uniform) return 2.0 * half_length;
  return std::sqrt(kPi) * half_length * std::erf(cutoff);
}

void DensityProfile::validate() const {
  if (!(half_length > 0.0)) throw DomainError("density profile half length must be > 0");
  if (radius < 0.0) throw DomainError("density profile radius must be >= 0");
  if (shape == Shape::Gaussian && !(cutoff > 0.0)) throw DomainError("gaussian cutoff must be > 0");
}

void PropagationParams::validate() const {
  if (!(g >= 0.0)) throw DomainError("collective coupling g must be >= 0");
  if (!(omega_rabi > 0.0)) throw DomainError("control Rabi frequency Omega must be > 0");
  if (!(gamma > 0.0)) throw DomainError("excited-state decay gamma must be > 0");
  if (!(gamma_s >= 0.0)) throw DomainError("gamma_s must be >= 0");
  if (!(c > 0.0)) throw DomainError("speed of light must be > 0");
  if (!(r_min > 0.0)) throw DomainError("r_min must be > 0");
  density.validate();
}

double PropagationParams::optical_depth() const {
  return 2.0 * g * g * density.effective_length() / (c * gamma);
}

double coupling_for_optical_depth(double od, double gamma, const DensityProfile& density, double c) {
  if (od < 0.0) throw DomainError("optical depth must be >= 0");
  return std::sqrt(od * c * gamma / (2.0 * density.effective_length()));
}

TransmissionResult TransmissionResult::from_amplitude(std::complex<double> amplitude) {
  TransmissionResult r;
  r.amplitude = amplitude;
  r.intensity = std::norm(amplitude);
  r.scatter_probability = 1.0 - r.intensity;
  r.phase = std::arg(amplitude);
  return r;
}

namespace {

double distance_squared(Point2 line, const GateExcitation& gate, double z) {
  const Point2 d = line - gate.position.transverse();
  const double dz = z - gate.position.z;
  return d.x * d.x + d.y * d.y + dz * dz;
}

std::complex<double> full_form(const PropagationParams& p, double density, std::complex<double> v) {
  const std::complex<double> i{0.0, 1.0};
  const std::complex<double> d = p.gamma_s - i * p.omega - i * v;
  return i * p.g * p.g * density * d / ((p.gamma - i * p.omega) * d + p.omega_rabi * p.omega_rabi);
}

/// Integrand (i.e. chi / c) along one line, evaluated in batches for the quadrature.
class LineIntegrand {
 public:
  LineIntegrand(Point2 line, const std::optional<GateExcitation>& gate, const PropagationParams& p)
      : params_(p), line_density_(p.density.transverse(line.norm())) {
    const double inv_c = 1.0 / p.c;
    const double om2 = p.omega_rabi * p.omega_rabi;
    args_.eit_re = p.g * p.g * p.omega / om2 * inv_c;
    args_.eit_im = p.g * p.g * p.gamma_s / om2 * inv_c;
    args_.g2 = p.g * p.g * inv_c;
    args_.omega2 = om2;
    args_.gamma = p.gamma;
    args_.r_min2 = p.r_min * p.r_min;
    if (gate) {
      const Point2 d = line - gate->position.transverse();
      args_.has_gate = true;
      args_.gate_z = gate->position.z;
      args_.transverse2 = d.x * d.x + d.y * d.y;
      args_.c6_re = gate->coefficient.real();
      args_.c6_im = gate->coefficient.imag();
    }
  }

  void operator()(std::span<const double> z, std::span<double> re, std::span<double> im) const {
    std::array<double, 16> dens{};
    const std::size_t n = z.size();
    for (std::size_t k = 0; k < n; ++k) dens[k] = line_density_ * params_.density.longitudinal(z[k]);
    if (params_.form == SusceptibilityForm::Adiabatic) {
      simd::susceptibility(args_, z, std::span<const double>(dens.data(), n), re, im);
      return;
    }
    for (std::size_t k = 0; k < n; ++k) {
      std::complex<double> v{0.0, 0.0};
      if (args_.has_gate) {
        const double dz = z[k] - args_.gate_z;
        const double d2 = std::max(args_.transverse2 + dz * dz, args_.r_min2);
        v = std::complex<double>(args_.c6_re, args_.c6_im) / (d2 * d2 * d2);
      }
      const auto chi = full_form(params_, dens[k], v) / params_.c;
      re[k] = chi.real();
      im[k] = chi.imag();
    }
  }

  const simd::SusceptibilityArgs& args() const { return args_; }

 private:
  const PropagationParams& params_;
  double line_density_;
  simd::SusceptibilityArgs args_;
};

/// Interval breakpoints in [a, b]: support edges and a ladder of points around the gate.
std::vector<double> breakpoints(double a, double b, const LineIntegrand& f, const PropagationParams& p) {
  std::vector<double> pts{a, b};
  const auto add = [&](double x) {
    if (x > a && x < b) pts.push_back(x);
  };
  add(p.density.z_min());
  add(p.density.z_max());
  if (f.args().has_gate) {
    const double zg = f.args().gate_z;
    add(zg);
    for (double off : {p.r_min, 2.0, 5.0, 12.0, 30.0}) {
      add(zg - off);
      add(zg + off);
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

std::complex<double> integrate_segment(const LineIntegrand& f, const PropagationParams& p, double a, double b,
                                       const QuadratureOptions& opts) {
  if (!(b > a)) return {0.0, 0.0};
  const auto pts = breakpoints(a, b, f, p);
  auto batch = [&f](std::span<const double> z, std::span<double> re, std::span<double> im) { f(z, re, im); };
  const auto res = integrate_adaptive(batch, pts, opts);
  if (!res.converged)
    throw NumericalError(fmt::format(
        "transmission quadrature did not converge on [{}, {}] um: value = ({}, {}), error estimate = {}, "
        "intervals = {}, evaluations = {}",
        a, b, res.value.real(), res.value.imag(), res.error, res.intervals, res.evaluations));
  return res.value;
}

}  // namespace

std::complex<double> susceptibility(double z, Point2 line, const std::optional<GateExcitation>& gate,
                                    const PropagationParams& params) {
  if (gate && distance_squared(line, *gate, z) == 0.0)
    throw DomainError("susceptibility evaluated exactly at the gate position");
  LineIntegrand f(line, gate, params);
  std::array<double, 1> zz{z};
  std::array<double, 1> re{};
  std::array<double, 1> im{};
  f(zz, re, im);
  return std::complex<double>(re[0], im[0]) * params.c;
}

TransmissionResult transmission_freq(Point2 line, const std::optional<GateExcitation>& gate,
                                     const PropagationParams& params, const QuadratureOptions& opts) {
  LineIntegrand f(line, gate, params);
  const auto exponent = integrate_segment(f, params, params.density.z_min(), params.density.z_max(), opts);
  return TransmissionResult::from_amplitude(std::exp(std::complex<double>(0.0, 1.0) * exponent));
}

TransmissionResult eit_baseline(const PropagationParams& params, Point2 line) {
  return transmission_freq(line, std::nullopt, params);
}

std::vector<std::complex<double>> field_profile(Point2 line, const std::optional<GateExcitation>& gate,
                                                const PropagationParams& params, std::span<const double> z_nodes,
                                                const QuadratureOptions& opts) {
  LineIntegrand f(line, gate, params);
  std::vector<std::complex<double>> out;
  out.reserve(z_nodes.size());
  std::complex<double> exponent{0.0, 0.0};
  double prev = params.density.z_min();
  double last = -std::numeric_limits<double>::infinity();
  for (double z : z_nodes) {
    if (z < last) throw DomainError("field_profile: nodes must be sorted ascending");
    last = z;
    if (z > prev) {
      exponent += integrate_segment(f, params, prev, z, opts);
      prev = z;
    }
    out.push_back(std::exp(std::complex<double>(0.0, 1.0) * exponent));
  }
  return out;
}

std::vector<std::string> validity_warnings(const PropagationParams& params, double gamma_p) {
  std::vector<std::string> out;
  const double limit = 0.1 * std::min(params.omega_rabi, params.gamma);
  const auto check = [&](const char* name, double value) {
    if (std::abs(value) > limit)
      out.push_back(fmt::format("{} = {:.4g} exceeds 0.1 min(Omega, gamma) = {:.4g}; adiabatic elimination degrades",
                                name, value, limit));
  };
  check("omega", params.omega);
  check("gamma_s", params.gamma_s);
  check("gamma_p", gamma_p);
  return out;
}

}  // namespace forster
