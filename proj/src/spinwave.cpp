#include "forster/spinwave.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "forster/errors.hpp"
#include "forster/interaction.hpp"
#include "forster/parallel.hpp"
#include "forster/random.hpp"
#include "forster/simd/kernels.hpp"

namespace forster {

namespace {

constexpr std::uint64_t kStreamRetrievalGates = 0x72676174ull;
constexpr std::uint64_t kStreamRetrievalBeam = 0x7262656dull;
constexpr std::uint64_t kStreamFraction = 0x66726163ull;

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

void check_psd(const MatrixXcd& m, const char* name) {
  if (m.rows() != m.cols()) throw DomainError(fmt::format("{} is not square", name));
  const double scale = std::max(1.0, std::abs(m.trace().real()));
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) throw DomainError(fmt::format("{} is not Hermitian", name));
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10 * scale)
    throw DomainError(fmt::format("{} is not positive semidefinite (eigenvalue {:.3g})", name, es.eigenvalues().minCoeff()));
}

// Eigenvalues below this fraction of the largest one are rounding noise.
constexpr double kRankTolerance = 1e-13;

Eigen::VectorXd clipped(const Eigen::VectorXd& eig) {
  const double floor = kRankTolerance * std::max(eig.maxCoeff(), 0.0);
  return eig.unaryExpr([floor](double x) { return x > floor ? x : 0.0; });
}

MatrixXcd psd_sqrt(const Eigen::SelfAdjointEigenSolver<MatrixXcd>& es) {
  const Eigen::VectorXd root = clipped(es.eigenvalues()).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

SpinWaveState SpinWaveState::pure(std::vector<double> grid, const VectorXcd& amplitudes, double lifetime) {
  if (grid.size() != static_cast<std::size_t>(amplitudes.size()))
    throw DomainError("spin-wave grid and amplitudes differ in length");
  const double norm = amplitudes.norm();
  if (!(norm > 0.0)) throw DomainError("spin-wave amplitudes vanish");
  const VectorXcd psi = amplitudes / norm;
  SpinWaveState s;
  s.grid = std::move(grid);
  s.rho = psi * psi.adjoint();
  s.lifetime = lifetime;
  return s;
}

void SpinWaveState::validate() const {
  if (static_cast<std::size_t>(rho.rows()) != grid.size()) throw DomainError("density matrix does not match grid");
  if (std::abs(rho.trace().real() - 1.0) > 1e-10 || std::abs(rho.trace().imag()) > 1e-10)
    throw DomainError("spin-wave density matrix trace differs from 1");
  check_psd(rho, "spin-wave density matrix");
  if (!(lifetime > 0.0)) throw DomainError("spin-wave lifetime must be > 0");
}

SpinWaveState stored_spinwave(const DensityProfile& density, std::size_t points, double extent, double lifetime) {
  density.validate();
  if (points < 2) throw DomainError("spin-wave grid needs at least two points");
  if (!(extent > 0.0)) throw DomainError("spin-wave grid extent must be > 0");
  const double half = extent * density.half_length;
  std::vector<double> grid(points);
  VectorXcd amp(static_cast<Eigen::Index>(points));
  for (std::size_t a = 0; a < points; ++a) {
    grid[a] = -half + 2.0 * half * static_cast<double>(a) / static_cast<double>(points - 1);
    amp(static_cast<Eigen::Index>(a)) = std::sqrt(density.longitudinal(grid[a]));
  }
  return SpinWaveState::pure(std::move(grid), amp, lifetime);
}

PhotonChannel PhotonChannel::identity(std::size_t n) {
  PhotonChannel c;
  c.transmit = VectorXcd::Ones(static_cast<Eigen::Index>(n));
  c.scatter = MatrixXcd::Zero(0, static_cast<Eigen::Index>(n));
  return c;
}

PhotonChannel PhotonChannel::projective(std::size_t n, std::complex<double> t) {
  if (std::abs(t) > 1.0) throw DomainError("transmission amplitude exceeds 1");
  const auto m = static_cast<Eigen::Index>(n);
  PhotonChannel c;
  c.transmit = VectorXcd::Constant(m, t);
  c.scatter = MatrixXcd::Identity(m, m) * std::sqrt(1.0 - std::norm(t));
  return c;
}

double PhotonChannel::completeness_error() const {
  const Eigen::VectorXd total =
      transmit.cwiseAbs2() + (scatter.rows() ? Eigen::VectorXd(scatter.cwiseAbs2().colwise().sum().transpose())
                                             : Eigen::VectorXd::Zero(transmit.size()));
  return (total.array() - 1.0).abs().maxCoeff();
}

MatrixXcd PhotonChannel::coherence() const {
  const std::size_t n = size();
  std::vector<double> acc_re(n * n, 0.0);
  std::vector<double> acc_im(n * n, 0.0);
  std::vector<double> re(n);
  std::vector<double> im(n);
  const auto add = [&](const auto& row) {
    for (std::size_t a = 0; a < n; ++a) {
      re[a] = row(static_cast<Eigen::Index>(a)).real();
      im[a] = row(static_cast<Eigen::Index>(a)).imag();
    }
    simd::accumulate_outer(re, im, 1.0, acc_re, acc_im);
  };
  add(transmit);
  for (Eigen::Index k = 0; k < scatter.rows(); ++k) add(scatter.row(k));
  MatrixXcd d(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      d(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = {acc_re[a * n + b], acc_im[a * n + b]};
  return d;
}

PhotonChannel photon_channel(const SpinWaveState& state, const PropagationParams& params,
                             std::complex<double> coefficient, Point2 source_line, Point2 gate_transverse,
                             const ChannelOptions& opts) {
  params.validate();
  const std::size_t n = state.size();
  const double z0 = params.density.z_min();
  const double z1 = params.density.z_max();
  std::vector<double> nodes{z0};
  for (double z : state.grid)
    if (z > nodes.back() && z < z1) nodes.push_back(z);
  nodes.push_back(z1);
  const std::size_t cells = nodes.size() - 1;

  PhotonChannel c;
  c.transmit.resize(static_cast<Eigen::Index>(n));
  c.scatter.resize(static_cast<Eigen::Index>(cells), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n; ++a) {
    const GateExcitation gate{{gate_transverse.x, gate_transverse.y, state.grid[a]}, coefficient};
    const auto field = field_profile(source_line, gate, params, nodes, opts.quadrature);
    const auto col = static_cast<Eigen::Index>(a);
    c.transmit(col) = field.back();
    for (std::size_t k = 0; k < cells; ++k) {
      const double lost = std::max(0.0, std::norm(field[k]) - std::norm(field[k + 1]));
      const double mag = std::abs(field[k]);
      const std::complex<double> phase = mag > 0.0 ? field[k] / mag : std::complex<double>{1.0, 0.0};
      c.scatter(static_cast<Eigen::Index>(k), col) = std::sqrt(lost) * phase;
    }
  }
  const double err = c.completeness_error();
  if (err > opts.completeness_tolerance)
    throw NumericalError(fmt::format("photon channel violates completeness by {:.3g}", err));
  return c;
}

AppliedChannel apply_channel(const SpinWaveState& state, const PhotonChannel& channel) {
  if (channel.size() != state.size()) throw DomainError("channel and state sizes differ");
  const MatrixXcd tt = channel.transmit * channel.transmit.adjoint();
  const MatrixXcd d = channel.coherence();
  AppliedChannel out;
  out.transmitted = state.rho.cwiseProduct(tt);
  out.scattered = state.rho.cwiseProduct(d - tt);
  out.state = state;
  out.state.rho = out.transmitted + out.scattered;
  out.p_transmit = out.transmitted.trace().real();
  out.p_scatter = out.scattered.trace().real();
  return out;
}

double uhlmann_fidelity(const MatrixXcd& a, const MatrixXcd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DomainError("fidelity: matrix sizes differ");
  check_psd(a, "first density matrix");
  check_psd(b, "second density matrix");
  const Eigen::SelfAdjointEigenSolver<MatrixXcd> ea(a);
  const Eigen::SelfAdjointEigenSolver<MatrixXcd> eb(b);
  // A pure argument reduces the fidelity to an expectation value.
  const auto pure = [](const Eigen::SelfAdjointEigenSolver<MatrixXcd>& es, const MatrixXcd& other, double& out) {
    const Eigen::VectorXd lam = clipped(es.eigenvalues());
    const Eigen::Index top = lam.size() - 1;
    if (top > 0 && lam(top - 1) > 0.0) return false;
    const VectorXcd v = es.eigenvectors().col(top);
    out = std::max(0.0, lam(top) * (v.adjoint() * other * v)(0).real());
    return true;
  };
  double f = 0.0;
  if (pure(ea, b, f) || pure(eb, a, f)) return f;
  const MatrixXcd sa = psd_sqrt(ea);
  const MatrixXcd inner = sa * b * sa;
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
  const double tr = clipped(es.eigenvalues()).cwiseSqrt().sum();
  return tr * tr;
}

StateFidelity state_fidelity(const MatrixXcd& rho_i, const AppliedChannel& after) {
  StateFidelity f;
  f.fidelity = uhlmann_fidelity(rho_i, after.state.rho);
  f.transmitted = uhlmann_fidelity(rho_i, after.transmitted);
  f.scattered = uhlmann_fidelity(rho_i, after.scattered);
  return f;
}

double poisson_overlap(const VectorXcd& psi, const MatrixXcd& coherence, double n_mean) {
  if (n_mean < 0.0) throw DomainError("mean photon number must be >= 0");
  const Eigen::VectorXd w = psi.cwiseAbs2();
  const Eigen::Index n = psi.size();
  double sum = 0.0;
  for (Eigen::Index b = 0; b < n; ++b) {
    if (w(b) == 0.0) continue;
    double col = 0.0;
    for (Eigen::Index a = 0; a < n; ++a) {
      if (w(a) == 0.0) continue;
      const std::complex<double> x = n_mean * (coherence(a, b) - 1.0);
      col += w(a) * std::exp(x.real()) * std::cos(x.imag());
    }
    sum += w(b) * col;
  }
  return sum;
}

void RetrievalSettings::validate() const {
  if (!(base_efficiency >= 0.0 && base_efficiency <= 1.0)) throw DomainError("base_efficiency must lie in [0, 1]");
  if (!(storage_time >= 0.0)) throw DomainError("storage_time must be >= 0");
  if (!(lifetime > 0.0)) throw DomainError("lifetime must be > 0");
  if (!(pulse_length >= 0.0)) throw DomainError("pulse_length must be >= 0");
  if (grid_points < 2) throw DomainError("grid_points must be >= 2");
  if (!(grid_extent > 0.0)) throw DomainError("grid_extent must be > 0");
  if (!(max_distance > 0.0) || distance_nodes < 2) throw DomainError("distance grid needs max_distance > 0 and >= 2 nodes");
  if (gate_samples < 1 || beam_samples < 1) throw DomainError("retrieval sample counts must be >= 1");
}

double RetrievalSettings::efficiency_without_source() const {
  return base_efficiency * std::exp(-storage_time / lifetime);
}

double retrieval_efficiency(const VectorXcd& psi, const MatrixXcd& coherence, double n_mean,
                            const RetrievalSettings& settings) {
  return settings.efficiency_without_source() * poisson_overlap(psi.normalized(), coherence, n_mean);
}

std::vector<RetrievalPoint> retrieval_curve(const ExperimentModel& model, double field,
                                            const RetrievalSettings& settings, std::span<const double> n_in_means,
                                            const std::string& variant) {
  model.validate();
  settings.validate();
  PropagationParams line = model.propagation;
  line.density.radius = 0.0;  // one-dimensional model along the source line
  const auto state = stored_spinwave(line.density, settings.grid_points, settings.grid_extent, settings.lifetime);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(state.rho);
  const VectorXcd psi = es.eigenvectors().col(es.eigenvectors().cols() - 1);
  const Eigen::VectorXd weight = psi.cwiseAbs2();
  const auto coefficient = interaction_coefficient(model.interaction, field, line.omega);
  const double baseline = eit_baseline(line).intensity;
  const std::size_t n = state.size();
  const auto dim = static_cast<Eigen::Index>(n);

  // Channel coherence and transmission probability on a grid of gate-source distances.
  const std::size_t nodes = settings.transverse_average ? settings.distance_nodes : 1;
  const double step = settings.max_distance / static_cast<double>(settings.distance_nodes - 1);
  std::vector<MatrixXcd> kernel(nodes);
  std::vector<Eigen::VectorXd> transmit(nodes);
  parallel_for(nodes, settings.threads, [&](std::size_t i) {
    const auto ch = photon_channel(state, line, coefficient, {}, {step * static_cast<double>(i), 0.0});
    kernel[i] = ch.coherence();
    transmit[i] = ch.transmit.cwiseAbs2();
  });

  // Interpolation weights over distance nodes, per gate transverse sample; the last slot
  // collects source samples beyond max_distance.
  const std::size_t gates = settings.transverse_average ? settings.gate_samples : 1;
  std::vector<std::vector<double>> weights(gates, std::vector<double>(nodes + 1, 0.0));
  if (!settings.transverse_average) {
    weights[0][0] = 1.0;
  } else {
    std::vector<Point2> beam(settings.beam_samples);
    for (std::size_t k = 0; k < beam.size(); ++k) {
      Rng rng = make_rng(settings.seed, kStreamRetrievalBeam, k);
      beam[k] = model.geometry.sample_source(rng);
    }
    const double w = 1.0 / static_cast<double>(beam.size());
    for (std::size_t j = 0; j < gates; ++j) {
      Rng rng = make_rng(settings.seed, kStreamRetrievalGates, j);
      const Point2 g = model.geometry.sample_gate(rng).transverse();
      for (const auto& b : beam) {
        const double d = (b - g).norm() / step;
        if (d >= static_cast<double>(nodes - 1)) {
          weights[j][nodes] += w;
          continue;
        }
        const auto lo = static_cast<std::size_t>(d);
        const double frac = d - static_cast<double>(lo);
        weights[j][lo] += w * (1.0 - frac);
        weights[j][lo + 1] += w * frac;
      }
    }
  }

  const std::size_t m = n_in_means.size();
  std::vector<double> overlap(gates * m, 0.0);
  std::vector<double> p_scatter(gates, 0.0);
  parallel_for(gates, settings.threads, [&](std::size_t j) {
    MatrixXcd d = MatrixXcd::Constant(dim, dim, weights[j][nodes]);
    Eigen::VectorXd t = Eigen::VectorXd::Constant(dim, weights[j][nodes] * baseline);
    for (std::size_t i = 0; i < nodes; ++i) {
      if (weights[j][i] == 0.0) continue;
      d += weights[j][i] * kernel[i];
      t += weights[j][i] * transmit[i];
    }
    p_scatter[j] = 1.0 - weight.dot(t);
    for (std::size_t q = 0; q < m; ++q) overlap[j * m + q] = poisson_overlap(psi, d, n_in_means[q]);
  });

  const double eta = settings.efficiency_without_source();
  const double p0 = 1.0 - baseline;
  std::vector<RetrievalPoint> out(m);
  for (std::size_t q = 0; q < m; ++q) {
    double eff = 0.0;
    double scat = 0.0;
    for (std::size_t j = 0; j < gates; ++j) {
      eff += overlap[j * m + q];
      scat += p_scatter[j] - p0;
    }
    const double efficiency = n_in_means[q] == 0.0 ? eta : eta * eff / static_cast<double>(gates);
    out[q] = {n_in_means[q], n_in_means[q] * scat / static_cast<double>(gates), efficiency, variant};
  }
  return out;
}

double blockade_beam_fraction(const ExperimentGeometry& geometry, double blockade_radius, std::size_t samples,
                              std::uint64_t seed) {
  if (samples == 0) throw DomainError("samples must be >= 1");
  if (!(blockade_radius >= 0.0)) throw DomainError("blockade radius must be >= 0");
  std::size_t inside = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    Rng rng = make_rng(seed, kStreamFraction, i);
    const Point2 g = geometry.sample_gate(rng).transverse();
    const Point2 b = geometry.sample_source(rng);
    if ((b - g).norm() < blockade_radius) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(samples);
}

LimitCurves limit_curves(std::span<const RetrievalPoint> model_curve, double base_efficiency,
                         double blockade_fraction) {
  LimitCurves out;
  for (const auto& p : model_curve) {
    out.black.push_back({p.n_in, p.n_scattered, base_efficiency * std::exp(-p.n_scattered), "black"});
    out.dashed.push_back({p.n_in, p.n_scattered, base_efficiency * std::exp(-p.n_in), "dashed"});
    out.dotted.push_back({p.n_in, p.n_scattered, base_efficiency * std::exp(-p.n_in * blockade_fraction), "dotted"});
  }
  return out;
}

}  // namespace forster
