// Acceptance run: one PASS/FAIL line per criterion. Exit status 1 if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <fmt/core.h>

#include "forster/config.hpp"
#include "forster/detection.hpp"
#include "forster/experiment.hpp"
#include "forster/interaction.hpp"
#include "forster/propagation.hpp"
#include "forster/spinwave.hpp"
#include "forster/units.hpp"

using namespace forster;
using Eigen::MatrixXcd;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  fmt::print("[{}] criterion {}: {}: {}\n", ok ? "PASS" : "FAIL", id, name, detail);
  std::fflush(stdout);
  if (!ok) ++failures;
}

struct Timed {
  RunOutput out;
  double seconds = 0.0;
};

Timed timed_run(const std::vector<std::string>& overrides) {
  const auto config = config_from_yaml("", "acceptance", overrides);
  const auto t0 = std::chrono::steady_clock::now();
  Timed r{run_experiment(config), 0.0};
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<double> poisson_pmf(double mu, std::size_t n) {
  std::vector<double> out(n + 1);
  for (std::size_t k = 0; k <= n; ++k) out[k] = std::exp(k * std::log(mu) - mu - std::lgamma(k + 1.0));
  return out;
}

// P(X < t) for X ~ Poisson(mu), by direct summation.
double poisson_cdf_below(int t, double mu) {
  double s = 0.0;
  for (int k = 0; k < t; ++k) s += std::exp(k * std::log(mu) - mu - std::lgamma(k + 1.0));
  return s;
}

MatrixXcd random_density(std::mt19937_64& rng, Eigen::Index n, Eigen::Index rank) {
  std::normal_distribution<double> nd;
  MatrixXcd g(n, rank);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < rank; ++j) g(i, j) = {nd(rng), nd(rng)};
  MatrixXcd rho = g * g.adjoint();
  return rho / rho.trace().real();
}

double brute_fidelity(const MatrixXcd& rho, const MatrixXcd& sigma) {
  Eigen::ComplexEigenSolver<MatrixXcd> es(rho * sigma);
  const Eigen::VectorXd lam = es.eigenvalues().real();
  const double floor = 1e-13 * lam.maxCoeff();  // rounding noise of the zero eigenvalues
  double tr = 0.0;
  for (Eigen::Index k = 0; k < lam.size(); ++k)
    if (lam(k) > floor) tr += std::sqrt(lam(k));
  return tr * tr;
}

bool same_output(const RunOutput& a, const RunOutput& b) {
  if (a.files != b.files) return false;
  return a.summary.dump() == b.summary.dump();
}

void resonance_localization(const Timed& g) {
  const auto& h = g.out.summary["headline"];
  const auto maxima = h["local_maxima_v_cm"].get<std::vector<double>>();
  const bool one = maxima.size() == 1;
  const double at = one ? maxima.front() : h["peak_field_v_cm"].get<double>();
  const bool ok = one && std::abs(at - 0.710) <= 0.005 && g.seconds < 120.0;
  report(1, "resonance localization", ok,
         fmt::format("{} maxima, peak at {:.4f} V/cm (0.710 +- 0.005), {:.1f} s (< 120 s)", maxima.size(), at,
                     g.seconds));
}

void multi_resonance() {
  const auto g = timed_run({"pair_system=rb87_66s64s"});
  const auto& h = g.out.summary["headline"];
  const auto maxima = h["local_maxima_v_cm"].get<std::vector<double>>();
  const bool below = std::all_of(maxima.begin(), maxima.end(), [](double f) { return f < 0.25; });
  const double zero = h["zero_field_gain"].get<double>();
  const double dip = h["lowest_gain_between_maxima"].is_null() ? zero : h["lowest_gain_between_maxima"].get<double>();
  std::string fields;
  for (double f : maxima) fields += fmt::format("{}{:.3f}", fields.empty() ? "" : ", ", f);
  report(2, "multi-resonance structure", maxima.size() == 4 && below && dip < zero,
         fmt::format("{} maxima at [{}] V/cm, lowest inter-resonance gain {:.1f} vs zero-field {:.1f}", maxima.size(),
                     fields, dip, zero));
}

void oracle_equivalence() {
  const auto g = timed_run({"scan=oracle-check"});
  const auto& h = g.out.summary["headline"];
  const double diff = h["max_abs_diff"].get<double>();
  const auto sets = h["sets"].get<std::size_t>();
  report(3, "oracle equivalence", sets >= 10 && diff < 0.01 && g.seconds < 300.0,
         fmt::format("{} sets, max |T_freq - T_time| = {:.2e} (< 1e-2), {:.1f} s (< 300 s)", sets, diff, g.seconds));
}

void analytic_limits() {
  PropagationParams p;
  p.omega_rabi = angular(5.0);
  p.gamma = angular(3.03);
  p.gamma_s = angular(0.05);
  p.density = DensityProfile::uniform(30.0);
  p.g = coupling_for_optical_depth(10.0, p.gamma, p.density);
  const double expect = std::exp(-2.0 * p.g * p.g * p.gamma_s * p.density.effective_length() /
                                 (p.c * p.omega_rabi * p.omega_rabi));
  const double err_a = std::abs(eit_baseline(p).intensity / expect - 1.0);

  p.gamma_s = 0.0;
  const GateExcitation gate{{0.0, 0.0, 0.0}, {0.0, 1e14}};
  const double err_b = std::abs(transmission_freq({}, gate, p).intensity / std::exp(-p.optical_depth()) - 1.0);

  // Far detuned: level shift of |SS> from the exact two-level |SS>, |PP> problem.
  InteractionParams ip;
  ip.c3 = angular(500.0);
  ip.gamma_p = 0.0;
  PairChannel ch;
  ch.c3 = ip.c3;
  ch.defect_zero_field = angular(2000.0);
  ip.channels = {ch};
  double err_c = 0.0;
  for (double r : {8.0, 12.0, 20.0}) {
    const double coupling = ip.c3 / (r * r * r);
    const double delta = ch.defect_zero_field;
    const double shift = 0.5 * (std::sqrt(delta * delta + 4.0 * coupling * coupling) - delta);
    const double v = std::abs(effective_potential(r, 0.0, 0.0, 0.0, ip));
    err_c = std::max(err_c, std::abs(v / shift - 1.0));
  }
  report(4, "analytic limits", err_a < 1e-6 && err_b < 0.01 && err_c < 1e-3,
         fmt::format("(a) EIT baseline rel. err {:.1e} (< 1e-6), (b) blockade vs exp(-OD) {:.1e} (< 1e-2), "
                     "(c) far-detuned V rel. err {:.1e} (< 1e-3)",
                     err_a, err_b, err_c));
}

void gain_enhancement(const Timed& g) {
  const auto& h = g.out.summary["headline"];
  const double ratio = h["min_enhancement_in_window"].get<double>();
  const double r2 = h["rate_fit_r_squared"].get<double>();
  const double intercept = h["rate_fit_intercept"].get<double>();
  const double slope = h["rate_fit_slope"].get<double>();
  const double rmax = h["nondestructive_rate_per_us"].get<double>();
  const double peak = h["peak_gain"].get<double>();
  const double rel_intercept = std::abs(intercept) / (std::abs(slope) * rmax);
  const bool ok = ratio > 2.0 && r2 > 0.999 && rel_intercept < 1e-3 && std::abs(peak / 200.0 - 1.0) <= 0.15;
  report(5, "gain enhancement", ok,
         fmt::format("min on/off ratio {:.2f} (> 2) up to R = {:.1f}/us, R^2 = {:.6f} (> 0.999), "
                     "|intercept| / G(R_max) = {:.1e}, peak G = {:.1f} (200 +- 15%)",
                     ratio, rmax, r2, rel_intercept, peak));
}

void detection_fidelity_check() {
  const auto g = timed_run({"scan=fidelity-scan"});
  const double peak = g.out.summary["headline"]["peak_fidelity"].get<double>();

  bool props = true;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(10), b(10);
    for (auto& x : a) x = u(rng);
    for (auto& x : b) x = u(rng);
    const double f = forster::detection_fidelity(a, b).fidelity;
    props = props && f >= 0.5 && f <= 1.0;
  }
  const std::vector<double> same{2.0, 3.0, 1.0};
  props = props && forster::detection_fidelity(same, same).fidelity == 0.5;
  const std::vector<double> low{4.0, 1.0, 0.0, 0.0}, high{0.0, 0.0, 3.0, 2.0};
  props = props && forster::detection_fidelity(low, high).fidelity == 1.0;

  double exact = 0.5;
  for (int t = 1; t < 100; ++t)
    exact = std::max(exact, std::min(poisson_cdf_below(t, 5.0), 1.0 - poisson_cdf_below(t, 20.0)));
  CountModel m;
  m.mean_no_excitation = 20.0;
  m.mean_with_excitation = 5.0;
  m.p_excitation = 1.0;
  const std::size_t shots = 40000;
  const auto hist = count_histograms(m, shots, 11);
  const double mc = forster::detection_fidelity(hist.gate_pulse, hist.no_gate_pulse).fidelity;
  const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(shots));
  const bool mc_ok = std::abs(mc - exact) < 3.0 * se;
  const bool exact_ok =
      std::abs(forster::detection_fidelity(poisson_pmf(5.0, 120), poisson_pmf(20.0, 120)).fidelity - exact) < 1e-10;

  report(6, "detection fidelity", std::abs(peak - 0.80) <= 0.05 && props && mc_ok && exact_ok,
         fmt::format("peak F = {:.3f} (0.80 +- 0.05), properties {}, Monte Carlo {:.4f} vs exact {:.4f} "
                     "(3 sigma = {:.4f})",
                     peak, props ? "ok" : "violated", mc, exact, 3.0 * se));
}

void retrieval_collapse(const Timed& gain) {
  const auto g = timed_run({"scan=retrieval"});
  const auto& h = g.out.summary["headline"];
  const double dev = h["collapse_max_relative_deviation"].is_null() ? 1.0 : h["collapse_max_relative_deviation"].get<double>();
  const double zero = h["zero_source_efficiency"].get<double>();
  RetrievalSettings rs;
  const double expect = rs.base_efficiency * std::exp(-rs.storage_time / rs.lifetime);
  const double nsc = h["max_scattered_resonance"].get<double>();
  const double peak_gain = gain.out.summary["headline"]["peak_gain"].get<double>();
  report(7, "retrieval collapse", dev <= 0.05 && zero == expect && nsc >= 2.7 && peak_gain > 2.0,
         fmt::format("max on/off deviation {:.1f}% (<= 5%), zero-source {} == {}, max N_sc {:.2f} (>= 2.7), "
                     "gain {:.1f} (> 2)",
                     100.0 * dev, zero, expect, nsc, peak_gain));
}

void channel_mathematics() {
  const auto config = config_from_yaml("", "acceptance");
  PropagationParams p = config.model.propagation;
  const auto coefficient = interaction_coefficient(config.model.interaction, config.retrieval_field, 0.0);
  const auto s = stored_spinwave(p.density, 201, 2.0);
  double completeness = 0.0;
  for (double x : {0.0, 2.0, 5.0}) {
    const auto ch = photon_channel(s, p, coefficient, {x, 0.0});
    completeness = std::max(completeness, ch.completeness_error());
  }

  std::mt19937_64 rng(29);
  double uhlmann = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + trial % 16;
    const auto a = random_density(rng, n, 1 + (trial * 5) % n);
    const auto b = random_density(rng, n, 1 + (trial * 3) % n);
    uhlmann = std::max(uhlmann, std::abs(uhlmann_fidelity(a, b) - brute_fidelity(a, b)));
  }

  // F_p against r_b for a resonant (purely imaginary) interaction on the cloud axis.
  p.gamma_s = 0.0;
  const auto line = stored_spinwave(p.density, 81, 2.0);
  bool monotone = true;
  double last = 1.0, first = 0.0;
  std::string trace;
  for (double rb = 2.0; rb <= 16.0; rb += 2.0) {
    const double c6 = std::pow(rb, 6) * p.omega_rabi * p.omega_rabi / p.gamma;
    const double fp = state_fidelity(line.rho, apply_channel(line, photon_channel(line, p, {0.0, c6}))).transmitted;
    if (rb == 2.0) first = fp;
    monotone = monotone && fp < last;
    last = fp;
  }
  report(8, "channel and fidelity mathematics", completeness < 1e-6 && uhlmann < 1e-8 && monotone,
         fmt::format("completeness {:.1e} (< 1e-6), Uhlmann vs oracle {:.1e} (< 1e-8) on 100 pairs, "
                     "F_p {} in r_b ({:.3f} at 2 um to {:.3f} at 16 um)",
                     completeness, uhlmann, monotone ? "decreasing" : "not monotone", first, last));
}

void determinism(const Timed& first) {
  const auto again = timed_run({});
  const auto f1 = timed_run({"scan=fidelity-scan", "threads=1"});
  const auto f2 = timed_run({"scan=fidelity-scan", "threads=1"});
  const bool ok = same_output(first.out, again.out) && same_output(f1.out, f2.out);
  report(9, "determinism", ok, ok ? "repeated gain-scan and fidelity-scan outputs are byte identical"
                                  : "outputs differ between identical runs");
}

}  // namespace

int main() {
  try {
    const auto gain = timed_run({});
    resonance_localization(gain);
    multi_resonance();
    oracle_equivalence();
    analytic_limits();
    gain_enhancement(gain);
    detection_fidelity_check();
    retrieval_collapse(gain);
    channel_mathematics();
    determinism(gain);
  } catch (const std::exception& e) {
    fmt::print("[FAIL] acceptance aborted: {}\n", e.what());
    return 1;
  }
  fmt::print("{} of 9 criteria passed\n", 9 - failures);
  return failures ? 1 : 0;
}
