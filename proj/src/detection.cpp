#include "forster/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "forster/errors.hpp"
#include "forster/parallel.hpp"
#include "forster/random.hpp"

namespace forster {

namespace {

constexpr std::uint64_t kStreamShots = 0x73686f7473ull;
constexpr std::size_t kShotBlock = 1u << 16;

std::vector<double> poisson_pmf(double mu, std::size_t max_count) {
  std::vector<double> pmf(max_count + 1, 0.0);
  if (mu <= 0.0) {
    pmf[0] = 1.0;
    return pmf;
  }
  const double log_mu = std::log(mu);
  for (std::size_t k = 0; k <= max_count; ++k) {
    const double kk = static_cast<double>(k);
    pmf[k] = std::exp(kk * log_mu - mu - std::lgamma(kk + 1.0));
  }
  return pmf;
}

void add_into(Histogram& dst, const Histogram& src) {
  if (dst.size() < src.size()) dst.resize(src.size(), 0.0);
  for (std::size_t k = 0; k < src.size(); ++k) dst[k] += src[k];
}

void count(Histogram& h, std::size_t k) {
  if (h.size() <= k) h.resize(k + 1, 0.0);
  h[k] += 1.0;
}

std::vector<double> normalized(std::span<const double> h) {
  const double total = std::accumulate(h.begin(), h.end(), 0.0);
  if (!(total > 0.0)) throw DomainError("histogram is empty");
  std::vector<double> out(h.begin(), h.end());
  for (auto& x : out) x /= total;
  return out;
}

}  // namespace

void CountModel::validate() const {
  if (!(mean_no_excitation >= 0.0) || !(mean_with_excitation >= 0.0))
    throw DomainError("count means must be >= 0");
  if (mean_with_excitation > mean_no_excitation * (1.0 + 1e-12))
    throw DomainError("an excitation cannot raise the mean count (mu1 > mu0)");
  if (!(p_excitation >= 0.0 && p_excitation <= 1.0)) throw DomainError("p_excitation must lie in [0, 1]");
  for (double m : present_means)
    if (!(m >= 0.0)) throw DomainError("present means must be >= 0");
}

std::vector<double> CountModel::present_pmf(std::size_t max_count) const {
  if (present_means.empty()) return poisson_pmf(mean_with_excitation, max_count);
  std::vector<double> out(max_count + 1, 0.0);
  const double w = 1.0 / static_cast<double>(present_means.size());
  for (double m : present_means) {
    const auto p = poisson_pmf(m, max_count);
    for (std::size_t k = 0; k <= max_count; ++k) out[k] += w * p[k];
  }
  return out;
}

std::vector<double> CountModel::absent_pmf(std::size_t max_count) const {
  return poisson_pmf(mean_no_excitation, max_count);
}

std::size_t CountModel::count_cutoff() const {
  double m = std::max(mean_no_excitation, mean_with_excitation);
  for (double x : present_means) m = std::max(m, x);
  return static_cast<std::size_t>(std::ceil(m + 12.0 * std::sqrt(m) + 30.0));
}

CountHistograms count_histograms(const CountModel& model, std::size_t shots, std::uint64_t seed, int threads) {
  model.validate();
  if (shots < 1) throw DomainError("shots must be >= 1");
  const std::size_t blocks = (shots + kShotBlock - 1) / kShotBlock;
  std::vector<CountHistograms> partial(blocks);
  const std::vector<double> present =
      model.present_means.empty() ? std::vector<double>{model.mean_with_excitation} : model.present_means;
  parallel_for(blocks, threads, [&](std::size_t b) {
    Rng rng = make_rng(seed, kStreamShots, b);
    std::poisson_distribution<std::size_t> absent(std::max(model.mean_no_excitation, 1e-300));
    std::vector<std::poisson_distribution<std::size_t>> with;
    for (double m : present) with.emplace_back(std::max(m, 1e-300));
    std::bernoulli_distribution stored(model.p_excitation);
    std::uniform_int_distribution<std::size_t> pick(0, present.size() - 1);
    const std::size_t n = std::min(kShotBlock, shots - b * kShotBlock);
    auto& h = partial[b];
    for (std::size_t s = 0; s < n; ++s) {
      count(h.no_gate_pulse, absent(rng));
      if (stored(rng)) {
        count(h.gate_pulse, with[pick(rng)](rng));
      } else {
        count(h.gate_pulse, absent(rng));
      }
    }
  });
  CountHistograms out;
  for (const auto& h : partial) {
    add_into(out.gate_pulse, h.gate_pulse);
    add_into(out.no_gate_pulse, h.no_gate_pulse);
  }
  const std::size_t len = std::max(out.gate_pulse.size(), out.no_gate_pulse.size());
  out.gate_pulse.resize(len, 0.0);
  out.no_gate_pulse.resize(len, 0.0);
  return out;
}

SeparatedHistograms separate_histograms(std::span<const double> gate_pulse, double p_excitation, double mu0) {
  if (!(p_excitation > 0.0 && p_excitation <= 1.0)) throw DomainError("p_excitation must lie in (0, 1]");
  if (!(mu0 >= 0.0)) throw DomainError("mu0 must be >= 0");
  const double total = std::accumulate(gate_pulse.begin(), gate_pulse.end(), 0.0);
  if (!(total > 0.0)) throw DomainError("gate-pulse histogram is empty");
  const std::size_t n = gate_pulse.size();
  const auto pmf = poisson_pmf(mu0, n == 0 ? 0 : n - 1);
  SeparatedHistograms out;
  out.present.assign(n, 0.0);
  out.absent.assign(n, 0.0);
  double raw_sum = 0.0;
  double raw_moment = 0.0;
  double clipped_mass = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    out.absent[k] = (1.0 - p_excitation) * total * pmf[k];
    const double residual = gate_pulse[k] - out.absent[k];
    raw_sum += residual;
    raw_moment += static_cast<double>(k) * residual;
    out.present[k] = std::max(0.0, residual);
    clipped_mass += out.present[k];
  }
  const double expected = p_excitation * total;
  if (clipped_mass < 0.5 * expected)
    out.warnings.push_back(fmt::format(
        "separated excitation histogram holds {:.4g} counts, less than half the expected {:.4g}; "
        "the Poisson(mu0) model does not describe the data",
        clipped_mass, expected));
  if (clipped_mass > 0.0)
    for (auto& x : out.present) x *= expected / clipped_mass;
  if (p_excitation < 1.0 && raw_sum > 0.0) {
    const double mean_present = raw_moment / raw_sum;
    const double se = std::sqrt(std::max(mu0, 1.0) * (1.0 / expected + 1.0 / ((1.0 - p_excitation) * total)));
    if (std::abs(mu0 - mean_present) < 3.0 * se)
      out.warnings.push_back(fmt::format(
          "excitation-present mean {:.4g} is indistinguishable from mu0 = {:.4g}; separation is ill-conditioned",
          mean_present, mu0));
  }
  return out;
}

FidelityResult detection_fidelity(std::span<const double> present, std::span<const double> absent,
                                  double prior_present) {
  const auto p = normalized(present);
  const auto a = normalized(absent);
  const std::size_t n = std::max(p.size(), a.size());
  FidelityResult best;
  double best_raw = -1.0;
  double cdf_p = 0.0;  // P(count < t | present)
  double cdf_a = 0.0;  // P(count < t | absent)
  for (std::size_t t = 0; t <= n; ++t) {
    const double score = std::min(cdf_p, 1.0 - cdf_a);
    if (score > best_raw) {
      best_raw = score;
      best.threshold = t;
      best.weighted_accuracy = prior_present * cdf_p + (1.0 - prior_present) * (1.0 - cdf_a);
    }
    if (t < n) {
      if (t < p.size()) cdf_p += p[t];
      if (t < a.size()) cdf_a += a[t];
    }
  }
  best.fidelity = std::max(0.5, std::min(1.0, best_raw));
  best.chance_level = best_raw <= 0.5;
  return best;
}

FidelityResult weighted_detection_fidelity(std::span<const double> present, std::span<const double> absent,
                                           double prior_present) {
  if (!(prior_present >= 0.0 && prior_present <= 1.0)) throw DomainError("prior must lie in [0, 1]");
  const auto p = normalized(present);
  const auto a = normalized(absent);
  const std::size_t n = std::max(p.size(), a.size());
  FidelityResult best;
  double best_acc = -1.0;
  double cdf_p = 0.0;
  double cdf_a = 0.0;
  for (std::size_t t = 0; t <= n; ++t) {
    const double acc = prior_present * cdf_p + (1.0 - prior_present) * (1.0 - cdf_a);
    if (acc > best_acc) {
      best_acc = acc;
      best.threshold = t;
      best.fidelity = std::min(cdf_p, 1.0 - cdf_a);
    }
    if (t < n) {
      if (t < p.size()) cdf_p += p[t];
      if (t < a.size()) cdf_a += a[t];
    }
  }
  best.weighted_accuracy = best_acc;
  best.chance_level = best_acc <= std::max(prior_present, 1.0 - prior_present);
  return best;
}

CountModel count_model(const GateResolvedTransmission& transmission, const PhotonStats& stats) {
  const double scale = stats.detector_efficiency * stats.source_mean();
  CountModel m;
  m.mean_no_excitation = scale * transmission.t0;
  m.p_excitation = stats.storage_probability();
  m.present_means.reserve(transmission.t1.size());
  double sum = 0.0;
  for (double t1 : transmission.t1) {
    // guards against Monte Carlo noise in the beam average pushing T1 above T0
    const double mu = scale * std::min(t1, transmission.t0);
    m.present_means.push_back(mu);
    sum += mu;
  }
  m.mean_with_excitation = m.present_means.empty() ? m.mean_no_excitation
                                                   : sum / static_cast<double>(m.present_means.size());
  return m;
}

std::vector<FidelityPoint> fidelity_scan(const ExperimentModel& model, std::span<const double> fields,
                                         std::span<const double> rates, const PhotonStats& stats,
                                         const FidelityOptions& opts) {
  model.validate();
  stats.validate();
  if (!std::is_sorted(fields.begin(), fields.end())) throw DomainError("field grid must be sorted");
  const std::size_t nodes = model.field_resolution > 0.0 ? std::max<std::size_t>(opts.resolution_nodes, 1) : 1;
  std::vector<FidelityPoint> out;
  out.reserve(fields.size() * rates.size());
  for (double f : fields) {
    std::vector<FidelityPoint> row(rates.size());
    for (std::size_t r = 0; r < rates.size(); ++r) row[r] = {f, rates[r], 0.0, 0.0, 0.0};
    for (std::size_t m = 0; m < nodes; ++m) {
      const double u = nodes == 1 ? 0.0
                                  : model.field_resolution * (2.0 * (static_cast<double>(m) + 0.5) /
                                                                  static_cast<double>(nodes) -
                                                              1.0);
      const auto tr =
          gate_resolved_transmission(model, f + u, opts.gate_samples, opts.beam_samples, opts.seed, opts.threads);
      for (std::size_t r = 0; r < rates.size(); ++r) {
        PhotonStats s = stats;
        s.source_rate = rates[r];
        const auto cm = count_model(tr, s);
        const std::size_t cut = cm.count_cutoff();
        const auto fid = detection_fidelity(cm.present_pmf(cut), cm.absent_pmf(cut));
        const double w = 1.0 / static_cast<double>(nodes);
        row[r].fidelity += w * fid.fidelity;
        row[r].mu0 += w * cm.mean_no_excitation;
        row[r].mu1 += w * cm.mean_with_excitation;
      }
    }
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

}  // namespace forster
