#include "forster/experiment.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <random>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "forster/errors.hpp"
#include "forster/parallel.hpp"
#include "forster/units.hpp"

namespace forster {

namespace {

using json = nlohmann::ordered_json;

constexpr std::uint64_t kStreamOracle = 0x6f7261636c65ull;
constexpr std::uint64_t kStreamHistogram = 0x68697374ull;
constexpr std::uint64_t kStreamFractionRun = 0x66726163ull;

std::string csv_number(double x) { return fmt::format("{}", x); }

struct Csv {
  std::string text;
  explicit Csv(std::initializer_list<const char*> header) {
    bool first = true;
    for (const char* h : header) {
      text += first ? "" : ",";
      text += h;
      first = false;
    }
    text += "\r\n";
  }
  template <class... Args>
  void row(const Args&... args) {
    bool first = true;
    ((text += (first ? "" : ","), text += cell(args), first = false), ...);
    text += "\r\n";
  }
  static std::string cell(double x) { return csv_number(x); }
  static std::string cell(std::size_t x) { return std::to_string(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
  }
};

/// Midpoint nodes of the boxcar [-half_width, half_width].
std::vector<double> resolution_offsets(double half_width, std::size_t nodes) {
  std::vector<double> out(nodes, 0.0);
  if (nodes <= 1 || half_width <= 0.0) return std::vector<double>(1, 0.0);
  for (std::size_t k = 0; k < nodes; ++k)
    out[k] = half_width * (2.0 * (static_cast<double>(k) + 0.5) / static_cast<double>(nodes) - 1.0);
  return out;
}

/// Log-linear interpolation of efficiency at a given scattered photon number; NaN outside.
double efficiency_at(std::span<const RetrievalPoint> curve, double n_scattered) {
  for (std::size_t j = 0; j + 1 < curve.size(); ++j) {
    const double a = curve[j].n_scattered;
    const double b = curve[j + 1].n_scattered;
    if (n_scattered < std::min(a, b) || n_scattered > std::max(a, b)) continue;
    if (a == b) return curve[j].efficiency;
    const double t = (n_scattered - a) / (b - a);
    return std::exp((1.0 - t) * std::log(curve[j].efficiency) + t * std::log(curve[j + 1].efficiency));
  }
  return std::nan("");
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// ---------------------------------------------------------------------------------------

void run_starkmap(const RunConfig& c, RunOutput& out) {
  const auto channels = channel_set(c.preset.pair);
  Csv csv({"field_v_cm", "channel", "gate_state", "source_state", "defect_mhz"});
  for (double f : c.field_grid)
    for (std::size_t k = 0; k < channels.size(); ++k)
      csv.row(f, k, channels[k].gate_state.label(), channels[k].source_state.label(),
              ordinary(forster_defect(channels[k], f)));
  out.files.emplace_back("starkmap.csv", csv.text);

  const double fmax = c.field_grid.back();
  const auto roots = fmax > 0.0 ? resonance_fields(c.preset.pair, fmax) : std::vector<Resonance>{};
  // Every root must sit inside a grid bracket where its channel changes sign, and vice versa.
  std::size_t sign_changes = 0;
  bool consistent = true;
  for (std::size_t k = 0; k < channels.size(); ++k) {
    for (std::size_t i = 0; i + 1 < c.field_grid.size(); ++i) {
      const double a = forster_defect(channels[k], c.field_grid[i]);
      const double b = forster_defect(channels[k], c.field_grid[i + 1]);
      if (std::signbit(a) == std::signbit(b)) continue;
      ++sign_changes;
      const bool found = std::any_of(roots.begin(), roots.end(), [&](const Resonance& r) {
        return r.channel == k && r.field >= c.field_grid[i] && r.field <= c.field_grid[i + 1];
      });
      consistent = consistent && found;
    }
  }
  json res = json::array();
  for (const auto& r : roots) res.push_back({{"field_v_cm", r.field}, {"channel", r.channel}});
  out.summary["headline"] = {{"resonances", res},
                             {"grid_sign_changes", sign_changes},
                             {"roots_match_grid", consistent && sign_changes == roots.size()}};
}

void run_gain_scan(const RunConfig& c, RunOutput& out) {
  const auto points = field_scan(c.model, c.field_grid, c.stats, c.sampling);
  Csv csv({"field_v_cm", "gain", "gain_std_error", "t0", "t1"});
  std::vector<double> gains, errors;
  for (const auto& p : points) {
    csv.row(p.field, p.gain, p.std_error, p.t0, p.t1);
    gains.push_back(p.gain);
    errors.push_back(p.std_error);
  }
  out.files.emplace_back("gain_scan.csv", csv.text);

  const std::array<double, 1> zero{0.0};
  const auto zero_point = field_scan(c.model, zero, c.stats, c.sampling).front();
  const auto peak = static_cast<std::size_t>(std::max_element(gains.begin(), gains.end()) - gains.begin());
  const auto maxima = local_maxima(gains, errors);
  json max_fields = json::array();
  for (auto i : maxima) max_fields.push_back(points[i].field);
  // Lowest gain strictly between the outermost maxima, against the field-free gain.
  double dip = std::nan("");
  double dip_field = std::nan("");
  if (maxima.size() >= 2)
    for (std::size_t i = maxima.front(); i <= maxima.back(); ++i)
      if (!(gains[i] >= dip)) {
        dip = gains[i];
        dip_field = points[i].field;
      }

  // Gain versus source rate inside the non-destructive window.
  const auto limit = nondestructive_limit(c.model, c.stats, c.sampling);
  Csv rate_csv({"rate_per_us", "gain_peak", "gain_zero_field", "ratio"});
  std::vector<double> rates, peak_gain, zero_gain;
  double min_ratio = std::numeric_limits<double>::infinity();
  constexpr int kRates = 8;
  for (int k = 1; k <= kRates; ++k) {
    PhotonStats s = c.stats;
    s.source_rate = limit.max_rate * k / kRates;
    const double gp = optical_gain(points[peak].t0, points[peak].t1, s);
    const double gz = optical_gain(zero_point.t0, zero_point.t1, s);
    rates.push_back(s.source_rate);
    peak_gain.push_back(gp);
    zero_gain.push_back(gz);
    min_ratio = std::min(min_ratio, gp / gz);
    rate_csv.row(s.source_rate, gp, gz, gp / gz);
  }
  out.files.emplace_back("gain_vs_rate.csv", rate_csv.text);
  const auto fit = linear_fit(rates, peak_gain);

  out.summary["headline"] = {
      {"peak_gain", gains[peak]},
      {"peak_gain_std_error", errors[peak]},
      {"peak_field_v_cm", points[peak].field},
      {"zero_field_gain", zero_point.gain},
      {"enhancement", gains[peak] / zero_point.gain},
      {"local_maxima_v_cm", max_fields},
      {"lowest_gain_between_maxima", number_or_null(dip)},
      {"lowest_gain_field_v_cm", number_or_null(dip_field)},
      {"nondestructive_rate_per_us", limit.max_rate},
      {"nondestructive_bounded", limit.bounded},
      {"min_enhancement_in_window", min_ratio},
      {"rate_fit_r_squared", fit.r_squared},
      {"rate_fit_intercept", fit.intercept},
      {"rate_fit_slope", fit.slope},
  };
}

void run_fidelity_scan(const RunConfig& c, RunOutput& out) {
  const auto points = fidelity_scan(c.model, c.field_grid, c.rate_grid, c.stats, c.fidelity);
  Csv csv({"field_v_cm", "rate_per_us", "fidelity", "mu0", "mu1"});
  for (const auto& p : points) csv.row(p.field, p.rate, p.fidelity, p.mu0, p.mu1);
  out.files.emplace_back("fidelity_scan.csv", csv.text);
  const auto best = *std::max_element(points.begin(), points.end(), [](const FidelityPoint& a, const FidelityPoint& b) {
    return a.fidelity < b.fidelity;
  });

  // Count histograms at the best point, separated as in the measurement.
  PhotonStats s = c.stats;
  s.source_rate = best.rate;
  const auto trans = gate_resolved_transmission(c.model, best.field, c.fidelity.gate_samples,
                                                c.fidelity.beam_samples, c.seed, c.threads);
  const auto model = count_model(trans, s);
  json hist_summary = nullptr;
  if (c.histogram_shots > 0) {
    const auto hist = count_histograms(model, c.histogram_shots, stream_seed(c.seed, kStreamHistogram, 0), c.threads);
    const auto sep = separate_histograms(hist.gate_pulse, model.p_excitation, model.mean_no_excitation);
    Csv hcsv({"count", "shots_no_gate", "shots_gate_pulse", "shots_present_est", "shots_absent_est"});
    const std::size_t bins = std::max(hist.gate_pulse.size(), hist.no_gate_pulse.size());
    const auto at = [](const Histogram& h, std::size_t i) { return i < h.size() ? h[i] : 0.0; };
    for (std::size_t i = 0; i < bins; ++i)
      hcsv.row(i, at(hist.no_gate_pulse, i), at(hist.gate_pulse, i), at(sep.present, i), at(sep.absent, i));
    out.files.emplace_back("count_histograms.csv", hcsv.text);
    const auto f = detection_fidelity(sep.present, sep.absent);
    hist_summary = {{"shots", c.histogram_shots},
                    {"fidelity_from_histograms", f.fidelity},
                    {"threshold", f.threshold},
                    {"warnings", sep.warnings}};
  }
  const std::size_t cutoff = model.count_cutoff();
  const auto exact = detection_fidelity(model.present_pmf(cutoff), model.absent_pmf(cutoff));
  out.summary["headline"] = {{"peak_fidelity", best.fidelity},
                             {"peak_field_v_cm", best.field},
                             {"peak_rate_per_us", best.rate},
                             {"mu0", best.mu0},
                             {"mu1", best.mu1},
                             {"threshold_at_peak", exact.threshold},
                             {"histograms", hist_summary}};
}

std::vector<RetrievalPoint> averaged_retrieval(const RunConfig& c, double field, std::size_t nodes,
                                               const std::string& variant) {
  const auto offsets = resolution_offsets(c.model.field_resolution, nodes);
  std::vector<RetrievalPoint> acc;
  for (double u : offsets) {
    const auto r = retrieval_curve(c.model, std::max(0.0, field + u), c.retrieval, c.source_means, variant);
    if (acc.empty()) {
      acc = r;
      for (auto& p : acc) p.n_scattered = p.efficiency = 0.0;
    }
    for (std::size_t i = 0; i < r.size(); ++i) {
      acc[i].n_scattered += r[i].n_scattered / static_cast<double>(offsets.size());
      acc[i].efficiency += r[i].efficiency / static_cast<double>(offsets.size());
    }
  }
  return acc;
}

void run_retrieval(const RunConfig& c, RunOutput& out) {
  const auto on = averaged_retrieval(c, c.retrieval_field, c.retrieval_resolution_nodes, "resonance");
  const auto off = averaged_retrieval(c, 0.0, 1, "zero_field");
  const double eta = c.retrieval.efficiency_without_source();
  const auto& p = c.model.propagation;
  const auto rb_of = [&](double field) {
    return blockade_radius(std::abs(interaction_coefficient(c.model.interaction, field, p.omega)), p.gamma,
                           p.omega_rabi);
  };
  const double rb_on = rb_of(c.retrieval_field);
  const double rb_off = rb_of(0.0);
  const double frac_on = blockade_beam_fraction(c.model.geometry, rb_on, 20000, stream_seed(c.seed, kStreamFractionRun, 0));
  const double frac_off = blockade_beam_fraction(c.model.geometry, rb_off, 20000, stream_seed(c.seed, kStreamFractionRun, 1));

  Csv csv({"n_in_mean", "n_scattered_mean", "efficiency", "model_variant"});
  const auto emit = [&](const std::vector<RetrievalPoint>& curve, const std::string& prefix) {
    for (const auto& q : curve) csv.row(q.n_in, q.n_scattered, q.efficiency, prefix + q.variant);
  };
  emit(on, "");
  emit(off, "");
  const auto lim_on = limit_curves(on, eta, frac_on);
  const auto lim_off = limit_curves(off, eta, frac_off);
  emit(lim_on.black, "resonance_");
  emit(lim_on.dashed, "resonance_");
  emit(lim_on.dotted, "resonance_");
  emit(lim_off.black, "zero_field_");
  emit(lim_off.dashed, "zero_field_");
  emit(lim_off.dotted, "zero_field_");
  out.files.emplace_back("retrieval.csv", csv.text);

  // Collapse: zero-field points inside the scattered-photon range of the resonant curve.
  double worst = 0.0;
  std::size_t compared = 0;
  for (const auto& q : off) {
    const double y = efficiency_at(on, q.n_scattered);
    if (!std::isfinite(y)) continue;
    worst = std::max(worst, std::abs(q.efficiency / y - 1.0));
    ++compared;
  }
  double max_sc = 0.0;
  for (const auto& q : on) max_sc = std::max(max_sc, q.n_scattered);
  const double zero_source = on.empty() ? std::nan("") : on.front().n_in == 0.0 ? on.front().efficiency : std::nan("");
  out.summary["headline"] = {
      {"retrieval_field_v_cm", c.retrieval_field},
      {"efficiency_without_source", eta},
      {"zero_source_efficiency", number_or_null(zero_source)},
      {"retrieval_at_one_scattered_resonance", number_or_null(efficiency_at(on, 1.0))},
      {"retrieval_at_one_scattered_zero_field", number_or_null(efficiency_at(off, 1.0))},
      {"max_scattered_resonance", max_sc},
      {"collapse_max_relative_deviation", compared ? json(worst) : json(nullptr)},
      {"collapse_points_compared", compared},
      {"blockade_radius_resonance_um", rb_on},
      {"blockade_radius_zero_field_um", rb_off},
      {"blockade_fraction_resonance", frac_on},
      {"blockade_fraction_zero_field", frac_off},
  };
}

void run_oracle_check(const RunConfig& c, RunOutput& out) {
  Csv csv({"set", "optical_depth", "omega_rabi_mhz", "gamma_mhz", "gamma_s_mhz", "gamma_p_mhz", "detuning_mhz",
           "density_shape", "half_length_um", "gate", "c3_mhz", "defect_mhz", "gate_z_um", "offset_um", "i_freq",
           "i_full", "i_time", "abs_diff"});
  double worst = 0.0;
  std::vector<double> freq(c.oracle_sets), full(c.oracle_sets), time(c.oracle_sets);
  struct Set {
    PropagationParams params;
    std::optional<ResolvedGate> gate;
    Point2 line;
  };
  std::vector<Set> sets(c.oracle_sets);
  for (std::size_t i = 0; i < c.oracle_sets; ++i) {
    Rng rng = make_rng(c.seed, kStreamOracle, i);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto& s = sets[i];
    auto& p = s.params;
    p.omega_rabi = angular(3.0 + 5.0 * u(rng));
    p.gamma = angular(2.0 + 2.0 * u(rng));
    const double cap = 0.01 * std::min(p.omega_rabi, p.gamma);
    p.gamma_s = cap * u(rng);
    p.omega = 0.0;  // source on the EIT resonance
    const double half = 6.0 + 8.0 * u(rng);
    p.density = i % 2 ? DensityProfile::uniform(half) : DensityProfile::gaussian(half);
    p.density.cutoff = 3.0;
    const double od = 2.0 + 10.0 * u(rng);
    p.g = coupling_for_optical_depth(od, p.gamma, p.density);
    p.form = SusceptibilityForm::Adiabatic;
    const double gamma_p = cap * u(rng);
    if (i % 5 != 4) {
      ResolvedGate g;
      const double sign = u(rng) < 0.5 ? -1.0 : 1.0;
      g.channels.push_back({angular(50.0 + 450.0 * u(rng)), sign * angular(10.0 + 50.0 * u(rng))});
      g.gamma_p = gamma_p;
      g.position = {0.0, 0.0, half * (u(rng) - 0.5)};
      s.gate = g;
    }
    s.line = {4.0 * u(rng), 0.0};
  }
  parallel_for(c.oracle_sets, c.threads, [&](std::size_t i) {
    const auto& s = sets[i];
    std::optional<GateExcitation> ex;
    if (s.gate) ex = s.gate->excitation(s.params.omega);
    freq[i] = transmission_freq(s.line, ex, s.params).intensity;
    PropagationParams exact = s.params;
    exact.form = SusceptibilityForm::Full;
    full[i] = transmission_freq(s.line, ex, exact).intensity;
    time[i] = transmission_time_oracle(s.params, s.gate, s.line, c.oracle).transmission.intensity;
  });
  for (std::size_t i = 0; i < c.oracle_sets; ++i) {
    const auto& s = sets[i];
    const auto& p = s.params;
    const double diff = std::abs(freq[i] - time[i]);
    worst = std::max(worst, diff);
    csv.row(i, p.optical_depth(), ordinary(p.omega_rabi), ordinary(p.gamma), ordinary(p.gamma_s),
            s.gate ? ordinary(s.gate->gamma_p) : 0.0, ordinary(p.omega),
            std::string(p.density.shape == DensityProfile::Shape::Uniform ? "uniform" : "gaussian"),
            p.density.half_length, s.gate ? 1 : 0, s.gate ? ordinary(s.gate->channels[0].c3) : 0.0,
            s.gate ? ordinary(s.gate->channels[0].defect) : 0.0, s.gate ? s.gate->position.z : 0.0, s.line.x,
            freq[i], full[i], time[i], diff);
  }
  out.files.emplace_back("oracle_check.csv", csv.text);
  double worst_full = 0.0;
  for (std::size_t i = 0; i < c.oracle_sets; ++i) worst_full = std::max(worst_full, std::abs(full[i] - time[i]));
  out.summary["headline"] = {{"sets", c.oracle_sets}, {"max_abs_diff", worst}, {"max_abs_diff_full_form", worst_full}};
}

}  // namespace

RunOutput run_experiment(const RunConfig& config) {
  RunOutput out;
  const auto start = std::chrono::steady_clock::now();
  out.summary["schema_version"] = kSchemaVersion;
  out.summary["scan"] = scan_name(config.scan);
  out.summary["pair_system"] = config.preset.pair.name;
  out.summary["seed"] = config.seed;
  out.summary["threads"] = config.threads;
  out.summary["input_hash"] = git_blob_sha1(config_echo_yaml(config) + config.preset.source);
  out.summary["config"] = config.values;
  out.summary["warnings"] = validity_warnings(config.model.propagation, config.model.interaction.gamma_p);
  try {
    switch (config.scan) {
      case ScanKind::StarkMap: run_starkmap(config, out); break;
      case ScanKind::GainScan: run_gain_scan(config, out); break;
      case ScanKind::FidelityScan: run_fidelity_scan(config, out); break;
      case ScanKind::Retrieval: run_retrieval(config, out); break;
      case ScanKind::OracleCheck: run_oracle_check(config, out); break;
    }
  } catch (const NumericalError& e) {
    throw NumericalError(fmt::format("{}: {}", scan_name(config.scan), e.what()));
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("{}: {}", scan_name(config.scan), e.what()));
  }
  json files = json::array();
  for (const auto& f : out.files) files.push_back(f.first);
  out.summary["files"] = files;
  out.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

void write_outputs(const RunConfig& config, const RunOutput& output) {
  namespace fs = std::filesystem;
  const fs::path dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));
  const auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream f(dir / name, std::ios::binary);
    f << content;
    if (!f) throw ConfigError(fmt::format("cannot write '{}'", (dir / name).string()));
  };
  for (const auto& [name, content] : output.files) write(name, content);
  write("summary.json", output.summary.dump(2) + "\n");
  write("config.yaml", config_echo_yaml(config));
  json timing = {{"scan", scan_name(config.scan)}, {"runtime_seconds", output.runtime_seconds},
                 {"threads", resolve_threads(config.threads)}};
  write("timing.json", timing.dump(2) + "\n");
}

std::string git_blob_sha1(std::string_view content) {
  const std::string header = fmt::format("blob {}", content.size());
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  const bool ok = ctx && EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) &&
                  EVP_DigestUpdate(ctx, header.data(), header.size() + 1) &&  // includes the NUL
                  EVP_DigestUpdate(ctx, content.data(), content.size()) && EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  if (!ok) throw NumericalError("SHA-1 digest failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::vector<std::size_t> local_maxima(std::span<const double> values, std::span<const double> errors,
                                      double n_sigma) {
  std::vector<std::size_t> out;
  const std::size_t n = values.size();
  const auto err = [&](std::size_t i) { return i < errors.size() ? errors[i] : 0.0; };
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(values[i] > values[i - 1])) continue;
    std::size_t j = i;
    while (j + 1 < n && values[j + 1] == values[i]) ++j;
    if (j + 1 >= n || !(values[j + 1] < values[i])) continue;
    // Prominence: descend on both sides until a higher value or the grid end.
    std::size_t lo_idx = i - 1;
    for (std::size_t k = i; k-- > 0 && values[k] <= values[i];)
      if (values[k] < values[lo_idx]) lo_idx = k;
    std::size_t hi_idx = j + 1;
    for (std::size_t k = j + 1; k < n && values[k] <= values[i]; ++k)
      if (values[k] < values[hi_idx]) hi_idx = k;
    const std::size_t base = values[lo_idx] > values[hi_idx] ? lo_idx : hi_idx;
    const double sigma = std::hypot(err(i), err(base));
    if (values[i] - values[base] > n_sigma * sigma) out.push_back(i);
  }
  return out;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("linear_fit needs two or more (x, y) pairs");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("linear_fit: x values are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

}  // namespace forster
