#include "forster/atomic_states.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

#include "forster/errors.hpp"
#include "forster/units.hpp"

namespace forster {

RydbergLevel RydbergLevel::make(int n, Orbital l, double j, double mj) {
  const double tj = 2.0 * j;
  const double tm = 2.0 * mj;
  if (std::abs(tj - std::round(tj)) > 1e-9 || std::abs(tm - std::round(tm)) > 1e-9)
    throw DomainError(fmt::format("j = {} and m_j = {} must be half-integers", j, mj));
  RydbergLevel level{n, l, static_cast<int>(std::lround(tj)), static_cast<int>(std::lround(tm))};
  level.validate();
  return level;
}

void RydbergLevel::validate() const {
  if (n < 1) throw DomainError(fmt::format("principal quantum number n = {} must be >= 1", n));
  if (twice_j != 1 && twice_j != 3)
    throw DomainError(fmt::format("j = {}/2 is not supported (only 1/2 and 3/2)", twice_j));
  if (l == Orbital::S && twice_j != 1) throw DomainError("S states require j = 1/2");
  if (l_value() >= n) throw DomainError(fmt::format("l = {} requires n > l (n = {})", l_value(), n));
  if (std::abs(twice_mj) > twice_j || (twice_mj - twice_j) % 2 != 0)
    throw DomainError(fmt::format("m_j = {}/2 incompatible with j = {}/2", twice_mj, twice_j));
}

double RydbergLevel::lande_g() const noexcept {
  const double jj = j() * (j() + 1.0);
  const double ll = l_value() * (l_value() + 1.0);
  const double ss = 0.75;
  return 1.0 + (jj + ss - ll) / (2.0 * jj);
}

std::string RydbergLevel::label() const {
  const char orb = l == Orbital::S ? 'S' : 'P';
  const auto half = [](int twice) {
    return twice < 0 ? fmt::format("-{}/2", -twice) : fmt::format("{}/2", twice);
  };
  return fmt::format("{}{}{}(mj={})", n, orb, half(twice_j), half(twice_mj));
}

double forster_defect(const PairChannel& channel, double field) noexcept {
  return channel.defect_zero_field - channel.diff_polarizability * field * field + channel.zeeman_shift;
}

double pair_zeeman_shift(const RydbergLevel& gate_s, const RydbergLevel& source_s,
                         const PairChannel& channel, double b_field) noexcept {
  const auto moment = [](const RydbergLevel& a) { return a.lande_g() * a.mj(); };
  const double p_pair = moment(channel.gate_state) + moment(channel.source_state);
  const double s_pair = moment(gate_s) + moment(source_s);
  return angular(kBohrMagnetonMHzPerGauss * b_field * (p_pair - s_pair));
}

namespace {

void check_single_transition(const RydbergLevel& from, const RydbergLevel& to, const char* which) {
  if (std::abs(to.l_value() - from.l_value()) != 1)
    throw DomainError(fmt::format("{} transition {} -> {} violates delta l = +-1", which, from.label(), to.label()));
  if (std::abs(to.twice_j - from.twice_j) > 2)
    throw DomainError(fmt::format("{} transition {} -> {} violates |delta j| <= 1", which, from.label(), to.label()));
  if (std::abs(to.twice_mj - from.twice_mj) > 2)
    throw DomainError(fmt::format("{} transition {} -> {} violates |delta m_j| <= 1", which, from.label(), to.label()));
}

}  // namespace

void check_dipole_selection(const PairConfig& config, const PairChannel& channel) {
  config.gate_s.validate();
  config.source_s.validate();
  channel.gate_state.validate();
  channel.source_state.validate();
  check_single_transition(config.gate_s, channel.gate_state, "gate");
  check_single_transition(config.source_s, channel.source_state, "source");
  if (channel.c3 < 0.0) throw DomainError("channel c3 must be >= 0 (sign is absorbed into the phase)");
}

std::vector<PairChannel> channel_set(const PairConfig& config) {
  std::vector<PairChannel> out;
  out.reserve(config.channels.size());
  const bool axial = std::abs(config.theta) < 1e-12;
  for (const auto& ch : config.channels) {
    check_dipole_selection(config, ch);
    const int delta_m = (ch.gate_state.twice_mj - config.gate_s.twice_mj) +
                        (ch.source_state.twice_mj - config.source_s.twice_mj);
    if (axial && delta_m != 0) continue;
    out.push_back(ch);
  }
  return out;
}

std::vector<Resonance> resonance_fields(const PairConfig& config, double field_max, double tolerance) {
  if (!(field_max > 0.0)) throw DomainError("resonance_fields: field_max must be > 0");
  const auto channels = channel_set(config);
  constexpr int kScan = 4096;
  std::vector<Resonance> roots;
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const auto f = [&](double e) { return forster_defect(channels[c], e); };
    double a = 0.0;
    double fa = f(a);
    if (fa == 0.0) roots.push_back({0.0, c});
    for (int i = 1; i <= kScan; ++i) {
      const double b = field_max * i / kScan;
      const double fb = f(b);
      if (fb == 0.0) {
        roots.push_back({b, c});
      } else if (fa != 0.0 && std::signbit(fa) != std::signbit(fb)) {
        double lo = a, hi = b, flo = fa;
        while (hi - lo > tolerance) {
          const double mid = 0.5 * (lo + hi);
          const double fm = f(mid);
          if (fm == 0.0) {
            lo = hi = mid;
            break;
          }
          if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        roots.push_back({0.5 * (lo + hi), c});
      }
      a = b;
      fa = fb;
    }
  }
  std::sort(roots.begin(), roots.end(), [](const Resonance& x, const Resonance& y) {
    return x.field != y.field ? x.field < y.field : x.channel < y.channel;
  });
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [&](const Resonance& x, const Resonance& y) {
                            return x.channel == y.channel && std::abs(x.field - y.field) <= tolerance;
                          }),
              roots.end());
  return roots;
}

}  // namespace forster
