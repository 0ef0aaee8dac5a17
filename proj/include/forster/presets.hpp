#pragma once

#include <array>
#include <string>
#include <vector>

#include "forster/atomic_states.hpp"
#include "forster/interaction.hpp"

namespace forster {

/// A pair system as read from a preset or channel file, in angular units.
struct PairPreset {
  PairConfig pair;
  double c3_prime = 0.0;
  double gamma_p = 0.0;
  double c6_reference = 0.0;
  std::array<double, 2> field_window{0.0, 1.0};  // V/cm, default range of field scans
  std::string source;                            // raw file text, hashed into run summaries

  /// Interaction parameters with the channel list of channel_set(pair).
  InteractionParams interaction() const;
};

/// Parses a preset document. `origin` names the document in error messages.
/// Throws ConfigError on malformed input or invalid quantum numbers.
PairPreset parse_pair_preset(const std::string& text, const std::string& origin);

/// Built-in preset by name, otherwise a channel file at that path.
PairPreset load_pair_preset(const std::string& name_or_path);

std::vector<std::string> preset_names();

}  // namespace forster
