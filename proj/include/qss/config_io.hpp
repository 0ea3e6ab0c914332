#pragma once

#include <istream>
#include <string>

#include "qss/protocol.hpp"

// Flat `key = value` scenario files with `#` comments. Formatting and parsing
// round-trip exactly: parse(format(cfg)) == cfg and format is idempotent.

namespace qss {

// The tabletop experiment: 4.5 dB squeezers, 3.5 dB of dealer noise on the
// shares, 93% feedforward detector, electronic gain at unit gain product.
ScenarioConfig default_config();

// Near-perfect devices: 60 dB squeezing, no added noise, ideal detectors.
ScenarioConfig ideal_config();

// No squeezing and no dealer noise, with a macroscopic secret: the classical
// benchmark scenario.
ScenarioConfig classical_config();

ScenarioConfig parse_config(std::istream& in);
ScenarioConfig load_config(const std::string& path);
std::string format_config(const ScenarioConfig& cfg);
void save_config(const ScenarioConfig& cfg, const std::string& path);

}  // namespace qss
