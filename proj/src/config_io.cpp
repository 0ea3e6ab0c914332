#include "qss/config_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>
#include <system_error>

#include "qss/errors.hpp"

namespace qss {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_double(std::string_view v, int line) {
  double out = 0.0;
  const auto* first = v.data();
  const auto* last = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("expected a number, got '" + std::string(v) + "'", line);
  }
  return out;
}

template <class Int>
Int parse_int(std::string_view v, int line) {
  Int out = 0;
  const auto* first = v.data();
  const auto* last = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("expected an integer, got '" + std::string(v) + "'", line);
  }
  return out;
}

std::string fmt_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

}  // namespace

ScenarioConfig default_config() { return ScenarioConfig{}; }

ScenarioConfig ideal_config() {
  ScenarioConfig c;
  c.sqz1 = {-60.0, 1.0};
  c.sqz2 = {-60.0, 1.0};
  c.noise_var = 0.0;
  c.ff_detector_efficiency = 1.0;
  c.ff_electronic_noise_var = 0.0;
  c.electronic_gain = gain_for_unitary();
  c.homodyne_efficiency = 1.0;
  return c;
}

ScenarioConfig classical_config() {
  ScenarioConfig c;
  c.secret_amp_plus = 2000.0;
  c.secret_amp_minus = 1000.0;
  c.sqz1 = {0.0, 1.0};
  c.sqz2 = {0.0, 1.0};
  c.noise_var = 0.0;
  c.ff_detector_efficiency = 1.0;
  c.ff_electronic_noise_var = 0.0;
  c.electronic_gain = gain_for_unitary();
  c.homodyne_efficiency = 1.0;
  return c;
}

ScenarioConfig parse_config(std::istream& in) {
  ScenarioConfig cfg;
  std::set<std::string> seen;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s(raw);
    if (const auto hash = s.find('#'); hash != std::string_view::npos) {
      s = s.substr(0, hash);
    }
    s = trim(s);
    if (s.empty()) continue;

    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("expected 'key = value'", line);
    }
    const std::string key(trim(s.substr(0, eq)));
    const std::string_view value = trim(s.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("expected 'key = value'", line);
    }
    if (!seen.insert(key).second) {
      throw ConfigError("duplicate key '" + key + "'", line);
    }

    if (key == "secret_amp_plus") {
      cfg.secret_amp_plus = parse_double(value, line);
    } else if (key == "secret_amp_minus") {
      cfg.secret_amp_minus = parse_double(value, line);
    } else if (key == "sqz1_db") {
      cfg.sqz1.squeezing_db = parse_double(value, line);
    } else if (key == "sqz1_excess") {
      cfg.sqz1.excess_factor = parse_double(value, line);
    } else if (key == "sqz2_db") {
      cfg.sqz2.squeezing_db = parse_double(value, line);
    } else if (key == "sqz2_excess") {
      cfg.sqz2.excess_factor = parse_double(value, line);
    } else if (key == "epr_visibility") {
      cfg.epr_visibility = parse_double(value, line);
    } else if (key == "noise_var") {
      cfg.noise_var = parse_double(value, line);
    } else if (key == "noise_injection") {
      if (value == "shares") {
        cfg.noise_injection = NoiseInjection::shares;
      } else if (value == "epr_beams") {
        cfg.noise_injection = NoiseInjection::epr_beams;
      } else {
        throw ConfigError("noise_injection must be 'shares' or 'epr_beams'", line);
      }
    } else if (key == "ff_detector_efficiency") {
      cfg.ff_detector_efficiency = parse_double(value, line);
    } else if (key == "ff_electronic_noise_var") {
      cfg.ff_electronic_noise_var = parse_double(value, line);
    } else if (key == "electronic_gain") {
      cfg.electronic_gain = parse_double(value, line);
    } else if (key == "homodyne_efficiency") {
      cfg.homodyne_efficiency = parse_double(value, line);
    } else if (key == "channel_efficiency_1") {
      cfg.channel_efficiency[0] = parse_double(value, line);
    } else if (key == "channel_efficiency_2") {
      cfg.channel_efficiency[1] = parse_double(value, line);
    } else if (key == "channel_efficiency_3") {
      cfg.channel_efficiency[2] = parse_double(value, line);
    } else if (key == "mc_shots") {
      cfg.mc_shots = parse_int<long long>(value, line);
    } else if (key == "mc_seed") {
      cfg.mc_seed = parse_int<std::uint64_t>(value, line);
    } else {
      throw ConfigError("unknown key '" + key + "'", line);
    }
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config file '" + path + "'");
  return parse_config(f);
}

std::string format_config(const ScenarioConfig& cfg) {
  std::ostringstream out;
  out << "# scenario configuration\n";
  out << "secret_amp_plus = " << fmt_double(cfg.secret_amp_plus) << "\n";
  out << "secret_amp_minus = " << fmt_double(cfg.secret_amp_minus) << "\n";
  out << "sqz1_db = " << fmt_double(cfg.sqz1.squeezing_db) << "\n";
  out << "sqz1_excess = " << fmt_double(cfg.sqz1.excess_factor) << "\n";
  out << "sqz2_db = " << fmt_double(cfg.sqz2.squeezing_db) << "\n";
  out << "sqz2_excess = " << fmt_double(cfg.sqz2.excess_factor) << "\n";
  out << "epr_visibility = " << fmt_double(cfg.epr_visibility) << "\n";
  out << "noise_var = " << fmt_double(cfg.noise_var) << "\n";
  out << "noise_injection = "
      << (cfg.noise_injection == NoiseInjection::shares ? "shares" : "epr_beams") << "\n";
  out << "ff_detector_efficiency = " << fmt_double(cfg.ff_detector_efficiency) << "\n";
  out << "ff_electronic_noise_var = " << fmt_double(cfg.ff_electronic_noise_var) << "\n";
  out << "electronic_gain = " << fmt_double(cfg.electronic_gain) << "\n";
  out << "homodyne_efficiency = " << fmt_double(cfg.homodyne_efficiency) << "\n";
  out << "channel_efficiency_1 = " << fmt_double(cfg.channel_efficiency[0]) << "\n";
  out << "channel_efficiency_2 = " << fmt_double(cfg.channel_efficiency[1]) << "\n";
  out << "channel_efficiency_3 = " << fmt_double(cfg.channel_efficiency[2]) << "\n";
  out << "mc_shots = " << cfg.mc_shots << "\n";
  out << "mc_seed = " << cfg.mc_seed << "\n";
  return out.str();
}

void save_config(const ScenarioConfig& cfg, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write config file '" + path + "'");
  f << format_config(cfg);
  if (!f.good()) throw IoError("failed writing config file '" + path + "'");
}

}  // namespace qss
