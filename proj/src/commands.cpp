#include "qss/commands.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qss/config_io.hpp"
#include "qss/errors.hpp"
#include "qss/metrics.hpp"
#include "qss/protocol.hpp"

namespace qss {
namespace {

using nlohmann::json;

constexpr std::array<AccessStructure, 6> kAllStructures{
    AccessStructure::s12,  AccessStructure::s23,  AccessStructure::s13,
    AccessStructure::adv1, AccessStructure::adv2, AccessStructure::adv3};

int run_guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const PhysicalityError& e) {
    std::cerr << "physicality error: " << e.what() << '\n';
    return 3;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 4;
  } catch (const McMismatchError& e) {
    std::cerr << "validation failure: " << e.what() << '\n';
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

ScenarioConfig load_or_default(const CommonOptions& opts) {
  return opts.config_path.empty() ? default_config() : load_config(opts.config_path);
}

std::string fmt9(double v) {
  std::array<char, 40> buf{};
  auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                               std::chars_format::general, 9);
  return std::string(buf.data(), p);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

// Reconstructs one structure end to end. Raw detection folds the homodyne
// efficiency into the reported moments instead of correcting it away.
ReconstructionResult finalize(const ShareSet& shares, const ScenarioConfig& cfg,
                              AccessStructure st, double gain, bool raw) {
  ReconstructionResult r =
      (st == AccessStructure::s23 || st == AccessStructure::s13)
          ? apply_parametric(reconstruct_feedforward(shares, cfg, st, gain))
          : reconstruct(shares, cfg, st);
  if (raw && cfg.homodyne_efficiency < 1.0) {
    r.out_state = loss_channel(r.out_state, 0, cfg.homodyne_efficiency);
    r.secret_mean *= std::sqrt(cfg.homodyne_efficiency);
  }
  return r;
}

json scenario_json(const ScenarioConfig& cfg) {
  return json{{"secret_amp_plus", cfg.secret_amp_plus},
              {"secret_amp_minus", cfg.secret_amp_minus},
              {"sqz1_db", cfg.sqz1.squeezing_db},
              {"sqz1_excess", cfg.sqz1.excess_factor},
              {"sqz2_db", cfg.sqz2.squeezing_db},
              {"sqz2_excess", cfg.sqz2.excess_factor},
              {"epr_visibility", cfg.epr_visibility},
              {"noise_var", cfg.noise_var},
              {"noise_injection",
               cfg.noise_injection == NoiseInjection::shares ? "shares" : "epr_beams"},
              {"ff_detector_efficiency", cfg.ff_detector_efficiency},
              {"ff_electronic_noise_var", cfg.ff_electronic_noise_var},
              {"electronic_gain", cfg.electronic_gain},
              {"homodyne_efficiency", cfg.homodyne_efficiency},
              {"channel_efficiency_1", cfg.channel_efficiency[0]},
              {"channel_efficiency_2", cfg.channel_efficiency[1]},
              {"channel_efficiency_3", cfg.channel_efficiency[2]},
              {"mc_shots", cfg.mc_shots},
              {"mc_seed", cfg.mc_seed}};
}

json metrics_json(const StructureMetrics& m, bool parametric) {
  return json{{"g_plus", m.g_plus},
              {"g_minus", m.g_minus},
              {"gain_product", m.gain_product},
              {"v_out_plus", m.v_out_plus},
              {"v_out_minus", m.v_out_minus},
              {"fidelity", m.fidelity},
              {"signal_transfer", m.transfer},
              {"conditional_plus", m.conditional.plus},
              {"conditional_minus", m.conditional.minus},
              {"conditional_product", m.conditional.product()},
              {"authorized", is_authorized(m.structure)},
              {"parametric_applied", parametric}};
}

}  // namespace

int cmd_report(const CommonOptions& opts) {
  return run_guarded([&] {
    const ScenarioConfig cfg = load_or_default(opts);
    const ShareSet shares = dealer_encode(cfg);

    json structures;
    double sum_auth = 0.0, sum_adv = 0.0, best_adv = 0.0;
    double t23 = 0.0, v23 = 0.0;
    for (AccessStructure st : kAllStructures) {
      auto r = finalize(shares, cfg, st, cfg.electronic_gain, opts.raw_detection);
      auto m = build_metrics(r);
      json entry = metrics_json(m, r.parametric_applied);
      const auto contour = wigner_contour(r.out_state);
      entry["wigner_semi_axes"] = {contour.semi_axes[0], contour.semi_axes[1]};
      entry["wigner_angle"] = contour.angle;
      structures[to_string(st)] = entry;
      if (is_authorized(st)) {
        sum_auth += m.fidelity;
      } else {
        sum_adv += m.fidelity;
        best_adv = std::max(best_adv, m.fidelity);
      }
      if (st == AccessStructure::s23) {
        t23 = m.transfer;
        v23 = m.conditional.product();
      }
    }

    auto epr = make_epr(cfg.sqz1, cfg.sqz2, cfg.epr_visibility);
    if (opts.raw_detection && cfg.homodyne_efficiency < 1.0) {
      epr = loss_channel(epr, 0, cfg.homodyne_efficiency);
      epr = loss_channel(epr, 1, cfg.homodyne_efficiency);
    }
    json entanglement{
        {"duan_product", duan_product(epr)},
        {"epr_sum_plus_var",
         epr.cov(0, 0) + epr.cov(2, 2) + 2.0 * epr.cov(0, 2)},
        {"epr_diff_minus_var",
         epr.cov(1, 1) + epr.cov(3, 3) - 2.0 * epr.cov(1, 3)}};

    json unitary{{"ideal", gain_for_unitary()}};
    for (auto [st, key] : {std::pair{AccessStructure::s23, "structure_23"},
                           std::pair{AccessStructure::s13, "structure_13"}}) {
      try {
        unitary[key] = gain_for_unitary(cfg, st);
      } catch (const std::domain_error&) {
        unitary[key] = nullptr;
      }
    }

    const ClassicalBounds bounds = classical_bounds(2, 3);
    json summary{{"average_fidelity_authorized", sum_auth / 3.0},
                 {"average_fidelity_excluded", sum_adv / 3.0},
                 {"best_excluded_fidelity", best_adv},
                 {"classical_average_bound", bounds.average_fidelity},
                 {"classical_single_bound", bounds.single_structure_fidelity},
                 {"beats_classical_average", sum_auth / 3.0 > bounds.average_fidelity},
                 {"nonclassical_tv_23",
                  t23 > bounds.signal_transfer_limit ||
                      v23 < bounds.conditional_product_limit}};

    json doc{{"scenario", scenario_json(cfg)},
             {"raw_detection", opts.raw_detection},
             {"unitary_electronic_gain", unitary},
             {"entanglement", entanglement},
             {"structures", structures},
             {"summary", summary}};
    write_text(opts.out_path, doc.dump(2) + "\n");
  });
}

namespace {

std::vector<double> gain_grid(const GridOptions& grid) {
  if (grid.steps < 2) throw ConfigError("steps must be >= 2");
  if (!(grid.g_min >= 0.0) || !(grid.g_max > grid.g_min)) {
    throw ConfigError("need 0 <= g_min < g_max");
  }
  std::vector<double> gs;
  gs.reserve(static_cast<std::size_t>(grid.steps));
  for (int k = 0; k < grid.steps; ++k) {
    gs.push_back(grid.g_min +
                 static_cast<double>(k) * (grid.g_max - grid.g_min) /
                     static_cast<double>(grid.steps - 1));
  }
  return gs;
}

}  // namespace

int cmd_sweep(const CommonOptions& opts, const GridOptions& grid) {
  return run_guarded([&] {
    const ScenarioConfig cfg = load_or_default(opts);
    const auto gs = gain_grid(grid);
    const ShareSet shares = dealer_encode(cfg);
    const auto adv = build_metrics(
        finalize(shares, cfg, AccessStructure::adv1, cfg.electronic_gain, opts.raw_detection));

    std::string csv = "G,g_plus,g_minus,gain_product,fidelity_23,fidelity_adv1\n";
    for (double g : gs) {
      auto m = build_metrics(finalize(shares, cfg, AccessStructure::s23, g, opts.raw_detection));
      csv += fmt9(g) + ',' + fmt9(m.g_plus) + ',' + fmt9(m.g_minus) + ',' +
             fmt9(m.gain_product) + ',' + fmt9(m.fidelity) + ',' + fmt9(adv.fidelity) + '\n';
    }
    write_text(opts.out_path, csv);
  });
}

int cmd_tv(const CommonOptions& opts, const GridOptions& grid) {
  return run_guarded([&] {
    const ScenarioConfig cfg = load_or_default(opts);
    auto gs = gain_grid(grid);
    const double g_star = gain_for_unitary(cfg, AccessStructure::s23);
    if (std::find(gs.begin(), gs.end(), g_star) == gs.end()) {
      gs.insert(std::lower_bound(gs.begin(), gs.end(), g_star), g_star);
    }

    const ShareSet shares = dealer_encode(cfg);
    const auto adv = build_metrics(
        finalize(shares, cfg, AccessStructure::adv1, cfg.electronic_gain, opts.raw_detection));

    std::string csv = "G,gain_product,T_23,V_23,T_adv,V_adv\n";
    for (double g : gs) {
      auto m = build_metrics(finalize(shares, cfg, AccessStructure::s23, g, opts.raw_detection));
      csv += fmt9(g) + ',' + fmt9(m.gain_product) + ',' + fmt9(m.transfer) + ',' +
             fmt9(m.conditional.product()) + ',' + fmt9(adv.transfer) + ',' +
             fmt9(adv.conditional.product()) + '\n';
    }
    csv += "# unitary gain G = " + fmt9(g_star) + "\n";
    write_text(opts.out_path, csv);
  });
}

int cmd_mc_validate(const CommonOptions& opts, const McOptions& mc) {
  return run_guarded([&] {
    const ScenarioConfig cfg = load_or_default(opts);
    const std::uint64_t shots =
        mc.shots.value_or(static_cast<std::uint64_t>(cfg.mc_shots));
    const std::uint64_t seed = mc.seed.value_or(cfg.mc_seed);
    const ShareSet shares = dealer_encode(cfg);

    json checks = json::array();
    double max_abs_z = 0.0;
    auto push = [&](AccessStructure st, const char* quantity, double analytic,
                    double sampled, double std_error) {
      const double z = std_error > 0.0 ? (sampled - analytic) / std_error
                                       : (sampled == analytic ? 0.0 : INFINITY);
      max_abs_z = std::max(max_abs_z, std::abs(z));
      checks.push_back(json{{"structure", to_string(st)},
                            {"quantity", quantity},
                            {"analytic", analytic},
                            {"sampled", sampled},
                            {"std_error", std_error},
                            {"z", z}});
    };

    std::uint64_t idx = 0;
    for (AccessStructure st : kAllStructures) {
      const auto m =
          build_metrics(finalize(shares, cfg, st, cfg.electronic_gain, false));
      const auto est = sample_scenario(cfg, st, shots, seed + idx, mc.perturbation);
      ++idx;

      const auto& op = est.at("out_plus");
      const auto& om = est.at("out_minus");
      push(st, "out_plus_mean", m.g_plus * cfg.secret_amp_plus, op.mean,
           op.std_error_mean());
      push(st, "out_minus_mean", m.g_minus * cfg.secret_amp_minus, om.mean,
           om.std_error_mean());
      push(st, "out_plus_var", m.v_out_plus, op.variance, op.std_error_var());
      push(st, "out_minus_var", m.v_out_minus, om.variance, om.std_error_var());

      // Below ~1e-6 the delta-method error bar on the fidelity is itself
      // dominated by rounding, so the comparison carries no information.
      if (m.fidelity >= 1e-6) {
        const auto f =
            estimate_fidelity(op, om, cfg.secret_amp_plus, cfg.secret_amp_minus);
        push(st, "fidelity", m.fidelity, f.value, f.std_error);
      }

      if (st == AccessStructure::s12) {
        const auto& ip = est.at("in_plus");
        const auto& im = est.at("in_minus");
        push(st, "in_plus_mean", cfg.secret_amp_plus, ip.mean, ip.std_error_mean());
        push(st, "in_minus_mean", cfg.secret_amp_minus, im.mean, im.std_error_mean());
        push(st, "in_plus_var", 1.0, ip.variance, ip.std_error_var());
        push(st, "in_minus_var", 1.0, im.variance, im.std_error_var());
      }

      if (st == AccessStructure::s23) {
        const auto epr = make_epr(cfg.sqz1, cfg.sqz2, cfg.epr_visibility);
        const double sum_plus =
            epr.cov(0, 0) + epr.cov(2, 2) + 2.0 * epr.cov(0, 2);
        const double diff_minus =
            epr.cov(1, 1) + epr.cov(3, 3) - 2.0 * epr.cov(1, 3);
        const auto& sp = est.at("epr_sum_plus");
        const auto& dm = est.at("epr_diff_minus");
        push(st, "epr_sum_plus_var", sum_plus, sp.variance, sp.std_error_var());
        push(st, "epr_diff_minus_var", diff_minus, dm.variance, dm.std_error_var());
      }
    }

    const bool pass = max_abs_z <= 5.0;
    json doc{{"shots", shots},
             {"seed", seed},
             {"threshold", 5.0},
             {"perturbation", json{{"out_plus_bias", mc.perturbation.out_plus_bias}}},
             {"max_abs_z", max_abs_z},
             {"pass", pass},
             {"checks", checks}};
    write_text(opts.out_path, doc.dump(2) + "\n");
    if (!pass) {
      throw McMismatchError("sampled moments deviate from analytic values: max |z| = " +
                            fmt9(max_abs_z));
    }
  });
}

int cmd_bounds(const CommonOptions& opts) {
  return run_guarded([&] {
    const ScenarioConfig cfg = load_or_default(opts);
    const ShareSet shares = dealer_encode(cfg);

    double fs[6] = {};
    double t23 = 0.0, v23 = 0.0;
    int i = 0;
    for (AccessStructure st : kAllStructures) {
      auto m = build_metrics(
          finalize(shares, cfg, st, cfg.electronic_gain, opts.raw_detection));
      fs[i++] = m.fidelity;
      if (st == AccessStructure::s23) {
        t23 = m.transfer;
        v23 = m.conditional.product();
      }
    }
    const double avg_auth = (fs[0] + fs[1] + fs[2]) / 3.0;
    const double best_adv = std::max({fs[3], fs[4], fs[5]});
    const ClassicalBounds b = classical_bounds(2, 3);

    json doc{
        {"scheme", json{{"k", 2}, {"n", 3}}},
        {"bounds", json{{"average_fidelity", b.average_fidelity},
                        {"single_structure_fidelity", b.single_structure_fidelity},
                        {"signal_transfer_limit", b.signal_transfer_limit},
                        {"conditional_product_limit", b.conditional_product_limit}}},
        {"achieved",
         json{{"fidelity_12", fs[0]},
              {"fidelity_23", fs[1]},
              {"fidelity_13", fs[2]},
              {"fidelity_adv1", fs[3]},
              {"fidelity_adv2", fs[4]},
              {"fidelity_adv3", fs[5]},
              {"average_fidelity_authorized", avg_auth},
              {"best_excluded_fidelity", best_adv},
              {"signal_transfer_23", t23},
              {"conditional_product_23", v23}}},
        {"verdict",
         json{{"beats_average_bound", avg_auth > b.average_fidelity},
              {"all_authorized_beat_single_bound",
               fs[0] > b.single_structure_fidelity &&
                   fs[1] > b.single_structure_fidelity &&
                   fs[2] > b.single_structure_fidelity},
              {"excluded_below_single_bound", best_adv < b.single_structure_fidelity},
              {"nonclassical_tv_23",
               t23 > b.signal_transfer_limit || v23 < b.conditional_product_limit}}}};
    write_text(opts.out_path, doc.dump(2) + "\n");
  });
}

}  // namespace qss
