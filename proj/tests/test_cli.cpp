#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qss/config_io.hpp"

// Drives the installed binary end to end: exit codes, determinism of the
// emitted files, and the documented output shapes.

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kDir = fs::temp_directory_path() / "qss_cli_test";

int run(const std::string& args) {
  const std::string cmd =
      std::string(QSS_TOOL_PATH) + " " + args + " > /dev/null 2> /dev/null";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct DirGuard {
  DirGuard() { fs::create_directories(kDir); }
  ~DirGuard() { fs::remove_all(kDir); }
} guard;

}  // namespace

TEST_CASE("report writes valid JSON and is byte-identical across runs") {
  const fs::path a = kDir / "report_a.json";
  const fs::path b = kDir / "report_b.json";
  REQUIRE(run("report --out " + a.string()) == 0);
  REQUIRE(run("report --out " + b.string()) == 0);
  const std::string text = slurp(a);
  CHECK(text == slurp(b));

  const json doc = json::parse(text);
  CHECK(doc.at("scenario").at("ff_detector_efficiency") == 0.93);
  CHECK(doc.at("raw_detection") == false);
  CHECK(doc.at("structures").size() == 6);
  CHECK(doc.at("structures").at("23").at("parametric_applied") == true);
  CHECK(doc.at("structures").at("12").at("parametric_applied") == false);
  CHECK(doc.at("summary").at("beats_classical_average") == true);
  const double f23 = doc.at("structures").at("23").at("fidelity");
  CHECK(f23 == doctest::Approx(0.6952435317152016).epsilon(1e-12));
  CHECK(doc.at("structures").at("adv1").at("wigner_semi_axes").size() == 2);
  CHECK(doc.at("structures").at("adv1").contains("wigner_angle"));
}

TEST_CASE("raw detection shifts moments toward vacuum") {
  const fs::path a = kDir / "corrected.json";
  const fs::path b = kDir / "raw.json";
  REQUIRE(run("report --out " + a.string()) == 0);
  REQUIRE(run("report --raw-detection --out " + b.string()) == 0);
  const json corrected = json::parse(slurp(a));
  const json raw = json::parse(slurp(b));
  CHECK(raw.at("raw_detection") == true);
  // Detection loss pulls variances toward 1, flattering the apparent
  // fidelity; degrading the measured entanglement is the honest direction.
  const double v_corr = corrected.at("structures").at("23").at("v_out_plus");
  const double v_raw = raw.at("structures").at("23").at("v_out_plus");
  CHECK(v_raw == doctest::Approx(0.89 * v_corr + 0.11).epsilon(1e-12));
  const double f_corr = corrected.at("structures").at("23").at("fidelity");
  const double f_raw = raw.at("structures").at("23").at("fidelity");
  CHECK(f_raw > f_corr);
  const double d_corr = corrected.at("entanglement").at("duan_product");
  const double d_raw = raw.at("entanglement").at("duan_product");
  CHECK(d_raw > d_corr);
}

TEST_CASE("sweep emits the documented CSV grid") {
  const fs::path a = kDir / "sweep_a.csv";
  const fs::path b = kDir / "sweep_b.csv";
  REQUIRE(run("sweep --g-min 0 --g-max 4 --steps 5 --out " + a.string()) == 0);
  REQUIRE(run("sweep --g-min 0 --g-max 4 --steps 5 --out " + b.string()) == 0);
  const std::string text = slurp(a);
  CHECK(text == slurp(b));

  std::istringstream in(text);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "G,g_plus,g_minus,gain_product,fidelity_23,fidelity_adv1");
  int rows = 0;
  double first_col = -1.0;
  while (std::getline(in, line)) {
    ++rows;
    first_col = std::stod(line);
  }
  CHECK(rows == 5);
  CHECK(first_col == doctest::Approx(4.0));
}

TEST_CASE("tv inserts the unit-gain-product row and flags it") {
  const fs::path p = kDir / "tv.csv";
  REQUIRE(run("tv --g-min 0 --g-max 4 --steps 3 --out " + p.string()) == 0);
  std::istringstream in(slurp(p));
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "G,gain_product,T_23,V_23,T_adv,V_adv");
  int rows = 0;
  bool unit_row = false;
  std::string comment;
  while (std::getline(in, line)) {
    if (line.rfind('#', 0) == 0) {
      comment = line;
      continue;
    }
    ++rows;
    std::istringstream row(line);
    std::string g, product;
    std::getline(row, g, ',');
    std::getline(row, product, ',');
    if (product == "1") unit_row = true;
  }
  CHECK(rows == 4);  // 3 grid points plus the inserted unit-gain row
  CHECK(unit_row);
  CHECK(comment.rfind("# unitary gain G = 2.9329423", 0) == 0);
}

TEST_CASE("bounds reports a fully nonclassical verdict at the defaults") {
  const fs::path p = kDir / "bounds.json";
  REQUIRE(run("bounds --out " + p.string()) == 0);
  const json doc = json::parse(slurp(p));
  CHECK(doc.at("bounds").at("average_fidelity") == doctest::Approx(2.0 / 3.0));
  CHECK(doc.at("verdict").at("beats_average_bound") == true);
  CHECK(doc.at("verdict").at("all_authorized_beat_single_bound") == true);
  CHECK(doc.at("verdict").at("excluded_below_single_bound") == true);
  CHECK(doc.at("verdict").at("nonclassical_tv_23") == true);
}

TEST_CASE("mc-validate passes clean and fails a biased self-test") {
  const fs::path good = kDir / "mc_good.json";
  const fs::path bad = kDir / "mc_bad.json";
  REQUIRE(run("mc-validate --shots 50000 --seed 7 --out " + good.string()) == 0);
  const json doc = json::parse(slurp(good));
  CHECK(doc.at("pass") == true);
  CHECK(double(doc.at("max_abs_z")) < 5.0);
  CHECK(doc.at("shots") == 50000);

  REQUIRE(run("mc-validate --shots 50000 --seed 7 --mc-perturb 0.05 --out " +
              bad.string()) == 5);
  const json failed = json::parse(slurp(bad));
  CHECK(failed.at("pass") == false);
  CHECK(double(failed.at("max_abs_z")) > 5.0);
}

TEST_CASE("a scenario file feeds every subcommand") {
  const fs::path cfg_path = kDir / "scenario.cfg";
  qss::ScenarioConfig cfg;
  cfg.channel_efficiency = {0.9, 0.9, 0.9};
  qss::save_config(cfg, cfg_path.string());

  const fs::path p = kDir / "cfg_report.json";
  REQUIRE(run("report --config " + cfg_path.string() + " --out " + p.string()) == 0);
  const json doc = json::parse(slurp(p));
  CHECK(doc.at("scenario").at("channel_efficiency_1") == 0.9);
  const double f23 = doc.at("structures").at("23").at("fidelity");
  CHECK(f23 < 0.6952435317152016);  // lossy channels cost fidelity
}

TEST_CASE("failure exit codes distinguish the failure class") {
  CHECK(run("report --out " + (kDir / "x.json").string() + " --config /nonexistent.cfg") == 4);
  CHECK(run("report --out /nonexistent_dir/x.json") == 4);
  CHECK(run("report") == 2);                 // missing --out
  CHECK(run("report --bogus-flag") == 2);    // unknown option
  CHECK(run("sweep --steps 0 --out " + (kDir / "x.csv").string()) == 2);
  CHECK(run("sweep --steps 1 --out " + (kDir / "x.csv").string()) == 2);
  CHECK(run("tv --g-min 2 --g-max 1 --out " + (kDir / "x.csv").string()) == 2);
  CHECK(run("") == 2);                       // missing subcommand

  const fs::path bad_cfg = kDir / "bad.cfg";
  std::ofstream(bad_cfg) << "noise_var = -1\n";
  CHECK(run("report --config " + bad_cfg.string() + " --out " +
            (kDir / "x.json").string()) == 2);
}
