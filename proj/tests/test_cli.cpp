#include <gtest/gtest.h>

#include <cmath>
#include <regex>
#include <sstream>

#include "pvangle/commands.hpp"
#include "pvangle/validation.hpp"

using namespace pvangle;
using namespace pvangle::cli;

namespace {

RunConfig small(const std::string& command) {
  RunConfig cfg;
  cfg.command = command;
  cfg.reps = 4;
  cfg.workers = 1;
  return cfg;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST(ParseTheta, Forms) {
  EXPECT_DOUBLE_EQ(parse_theta("pi"), pi);
  EXPECT_DOUBLE_EQ(parse_theta("pi/3"), pi / 3);
  EXPECT_DOUBLE_EQ(parse_theta("2pi/3"), 2 * pi / 3);
  EXPECT_DOUBLE_EQ(parse_theta("2*pi/3"), 2 * pi / 3);
  EXPECT_DOUBLE_EQ(parse_theta(" 0.5PI "), pi / 2);
  EXPECT_DOUBLE_EQ(parse_theta("1.25"), 1.25);
  EXPECT_THROW(parse_theta("pi/0"), ConfigError);
  EXPECT_THROW(parse_theta("pix"), ConfigError);
  EXPECT_THROW(parse_theta("abc"), ConfigError);
}

TEST(ConfigText, KeyValueLines) {
  const auto kv = parse_config_text("# comment\n lambda = 2 \n\ntheta=pi/2\ntheta = pi\n");
  ASSERT_EQ(kv.size(), 3u);
  RunConfig cfg;
  for (const auto& [k, v] : kv) apply_setting(cfg, k, v);
  EXPECT_EQ(cfg.lambda, 2.0);
  EXPECT_EQ(cfg.thetas, (std::vector<double>{pi / 2, pi}));
}

TEST(ConfigText, MalformedLine) {
  try {
    parse_config_text("lambda=1\nthis is not a setting\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(ConfigText, UnknownKeyAndBadValue) {
  RunConfig cfg;
  EXPECT_THROW(apply_setting(cfg, "colour", "blue"), ConfigError);
  EXPECT_THROW(apply_setting(cfg, "reps", "ten"), ConfigError);
  EXPECT_THROW(apply_setting(cfg, "lambda", "1x"), ConfigError);
  apply_setting(cfg, "panels", "1,3");
  EXPECT_EQ(cfg.panels, (std::vector<int>{1, 3}));
}

TEST(Validate, Rules) {
  RunConfig cfg;
  cfg.margin_factor = 2.5;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg.margin_factor = 3;
  EXPECT_NO_THROW(validate(cfg));
  cfg.dim = 4;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg.dim = 2;
  cfg.thetas = {two_pi};
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg.thetas = {};
  cfg.panels = {0};
  EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(Format, SeventeenDigits) {
  EXPECT_EQ(fmt(0.1), "0.10000000000000001");
  EXPECT_EQ(fmt(2.0), "2");
  EXPECT_EQ(std::stod(fmt(pi)), pi);
}

TEST(CmdPsi, FilesAndOracles) {
  auto cfg = small("psi");
  cfg.window = 20;
  cfg.thetas = {pi, pi / 3};
  const Files f = cmd_psi(cfg);
  ASSERT_TRUE(f.count("psi_points.csv"));
  EXPECT_EQ(first_line(f.at("psi_points.csv")), "rep,zx,zy,theta,ball_radius");
  const Json j = Json::parse(f.at("psi_report.json"));
  EXPECT_EQ(j["toolkit"], "pvangle");
  EXPECT_EQ(j["version"], toolkit_version);
  EXPECT_EQ(j["seed"], 42);
  EXPECT_EQ(j["config"]["command"], "psi");
  ASSERT_EQ(j["reports"].size(), 2u);
  EXPECT_DOUBLE_EQ(j["reports"][0]["oracle"]["value"].get<double>(), 2.0);
  EXPECT_NEAR(j["reports"][1]["oracle"]["value"].get<double>(), 0.5, 1e-15);
}

TEST(CmdPsi, RejectsSpace) {
  auto cfg = small("psi");
  cfg.dim = 3;
  EXPECT_THROW(cmd_psi(cfg), ConfigError);
}

TEST(CmdPsi, WindowTooSmallIsConfigError) {
  auto cfg = small("psi");
  cfg.window = 5;
  cfg.thetas = {pi / 6};
  EXPECT_THROW(cmd_psi(cfg), ConfigError);
}

TEST(CmdCrossings, PlanarFiles) {
  auto cfg = small("crossings");
  cfg.segment_length = 50;
  const Files f = cmd_crossings(cfg);
  EXPECT_EQ(first_line(f.at("crossings.csv")), "rep,x,theta_oriented,beta,r,R");
  const Json j = Json::parse(f.at("intensity_report.json"));
  EXPECT_NEAR(j["report"]["oracle"]["value"].get<double>(), 4 / pi, 1e-15);
  const Json g = Json::parse(f.at("angle_gof.json"));
  EXPECT_EQ(g["density"], "angle_density_2d");
}

TEST(CmdCrossings, SpatialFiles) {
  auto cfg = small("crossings");
  cfg.dim = 3;
  cfg.segment_length = 30;
  const Files f = cmd_crossings(cfg);
  const Json j = Json::parse(f.at("intensity_report.json"));
  EXPECT_NEAR(j["report"]["oracle"]["value"].get<double>(), 1.4552181487631458, 1e-13);
  EXPECT_EQ(Json::parse(f.at("angle_gof.json"))["density"], "folded_density_3d");
  // no oriented mark in space
  std::istringstream rows(f.at("crossings.csv"));
  std::string line;
  std::getline(rows, line);
  ASSERT_TRUE(std::getline(rows, line));
  EXPECT_NE(line.find(",,"), std::string::npos);
}

TEST(CmdCrossings, FloatsCarryFullPrecision) {
  auto cfg = small("crossings");
  cfg.segment_length = 20;
  const Files f = cmd_crossings(cfg);
  std::istringstream rows(f.at("crossings.csv"));
  std::string line;
  std::getline(rows, line);
  ASSERT_TRUE(std::getline(rows, line));
  std::stringstream cells(line);
  std::string rep, x;
  std::getline(cells, rep, ',');
  std::getline(cells, x, ',');
  const double v = std::stod(x);
  EXPECT_EQ(fmt(v), x);
}

TEST(CmdTypicalCell, PlanarReport) {
  auto cfg = small("typical-cell");
  cfg.window = 12;
  const Files f = cmd_typical_cell(cfg);
  EXPECT_EQ(first_line(f.at("typical_cell.csv")),
            "rep,theta,psi_count_ordered,psi_count_closed,midpoint_facets,total_facets,arc_length_total,xi_count");
  const Json j = Json::parse(f.at("typical_cell_report.json"));
  EXPECT_EQ(j["total_facets"]["oracle"]["value"], 6.0);
  EXPECT_EQ(j["psi_count_ordered"].size(), 2u);
}

TEST(CmdTypicalCell, SpatialReport) {
  auto cfg = small("typical-cell");
  cfg.dim = 3;
  cfg.window = 8;
  cfg.thetas = {pi / 2};
  const Json j = Json::parse(cmd_typical_cell(cfg).at("typical_cell_report.json"));
  EXPECT_EQ(j["xi_count"]["oracle"]["value"], 8.0);
  EXPECT_EQ(j["arc_factor_fits"].size(), 3u);
}

TEST(CmdPanelSwap, Oracles) {
  auto cfg = small("panel-swap");
  cfg.segment_length = 50;
  cfg.panels = {1, 2, 4};
  const Files f = cmd_panel_swap(cfg);
  EXPECT_EQ(first_line(f.at("panel_swap.csv")), "rep,chi,m,handovers,swaps");
  const Json j = Json::parse(f.at("panel_swap_report.json"));
  ASSERT_EQ(j["reports"].size(), 3u);
  EXPECT_NEAR(j["reports"][0]["oracle"]["value"].get<double>(), 0.63662, 5e-6);
  EXPECT_NEAR(j["reports"][1]["oracle"]["value"].get<double>(), 0.90032, 5e-6);
  EXPECT_NEAR(j["reports"][2]["oracle"]["value"].get<double>(), 0.9935868511442058, 1e-14);
}

TEST(Outputs, IdenticalAcrossRunsAndWorkers) {
  for (const std::string cmd : {"psi", "crossings", "typical-cell", "panel-swap"}) {
    auto a = small(cmd);
    a.window = cmd == "psi" ? 20 : 10;
    a.segment_length = 30;
    a.reps = 6;
    auto b = a;
    b.workers = 4;
    b.out = "/elsewhere";
    auto run = [&](const RunConfig& c) {
      if (cmd == "psi") return cmd_psi(c);
      if (cmd == "crossings") return cmd_crossings(c);
      if (cmd == "typical-cell") return cmd_typical_cell(c);
      return cmd_panel_swap(c);
    };
    const Files fa = run(a), fa2 = run(a), fb = run(b);
    EXPECT_EQ(fa, fa2) << cmd;
    EXPECT_EQ(fa, fb) << cmd;
  }
}

TEST(CmdValidate, OracleCriterionPasses) {
  RunConfig cfg;
  cfg.criteria = {11};
  const auto out = cmd_validate(cfg);
  ASSERT_EQ(out.results.size(), 1u);
  EXPECT_TRUE(out.all_pass);
  const Json j = Json::parse(out.files.at("validation_report.json"));
  EXPECT_EQ(j["all_pass"], true);
  EXPECT_TRUE(std::regex_search(criterion_line(out.results[0]), std::regex("^criterion 11: PASS")));
}

TEST(CmdValidate, WrongOracleFails) {
  RunConfig cfg;
  cfg.criteria = {11};
  cfg.inject_wrong_oracle = true;
  const auto out = cmd_validate(cfg);
  EXPECT_FALSE(out.all_pass);
  EXPECT_TRUE(std::regex_search(criterion_line(out.results[0]), std::regex("^criterion 11: FAIL")));
}

TEST(CmdValidate, UnknownCriterion) {
  RunConfig cfg;
  cfg.criteria = {13};
  EXPECT_THROW(cmd_validate(cfg), ConfigError);
}
