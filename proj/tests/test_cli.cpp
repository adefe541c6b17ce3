#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mesugaki/cli/commands.hpp"

using namespace mesugaki;
using namespace mesugaki::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string config_path(const std::string& name) {
  return std::string(MESUGAKI_CONFIG_DIR) + "/" + name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("mesugaki_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string field_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

json minimal() { return json{{"process", {{"type", "poisson"}, {"rate", 2.0}}}}; }

}  // namespace

TEST(Config, RoundTripIsStable) {
  for (const char* name : {"poisson.json", "hawkes.json", "cox.json", "converge_uniform.json",
                           "power_sweep.json", "ito_gbm.json", "ito_pure_jump.json",
                           "birth_death.json", "broken_compensator.json"}) {
    const auto c = load_config(config_path(name));
    const auto once = to_json(c);
    EXPECT_EQ(to_json(parse_config(once)), once) << name;
  }
}

TEST(Config, Defaults) {
  const auto c = parse_config(minimal());
  EXPECT_EQ(c.seed, kDefaultSeed);
  EXPECT_EQ(c.seed, 20240229u);
  EXPECT_EQ(c.grid_depth, 6);
  EXPECT_EQ(c.horizon, 1.0);
}

TEST(Config, UnknownKeyNamesField) {
  auto doc = minimal();
  doc["horizn"] = 2.0;
  EXPECT_EQ(field_of(doc), "horizn");
  auto inner = minimal();
  inner["process"]["ratee"] = 1.0;
  EXPECT_EQ(field_of(inner), "process.ratee");
}

TEST(Config, InvalidValuesNameField) {
  auto doc = minimal();
  doc["process"]["rate"] = -1.0;
  EXPECT_EQ(field_of(doc), "process.rate");
  doc = minimal();
  doc["grid_depth"] = 1;
  EXPECT_EQ(field_of(doc), "grid_depth");
  doc = minimal();
  doc["horizon"] = 0.0;
  EXPECT_EQ(field_of(doc), "horizon");
  doc = minimal();
  doc["paths"] = "many";
  EXPECT_EQ(field_of(doc), "paths");
  doc["paths"] = -5;
  EXPECT_EQ(field_of(doc), "paths");
  doc["paths"] = 5;
  EXPECT_EQ(field_of(doc), "");
}

TEST(Config, UnstableHawkesMessage) {
  json doc{{"process", {{"type", "hawkes"}, {"base", 1.0}, {"alpha", 2.0}, {"beta", 2.0}}}};
  try {
    parse_config(doc);
    FAIL() << "accepted an unstable kernel";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("hawkes kernel is not stable"), std::string::npos);
  }
}

TEST(Config, EmptyIsUsageError) {
  EXPECT_EQ(field_of(json::object()), "process");
  EXPECT_EQ(field_of(json::array()), "config");
  const auto dir = scratch("empty");
  std::ofstream(dir / "empty.json") << "";
  EXPECT_THROW(load_config((dir / "empty.json").string()), ConfigError);
  EXPECT_THROW(load_config((dir / "missing.json").string()), ConfigError);
}

TEST(Commands, SimulateDeterministicAcrossThreads) {
  auto c = load_config(config_path("hawkes.json"));
  c.paths = 300;
  const auto a = scratch("det_a"), b = scratch("det_b");
  EXPECT_EQ(cmd_simulate({c, a, 1}), 0);
  EXPECT_EQ(cmd_simulate({c, b, 5}), 0);
  for (const char* f : {"paths.csv", "summary.json"}) {
    const auto x = slurp(a / f);
    EXPECT_FALSE(x.empty());
    EXPECT_EQ(x, slurp(b / f)) << f;
  }
}

TEST(Commands, ValidateDeterministicAcrossThreads) {
  auto c = load_config(config_path("poisson.json"));
  c.paths = 400;
  const auto a = scratch("val_a"), b = scratch("val_b");
  EXPECT_EQ(cmd_validate({c, a, 1}), 0);
  EXPECT_EQ(cmd_validate({c, b, 3}), 0);
  EXPECT_EQ(slurp(a / "validate.json"), slurp(b / "validate.json"));
}

TEST(Commands, ValidateBrokenFixtureFails) {
  auto c = load_config(config_path("broken_compensator.json"));
  EXPECT_EQ(cmd_validate({c, scratch("broken"), 2}), 1);
}

TEST(Commands, ConvergePointMassHasZeroDifferences) {
  auto c = parse_config(json{{"process",
                              {{"type", "compound_poisson"},
                               {"rate", 2.0},
                               {"marks", {{"type", "point_mass"}, {"z", 1.0}}}}},
                             {"paths", 200},
                             {"grid_depth", 4}});
  const auto dir = scratch("pm");
  EXPECT_EQ(cmd_converge({c, dir, 2}), 0);
  const auto j = json::parse(slurp(dir / "convergence.json"));
  for (const auto& p : j["convergence"]["pairs"]) EXPECT_EQ(p["empirical_l2"], 0.0);
  EXPECT_TRUE(j["pass"].get<bool>());
}

TEST(Commands, ConvergeRejectsStateProcess) {
  auto c = load_config(config_path("birth_death.json"));
  EXPECT_THROW(cmd_converge({c, scratch("bd"), 1}), ConfigError);
}

TEST(Commands, ItoPureJumpPasses) {
  auto c = load_config(config_path("ito_pure_jump.json"));
  c.paths = 100;
  const auto dir = scratch("ito");
  EXPECT_EQ(cmd_ito_check({c, dir, 2}), 0);
  const auto j = json::parse(slurp(dir / "ito.json"));
  EXPECT_TRUE(j["pass"].get<bool>());
}
