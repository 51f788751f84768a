#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "jcqed/config.hpp"
#include "jcqed/io.hpp"

using namespace jcqed;

TEST(Config, ParsesKeyValueText) {
  const auto kv = parse_key_values("# comment\n task = g2 \n\ng_over_kappa=8 # trailing\n");
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv.at("task"), "g2");
  EXPECT_EQ(kv.at("g_over_kappa"), "8");
  EXPECT_THROW(parse_key_values("no equals sign"), DomainError);
  EXPECT_THROW(parse_overrides({"=3"}), DomainError);
}

TEST(Config, PrecedencePresetFileCli) {
  const KeyValues file{{"preset", "fig3-inset"}, {"n_max", "12"}, {"rtol", "1e-9"}};
  const KeyValues cli{{"n_max", "14"}};
  const ScenarioConfig c = resolve_config(file, cli);
  EXPECT_EQ(c.task, "wtd");
  EXPECT_DOUBLE_EQ(c.g_over_kappa, 8.0);
  EXPECT_DOUBLE_EQ(c.gamma_over_2kappa, 0.5);
  EXPECT_EQ(c.n_max, 14);
  EXPECT_DOUBLE_EQ(c.rtol, 1e-9);
}

TEST(Config, PresetsExpandDeterministically) {
  for (const auto& name : preset_names()) {
    const auto a = find_preset(name);
    const auto b = find_preset(name);
    EXPECT_EQ(a.params().drive, b.params().drive);
    EXPECT_EQ(a.task, b.task);
  }
  const auto f4 = find_preset("fig4", "II-c");
  EXPECT_NEAR(f4.params().drive_abs(), 10.0, 1e-12);
  EXPECT_NEAR(f4.gamma_over_2kappa, 5.0 / 3.0, 1e-15);
  EXPECT_TRUE(find_preset("fig4", "I-a").gamma_surrogate);
  EXPECT_EQ(find_preset("fig4").panel, "I-b");
  EXPECT_THROW(find_preset("fig9"), DomainError);
  EXPECT_THROW(find_preset("fig4", "III-a"), DomainError);
  EXPECT_THROW(find_preset("fig2a", "I-a"), DomainError);
}

TEST(Config, RejectsInvalidSettings) {
  EXPECT_THROW(resolve_config({}, {{"task", "fly"}}), DomainError);
  EXPECT_THROW(resolve_config({}, {{"bogus", "1"}}), DomainError);
  EXPECT_THROW(resolve_config({}, {{"n_max", "2.5"}}), DomainError);
  EXPECT_THROW(resolve_config({}, {{"g_over_kappa", "-3"}}), DomainError);
  EXPECT_THROW(resolve_config({}, {{"channel", "up"}}), DomainError);
  EXPECT_THROW(resolve_config({}, {{"rtol", "0.5"}}), DomainError);
  EXPECT_THROW(resolve_config({}, {{"strict", "maybe"}}), DomainError);
}

TEST(Config, JsonMetadataRoundTrips) {
  const ScenarioConfig c = resolve_config({{"preset", "fig4"}, {"panel", "II-d"}}, {{"q_points", "51"}, {"rtol", "3e-9"}});
  const auto dir = std::filesystem::temp_directory_path() / "jcqed_test_config";
  std::filesystem::create_directories(dir);
  write_json(dir / "meta.json", run_metadata(c));
  const ScenarioConfig back = resolve_config(load_config_file((dir / "meta.json").string()), {});
  EXPECT_EQ(back.to_key_values(), c.to_key_values());
  std::ofstream(dir / "flat.cfg") << "preset = fig2d\ntask = g1\n";
  const ScenarioConfig flat = resolve_config(load_config_file((dir / "flat.cfg").string()), {});
  EXPECT_EQ(flat.task, "g1");
  EXPECT_DOUBLE_EQ(flat.drive_over_g, 0.25);
  EXPECT_THROW(load_config_file((dir / "missing.cfg").string()), DomainError);
}

TEST(Io, CsvIsVersionedAndFullPrecision) {
  CsvTable t{"g1", {"tau", "v"}, {}};
  t.add({0.1, 1.0 / 3.0});
  const std::string s = format_csv(t);
  EXPECT_EQ(s.rfind("# jcqed g1 csv v1\ntau,v\n", 0), 0u);
  EXPECT_NE(s.find("0.33333333333333331"), std::string::npos);
  EXPECT_THROW(t.add({1.0}), DomainError);
  EXPECT_EQ(format_csv(t), s);
}
