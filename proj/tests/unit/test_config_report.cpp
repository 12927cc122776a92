#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "roughop/config.hpp"
#include "roughop/errors.hpp"
#include "roughop/report.hpp"

using namespace roughop;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Report sample_report() {
  Report r;
  r.experiment = "factorize";
  r.model = "fbm";
  r.hurst = 0.25;
  r.grid_n = 64;
  r.seed = 42;
  r.config = Json{{"paths", 1000}};
  r.results.push_back(Json{{"residual", 0.1}});
  r.table.columns = {"grid_n", "residual", "se", "jitter"};
  r.table.add({std::int64_t{8}, 1.0 / 3.0, 0.001, false});
  r.check("ok", true, "fine");
  return r;
}

}  // namespace

TEST(Config, DefaultsMatchShippedFile) {
  EXPECT_EQ(Config::default_text(), read_file(ROUGHOP_DEFAULT_CONFIG_FILE));
  const auto loaded = Config::load(ROUGHOP_DEFAULT_CONFIG_FILE);
  EXPECT_EQ(loaded.entries(), Config::defaults().entries());
}

TEST(Config, ParseOverridesAndScopes) {
  const auto c = Config::parse("# comment\nhurst = 0.4\nremainder.grid_n = 256  # trailing\n");
  EXPECT_DOUBLE_EQ(c.get_double("hurst"), 0.4);
  EXPECT_EQ(c.get_size("grid_n", "remainder"), 256u);
  EXPECT_EQ(c.get_size("grid_n", "adjointness"), 32u);
  EXPECT_EQ(c.get_doubles("s_points"), (std::vector<double>{0.25, 0.5, 0.75}));
  EXPECT_EQ(c.get_sizes("grid_sweep"), (std::vector<std::size_t>{8, 16, 32, 64}));
  EXPECT_FALSE(c.get_bool("save_ensemble"));
}

TEST(Config, RejectsUnknownKeysScopesAndMalformedLines) {
  EXPECT_THROW(Config::parse("nonsense = 1\n"), ConfigError);
  EXPECT_THROW(Config::parse("nowhere.hurst = 0.3\n"), ConfigError);
  EXPECT_THROW(Config::parse("hurst 0.3\n"), ConfigError);
  EXPECT_THROW(Config::load("/nonexistent/roughop.cfg"), ConfigError);
  Config c = Config::defaults();
  EXPECT_THROW(c.apply_override("seed"), ConfigError);
  c.apply_override("hurst=abc");
  EXPECT_THROW(c.get_double("hurst"), ConfigError);
  c.apply_override("seed = 7");
  EXPECT_EQ(c.get_u64("seed"), 7u);
}

TEST(Config, ResolvedListsEveryPresentKey) {
  const auto c = Config::defaults();
  const auto r = c.resolved("remainder");
  bool saw_grid = false;
  for (const auto& [k, v] : r) {
    if (k == "grid_n") {
      saw_grid = true;
      EXPECT_EQ(v, "128");
    }
    EXPECT_NE(k, "times");
  }
  EXPECT_TRUE(saw_grid);
}

TEST(Report, DoublesUseSeventeenDigits) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(1.0 / 3.0), "0.33333333333333331");
  const std::string text = dump_json(Json{{"x", 0.1}});
  EXPECT_NE(text.find("0.10000000000000001"), std::string::npos);
  EXPECT_EQ(text.back(), '\n');
}

TEST(Report, JsonCarriesVersionAndOrder) {
  const auto r = sample_report();
  const Json j = to_json(r);
  EXPECT_EQ(j.begin().key(), "spec_version");
  EXPECT_EQ(j["spec_version"], kSpecVersion);
  EXPECT_EQ(j["passed"], true);
  EXPECT_TRUE(j.contains("provenance"));
  EXPECT_TRUE(j.contains("results"));
  EXPECT_EQ(report_stem(r), "factorize_fbm_0.25_64_42");
}

TEST(Report, CsvSchema) {
  const std::string csv = to_csv(sample_report().table);
  EXPECT_EQ(csv, "grid_n,residual,se,jitter\n8,0.33333333333333331,0.001,false\n");
}

TEST(Report, RewritesAreByteIdentical) {
  const auto dir = std::filesystem::temp_directory_path() / "roughop_report_test";
  std::filesystem::remove_all(dir);
  const auto r = sample_report();
  const auto first = write_report(r, dir);
  ASSERT_EQ(first.size(), 2u);
  const std::string json = read_file(first[0]), csv = read_file(first[1]);
  write_report(r, dir);
  EXPECT_EQ(read_file(first[0]), json);
  EXPECT_EQ(read_file(first[1]), csv);
  std::filesystem::remove_all(dir);
}

TEST(Report, UnwritableDirectoryRaisesIoError) {
  const auto file = std::filesystem::temp_directory_path() / "roughop_not_a_dir";
  std::ofstream(file) << "x";
  EXPECT_THROW(write_report(sample_report(), file / "sub"), IoError);
  std::filesystem::remove(file);
}

TEST(Report, FailedCheckFailsReport) {
  auto r = sample_report();
  EXPECT_TRUE(r.passed());
  r.check("bad", false);
  EXPECT_FALSE(r.passed());
  ASSERT_NE(r.find_check("bad"), nullptr);
  EXPECT_EQ(r.find_check("missing"), nullptr);
}
