#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "quarry/config.hpp"
#include "quarry/error.hpp"
#include "temp_dir.hpp"

using namespace quarry;
using namespace quarry::testing;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Config, ParsesEveryKey) {
  auto c = parse_config(R"(
# comment line
listen = 0.0.0.0:9000
data_dir = /srv/quarry   # trailing comment
lock_lease_seconds = 120
session_ttl_seconds = 3600
tombstone_retention_days = 7
recent_limit = 5
password_cost = minimum
table_detector = ruling-lines
ocr = none
meta_adapters = pdfinfo, layout
tick_band = 0.1
ruling_merge_pt = 2
row_gap_factor = 1.25
col_valley_factor = 0.75
axis_tolerance_pt = 0.25
junction_tolerance_pt = 3
)");
  EXPECT_EQ(c.listen, "0.0.0.0:9000");
  EXPECT_EQ(c.service.data_dir, "/srv/quarry");
  EXPECT_EQ(c.service.lock_lease, std::chrono::seconds(120));
  EXPECT_EQ(c.service.session_ttl, std::chrono::seconds(3600));
  EXPECT_EQ(c.service.tombstone_retention, std::chrono::hours(24 * 7));
  EXPECT_EQ(c.service.recent_limit, 5u);
  EXPECT_EQ(c.service.password_cost.ops_limit, auth::PasswordCost::minimum().ops_limit);
  EXPECT_FALSE(c.service.ocr);
  EXPECT_EQ(c.service.meta_adapters, (std::vector<std::string>{"pdfinfo", "layout"}));
  EXPECT_DOUBLE_EQ(c.service.tick_band, 0.1);
  EXPECT_DOUBLE_EQ(c.service.thresholds.ruling_merge_pt, 2);
  EXPECT_DOUBLE_EQ(c.service.thresholds.row_gap_factor, 1.25);
  EXPECT_DOUBLE_EQ(c.service.thresholds.col_valley_factor, 0.75);
  EXPECT_DOUBLE_EQ(c.service.thresholds.axis_tolerance_pt, 0.25);
  EXPECT_DOUBLE_EQ(c.service.thresholds.junction_tolerance_pt, 3);
}

TEST(Config, Rejections) {
  EXPECT_EQ(code_of([] { parse_config("colour = blue"); }), ErrorCode::BadConfig);
  EXPECT_EQ(code_of([] { parse_config("just words"); }), ErrorCode::BadConfig);
  EXPECT_EQ(code_of([] { parse_config("tick_band = wide"); }), ErrorCode::BadConfig);
  EXPECT_EQ(code_of([] { parse_config("lock_lease_seconds = 1.5"); }), ErrorCode::BadConfig);
  EXPECT_EQ(code_of([] { parse_config("password_cost = extreme"); }), ErrorCode::BadConfig);
  EXPECT_EQ(code_of([] { load_config("/nonexistent/quarry.conf"); }), ErrorCode::BadConfig);
}

TEST(Config, Validation) {
  TempDir dir;
  CliConfig ok;
  ok.service.data_dir = dir.str();
  EXPECT_NO_THROW(validate_config(ok));
  auto with = [&](const std::string& line) { return parse_config(line, ok); };
  for (const char* line : {"ruling_merge_pt = 0", "row_gap_factor = -1", "tick_band = 0", "tick_band = 0.6",
                           "lock_lease_seconds = 0", "table_detector = neural", "ocr = tesseract",
                           "meta_adapters = layout, grobid", "meta_adapters = ", "listen = nowhere",
                           "listen = host:99999", "data_dir = /nonexistent/dir"})
    EXPECT_EQ(code_of([&] { validate_config(with(line)); }), ErrorCode::BadConfig) << line;
}

TEST(Config, RenderParseRoundTrip) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> pos(0.01, 10);
  for (int i = 0; i < 200; ++i) {
    CliConfig c;
    c.listen = "127.0.0.1:" + std::to_string(rng() % 65536);
    c.service.data_dir = "/data/" + std::to_string(rng());
    c.service.lock_lease = std::chrono::seconds(1 + rng() % 1000);
    c.service.recent_limit = 1 + rng() % 50;
    c.service.tick_band = pos(rng) / 25;
    c.service.thresholds.row_gap_factor = pos(rng);
    c.service.thresholds.junction_tolerance_pt = pos(rng);
    c.service.ocr = rng() % 2 ? std::optional<std::string>("embedded-text") : std::nullopt;
    auto back = parse_config(render_config(c));
    EXPECT_EQ(render_config(back), render_config(c));
    EXPECT_DOUBLE_EQ(back.service.tick_band, c.service.tick_band);
    EXPECT_EQ(back.service.ocr, c.service.ocr);
    EXPECT_EQ(back.listen, c.listen);
  }
}

TEST(Config, LoadsFromFile) {
  TempDir dir;
  auto path = dir.path() / "quarry.conf";
  std::ofstream(path) << "data_dir = " << dir.str() << "\nrecent_limit = 3\n";
  auto c = load_config(path.string());
  EXPECT_EQ(c.service.recent_limit, 3u);
  EXPECT_NO_THROW(validate_config(c));
}
