#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "ecotrade/rules_file.hpp"

using namespace ecotrade;

namespace {

Error error_of(std::string_view text) {
  try {
    parse_rules_text(text);
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "parsed: " << text;
  return Error(ErrorCode::IoFailure);
}

}  // namespace

TEST(RulesFile, EmptyGivesDefaults) {
  EXPECT_EQ(parse_rules_text(""), GameRules{});
  EXPECT_EQ(parse_rules_text("# only a comment\n\n   \n"), GameRules{});
}

TEST(RulesFile, ParsesEveryKind) {
  const GameRules r = parse_rules_text(
      "width = 12  # wide\n"
      "height=8\n"
      "neighborhood = VonNeumann4\n"
      "base_credit_range = 2, 8\n"
      "allocation_mode = Interleaved\r\n"
      "landscape_seed = 18446744073709551615\n");
  EXPECT_EQ(r.width, 12);
  EXPECT_EQ(r.height, 8);
  EXPECT_EQ(r.neighborhood, Neighborhood::VonNeumann4);
  EXPECT_EQ(r.base_credit_range, (ValueRange{2, 8}));
  EXPECT_EQ(r.allocation_mode, AllocationMode::Interleaved);
  EXPECT_EQ(r.landscape_seed, std::numeric_limits<std::uint64_t>::max());
}

TEST(RulesFile, Errors) {
  Error e = error_of("widht = 3\n");
  EXPECT_EQ(e.code(), ErrorCode::UnknownKey);
  EXPECT_EQ(e.field(), "widht");

  e = error_of("width = three\n");
  EXPECT_EQ(e.code(), ErrorCode::BadValue);
  EXPECT_EQ(e.field(), "width");

  e = error_of("width = 3\nwidth = 4\n");
  EXPECT_EQ(e.code(), ErrorCode::BadValue);
  EXPECT_EQ(e.field(), "width");

  e = error_of("neighborhood = Hex6\n");
  EXPECT_EQ(e.field(), "neighborhood");

  e = error_of("base_credit_range = 5\n");
  EXPECT_EQ(e.field(), "base_credit_range");

  e = error_of("agri_revenue_range = 9,2\n");
  EXPECT_EQ(e.code(), ErrorCode::BadValue);
  EXPECT_EQ(e.field(), "agri_revenue_range");

  e = error_of("width = 0\n");
  EXPECT_EQ(e.code(), ErrorCode::BadValue);
  EXPECT_EQ(e.field(), "width");

  e = error_of("width = 3.5\n");
  EXPECT_EQ(e.field(), "width");

  EXPECT_EQ(error_of("just words\n").code(), ErrorCode::BadValue);
  EXPECT_EQ(error_of("landscape_seed = -1\n").field(), "landscape_seed");
}

TEST(RulesFile, RoundTripsRandomValidRules) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 500; ++i) {
    GameRules r;
    r.width = 1 + static_cast<std::int64_t>(rng() % 100);
    r.height = 1 + static_cast<std::int64_t>(rng() % 100);
    r.neighborhood = rng() % 2 ? Neighborhood::Moore8 : Neighborhood::VonNeumann4;
    r.bonus_weight = static_cast<std::int64_t>(rng() % 50);
    r.obligation = static_cast<std::int64_t>(rng() % 500);
    r.penalty_rate = static_cast<std::int64_t>(rng() % 20);
    r.tick_seconds = 1 + static_cast<std::int64_t>(rng() % 60);
    r.total_ticks = 1 + static_cast<std::int64_t>(rng() % 500);
    const auto lo = static_cast<std::int64_t>(rng() % 10);
    r.base_credit_range = {lo, lo + static_cast<std::int64_t>(rng() % 10)};
    r.agri_revenue_range = {lo, lo + static_cast<std::int64_t>(rng() % 30)};
    r.initial_cash = static_cast<std::int64_t>(rng() % 10000);
    r.allocation_mode = rng() % 2 ? AllocationMode::Blocks : AllocationMode::Interleaved;
    r.landscape_seed = rng();
    ASSERT_EQ(parse_rules_text(write_rules_text(r)), r) << write_rules_text(r);
  }
}

TEST(RulesFile, HelpListsExactlyTheRuleFields) {
  // Written out by hand from the GameRules struct.
  const std::set<std::string> fields{"width",        "height",           "neighborhood",     "bonus_weight",
                                     "obligation",   "penalty_rate",     "tick_seconds",     "total_ticks",
                                     "base_credit_range", "agri_revenue_range", "initial_cash",
                                     "allocation_mode", "landscape_seed"};
  const auto keys = rule_keys();
  EXPECT_EQ(std::set<std::string>(keys.begin(), keys.end()), fields);
  EXPECT_EQ(keys.size(), fields.size());
  const std::string help = rules_help();
  for (const std::string& f : fields) {
    const auto at = help.find("  " + f + " ");
    ASSERT_NE(at, std::string::npos) << f;
    EXPECT_NE(help.find("default:", at), std::string::npos);
  }
  EXPECT_NE(help.find("default: Moore8"), std::string::npos);
  EXPECT_NE(help.find("default: 1,6"), std::string::npos);
}

TEST(RulesFile, ReadsFromDiskAndReportsUnreadable) {
  const auto path = std::filesystem::temp_directory_path() / "ecotrade_rules_test.txt";
  {
    std::ofstream f(path);
    f << "width = 7\n";
  }
  EXPECT_EQ(parse_rules_file(path).width, 7);
  std::filesystem::remove(path);
  try {
    parse_rules_file(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Unreadable);
  }
}
