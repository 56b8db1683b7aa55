#include <gtest/gtest.h>

#include <map>
#include <set>
#include <numeric>
#include <sstream>

#include "engrank/csv.hpp"
#include "engrank/rng.hpp"
#include "engrank/timeutil.hpp"

using namespace engrank;

namespace {

// Zeller's congruence; returns 0 = Monday .. 6 = Sunday.
int zeller_weekday(int y, int m, int d) {
  if (m < 3) {
    m += 12;
    y -= 1;
  }
  const int k = y % 100, j = y / 100;
  const int h = (d + 13 * (m + 1) / 5 + k + k / 4 + j / 4 + 5 * j) % 7;  // 0 = Saturday
  return (h + 5) % 7;
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

}  // namespace

TEST(Time, ParsesCanonicalForms) {
  EXPECT_EQ(parse_iso8601("1970-01-01T00:00:00Z"), 0);
  EXPECT_EQ(parse_iso8601("1970-01-02"), 86400);
  EXPECT_EQ(parse_iso8601("2014-07-28T13:05Z"), parse_iso8601("2014-07-28 13:05:00"));
  EXPECT_EQ(parse_iso8601("2014-07-28T13:05:00+00:00"), parse_iso8601("2014-07-28T13:05:00Z"));
  EXPECT_FALSE(parse_iso8601("2014-13-01"));
  EXPECT_FALSE(parse_iso8601("2014-02-30"));
  EXPECT_FALSE(parse_iso8601("yesterday"));
  EXPECT_FALSE(parse_iso8601(""));
}

TEST(Time, FormatRoundTrips) {
  for (Timestamp t : {Timestamp{0}, Timestamp{951782400}, Timestamp{1406552700}, Timestamp{4102444799}}) {
    EXPECT_EQ(parse_iso8601(format_iso8601(t)), t) << t;
  }
  EXPECT_EQ(format_iso8601(1406552700), "2014-07-28T13:05:00Z");
  EXPECT_EQ(format_date(1406552700), "2014-07-28");
}

TEST(Time, CivilFieldsMatchZeller) {
  // Walk every day from 1995 to 2030 and compare with an independent
  // calendar computation.
  Timestamp t = *parse_iso8601("1995-01-01T17:30:00Z");
  for (int y = 1995; y <= 2030; ++y) {
    static const int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    for (int m = 1; m <= 12; ++m) {
      const int days = lengths[m - 1] + (m == 2 && is_leap(y) ? 1 : 0);
      for (int d = 1; d <= days; ++d) {
        const CivilTime c = to_civil(t);
        ASSERT_EQ(c.year, y);
        ASSERT_EQ(c.month, static_cast<unsigned>(m));
        ASSERT_EQ(c.day, static_cast<unsigned>(d));
        ASSERT_EQ(c.hour, 17);
        ASSERT_EQ(c.minute, 30);
        ASSERT_EQ(c.weekday, zeller_weekday(y, m, d)) << y << "-" << m << "-" << d;
        t += kSecondsPerDay;
      }
    }
  }
}

TEST(Time, KnownWeekday) {
  const CivilTime c = to_civil(*parse_iso8601("2014-07-28T13:05Z"));
  EXPECT_EQ(c.weekday, 0);
  EXPECT_EQ(c.hour, 13);
}

TEST(Csv, SplitsQuotedFields) {
  EXPECT_EQ(csv::split_record("a,b,c"), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(csv::split_record("a,\"b,c\",d"), (std::vector<std::string>{"a", "b,c", "d"}));
  EXPECT_EQ(csv::split_record("\"he said \"\"hi\"\"\",x"),
            (std::vector<std::string>{"he said \"hi\"", "x"}));
  EXPECT_EQ(csv::split_record("a,,"), (std::vector<std::string>{"a", "", ""}));
}

TEST(Csv, EscapeRoundTrips) {
  for (std::string s : {"plain", "with,comma", "with \"quote\"", " padded "}) {
    const auto fields = csv::split_record(csv::escape_field(s) + ",z");
    ASSERT_EQ(fields.size(), 2u);
    EXPECT_EQ(fields[0], s);
  }
  EXPECT_EQ(csv::escape_field("plain"), "plain");
}

TEST(Csv, ReaderSkipsBomBlankLinesAndCarriageReturns) {
  std::istringstream in("\xEF\xBB\xBFh1,h2\r\n\r\n1,2\r\n3,4\n");
  csv::Reader r(in);
  EXPECT_EQ(*r.next(), (std::vector<std::string>{"h1", "h2"}));
  EXPECT_EQ(r.line_no(), 1u);
  EXPECT_EQ(*r.next(), (std::vector<std::string>{"1", "2"}));
  EXPECT_EQ(r.line_no(), 3u);
  EXPECT_EQ(*r.next(), (std::vector<std::string>{"3", "4"}));
  EXPECT_FALSE(r.next());
}

TEST(Rng, SameSeedSameStream) {
  Rng a(7), b(7), c(8);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs |= x != c.next();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, DerivedSeedsAreDistinct) {
  std::set<Seed> seen;
  for (const char* name : {"split", "folds", "train", "weights", "synth"}) {
    EXPECT_TRUE(seen.insert(derive_seed(1, name)).second);
  }
  for (std::uint64_t i = 0; i < 100; ++i) EXPECT_TRUE(seen.insert(derive_seed(1, i)).second);
  EXPECT_NE(derive_seed(1, "a"), derive_seed(2, "a"));
}

TEST(Rng, IndexIsUniformAndInRange) {
  Rng rng(3);
  std::map<std::uint64_t, int> counts;
  const int n = 60000;
  for (int i = 0; i < n; ++i) {
    const auto v = rng.index(6);
    ASSERT_LT(v, 6u);
    ++counts[v];
  }
  for (const auto& [v, c] : counts) EXPECT_NEAR(c, n / 6.0, 0.05 * n / 6.0);
}

TEST(Rng, MomentsOfContinuousDraws) {
  Rng rng(11);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0, se = 0;
  for (int i = 0; i < n; ++i) {
    su += rng.uniform();
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
    se += rng.exponential();
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.01);
  EXPECT_NEAR(se / n, 1.0, 0.01);
}

TEST(Rng, PoissonMean) {
  Rng rng(5);
  for (double rate : {0.0, 0.5, 4.0, 50.0}) {
    double s = 0;
    const int n = 50000;
    for (int i = 0; i < n; ++i) {
      const auto k = rng.poisson(rate);
      ASSERT_GE(k, 0);
      s += static_cast<double>(k);
    }
    EXPECT_NEAR(s / n, rate, 0.02 * std::max(rate, 1.0)) << rate;
  }
}

TEST(Rng, ShuffleIsAPermutation) {
  Rng rng(9);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto w = v;
  rng.shuffle(w);
  EXPECT_NE(v, w);
  std::sort(w.begin(), w.end());
  EXPECT_EQ(v, w);
}
