#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "tsmiss/ingest.h"

namespace tsmiss {
namespace {

std::vector<EventRecord> events_from(const std::string& text) {
  std::istringstream in(text);
  return parse_events(in);
}

TEST(ParseEvents, MapsFields) {
  auto ev = events_from("s1,st1,hr,3.5,88\n");
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0], (EventRecord{"s1", "st1", Variable::kHr, 3.5, 88.0}));
}

TEST(ParseEvents, HeaderAndBlankLinesSkipped) {
  auto ev = events_from(events_csv_header() + "\n\ns1,st1,bp_dia,0,60\r\n\n");
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].variable, Variable::kBpDia);
}

TEST(ParseEvents, EmptyInput) {
  EXPECT_TRUE(events_from("").empty());
  std::istringstream in("");
  EXPECT_TRUE(parse_stays(in).empty());
}

TEST(ParseEvents, UnknownVariableNamesLineAndColumn) {
  try {
    events_from("s1,st1,hr,1,80\ns1,st1,pulse,3.5,88\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 3u);
    EXPECT_NE(std::string(e.what()).find("unknown variable"), std::string::npos);
  }
}

TEST(ParseEvents, MalformedRows) {
  auto column_of = [](const std::string& text) -> std::size_t {
    try {
      events_from(text);
    } catch (const ParseError& e) {
      return e.column();
    }
    return 0;
  };
  EXPECT_EQ(column_of("s1,st1,hr,abc,80\n"), 4u);
  EXPECT_EQ(column_of("s1,st1,hr,1,80x\n"), 5u);
  EXPECT_EQ(column_of("s1,st1,hr,-1,80\n"), 4u);
  EXPECT_EQ(column_of("s1,st1,hr,1,nan\n"), 5u);
  EXPECT_EQ(column_of(",st1,hr,1,80\n"), 1u);
  EXPECT_NE(column_of("s1,st1,hr,1\n"), 0u);
  EXPECT_NE(column_of("subject_id,stay,variable\n"), 0u);
}

TEST(ParseStays, DerivesLabelFromThreshold) {
  std::istringstream in(stays_csv_header() + "\na,1,2.0,64.9\nb,2,2.0,65\nc,3,2.0,80\n");
  auto stays = parse_stays(in);
  ASSERT_EQ(stays.size(), 3u);
  EXPECT_EQ(stays[0].label, 0);
  EXPECT_EQ(stays[1].label, 1);
  EXPECT_EQ(stays[2].label, 1);

  std::istringstream again("a,1,2.0,64.9\nc,3,2.0,80\n");
  auto custom = parse_stays(again, 70.0);
  EXPECT_EQ(custom[0].label, 0);
  EXPECT_EQ(custom[1].label, 1);
}

TEST(ParseStays, RejectsNonPositiveStayLength) {
  std::istringstream in("a,1,0,50\n");
  EXPECT_THROW(parse_stays(in), ParseError);
}

TEST(FilterCohort, InclusiveBounds) {
  std::vector<StayMeta> stays = {
      {"a", "1", 0.5, 50, 0}, {"a", "2", 3.0, 50, 0}, {"b", "3", 1.0, 70, 1},
      {"c", "4", 5.0, 70, 1}, {"d", "5", 5.01, 70, 1}};
  auto kept = filter_cohort(stays);
  ASSERT_EQ(kept.size(), 3u);
  EXPECT_EQ(kept[0].stay_id, "2");
  EXPECT_EQ(kept[1].stay_id, "3");
  EXPECT_EQ(kept[2].stay_id, "4");
}

TEST(FilterCohort, SubsetAndOrderPreserving) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> days(0.0, 7.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<StayMeta> stays;
    for (int i = 0; i < 40; ++i) {
      stays.push_back({"s", std::to_string(i), days(rng), 50, 0});
    }
    auto kept = filter_cohort(stays);
    auto it = stays.begin();
    for (const auto& k : kept) {
      it = std::find(it, stays.end(), k);
      ASSERT_NE(it, stays.end());
      ++it;
    }
  }
}

TEST(ClampValue, Ranges) {
  EXPECT_EQ(clamp_value(Variable::kBpSys, 450), 400);
  EXPECT_EQ(clamp_value(Variable::kBpSys, -3), 0);
  EXPECT_EQ(clamp_value(Variable::kHr, 80), 80);
  EXPECT_EQ(clamp_value(Variable::kSpo2, 101), 100);
  EXPECT_THROW(clamp_value(Variable::kHr, std::numeric_limits<double>::infinity()),
               DataError);

  ClampRanges custom;
  custom.ranges[index_of(Variable::kHr)] = {30, 200};
  EXPECT_EQ(clamp_value(Variable::kHr, 10, custom), 30);
}

TEST(ClampValue, Idempotent) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> v(-1000, 1000);
  for (int i = 0; i < 2000; ++i) {
    for (Variable var : kAllVariables) {
      const double once = clamp_value(var, v(rng));
      EXPECT_EQ(clamp_value(var, once), once);
    }
  }
}

TEST(GridSeries, MeanOfBucket) {
  std::vector<EventRecord> ev = {{"s", "st", Variable::kHr, 0.2, 80},
                                 {"s", "st", Variable::kHr, 0.7, 84}};
  auto g = grid_series(ev);
  ASSERT_TRUE(g.slots[0].has_value());
  EXPECT_DOUBLE_EQ(*g.slots[0], 82.0);
  for (std::size_t t = 1; t < kNumSlots; ++t) EXPECT_FALSE(g.slots[t]);
}

TEST(GridSeries, SingletonAndEmpty) {
  std::vector<EventRecord> ev = {{"s", "st", Variable::kRr, 5.5, 90}};
  auto g = grid_series(ev);
  for (std::size_t t = 0; t < kNumSlots; ++t) {
    if (t == 5) EXPECT_EQ(g.slots[t], 90.0);
    else EXPECT_FALSE(g.slots[t]);
  }
  auto empty = grid_series(std::vector<EventRecord>{});
  EXPECT_TRUE(std::none_of(empty.slots.begin(), empty.slots.end(),
                           [](const auto& s) { return s.has_value(); }));
}

TEST(GridSeries, IgnoresEventsAfterDayOne) {
  std::vector<EventRecord> ev = {{"s", "st", Variable::kHr, 23.99, 70},
                                 {"s", "st", Variable::kHr, 24.0, 200}};
  auto g = grid_series(ev);
  EXPECT_EQ(g.slots[23], 70.0);
}

TEST(GridSeries, RejectsMixedSeries) {
  std::vector<EventRecord> ev = {{"s", "st", Variable::kHr, 1, 70},
                                 {"s", "st", Variable::kRr, 2, 12}};
  EXPECT_THROW(grid_series(ev), DataError);
}

TEST(GridSeries, ClampedAndPermutationInvariant) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> hours(0.0, 30.0);
  std::uniform_real_distribution<double> value(-100.0, 600.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<EventRecord> ev;
    for (int i = 0; i < 60; ++i) {
      ev.push_back({"s", "st", Variable::kBpSys, hours(rng), value(rng)});
    }
    const auto g = grid_series(ev);
    for (const auto& slot : g.slots) {
      if (slot) {
        EXPECT_GE(*slot, 0.0);
        EXPECT_LE(*slot, 400.0);
      }
    }
    std::shuffle(ev.begin(), ev.end(), rng);
    const auto shuffled = grid_series(ev);
    EXPECT_EQ(g.slots, shuffled.slots);
  }
}

TEST(LoSeqHours, SpansWholeStay) {
  std::vector<EventRecord> ev = {{"s", "st", Variable::kHr, 0.5, 70},
                                 {"s", "st", Variable::kHr, 30.2, 70}};
  EXPECT_EQ(lo_seq_hours(ev), 31.0);
  EXPECT_EQ(lo_seq_hours(std::vector<EventRecord>{}), 0.0);
}

TEST(AssembleStays, JoinsAndFilters) {
  std::vector<EventRecord> ev = {{"a", "1", Variable::kHr, 0.5, 70},
                                 {"a", "1", Variable::kSpo2, 2.5, 97},
                                 {"a", "1", Variable::kHr, 40.0, 71},
                                 {"b", "2", Variable::kHr, 1.0, 90}};
  std::vector<StayMeta> meta = {{"a", "1", 2.0, 70, 1}, {"b", "2", 0.5, 40, 0}};
  auto stays = assemble_stays(ev, meta);
  ASSERT_EQ(stays.size(), 1u);
  const auto& s = stays[0];
  EXPECT_EQ(s.n_records, 3u);
  EXPECT_EQ(s.lo_seq_hours, 41.0);
  EXPECT_EQ(s.grids[index_of(Variable::kHr)].slots[0], 70.0);
  EXPECT_EQ(s.grids[index_of(Variable::kSpo2)].slots[2], 97.0);
  for (Variable v : kAllVariables) {
    EXPECT_EQ(s.grids[index_of(v)].variable, v);
    EXPECT_EQ(s.grids[index_of(v)].stay_id, "1");
  }
}

TEST(AssembleStays, Errors) {
  std::vector<StayMeta> dup = {{"a", "1", 2.0, 70, 1}, {"b", "1", 2.0, 40, 0}};
  EXPECT_THROW(assemble_stays({}, dup), DataError);

  std::vector<StayMeta> meta = {{"a", "1", 2.0, 70, 1}};
  std::vector<EventRecord> wrong = {{"z", "1", Variable::kHr, 1, 80}};
  EXPECT_THROW(assemble_stays(wrong, meta), DataError);
}

}  // namespace
}  // namespace tsmiss
