#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace sgrs;

namespace {

std::vector<std::string>
lines(const std::string& text)
{
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) {
    out.push_back(l);
  }
  return out;
}

std::string
first_columns(const std::string& line, int n)
{
  std::string out;
  int tabs = 0;
  for (char c : line) {
    if (c == '\t' && ++tabs == n) {
      break;
    }
    out += c;
  }
  return out;
}

const SizeModel sizes{ 4, 32 };

} // namespace

TEST(CostTable, MatchesCheckedInTranscription)
{
  std::ifstream in(SGRS_TEST_DATA "/cost_table.tsv");
  ASSERT_TRUE(in.good());
  std::stringstream text;
  text << in.rdbuf();
  const auto want = lines(text.str());
  const auto got = lines(render_cost_table());
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); i++) {
    EXPECT_EQ(first_columns(got[i], 5), want[i]) << "row " << i;
  }
}

TEST(CostTable, SuspectCellsAreFlagged)
{
  EXPECT_TRUE(formula(Scheme::Sgrs, Protocol::Merge).as_printed);
  EXPECT_TRUE(formula(Scheme::Kim, Protocol::Partition).as_printed);
  EXPECT_TRUE(formula(Scheme::Lv, Protocol::Partition).as_printed);
  EXPECT_FALSE(formula(Scheme::Sgrs, Protocol::Join).as_printed);
  for (const auto& f : cost_table()) {
    EXPECT_FALSE(f.citation().empty());
  }
}

TEST(CostTable, MissingRowsAreAbsent)
{
  for (auto s : { Scheme::Chen, Scheme::Mehdizadeh, Scheme::Zhong }) {
    EXPECT_EQ(find_formula(s, Protocol::Merge), nullptr);
    EXPECT_EQ(find_formula(s, Protocol::Partition), nullptr);
  }
  EXPECT_THROW(formula(Scheme::Zhong, Protocol::Merge), DomainError);
}

TEST(CostTable, SgrsRowsByHand)
{
  EXPECT_DOUBLE_EQ(eval_bytes(formula(Scheme::Sgrs, Protocol::Join), 100, 1, sizes), 432);
  EXPECT_DOUBLE_EQ(eval_bytes(formula(Scheme::Sgrs, Protocol::Leave), 100, 1, sizes), 428);
  EXPECT_DOUBLE_EQ(eval_bytes(formula(Scheme::Sgrs, Protocol::Partition), 100, 3, sizes), 496);
  // 4*K*CK + (3 + N/K)(N/K)*Int with N = 20, K = 4.
  EXPECT_DOUBLE_EQ(eval_bytes(formula(Scheme::Sgrs, Protocol::Merge), 20, 4, sizes),
                   512 + 8 * 5 * 4);
  const auto m = eval_messages(formula(Scheme::Sgrs, Protocol::Merge), 20, 4);
  EXPECT_DOUBLE_EQ(m.uc, 9);
  EXPECT_DOUBLE_EQ(m.bc, 9);
  EXPECT_EQ(sgrs_hash_ops(Protocol::Merge, 10, 2), std::nullopt);
}

TEST(CostTable, CompetitorRowsByHand)
{
  EXPECT_DOUBLE_EQ(eval_bytes(formula(Scheme::Kim, Protocol::Leave), 64, 1, sizes),
                   64.0 * 32 * 6);
  EXPECT_DOUBLE_EQ(eval_bytes(formula(Scheme::Lv, Protocol::Join), 10, 1, sizes),
                   21 * 4 + 320);
  EXPECT_DOUBLE_EQ(eval_bytes(formula(Scheme::Zhong, Protocol::Leave), 10, 1, sizes), 1600);
  EXPECT_DOUBLE_EQ(eval_bytes(formula(Scheme::Mehdizadeh, Protocol::Join), 100, 10, sizes),
                   8 + 32 * (10 + 10 + 1 + std::log2(10.0)));
  EXPECT_DOUBLE_EQ(eval_messages(formula(Scheme::Kim, Protocol::Partition), 6, 5).bc, 3);
}

TEST(CostTable, DomainErrors)
{
  const auto& f = formula(Scheme::Sgrs, Protocol::Join);
  EXPECT_THROW(eval_bytes(f, 1, 1, sizes), DomainError);
  EXPECT_THROW(eval_bytes(f, 10, 0, sizes), DomainError);
}

TEST(Figures, JoinSweepShapeAndValues)
{
  const auto f = emit_figure(10, sizes);
  EXPECT_EQ(f.x.size(), 21u);
  EXPECT_EQ(f.x.front(), 5u);
  EXPECT_EQ(f.x.back(), 25u);
  EXPECT_EQ(f.series.size(), 6u);
  // Five joins into a group of 100: sum of 4(100+i) + 32.
  double expected = 0;
  for (int i = 0; i < 5; i++) {
    expected += 4 * (100 + i) + 32;
  }
  EXPECT_DOUBLE_EQ(f.find(Scheme::Sgrs)->values.front(), expected);
}

TEST(Figures, LeaveSweepValues)
{
  const auto f = emit_figure(11, sizes);
  double expected = 0;
  for (int i = 0; i < 25; i++) {
    expected += 4 * (99 - i) + 32;
  }
  EXPECT_DOUBLE_EQ(f.find(Scheme::Sgrs)->values.back(), expected);
}

TEST(Figures, MergeAndPartitionHaveThreeSeries)
{
  for (int id : { 12, 13 }) {
    const auto f = emit_figure(id, sizes);
    EXPECT_EQ(f.series.size(), 3u);
    EXPECT_NE(f.find(Scheme::Kim), nullptr);
    EXPECT_NE(f.find(Scheme::Lv), nullptr);
    EXPECT_NE(f.find(Scheme::Sgrs), nullptr);
    EXPECT_EQ(f.x.front(), 7u);
    EXPECT_EQ(f.x.back(), 34u);
    EXPECT_EQ(f.notes.size() >= 3, true);
  }
  const auto p = emit_figure(13, sizes);
  // Per-group size 7: N = 105, K = 15.
  EXPECT_DOUBLE_EQ(p.find(Scheme::Sgrs)->values.front(), 105 * 4 + 15 * 32);
}

TEST(Figures, UnknownIdIsRejected)
{
  EXPECT_THROW(emit_figure(9, sizes), DomainError);
}

TEST(Figures, CsvAndMetadata)
{
  const auto f = emit_figure(10, sizes);
  const auto csv = lines(figure_csv(f));
  EXPECT_EQ(csv.size(), 22u);
  EXPECT_EQ(csv[0], "joins,Kim,Lv,Chen,Mehdizadeh,Zhong,SGRS");
  const auto meta = figure_metadata(f, sizes);
  EXPECT_NE(meta.find("formula.SGRS=N Int + CK"), std::string::npos);
  EXPECT_NE(meta.find("key_bytes=32"), std::string::npos);
}

TEST(Reconciliation, AttributesUnmodelledSteps)
{
  Simulation sim(30);
  sim.add_group(GroupId{ 1 }, test::range_ids(1, 10));
  const auto out = sim.apply(test::join(1, 11));
  const auto r = compare_ledger(sim.network().ledger_for_event(out.index), Protocol::Join, 10, 1,
                                sizes);
  EXPECT_DOUBLE_EQ(r.expected_bytes, 72);
  EXPECT_DOUBLE_EQ(r.byte_tolerance, 72);
  EXPECT_DOUBLE_EQ(r.message_delta, 0);
  bool request = false;
  for (const auto& line : r.attribution) {
    request = request || line.rfind("join.request (unmodelled)", 0) == 0;
  }
  EXPECT_TRUE(request);
  EXPECT_NE(render_reconciliation(r).find("Join N=10"), std::string::npos);
}
