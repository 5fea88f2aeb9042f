#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "revdoe/io.hpp"
#include "test_support.hpp"

using namespace revdoe;
using revdoe::testing::data_path;

TEST(CsvIngest, DesignFixture) {
  const auto v = io::ingest_csv(data_path("irs_cells.csv"));
  ASSERT_TRUE(std::holds_alternative<Design22>(v));
  const auto& d = std::get<Design22>(v);
  EXPECT_EQ(d.replicates(), 1u);
  EXPECT_EQ(d.cell_mean(-1, -1), 1509.63);
  EXPECT_EQ(d.cell_mean(1, 1), 2153.34);
}

TEST(CsvIngest, CostDatasetFixture) {
  const auto v = io::ingest_csv(data_path("irs_generated.csv"));
  ASSERT_TRUE(std::holds_alternative<CostDataset>(v));
  const auto& d = std::get<CostDataset>(v);
  EXPECT_EQ(d.size(), 17u);
  EXPECT_TRUE(d.has_revenue());
  EXPECT_EQ(d[0].server_cost, 68);
}

TEST(CsvIngest, MalformedNumberCitesRowAndColumn) {
  const std::string text = "server_cost,power_cooling_cost,revenue\n60,20,10\n61,21,11\n62,22,abc\n";
  try {
    io::ingest_csv_text(text, "bad.csv");
    FAIL() << "expected a parse error";
  } catch (const io::CsvError& e) {
    EXPECT_EQ(e.row(), 3u);
    EXPECT_EQ(e.column(), "revenue");
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("column revenue"), std::string::npos);
  }
}

TEST(CsvIngest, MissingColumnAndEmptyFile) {
  try {
    io::ingest_csv_text("server_cost,revenue\n1,2\n");
    FAIL();
  } catch (const io::CsvError& e) {
    EXPECT_EQ(e.column(), "power_cooling_cost");
    EXPECT_NE(std::string(e.what()).find("missing column"), std::string::npos);
  }
  EXPECT_THROW(io::ingest_csv_text(""), io::CsvError);
  EXPECT_THROW(io::ingest_csv_text("\n\n"), io::CsvError);
  EXPECT_THROW(io::ingest_csv_text("x_A,x_B,revenue\n"), io::CsvError);
  try {
    io::ingest_csv_text("x_A,x_B\n1,1\n");
    FAIL();
  } catch (const io::CsvError& e) {
    EXPECT_EQ(e.column(), "revenue");
  }
}

TEST(CsvIngest, RaggedAndOutOfDomainRows) {
  try {
    io::ingest_csv_text("server_cost,power_cooling_cost\n1,2\n3\n");
    FAIL();
  } catch (const io::CsvError& e) {
    EXPECT_EQ(e.row(), 2u);
  }
  try {
    io::ingest_csv_text("server_cost,power_cooling_cost\n1,2\n-3,4\n");
    FAIL();
  } catch (const io::CsvError& e) {
    EXPECT_EQ(e.row(), 2u);
  }
  try {
    io::ingest_csv_text("x_A,x_B,revenue\n-1,-1,1\n1,-1,2\n-1,1,3\n0,1,4\n");
    FAIL();
  } catch (const io::CsvError& e) {
    EXPECT_EQ(e.row(), 4u);
    EXPECT_EQ(e.column(), "x_a");
  }
  EXPECT_THROW(io::ingest_csv_text("x_A,x_B,revenue\n-1,-1,1\n1,-1,2\n-1,1,3\n"), ValidationError);
  EXPECT_THROW(io::read_cost_dataset(data_path("no_such_file.csv")), ValidationError);
}

TEST(CsvIngest, HeaderIsCaseInsensitiveAndToleratesCrLf) {
  const auto v = io::ingest_csv_text("\xEF\xBB\xBFServer_Cost, Power_Cooling_Cost ,note\r\n 60 ,20,a\r\n61,+21,b\r\n");
  const auto& d = std::get<CostDataset>(v);
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d[1].power_cooling_cost, 21);
  EXPECT_FALSE(d.has_revenue());
}

TEST(CsvIngest, ReplicatedDesignKeepsFileOrder) {
  const auto v = io::ingest_csv_text("x_A,x_B,revenue\n-1,-1,1\n1,-1,2\n-1,1,3\n1,1,4\n1,1,40\n-1,-1,10\n1,-1,20\n-1,1,30\n");
  const auto& d = std::get<Design22>(v);
  EXPECT_EQ(d.replicates(), 2u);
  EXPECT_EQ(d.cell(1, 1)[1], 40);
  EXPECT_EQ(d.cell(-1, -1)[1], 10);
}

TEST(CsvRoundTrip, CostDatasetKeepsEveryBit) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(1e-3, 1e6);
  CostDataset d;
  for (int i = 0; i < 200; ++i) d.push_back({u(rng), u(rng), u(rng)});
  std::ostringstream os;
  io::write_cost_dataset(os, d);
  const auto back = std::get<CostDataset>(io::ingest_csv_text(os.str()));
  ASSERT_EQ(back.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(back[i].server_cost, d[i].server_cost);
    EXPECT_EQ(back[i].power_cooling_cost, d[i].power_cooling_cost);
    EXPECT_EQ(*back[i].revenue, *d[i].revenue);
  }
}

TEST(CsvRoundTrip, DesignKeepsEveryBit) {
  const Design22 d(Design22::Cells{{{0.1, 1.0 / 3}, {2e-7, 5.5}, {123456.789, -1.25}, {M_PI, std::exp(1.0)}}});
  std::ostringstream os;
  io::write_design(os, d);
  const auto back = std::get<Design22>(io::ingest_csv_text(os.str()));
  EXPECT_EQ(back.cells(), d.cells());
}

TEST(CsvRoundTrip, ShortestFormatting) {
  EXPECT_EQ(io::format_number(0.1), "0.1");
  EXPECT_EQ(io::format_number(2566.97), "2566.97");
  EXPECT_EQ(io::format_number(12.0), "12");
}

TEST(Fixtures, LastRowPowerCostInvertsToTwentyTwo) {
  // Solving R = S^α P^β for P on the last row of the increasing- and
  // decreasing-returns datasets; the printed 12 does not reproduce either.
  const auto irs = io::read_cost_dataset(data_path("irs_generated_as_printed.csv"));
  const auto drs = io::read_cost_dataset(data_path("drs_generated_as_printed.csv"));
  const auto& a = irs[16];
  const auto& b = drs[16];
  EXPECT_NEAR(std::pow(*a.revenue / std::pow(a.server_cost, 1.8), 1 / 0.1), 22.0, 0.05);
  EXPECT_NEAR(std::pow(*b.revenue / std::pow(b.server_cost, 0.8), 1 / 0.1), 22.0, 0.05);
  EXPECT_EQ(a.power_cooling_cost, 12);
  EXPECT_EQ(io::read_cost_dataset(data_path("irs_generated.csv"))[16].power_cooling_cost, 22);
  EXPECT_EQ(io::read_cost_dataset(data_path("drs_generated.csv"))[16].power_cooling_cost, 22);
}
