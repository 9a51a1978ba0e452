#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "secfuse/csv.hpp"
#include "secfuse/errors.hpp"
#include "secfuse/simulation.hpp"

using namespace secfuse;

TEST(Csv, NumbersRoundTripBitExactly) {
  const double values[] = {0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23,
                           std::numeric_limits<double>::min(), std::numeric_limits<double>::max(),
                           std::numeric_limits<double>::denorm_min(), 0.9851};
  std::ostringstream out;
  out << "v\n";
  for (double v : values) out << format_number(v) << "\n";
  std::istringstream in(out.str());
  const CsvTable t = read_csv(in);
  ASSERT_EQ(t.rows.size(), std::size(values));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(t.rows[i][0]), std::bit_cast<std::uint64_t>(values[i])) << values[i];
  }
}

TEST(Csv, RunFileLayout) {
  ScenarioConfig cfg = builtin_ieee4bus();
  const RunRecord rec = run_scenario(cfg, 1);
  std::ostringstream out;
  write_run_csv(out, rec);
  std::istringstream in(out.str());
  const CsvTable t = read_csv(in);
  EXPECT_EQ(t.rows.size(), 101u);
  EXPECT_EQ(t.header.front(), "k");
  for (const char* col : {"x_1", "x_4", "fused_1", "x_hat_1_1", "theta_2_1", "theta_hat_2_1", "akf_x_1_4",
                          "akf_theta_2_1", "weight_residual", "fused_trace"}) {
    EXPECT_NO_THROW(t.column(col)) << col;
  }
  EXPECT_EQ(t.header.size(), 1 + 4 + 4 + 2 * (4 + 1 + 1 + 4 + 1) + 2);
  const auto theta2 = t.column_values("theta_2_1");
  EXPECT_EQ(theta2[50], 3.0);
  EXPECT_EQ(theta2[49], 0.0);
  const auto x3 = t.column_values("x_3");
  for (std::size_t k = 0; k < x3.size(); ++k) EXPECT_EQ(x3[k], rec.x[k](2));
}

TEST(Csv, MseAndCompareHeaders) {
  ScenarioConfig cfg = builtin_ieee4bus();
  cfg.horizon = 5;
  const MseReport rep = run_monte_carlo(cfg, 3);
  {
    std::ostringstream out;
    write_mse_csv(out, rep);
    std::istringstream in(out.str());
    const CsvTable t = read_csv(in);
    EXPECT_EQ(t.header, (std::vector<std::string>{"k", "mse_fused", "mse_local_1", "mse_local_2", "mse_theta_1",
                                                  "mse_theta_2"}));
    EXPECT_EQ(t.rows.size(), 6u);
  }
  {
    std::ostringstream out;
    write_mse_csv(out, rep, true);
    std::istringstream in(out.str());
    const CsvTable t = read_csv(in);
    EXPECT_NO_THROW(t.column("se_fused_4"));
    EXPECT_NO_THROW(t.column("se_local_2_1"));
  }
  {
    std::ostringstream out;
    write_compare_csv(out, rep);
    std::istringstream in(out.str());
    const CsvTable t = read_csv(in);
    for (const char* col : {"mse_fused", "mse_proposed_1", "mse_akf_1", "mse_theta_2", "mse_akf_theta_2"}) {
      EXPECT_NO_THROW(t.column(col)) << col;
    }
    EXPECT_EQ(t.column_values("mse_akf_1"), rep.akf[0]);
  }
}

TEST(Csv, RejectsMalformedInput) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_csv(in);
  };
  EXPECT_THROW(parse(""), InputError);
  EXPECT_THROW(parse("a,b\n1\n"), InputError);
  EXPECT_THROW(parse("a,b\n1,x\n"), InputError);
  EXPECT_THROW(parse("a\n1\n").column("b"), InputError);
  EXPECT_EQ(parse("a,b\n1,2\n").column_values("b"), std::vector<double>{2.0});
}
