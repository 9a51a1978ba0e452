#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "secfuse/simulation.hpp"

namespace secfuse {

/// Shortest-safe round-trip text for a double (17 significant digits).
std::string format_number(double v);

/// k, x_1.., fused_1.., then per weak sensor i: x_hat_i_1.., theta_i_1..,
/// theta_hat_i_1.., akf_x_i_1.., akf_theta_i_1.., and finally
/// weight_residual, fused_trace. One row per step k = 0..K.
void write_run_csv(std::ostream& out, const RunRecord& rec);

/// k, mse_fused, mse_local_<i>.., mse_theta_<i>..; with `components`, also
/// the per-component squared errors of the fused and local estimates.
void write_mse_csv(std::ostream& out, const MseReport& rep, bool components = false);

/// k, mse_fused, mse_proposed_<i>.., mse_akf_<i>.., mse_theta_<i>.., mse_akf_theta_<i>..
void write_compare_csv(std::ostream& out, const MseReport& rep);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a named column; InputError if absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> column_values(const std::string& name) const;
};

/// Reads numeric CSV with a header row. InputError on malformed input.
CsvTable read_csv(std::istream& in);

}  // namespace secfuse
