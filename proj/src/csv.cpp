#include "secfuse/csv.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "secfuse/errors.hpp"

namespace secfuse {
namespace {

class RowWriter {
 public:
  explicit RowWriter(std::ostream& out) : out_(out) {}
  void text(const std::string& s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
  }
  void number(double v) { text(format_number(v)); }
  void vector(const Vector& v) {
    for (Index j = 0; j < v.size(); ++j) number(v(j));
  }
  void names(const std::string& prefix, Index count) {
    for (Index j = 1; j <= count; ++j) text(prefix + std::to_string(j));
  }
  void end() {
    out_ << '\n';
    first_ = true;
  }

 private:
  std::ostream& out_;
  bool first_ = true;
};

std::string id(const SensorId& s) { return std::to_string(s.value); }

}  // namespace

std::string format_number(double v) { return fmt::format("{:.17g}", v); }

void write_run_csv(std::ostream& out, const RunRecord& rec) {
  RowWriter row(out);
  const Index n = rec.x.empty() ? 0 : rec.x.front().size();
  row.text("k");
  row.names("x_", n);
  row.names("fused_", n);
  for (std::size_t w = 0; w < rec.weak_ids.size(); ++w) {
    const std::string i = id(rec.weak_ids[w]);
    const Index p = rec.theta[w].empty() ? 0 : rec.theta[w].front().size();
    row.names("x_hat_" + i + "_", n);
    row.names("theta_" + i + "_", p);
    row.names("theta_hat_" + i + "_", p);
    row.names("akf_x_" + i + "_", n);
    row.names("akf_theta_" + i + "_", p);
  }
  row.text("weight_residual");
  row.text("fused_trace");
  row.end();

  for (std::size_t k = 0; k < rec.steps(); ++k) {
    row.text(std::to_string(k));
    row.vector(rec.x[k]);
    row.vector(rec.fused[k]);
    for (std::size_t w = 0; w < rec.weak_ids.size(); ++w) {
      row.vector(rec.x_hat[w][k]);
      row.vector(rec.theta[w][k]);
      row.vector(rec.theta_hat[w][k]);
      row.vector(rec.akf_x[w][k]);
      row.vector(rec.akf_theta[w][k]);
    }
    row.number(rec.weight_residual[k]);
    row.number(rec.fused_trace[k]);
    row.end();
  }
}

void write_mse_csv(std::ostream& out, const MseReport& rep, bool components) {
  RowWriter row(out);
  const Index n = rep.fused_components.empty() ? 0 : rep.fused_components.front().size();
  row.text("k");
  row.text("mse_fused");
  for (const auto& s : rep.weak_ids) row.text("mse_local_" + id(s));
  for (const auto& s : rep.weak_ids) row.text("mse_theta_" + id(s));
  if (components) {
    row.names("se_fused_", n);
    for (const auto& s : rep.weak_ids) row.names("se_local_" + id(s) + "_", n);
  }
  row.end();

  for (std::size_t k = 0; k < rep.steps(); ++k) {
    row.text(std::to_string(k));
    row.number(rep.fused[k]);
    for (const auto& c : rep.local) row.number(c[k]);
    for (const auto& c : rep.theta) row.number(c[k]);
    if (components) {
      row.vector(rep.fused_components[k]);
      for (const auto& c : rep.local_components) row.vector(c[k]);
    }
    row.end();
  }
}

void write_compare_csv(std::ostream& out, const MseReport& rep) {
  RowWriter row(out);
  row.text("k");
  row.text("mse_fused");
  for (const auto& s : rep.weak_ids) row.text("mse_proposed_" + id(s));
  for (const auto& s : rep.weak_ids) row.text("mse_akf_" + id(s));
  for (const auto& s : rep.weak_ids) row.text("mse_theta_" + id(s));
  for (const auto& s : rep.weak_ids) row.text("mse_akf_theta_" + id(s));
  row.end();

  for (std::size_t k = 0; k < rep.steps(); ++k) {
    row.text(std::to_string(k));
    row.number(rep.fused[k]);
    for (const auto& c : rep.local) row.number(c[k]);
    for (const auto& c : rep.akf) row.number(c[k]);
    for (const auto& c : rep.theta) row.number(c[k]);
    for (const auto& c : rep.akf_theta) row.number(c[k]);
    row.end();
  }
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return j;
  }
  throw InputError("CSV has no column '" + name + "'");
}

std::vector<double> CsvTable::column_values(const std::string& name) const {
  const std::size_t j = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[j]);
  return out;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw InputError("CSV is empty");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw InputError("CSV line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
      row.push_back(v);
    }
    if (row.size() != table.header.size()) {
      throw InputError("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(table.header.size()) +
                       " fields, got " + std::to_string(row.size()));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace secfuse
