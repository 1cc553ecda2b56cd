#include "ofm/io/artifacts.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ofm {

std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v || (v != v && back != back)) break;  // NaN round-trips as nan
  }
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::string point_label(const Eigen::MatrixXd& pts, int p) {
  std::string label = format_double(pts(p, 0));
  for (int d = 1; d < pts.cols(); ++d) label += ":" + format_double(pts(p, d));
  return label;
}

}  // namespace

void write_samples_csv(const std::string& path, const FunctionBatch& batch) {
  if (batch.size() < 1) throw std::invalid_argument("samples csv: empty batch");
  std::ofstream out = open_out(path);
  const int m = batch.grid.points();
  Eigen::MatrixXd pts = batch.grid.coordinates();
  for (int c = 0; c < batch.channels; ++c)
    for (int p = 0; p < m; ++p) {
      if (c || p) out << ',';
      out << point_label(pts, p);
      if (batch.channels > 1) out << "_c" << c;
    }
  out << '\n';
  for (int i = 0; i < batch.size(); ++i) {
    for (int j = 0; j < batch.values.cols(); ++j) {
      if (j) out << ',';
      out << format_double(batch.values(i, j));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("samples csv: short write: " + path);
}

void write_posterior_csv(const std::string& path, const GridSpec& grid,
                         const PosteriorSummary& summary) {
  const int m = grid.points();
  if (summary.mean.size() != m)
    throw std::invalid_argument("posterior csv: summary does not match the grid");
  std::ofstream out = open_out(path);
  Eigen::MatrixXd pts = grid.coordinates();
  out << (pts.cols() == 1 ? "x" : "x,y") << ",mean,std,q05,q95\n";
  for (int p = 0; p < m; ++p) {
    for (int d = 0; d < pts.cols(); ++d) out << format_double(pts(p, d)) << ',';
    out << format_double(summary.mean[p]) << ',' << format_double(summary.stddev[p]) << ','
        << format_double(summary.q05[p]) << ',' << format_double(summary.q95[p]) << '\n';
  }
  if (!out) throw std::runtime_error("posterior csv: short write: " + path);
}

void write_metrics_json(const std::string& path, const MetricsReport& report) {
  nlohmann::json j = {{"smse", report.smse},
                      {"msll", report.msll},
                      {"density_mse", report.density_mse},
                      {"autocov_mse", report.autocov_mse},
                      {"spectra_mse", report.spectra_mse},
                      {"n_pred", report.n_pred},
                      {"n_truth", report.n_truth},
                      {"config_echo", report.config_echo}};
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("metrics json: short write: " + path);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv: " + path);
  CsvTable table;
  std::string line;
  std::vector<std::vector<double>> rows;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (first) {
      table.header = cells;
      first = false;
      continue;
    }
    if (cells.size() != table.header.size())
      throw std::runtime_error("csv: ragged row in " + path);
    std::vector<double> row;
    for (const auto& c : cells) {
      size_t used = 0;
      double v = std::stod(c, &used);
      if (used != c.size()) throw std::runtime_error("csv: non-numeric cell '" + c + "'");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  table.rows.resize(long(rows.size()), long(table.header.size()));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) table.rows(long(i), long(j)) = rows[i][j];
  return table;
}

}  // namespace ofm
