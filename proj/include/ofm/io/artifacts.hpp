#pragma once

#include <string>
#include <vector>

#include "ofm/core/batch.hpp"
#include "ofm/metrics/metrics.hpp"
#include "ofm/regression/posterior.hpp"

namespace ofm {

/* Shortest decimal form that parses back to the same double. */
std::string format_double(double v);

/* One sample per row, one grid point per column; the header row carries the
 * point coordinates.  Multi-channel batches suffix the channel index. */
void write_samples_csv(const std::string& path, const FunctionBatch& batch);

/* Columns x[, y], mean, std, q05, q95 in summarize_posterior order. */
void write_posterior_csv(const std::string& path, const GridSpec& grid,
                         const PosteriorSummary& summary);

void write_metrics_json(const std::string& path, const MetricsReport& report);

/* Parsed CSV: header plus numeric rows (all data cells must be numbers). */
struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd rows;
};
CsvTable read_csv(const std::string& path);

}  // namespace ofm
