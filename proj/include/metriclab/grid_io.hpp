#pragma once
// Columnar text files for grid-sampled metric fields: one row per node,
// coordinate columns first, then the row-major metric entries.
// Format reference: docs/grid-format.txt.
#include <Eigen/Dense>

#include <string>
#include <vector>

namespace metriclab {

struct MetricGrid {
    int dim = 0;        // metric dimension m (entries per row: coord_dim + m*m)
    int coord_dim = 0;  // number of coordinate columns
    Eigen::MatrixXd coords;               // n x coord_dim
    std::vector<Eigen::MatrixXd> metrics; // n SPD matrices, validated on load
};

MetricGrid load_metric_grid(const std::string& path);
void save_metric_grid(const std::string& path, const MetricGrid& grid);

}  // namespace metriclab
