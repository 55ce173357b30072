#include "metriclab/grid_io.hpp"

#include "metriclab/metric_pair.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace metriclab {

namespace {
std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace

MetricGrid load_metric_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_metric_grid: cannot open " + path);
    MetricGrid g;
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;  // blank
        if (first == "#") {
            std::string key;
            if (ls >> key) {
                if (key == "dim") ls >> g.dim;
                else if (key == "coords") ls >> g.coord_dim;
            }
            continue;
        }
        std::vector<double> row;
        row.push_back(std::stod(first));
        double v;
        while (ls >> v) row.push_back(v);
        rows.push_back(std::move(row));
    }
    if (g.dim < 1 || g.coord_dim < 1)
        throw std::runtime_error("load_metric_grid: missing '# dim' or '# coords' header in " + path);
    const std::size_t want = static_cast<std::size_t>(g.coord_dim + g.dim * g.dim);
    g.coords.resize(static_cast<Eigen::Index>(rows.size()), g.coord_dim);
    g.metrics.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != want)
            throw std::runtime_error("load_metric_grid: row " + std::to_string(r + 1) + " of " + path +
                                     " has " + std::to_string(rows[r].size()) + " columns, expected " +
                                     std::to_string(want));
        for (int c = 0; c < g.coord_dim; ++c) g.coords(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
        Eigen::MatrixXd M(g.dim, g.dim);
        for (int i = 0; i < g.dim; ++i)
            for (int j = 0; j < g.dim; ++j)
                M(i, j) = rows[r][static_cast<std::size_t>(g.coord_dim + i * g.dim + j)];
        require_spd<double>(M, ("load_metric_grid: node " + std::to_string(r + 1)).c_str());
        g.metrics.push_back(std::move(M));
    }
    return g;
}

void save_metric_grid(const std::string& path, const MetricGrid& grid) {
    if (grid.coords.rows() != static_cast<Eigen::Index>(grid.metrics.size()))
        throw std::invalid_argument("save_metric_grid: coords/metrics length mismatch");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_metric_grid: cannot write " + path);
    out << "# metric grid\n# dim " << grid.dim << "\n# coords " << grid.coord_dim << "\n";
    for (Eigen::Index r = 0; r < grid.coords.rows(); ++r) {
        for (int c = 0; c < grid.coord_dim; ++c) {
            if (c) out << ' ';
            out << fmt_double(grid.coords(r, c));
        }
        const Eigen::MatrixXd& M = grid.metrics[static_cast<std::size_t>(r)];
        for (int i = 0; i < grid.dim; ++i)
            for (int j = 0; j < grid.dim; ++j) out << ' ' << fmt_double(M(i, j));
        out << '\n';
    }
}

}  // namespace metriclab
