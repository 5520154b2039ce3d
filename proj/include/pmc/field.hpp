#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace pmc {

enum class Layout { grid2d, grid_periodic, radial };
enum class NodeKind : std::uint8_t { unknown, dirichlet, inactive };

// Scalar field on a structured layout.
// grid2d / grid_periodic: node (i, j) sits at (x0 + i h, y0 + j h).
// radial: nodes 0..nx-2 are cell centres (i + 1/2) h, node nx-1 is the outer
// boundary r = (nx - 1) h and carries the Dirichlet value.
struct Field {
    Layout layout = Layout::grid2d;
    int nx = 0;
    int ny = 1;
    double h = 0.0;
    double x0 = 0.0;
    double y0 = 0.0;
    std::vector<double> values;
    std::vector<NodeKind> kind;

    int size() const { return nx * ny; }
    int index(int i, int j) const { return j * nx + i; }
    bool periodic() const { return layout == Layout::grid_periodic; }

    // Wraps indices for periodic layouts; returns -1 when off-grid otherwise.
    int node(int i, int j) const {
        if (periodic()) {
            i = ((i % nx) + nx) % nx;
            j = ((j % ny) + ny) % ny;
            return index(i, j);
        }
        if (i < 0 || j < 0 || i >= nx || j >= ny) return -1;
        return index(i, j);
    }

    Eigen::Vector2d point(int i, int j) const {
        if (layout == Layout::radial) {
            double r = (i < nx - 1) ? (i + 0.5) * h : (nx - 1) * h;
            return {r, 0.0};
        }
        return {x0 + i * h, y0 + j * h};
    }

    bool active(int k) const { return k >= 0 && kind[k] != NodeKind::inactive; }
    bool is_unknown(int k) const { return k >= 0 && kind[k] == NodeKind::unknown; }

    // False when any active node holds NaN or Inf.
    bool finite() const;
    std::vector<int> unknowns() const;
};

}  // namespace pmc
