#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <queue>
#include <tuple>
#include <vector>

#include "infomatch/core.hpp"

namespace infomatch {

// Exact solver for the balanced transportation problem
//
//   min sum_ij T_ij * cost_ij   s.t.  sum_j T_ij = supply_i,
//                                     sum_i T_ij = demand_j,  T_ij >= 0
//
// via the transportation simplex: northwest-corner start, then u/v potential
// (MODI) pivots on a spanning-tree basis. Degenerate bases carry explicit
// zero-flow cells so the tree always has n+m-1 edges.
class TransportSolver {
  public:
    TransportSolver(std::vector<double> supply, std::vector<double> demand,
                    std::vector<std::vector<double>> cost)
        : supply_(std::move(supply)), demand_(std::move(demand)), cost_(std::move(cost)) {
        n_ = supply_.size();
        m_ = demand_.size();
        if (n_ == 0 || m_ == 0) throw DataError("transport: empty marginal");
        if (cost_.size() != n_) throw DataError("transport: cost row count mismatch");
        double total_supply = 0.0, total_demand = 0.0, max_cost = 0.0;
        for (double a : supply_) {
            if (a < 0.0) throw DataError("transport: negative supply");
            total_supply += a;
        }
        for (double b : demand_) {
            if (b < 0.0) throw DataError("transport: negative demand");
            total_demand += b;
        }
        for (const auto& row : cost_) {
            if (row.size() != m_) throw DataError("transport: cost column count mismatch");
            for (double c : row) max_cost = std::max(max_cost, std::abs(c));
        }
        if (std::abs(total_supply - total_demand) > 1e-9 * std::max(1.0, total_supply))
            throw DataError("transport: unbalanced marginals");
        tol_ = 1e-12 * (1.0 + max_cost);
    }

    double solve() {
        northwest_corner();
        const std::size_t max_pivots = 2000 + 20 * n_ * m_;
        for (std::size_t pivot = 0; pivot < max_pivots; ++pivot) {
            compute_potentials();
            auto [ei, ej, reduced] = entering_cell();
            if (reduced >= -tol_) return objective();
            pivot_on(ei, ej);
        }
        throw Error("transport: pivot limit exceeded");
    }

  private:
    struct Cell {
        std::size_t row, col;
        double flow;
    };

    std::vector<double> supply_, demand_;
    std::vector<std::vector<double>> cost_;
    std::size_t n_ = 0, m_ = 0;
    double tol_ = 0.0;
    std::vector<Cell> basis_;
    std::vector<std::vector<char>> basic_;
    std::vector<double> u_, v_;

    void northwest_corner() {
        basic_.assign(n_, std::vector<char>(m_, 0));
        basis_.clear();
        auto a = supply_;
        auto b = demand_;
        std::size_t i = 0, j = 0;
        while (true) {
            double x = std::min(a[i], b[j]);
            basis_.push_back({i, j, std::max(0.0, x)});
            basic_[i][j] = 1;
            a[i] -= x;
            b[j] -= x;
            if (i == n_ - 1 && j == m_ - 1) break;
            if (i == n_ - 1)
                ++j;
            else if (j == m_ - 1)
                ++i;
            else if (a[i] <= b[j])
                ++i;
            else
                ++j;
        }
    }

    // Nodes 0..n-1 are rows, n..n+m-1 are columns; basic cells are tree edges.
    void compute_potentials() {
        u_.assign(n_, 0.0);
        v_.assign(m_, 0.0);
        std::vector<std::vector<std::size_t>> adjacency(n_ + m_);
        for (std::size_t e = 0; e < basis_.size(); ++e) {
            adjacency[basis_[e].row].push_back(e);
            adjacency[n_ + basis_[e].col].push_back(e);
        }
        std::vector<char> seen(n_ + m_, 0);
        std::queue<std::size_t> frontier;
        frontier.push(0);
        seen[0] = 1;
        while (!frontier.empty()) {
            std::size_t node = frontier.front();
            frontier.pop();
            for (std::size_t e : adjacency[node]) {
                const Cell& cell = basis_[e];
                std::size_t other = (node < n_) ? n_ + cell.col : cell.row;
                if (seen[other]) continue;
                seen[other] = 1;
                if (other < n_)
                    u_[other] = cost_[cell.row][cell.col] - v_[cell.col];
                else
                    v_[other - n_] = cost_[cell.row][cell.col] - u_[cell.row];
                frontier.push(other);
            }
        }
    }

    std::tuple<std::size_t, std::size_t, double> entering_cell() const {
        std::size_t best_i = 0, best_j = 0;
        double best = 0.0;
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < m_; ++j) {
                if (basic_[i][j]) continue;
                double reduced = cost_[i][j] - u_[i] - v_[j];
                if (reduced < best) {
                    best = reduced;
                    best_i = i;
                    best_j = j;
                }
            }
        return {best_i, best_j, best};
    }

    // Unique tree path from row `ei` to column `ej`; with the entering edge it
    // closes the pivot cycle. Path edges alternate -theta/+theta starting at
    // -theta (the entering cell takes +theta).
    std::vector<std::size_t> tree_path(std::size_t ei, std::size_t ej) const {
        std::vector<std::vector<std::size_t>> adjacency(n_ + m_);
        for (std::size_t e = 0; e < basis_.size(); ++e) {
            adjacency[basis_[e].row].push_back(e);
            adjacency[n_ + basis_[e].col].push_back(e);
        }
        std::vector<std::size_t> parent_edge(n_ + m_, SIZE_MAX);
        std::vector<std::size_t> parent_node(n_ + m_, SIZE_MAX);
        std::vector<char> seen(n_ + m_, 0);
        std::queue<std::size_t> frontier;
        frontier.push(ei);
        seen[ei] = 1;
        const std::size_t target = n_ + ej;
        while (!frontier.empty()) {
            std::size_t node = frontier.front();
            frontier.pop();
            if (node == target) break;
            for (std::size_t e : adjacency[node]) {
                const Cell& cell = basis_[e];
                std::size_t other = (node < n_) ? n_ + cell.col : cell.row;
                if (seen[other]) continue;
                seen[other] = 1;
                parent_edge[other] = e;
                parent_node[other] = node;
                frontier.push(other);
            }
        }
        std::vector<std::size_t> path;
        for (std::size_t node = target; node != ei; node = parent_node[node])
            path.push_back(parent_edge[node]);
        std::reverse(path.begin(), path.end());
        return path;
    }

    void pivot_on(std::size_t ei, std::size_t ej) {
        auto path = tree_path(ei, ej);
        double theta = std::numeric_limits<double>::infinity();
        std::size_t leaving_pos = SIZE_MAX;
        for (std::size_t idx = 0; idx < path.size(); idx += 2) {
            double flow = basis_[path[idx]].flow;
            if (flow < theta) {
                theta = flow;
                leaving_pos = idx;
            }
        }
        for (std::size_t idx = 0; idx < path.size(); ++idx) {
            Cell& cell = basis_[path[idx]];
            cell.flow += (idx % 2 == 0) ? -theta : theta;
            cell.flow = std::max(0.0, cell.flow);
        }
        Cell& leaving = basis_[path[leaving_pos]];
        basic_[leaving.row][leaving.col] = 0;
        basic_[ei][ej] = 1;
        leaving = {ei, ej, theta};
    }

    double objective() const {
        double total = 0.0;
        for (const auto& cell : basis_) total += cell.flow * cost_[cell.row][cell.col];
        return std::max(0.0, total);
    }
};

inline double solve_transport(std::vector<double> supply, std::vector<double> demand,
                              std::vector<std::vector<double>> cost) {
    return TransportSolver(std::move(supply), std::move(demand), std::move(cost)).solve();
}

}  // namespace infomatch
