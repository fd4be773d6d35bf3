#include "xmover/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "xmover/error.hpp"

namespace xmover {

CostMatrix cost_matrix(const Matrix& a, const Matrix& b) {
  if (a.cols() == 0 || b.cols() == 0) throw InvalidArgument("cost_matrix: empty sequence");
  if (a.rows() != b.rows()) throw InvalidArgument("cost_matrix: dimension mismatch");
  CostMatrix cost(a.cols(), b.cols());
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) cost(i, j) = (a.col(i) - b.col(j)).norm();
  }
  return cost;
}

CostMatrix cost_matrix(const NgramSequence& a, const NgramSequence& b) {
  return cost_matrix(a.embeddings, b.embeddings);
}

namespace {

constexpr double kMassTolerance = 1e-6;

// Transportation simplex over a dense m x k instance with strictly positive
// marginals. Works in place on `flow`.
class TransportationSimplex {
 public:
  TransportationSimplex(const Matrix& cost, std::vector<double> supply, std::vector<double> demand)
      : cost_(cost),
        m_(static_cast<int>(supply.size())),
        k_(static_cast<int>(demand.size())),
        flow_(Matrix::Zero(m_, k_)),
        basic_(static_cast<std::size_t>(m_) * static_cast<std::size_t>(k_), false) {
    northwest_corner(std::move(supply), std::move(demand));
    double scale = 1.0;
    for (Eigen::Index i = 0; i < cost.size(); ++i) scale = std::max(scale, std::abs(cost.data()[i]));
    tolerance_ = 1e-12 * scale * static_cast<double>(m_ + k_);
  }

  const Matrix& solve() {
    const long max_iterations = 1000L + 50L * m_ * k_ * std::max(1, std::min(m_, k_));
    int degenerate_run = 0;
    bool bland = false;
    for (long iter = 0; iter < max_iterations; ++iter) {
      build_tree();
      compute_potentials();
      auto entering = price(bland);
      if (!entering) return flow_;
      const double theta = pivot(*entering, bland);
      if (theta == 0.0) {
        if (++degenerate_run > m_ + k_) bland = true;
      } else {
        degenerate_run = 0;
      }
    }
    throw Error("solve_wmd: transportation simplex did not converge");
  }

 private:
  struct Cell {
    int row;
    int col;
  };

  std::size_t index(int r, int c) const { return static_cast<std::size_t>(r) * static_cast<std::size_t>(k_) + static_cast<std::size_t>(c); }

  void northwest_corner(std::vector<double> supply, std::vector<double> demand) {
    int i = 0, j = 0;
    while (true) {
      const double q = std::min(supply[static_cast<std::size_t>(i)], demand[static_cast<std::size_t>(j)]);
      flow_(i, j) = q;
      basis_.push_back({i, j});
      basic_[index(i, j)] = true;
      if (i == m_ - 1 && j == k_ - 1) break;
      supply[static_cast<std::size_t>(i)] -= q;
      demand[static_cast<std::size_t>(j)] -= q;
      if (i == m_ - 1) {
        ++j;
      } else if (j == k_ - 1) {
        ++i;
      } else if (supply[static_cast<std::size_t>(i)] <= demand[static_cast<std::size_t>(j)]) {
        ++i;
      } else {
        ++j;
      }
    }
    // The last cell absorbs any residual imbalance; make sure it stays >= 0.
    auto& last = flow_(m_ - 1, k_ - 1);
    last = std::max(0.0, last);
  }

  // Nodes 0..m-1 are rows, m..m+k-1 columns; edges are basis cells.
  void build_tree() {
    adjacency_.assign(static_cast<std::size_t>(m_ + k_), {});
    for (std::size_t e = 0; e < basis_.size(); ++e) {
      adjacency_[static_cast<std::size_t>(basis_[e].row)].push_back(e);
      adjacency_[static_cast<std::size_t>(m_ + basis_[e].col)].push_back(e);
    }
  }

  int other_end(std::size_t edge, int node) const {
    const Cell& c = basis_[edge];
    return node == c.row ? m_ + c.col : c.row;
  }

  void compute_potentials() {
    potential_.assign(static_cast<std::size_t>(m_ + k_), 0.0);
    std::vector<char> seen(static_cast<std::size_t>(m_ + k_), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      for (auto e : adjacency_[static_cast<std::size_t>(node)]) {
        const int next = other_end(e, node);
        if (seen[static_cast<std::size_t>(next)]) continue;
        seen[static_cast<std::size_t>(next)] = 1;
        // u_r + v_c = C_rc on every basic cell.
        potential_[static_cast<std::size_t>(next)] =
            cost_(basis_[e].row, basis_[e].col) - potential_[static_cast<std::size_t>(node)];
        stack.push_back(next);
      }
    }
  }

  std::optional<Cell> price(bool bland) const {
    std::optional<Cell> best;
    double best_value = -tolerance_;
    for (int r = 0; r < m_; ++r) {
      for (int c = 0; c < k_; ++c) {
        if (basic_[index(r, c)]) continue;
        const double reduced = cost_(r, c) - potential_[static_cast<std::size_t>(r)] -
                               potential_[static_cast<std::size_t>(m_ + c)];
        if (reduced < best_value) {
          if (bland) return Cell{r, c};
          best_value = reduced;
          best = Cell{r, c};
        }
      }
    }
    return best;
  }

  // Returns the step length theta.
  double pivot(Cell entering, bool bland) {
    // Path in the tree from the entering column node back to its row node.
    const int start = m_ + entering.col;
    const int goal = entering.row;
    std::vector<long> via(static_cast<std::size_t>(m_ + k_), -1);
    std::vector<int> parent(static_cast<std::size_t>(m_ + k_), -1);
    std::vector<int> queue{start};
    parent[static_cast<std::size_t>(start)] = start;
    for (std::size_t head = 0; head < queue.size() && parent[static_cast<std::size_t>(goal)] < 0; ++head) {
      const int node = queue[head];
      for (auto e : adjacency_[static_cast<std::size_t>(node)]) {
        const int next = other_end(e, node);
        if (parent[static_cast<std::size_t>(next)] >= 0) continue;
        parent[static_cast<std::size_t>(next)] = node;
        via[static_cast<std::size_t>(next)] = static_cast<long>(e);
        queue.push_back(next);
      }
    }

    // Walk goal -> start, then reverse so position 0 touches the entering column.
    std::vector<std::size_t> path;
    for (int node = goal; node != start; node = parent[static_cast<std::size_t>(node)]) {
      path.push_back(static_cast<std::size_t>(via[static_cast<std::size_t>(node)]));
    }
    std::reverse(path.begin(), path.end());

    // Even positions lose flow, odd positions gain it.
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leaving = path.size();
    for (std::size_t p = 0; p < path.size(); p += 2) {
      const Cell& c = basis_[path[p]];
      const double f = flow_(c.row, c.col);
      const bool better = f < theta || (bland && f == theta && index(c.row, c.col) <
                                                                  index(basis_[path[leaving]].row, basis_[path[leaving]].col));
      if (better) {
        theta = f;
        leaving = p;
      }
    }

    for (std::size_t p = 0; p < path.size(); ++p) {
      const Cell& c = basis_[path[p]];
      double& f = flow_(c.row, c.col);
      if (p % 2 == 0) {
        f = std::max(0.0, f - theta);
      } else {
        f += theta;
      }
    }
    flow_(entering.row, entering.col) = theta;

    const std::size_t edge = path[leaving];
    flow_(basis_[edge].row, basis_[edge].col) = 0.0;
    basic_[index(basis_[edge].row, basis_[edge].col)] = false;
    basic_[index(entering.row, entering.col)] = true;
    basis_[edge] = entering;
    return theta;
  }

  const Matrix& cost_;
  int m_;
  int k_;
  Matrix flow_;
  std::vector<bool> basic_;
  std::vector<Cell> basis_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::vector<double> potential_;
  double tolerance_ = 0.0;
};

}  // namespace

TransportPlan solve_wmd(const CostMatrix& cost, std::span<const double> source, std::span<const double> target) {
  if (static_cast<std::size_t>(cost.rows()) != source.size() || static_cast<std::size_t>(cost.cols()) != target.size()) {
    throw InvalidArgument("solve_wmd: marginal sizes do not match the cost matrix");
  }
  if (!cost.allFinite() || (cost.array() < 0.0).any()) {
    throw InvalidArgument("solve_wmd: costs must be finite and non-negative");
  }
  double source_total = 0.0, target_total = 0.0;
  for (double w : source) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("solve_wmd: negative or non-finite source weight");
    source_total += w;
  }
  for (double w : target) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("solve_wmd: negative or non-finite target weight");
    target_total += w;
  }
  if (std::abs(source_total - target_total) > kMassTolerance) {
    throw InvalidArgument("solve_wmd: marginal totals differ by more than 1e-6");
  }

  TransportPlan plan;
  plan.flows = Matrix::Zero(cost.rows(), cost.cols());

  std::vector<Eigen::Index> rows, cols;
  std::vector<double> supply, demand;
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (source[i] > 0.0) {
      rows.push_back(static_cast<Eigen::Index>(i));
      supply.push_back(source[i]);
    }
  }
  for (std::size_t j = 0; j < target.size(); ++j) {
    if (target[j] > 0.0) {
      cols.push_back(static_cast<Eigen::Index>(j));
      demand.push_back(target[j]);
    }
  }
  if (rows.empty() || cols.empty()) return plan;

  Matrix reduced(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      reduced(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cost(rows[i], cols[j]);
    }
  }
  TransportationSimplex simplex(reduced, std::move(supply), std::move(demand));
  const Matrix& flows = simplex.solve();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      plan.flows(rows[i], cols[j]) = flows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  plan.objective = (plan.flows.array() * cost.array()).sum();
  return plan;
}

double wmd(const NgramSequence& a, const NgramSequence& b) {
  if (a.empty() || b.empty()) throw InvalidArgument("wmd: empty n-gram sequence");
  return solve_wmd(cost_matrix(a, b), a.weights, b.weights).objective;
}

}  // namespace xmover
