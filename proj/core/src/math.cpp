#include "tgm/math.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace tgm {

double digamma(double x) {
  if (!(x > 0.0)) {
    throw std::invalid_argument("digamma: argument must be > 0, got " + std::to_string(x));
  }
  double result = 0.0;
  // Shift into x >= 10, where the asymptotic series converges fast.
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  // psi(x) ~ ln x - 1/(2x) - sum_n B_{2n} / (2n x^{2n})
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = inv2 * (1.0 / 12.0 -
                  inv2 * (1.0 / 120.0 -
                  inv2 * (1.0 / 252.0 -
                  inv2 * (1.0 / 240.0 -
                  inv2 * (1.0 / 132.0 -
                  inv2 * (691.0 / 32760.0 -
                  inv2 * (1.0 / 12.0)))))));
  result += std::log(x) - 0.5 * inv - series;
  return result;
}

double log_multigamma(int p, double a) {
  if (p < 1 || !(a > 0.5 * (p - 1))) {
    throw std::invalid_argument("log_multigamma: need a > (p-1)/2");
  }
  double r = 0.25 * p * (p - 1) * std::log(M_PI);
  for (int i = 1; i <= p; ++i) {
    r += std::lgamma(a + 0.5 * (1 - i));
  }
  return r;
}

double log_beta(const Eigen::VectorXd& concentration) {
  double sum = 0.0;
  double r = 0.0;
  for (Eigen::Index i = 0; i < concentration.size(); ++i) {
    const double c = concentration[i];
    if (!(c > 0.0)) {
      throw std::invalid_argument("log_beta: concentration entries must be > 0");
    }
    r += std::lgamma(c);
    sum += c;
  }
  return r - std::lgamma(sum);
}

Eigen::LLT<Eigen::MatrixXd> cholesky(const Eigen::MatrixXd& m, const char* what,
                                     double symmetry_tol) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument(std::string(what) + ": matrix is not square");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (((m - m.transpose()).cwiseAbs().maxCoeff()) > symmetry_tol * scale) {
    throw std::invalid_argument(std::string(what) + ": matrix is not symmetric");
  }
  Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument(std::string(what) + ": matrix is not positive-definite");
  }
  return llt;
}

double log_det_spd(const Eigen::MatrixXd& m, const char* what) {
  auto llt = cholesky(m, what);
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Eigen::MatrixXd inverse_spd(const Eigen::MatrixXd& m, const char* what) {
  auto llt = cholesky(m, what);
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  return 0.5 * (inv + inv.transpose());
}

Eigen::MatrixXd inverse_spd_guarded(const Eigen::MatrixXd& m, const char* what) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  const double scale = std::max(sym.diagonal().maxCoeff(), 1e-300);
  double jitter = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(sym + jitter * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
      return 0.5 * (inv + inv.transpose());
    }
    jitter = jitter == 0.0 ? 1e-14 * scale : 100.0 * jitter;
  }
  throw std::invalid_argument(std::string(what) + ": not invertible even with jitter");
}

bool is_spd(const Eigen::MatrixXd& m, double symmetry_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (((m - m.transpose()).cwiseAbs().maxCoeff()) > symmetry_tol * scale) return false;
  Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  return Eigen::LLT<Eigen::MatrixXd>(sym).info() == Eigen::Success;
}

bool is_well_conditioned_spd(const Eigen::MatrixXd& m, double pivot_ratio) {
  if (!is_spd(m)) return false;
  Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  const Eigen::VectorXd pivots =
      Eigen::LLT<Eigen::MatrixXd>(sym).matrixL().toDenseMatrix().diagonal();
  const double lo = pivots.minCoeff();
  const double hi = pivots.maxCoeff();
  return lo > 0.0 && lo * lo > pivot_ratio * hi * hi;
}

// Shortest-augmenting-path assignment for n <= m; matches every row.
static std::vector<int> assignment_rows_le_cols(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  const double inf = std::numeric_limits<double>::infinity();

  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> match(m + 1, 0);  // match[col] = row (1-based), 0 = free

  for (int i = 1; i <= n; ++i) {
    std::vector<double> dist(m + 1, inf);
    std::vector<int> prev(m + 1, 0);
    std::vector<char> used(m + 1, 0);
    int j0 = 0;
    match[0] = i;
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < dist[j]) {
          dist[j] = cur;
          prev[j] = j0;
        }
        if (dist[j] < delta) {
          delta = dist[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          dist[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    while (j0 != 0) {
      const int j1 = prev[j0];
      match[j0] = match[j1];
      j0 = j1;
    }
  }

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (match[j] != 0) row_to_col[match[j] - 1] = j - 1;
  }
  return row_to_col;
}

std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost) {
  if (cost.rows() == 0 || cost.cols() == 0) {
    return std::vector<int>(cost.rows(), -1);
  }
  if (cost.rows() <= cost.cols()) {
    return assignment_rows_le_cols(cost);
  }
  const auto col_to_row = assignment_rows_le_cols(cost.transpose());
  std::vector<int> row_to_col(cost.rows(), -1);
  for (int j = 0; j < static_cast<int>(col_to_row.size()); ++j) {
    if (col_to_row[j] >= 0) row_to_col[col_to_row[j]] = j;
  }
  return row_to_col;
}

}  // namespace tgm
