#include <algorithm>
#include <cmath>
#include <numeric>

#include "pfaffopt/errors.hpp"
#include "pfaffopt/numerics.hpp"

namespace pfaffopt::numerics {

namespace {

struct Echelon {
  Matrix r;                          // reduced row echelon form, columns permuted
  std::vector<std::size_t> pivots;   // positions (in permuted order) of pivot columns
};

Echelon reduce(Matrix a, double tol) {
  const double scale = std::max(1.0, a.max_abs());
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < a.cols() && row < a.rows(); ++col) {
    std::size_t p = row;
    for (std::size_t i = row + 1; i < a.rows(); ++i)
      if (std::fabs(a(i, col)) > std::fabs(a(p, col))) p = i;
    if (std::fabs(a(p, col)) <= tol * scale) continue;
    for (std::size_t j = 0; j < a.cols(); ++j) std::swap(a(p, j), a(row, j));
    const double piv = a(row, col);
    for (std::size_t j = 0; j < a.cols(); ++j) a(row, j) /= piv;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      if (i == row) continue;
      const double factor = a(i, col);
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) -= factor * a(row, j);
    }
    pivots.push_back(col);
    ++row;
  }
  return {std::move(a), std::move(pivots)};
}

void gram_schmidt(std::vector<Vector>& vs) {
  for (std::size_t k = 0; k < vs.size(); ++k) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < k; ++j) {
        const double c = dot(vs[j], vs[k]);
        vs[k] = axpy(-c, vs[j], vs[k]);
      }
    }
    const double nrm = norm2(vs[k]);
    for (double& v : vs[k]) v /= nrm;
  }
}

}  // namespace

std::vector<Vector> null_space_basis(const Matrix& a, double tol, std::span<const std::size_t> column_order) {
  const std::size_t n = a.cols();
  std::vector<std::size_t> order(n);
  if (column_order.empty()) {
    std::iota(order.begin(), order.end(), 0);
  } else {
    if (column_order.size() != n) throw InputError("column order must be a permutation of the columns");
    order.assign(column_order.begin(), column_order.end());
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n; ++i)
      if (sorted[i] != i) throw InputError("column order must be a permutation of the columns");
  }
  Matrix permuted(a.rows(), n);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < n; ++j) permuted(i, j) = a(i, order[j]);

  const Echelon e = reduce(permuted, tol);
  std::vector<bool> is_pivot(n, false);
  for (auto p : e.pivots) is_pivot[p] = true;

  std::vector<Vector> basis;
  for (std::size_t free = 0; free < n; ++free) {
    if (is_pivot[free]) continue;
    Vector v(n, 0.0);  // in permuted coordinates
    v[free] = 1.0;
    for (std::size_t r = 0; r < e.pivots.size(); ++r) v[e.pivots[r]] = -e.r(r, free);
    Vector original(n);
    for (std::size_t j = 0; j < n; ++j) original[order[j]] = v[j];
    basis.push_back(std::move(original));
  }
  gram_schmidt(basis);
  return basis;
}

std::size_t matrix_rank(const Matrix& a, double tol) {
  if (a.rows() == 0) return 0;
  return reduce(a, tol).pivots.size();
}

Matrix restrict_form(const Matrix& q, const std::vector<Vector>& basis) {
  const Matrix b = Matrix::from_columns(basis);
  if (basis.empty()) return {};
  return b.transpose() * q * b;
}

namespace {

void check_symmetric(const Matrix& q) {
  if (q.rows() != q.cols()) throw InputError("quadratic form must be square");
  for (std::size_t i = 0; i < q.rows(); ++i)
    for (std::size_t j = i + 1; j < q.cols(); ++j)
      if (std::fabs(q(i, j) - q(j, i)) > 1e-10) throw InputError("quadratic form is not symmetric");
}

}  // namespace

Signature signature(const Matrix& q, double zero_tol) {
  check_symmetric(q);
  Signature s;
  if (q.rows() == 0) return s;
  const auto eig = symmetric_eigen(q);
  double largest = 0.0;
  for (double v : eig.values) largest = std::max(largest, std::fabs(v));
  // tiny absolute floor so round-off in an all-zero form reads as zero
  const double threshold = std::max(zero_tol * largest, 1e-14 * std::max(1.0, q.max_abs()));
  for (double v : eig.values) {
    if (std::fabs(v) <= threshold) {
      ++s.n_zero;
    } else if (v > 0) {
      ++s.n_plus;
    } else {
      ++s.n_minus;
    }
  }
  return s;
}

Signature restricted_signature(const Matrix& q, const std::vector<Vector>& basis, double zero_tol) {
  check_symmetric(q);
  for (const auto& v : basis)
    if (v.size() != q.rows()) throw InputError("basis vector dimension mismatch");
  if (basis.empty()) return {};
  Matrix r = restrict_form(q, basis);
  // symmetrize round-off
  for (std::size_t i = 0; i < r.rows(); ++i)
    for (std::size_t j = i + 1; j < r.cols(); ++j) r(i, j) = r(j, i) = 0.5 * (r(i, j) + r(j, i));
  return signature(r, zero_tol);
}

}  // namespace pfaffopt::numerics
