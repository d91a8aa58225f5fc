#include "alg/expr_matrix.hpp"

#include "alg/errors.hpp"

namespace alg {

ExprMatrix::ExprMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), entries_(std::size_t(rows) * cols) {
  if (rows < 0 || cols < 0) throw ShapeError("ExprMatrix: negative shape");
}

ExprMatrix ExprMatrix::identity(int n) {
  ExprMatrix m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = Expr::constant(1.0);
  return m;
}

ExprMatrix ExprMatrix::from_numeric(const Eigen::MatrixXd& src) {
  ExprMatrix m(int(src.rows()), int(src.cols()));
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      m.at(r, c) = Expr::constant(src(r, c));
    }
  }
  return m;
}

Expr& ExprMatrix::at(int r, int c) {
  return entries_[std::size_t(r) * cols_ + c];
}

const Expr& ExprMatrix::at(int r, int c) const {
  return entries_[std::size_t(r) * cols_ + c];
}

std::vector<Expr> ExprMatrix::column(int c) const {
  std::vector<Expr> out;
  out.reserve(rows_);
  for (int r = 0; r < rows_; ++r) out.push_back(at(r, c));
  return out;
}

ExprMatrix mul(const ExprMatrix& a, const ExprMatrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("ExprMatrix mul: " + std::to_string(a.cols()) + " vs " +
                     std::to_string(b.rows()));
  }
  ExprMatrix out(a.rows(), b.cols());
  for (int r = 0; r < a.rows(); ++r) {
    for (int c = 0; c < b.cols(); ++c) {
      Expr acc = Expr::constant(0.0);
      for (int k = 0; k < a.cols(); ++k) {
        acc = acc + a.at(r, k) * b.at(k, c);
      }
      out.at(r, c) = acc;
    }
  }
  return out;
}

std::vector<Expr> matvec(const ExprMatrix& m, std::span<const Expr> v) {
  if (m.cols() != int(v.size())) {
    throw ShapeError("ExprMatrix matvec: " + std::to_string(m.cols()) +
                     " cols vs vector of " + std::to_string(v.size()));
  }
  std::vector<Expr> out;
  out.reserve(m.rows());
  for (int r = 0; r < m.rows(); ++r) {
    Expr acc = Expr::constant(0.0);
    for (int c = 0; c < m.cols(); ++c) acc = acc + m.at(r, c) * v[c];
    out.push_back(acc);
  }
  return out;
}

ExprMatrix substitute(const ExprMatrix& m,
                      std::span<const std::pair<std::string, Expr>> bindings) {
  ExprMatrix out(m.rows(), m.cols());
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      out.at(r, c) = substitute(m.at(r, c), bindings);
    }
  }
  return out;
}

Eigen::MatrixXd eval(const ExprMatrix& m, const EvalEnv& env) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) out(r, c) = eval(m.at(r, c), env);
  }
  return out;
}

}  // namespace alg
