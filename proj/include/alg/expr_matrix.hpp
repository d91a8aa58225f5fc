#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "alg/expr.hpp"

namespace alg {

// Dense matrix of symbolic entries, row-major.
class ExprMatrix {
 public:
  ExprMatrix() = default;
  ExprMatrix(int rows, int cols);
  static ExprMatrix identity(int n);
  static ExprMatrix from_numeric(const Eigen::MatrixXd& m);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Expr& at(int r, int c);
  const Expr& at(int r, int c) const;

  std::vector<Expr> column(int c) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Expr> entries_;
};

ExprMatrix mul(const ExprMatrix& a, const ExprMatrix& b);

// Matrix * column vector, symbolically.
std::vector<Expr> matvec(const ExprMatrix& m, std::span<const Expr> v);

ExprMatrix substitute(const ExprMatrix& m,
                      std::span<const std::pair<std::string, Expr>> bindings);

Eigen::MatrixXd eval(const ExprMatrix& m, const EvalEnv& env);

}  // namespace alg
