#pragma once

#include <Eigen/Dense>

namespace nlh {

/// Eigenvalues of a real symmetric matrix, ascending.
Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& A);
/// Full decomposition A = V diag(w) V^T, w ascending.
void sym_eig(const Eigen::MatrixXd& A, Eigen::VectorXd& w, Eigen::MatrixXd& V);

Eigen::VectorXd herm_eigenvalues(const Eigen::MatrixXcd& A);
void herm_eig(const Eigen::MatrixXcd& A, Eigen::VectorXd& w, Eigen::MatrixXcd& V);

/// Largest singular value (spectral norm).
double operator_norm(const Eigen::MatrixXcd& A);

}  // namespace nlh
