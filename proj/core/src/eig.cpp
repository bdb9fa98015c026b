#include "nlh/eig.hpp"

#include <complex>
#define lapack_complex_double std::complex<double>
#define lapack_complex_float std::complex<float>
#include <lapacke.h>

#include "nlh/common.hpp"

namespace nlh {

Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& A) {
  Eigen::MatrixXd work = A;
  Eigen::VectorXd w(A.rows());
  int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', static_cast<int>(A.rows()), work.data(),
                            static_cast<int>(A.rows()), w.data());
  if (info != 0) throw NumericalError("dsyevd failed, info=" + std::to_string(info));
  return w;
}

void sym_eig(const Eigen::MatrixXd& A, Eigen::VectorXd& w, Eigen::MatrixXd& V) {
  V = A;
  w.resize(A.rows());
  int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<int>(A.rows()), V.data(),
                            static_cast<int>(A.rows()), w.data());
  if (info != 0) throw NumericalError("dsyevd failed, info=" + std::to_string(info));
}

Eigen::VectorXd herm_eigenvalues(const Eigen::MatrixXcd& A) {
  Eigen::MatrixXcd work = A;
  Eigen::VectorXd w(A.rows());
  int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', static_cast<int>(A.rows()), work.data(),
                            static_cast<int>(A.rows()), w.data());
  if (info != 0) throw NumericalError("zheevd failed, info=" + std::to_string(info));
  return w;
}

void herm_eig(const Eigen::MatrixXcd& A, Eigen::VectorXd& w, Eigen::MatrixXcd& V) {
  V = A;
  w.resize(A.rows());
  int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<int>(A.rows()), V.data(),
                            static_cast<int>(A.rows()), w.data());
  if (info != 0) throw NumericalError("zheevd failed, info=" + std::to_string(info));
}

double operator_norm(const Eigen::MatrixXcd& A) {
  if (A.rows() == 0 || A.cols() == 0) return 0.0;
  Eigen::MatrixXcd G = A.adjoint() * A;
  Eigen::VectorXd w = herm_eigenvalues(G);
  return std::sqrt(std::max(0.0, w[w.size() - 1]));
}

}  // namespace nlh
