#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace phikrylov {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/** @brief Eigenvalues/eigenvectors of a real square matrix. */
struct EigenDecomp {
  CVector values;
  CMatrix vectors;           ///< column j pairs with values[j], unit 2-norm
  std::vector<Index> partner;  ///< index of the conjugate partner, -1 for real values
};

/** @brief Solve MX = B by partial-pivot LU; throws SingularMatrix on a tiny pivot. */
Matrix lu_solve(const Matrix& M, const Matrix& B);

/** @brief Eigen-decomposition of a general real square matrix. */
EigenDecomp eig(const Matrix& M);

/**
 * @brief Eigen-decomposition of an upper Hessenberg matrix.
 * @throws Error(InvalidArgument) if entries below the subdiagonal are not negligible,
 *         Error(NoConvergence) if the QR iteration exceeds 30*k sweeps.
 */
EigenDecomp hess_eig(const Matrix& H);

/** @brief Matrix exponential by scaling and squaring with Padé approximants. */
Matrix expm(const Matrix& M);

/**
 * @brief phi_l(M) b for l = 0..s from one exponential of the augmented matrix
 *        [[M, b e1^T], [0, J_s]].
 */
std::vector<Vector> phi_col(const Matrix& M, const Vector& b, int s);

/** @brief Truncated Taylor series sum_m M^m b / (m+l)!, valid for ||M||_1 <= 4. */
Vector phi_taylor_oracle(const Matrix& M, const Vector& b, int ell);

/**
 * @brief phi_l(M) b for l = 0..s by a scaled Taylor exponential of the augmented
 *        matrix followed by repeated squaring. Slow; meant as a reference.
 */
std::vector<Vector> phi_taylor_reference(const Matrix& M, const Vector& b, int s);

/** @brief Scalar phi_l(z) for real z. */
double phi_scalar(double z, int ell);

/** @brief 1/n! as a double. */
double inv_factorial(int n);

}  // namespace phikrylov
