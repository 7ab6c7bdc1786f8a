#pragma once

#include <vector>

#include "dmdtrain/matrix.hpp"

namespace dmdtrain::linalg {

// Truncated SVD factors of a tall matrix: W ≈ U * diag(sigma) * V^T.
struct SVDFactors {
  RealMatrix U;               // n×r, orthonormal columns
  std::vector<double> sigma;  // length r, positive, non-increasing
  RealMatrix V;               // m×r, orthonormal columns
  int rank = 0;
};

struct ComplexEigenSystem {
  std::vector<complexd> values;  // sorted by descending modulus, conjugate-closed
  ComplexMatrix vectors;         // r×r; column i pairs with values[i]; unit 2-norm
};

// Number of singular values with sigma[i]/sigma[0] > tol. Throws on sigma[0] == 0.
int select_rank(const std::vector<double>& sigma, double tol);

// Economy SVD of a tall matrix (n >= m) through the m×m Gram matrix W^T W:
// symmetric eigendecomposition gives V and sigma = sqrt(eigenvalues), then
// U = W V Σ^{-1}. Costs O(n m^2) instead of the O(n^2 m) of a row-side SVD.
// Truncation: singular values below sigma[0]*1e-14 are zeroed, then
// select_rank(sigma, tol) picks r. Sign fixing: each V column's largest-
// magnitude entry is made positive.
SVDFactors gram_svd(const RealMatrix& w, double tol);

// Full eigendecomposition of a small dense real matrix (generally
// non-symmetric). Eigenvalues via Householder Hessenberg reduction and
// Francis double-shift QR; eigenvectors via complex inverse iteration.
// Complex eigenvalues of the real input come in exactly conjugate pairs.
ComplexEigenSystem eig_general(const RealMatrix& a);

// Cyclic Jacobi eigendecomposition of a symmetric matrix; eigenvalues are
// returned in descending order with matching eigenvector columns.
void jacobi_symmetric_eig(const RealMatrix& a, std::vector<double>& eigenvalues,
                          RealMatrix& eigenvectors);

}  // namespace dmdtrain::linalg
