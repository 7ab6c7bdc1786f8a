#pragma once

#include <cstdint>
#include <vector>

#include "dmdtrain/matrix.hpp"

namespace dmdtrain::kernels {

// Thread-count control for all OpenMP kernels (process-wide).
void set_threads(int n);
int max_threads();

// Arithmetic-operation tally for the calling thread. Each kernel adds an
// analytic per-call count (one multiply-add pair = 2 ops; complex MAC = 8).
// Per-thread so concurrent fits can meter their own work.
std::uint64_t thread_flops();
void add_flops(std::uint64_t n);

// Every kernel below exists in two variants: a plain-loop serial reference
// and an OpenMP version parallelized over output rows. Both accumulate each
// output element in the same fixed order, so their results are bitwise
// identical; the test suite asserts this.

// C = A * B
RealMatrix matmul_serial(const RealMatrix& a, const RealMatrix& b);
RealMatrix matmul(const RealMatrix& a, const RealMatrix& b);

// C = A^T * B
RealMatrix matmul_transA_serial(const RealMatrix& a, const RealMatrix& b);
RealMatrix matmul_transA(const RealMatrix& a, const RealMatrix& b);

// C = A * B^T
RealMatrix matmul_transB_serial(const RealMatrix& a, const RealMatrix& b);
RealMatrix matmul_transB(const RealMatrix& a, const RealMatrix& b);

// G = A^T * A (symmetric)
RealMatrix gram_serial(const RealMatrix& a);
RealMatrix gram(const RealMatrix& a);

// P = A * Z, real n×r times complex r×k
ComplexMatrix real_times_complex_serial(const RealMatrix& a, const ComplexMatrix& z);
ComplexMatrix real_times_complex(const RealMatrix& a, const ComplexMatrix& z);

// y = Z * c
std::vector<complexd> complex_matvec_serial(const ComplexMatrix& z, const std::vector<complexd>& c);
std::vector<complexd> complex_matvec(const ComplexMatrix& z, const std::vector<complexd>& c);

// b = Z^H * w, conjugate transpose times a real vector
std::vector<complexd> conj_transpose_times_real_serial(const ComplexMatrix& z, const std::vector<double>& w);
std::vector<complexd> conj_transpose_times_real(const ComplexMatrix& z, const std::vector<double>& w);

}  // namespace dmdtrain::kernels
