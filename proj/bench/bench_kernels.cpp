// Timing comparison between the serial reference kernels and their OpenMP
// counterparts, plus two end-to-end hot paths (a DMD fit and an ADR solve).
// Usage: bench_kernels [threads] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>

#include "dmdtrain/adr.hpp"
#include "dmdtrain/dmd.hpp"
#include "dmdtrain/kernels.hpp"
#include "dmdtrain/matrix.hpp"

using namespace dmdtrain;
using Clock = std::chrono::steady_clock;

namespace {

double time_of(int repeats, const std::function<void()>& fn) {
  fn();  // warm up
  const auto t0 = Clock::now();
  for (int r = 0; r < repeats; ++r) fn();
  return std::chrono::duration<double>(Clock::now() - t0).count() / repeats;
}

RealMatrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  RealMatrix m(rows, cols);
  for (double& v : m.data) v = dist(rng);
  return m;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-28s serial %10.4f ms   omp %10.4f ms   speedup %5.2fx\n", name, serial * 1e3,
              parallel * 1e3, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const int threads = argc > 1 ? std::atoi(argv[1]) : kernels::max_threads();
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 5;
  std::printf("threads: %d, repeats per timing: %d\n", threads, repeats);

  std::mt19937_64 rng(1);
  const RealMatrix snap = random_matrix(100000, 14, rng);
  const RealMatrix a = random_matrix(768, 512, rng);
  const RealMatrix b = random_matrix(512, 256, rng);
  const RealMatrix tall = random_matrix(20000, 64, rng);

  kernels::set_threads(threads);
  report("gram 100000x14", time_of(repeats, [&] { (void)kernels::gram_serial(snap); }),
         time_of(repeats, [&] { (void)kernels::gram(snap); }));
  report("gram 20000x64", time_of(repeats, [&] { (void)kernels::gram_serial(tall); }),
         time_of(repeats, [&] { (void)kernels::gram(tall); }));
  report("matmul 768x512x256", time_of(repeats, [&] { (void)kernels::matmul_serial(a, b); }),
         time_of(repeats, [&] { (void)kernels::matmul(a, b); }));
  report("matmul_transA 768x512x512",
         time_of(repeats, [&] { (void)kernels::matmul_transA_serial(a, a); }),
         time_of(repeats, [&] { (void)kernels::matmul_transA(a, a); }));

  // whole-fit comparison: thread count toggles the inner kernels
  {
    kernels::set_threads(1);
    const double serial = time_of(repeats, [&] { (void)dmd::fit_dmd(snap, 1e-10); });
    kernels::set_threads(threads);
    const double par = time_of(repeats, [&] { (void)dmd::fit_dmd(snap, 1e-10); });
    report("fit_dmd 100000x14", serial, par);
  }

  // one steady ADR solve on the default 64x32 grid (banded direct solver)
  {
    adr::ADRParams p;
    p.K12 = 10.0;
    p.K3 = 1.0;
    p.D = 0.1;
    const adr::BlasiusSolution bl = adr::solve_blasius(p, 10.0, 2000);
    const adr::BoundaryLayerField vel{bl, p};
    const adr::Grid grid;
    const double t = time_of(repeats, [&] { (void)adr::solve_adr(p, grid, vel); });
    std::printf("%-28s %10.4f ms per solve\n", "solve_adr 64x32", t * 1e3);
  }
  return 0;
}
