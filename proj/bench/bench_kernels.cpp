// Serial reference loops against the OpenMP kernels.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "qdmet/fci.hpp"
#include "qdmet/integrals.hpp"
#include "qdmet/kernels/sector.hpp"
#include "qdmet/kernels/statevector.hpp"
#include "qdmet/kernels/transform.hpp"
#include "qdmet/qubits.hpp"

namespace k = qdmet::kernels;
using qdmet::cplx;

namespace {

std::vector<cplx> random_state(std::size_t n_qubits) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<cplx> v(std::size_t{1} << n_qubits);
  for (auto& a : v) a = {g(rng), g(rng)};
  return v;
}

// X on the low half, Z on the high half: touches every amplitude with a phase.
std::uint64_t x_mask(std::size_t n) { return (std::uint64_t{1} << (n / 2)) - 1; }
std::uint64_t z_mask(std::size_t n) { return ((std::uint64_t{1} << n) - 1) ^ (x_mask(n) >> 1); }

template <auto Kernel>
void BM_apply_pauli(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto in = random_state(n);
  std::vector<cplx> out(in.size());
  for (auto _ : state) {
    Kernel(in, out, x_mask(n), z_mask(n), cplx(0.5, 0.0));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(in.size()));
}

template <auto Kernel>
void BM_pauli_expectation(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto psi = random_state(n);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(psi, x_mask(n), z_mask(n)));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(psi.size()));
}

template <auto Kernel>
void BM_pauli_rotation(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto psi = random_state(n);
  for (auto _ : state) {
    Kernel(psi, x_mask(n), z_mask(n), 1e-3);
    benchmark::DoNotOptimize(psi.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(psi.size()));
}

qdmet::IntegralSet chain(std::size_t n) { return qdmet::build_hubbard({n, 1.0, 4.0, true, -1}); }

template <auto Kernel>
void BM_transform_two_body(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  qdmet::TwoBodyTensor eri(n);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q <= p; ++q)
      for (std::size_t r = 0; r <= p; ++r)
        for (std::size_t s = 0; s <= r; ++s) eri.set(p, q, r, s, g(rng));
  const Eigen::MatrixXd c = Eigen::MatrixXd::Random(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(eri, c));
}

template <auto Kernel>
void BM_sector_matrix(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const qdmet::PauliSum h = qdmet::qubit_hamiltonian(chain(n));
  const qdmet::SectorBasis basis(2 * n, static_cast<int>(n), 0);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(h, basis));
}

}  // namespace

BENCHMARK(BM_apply_pauli<k::serial::apply_pauli>)->Name("apply_pauli/serial")->DenseRange(12, 20, 4);
BENCHMARK(BM_apply_pauli<k::omp::apply_pauli>)->Name("apply_pauli/omp")->DenseRange(12, 20, 4);
BENCHMARK(BM_pauli_expectation<k::serial::pauli_expectation>)->Name("pauli_expectation/serial")->DenseRange(12, 20, 4);
BENCHMARK(BM_pauli_expectation<k::omp::pauli_expectation>)->Name("pauli_expectation/omp")->DenseRange(12, 20, 4);
BENCHMARK(BM_pauli_rotation<k::serial::pauli_rotation>)->Name("pauli_rotation/serial")->DenseRange(12, 20, 4);
BENCHMARK(BM_pauli_rotation<k::omp::pauli_rotation>)->Name("pauli_rotation/omp")->DenseRange(12, 20, 4);
BENCHMARK(BM_transform_two_body<k::serial::transform_two_body>)->Name("transform_two_body/serial")->Arg(8)->Arg(16);
BENCHMARK(BM_transform_two_body<k::omp::transform_two_body>)->Name("transform_two_body/omp")->Arg(8)->Arg(16);
BENCHMARK(BM_sector_matrix<k::serial::sector_matrix>)->Name("sector_matrix/serial")->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sector_matrix<k::omp::sector_matrix>)->Name("sector_matrix/omp")->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
