#pragma once

#include <Eigen/Dense>

#include "qdmet/fci.hpp"
#include "qdmet/qubits.hpp"

// Matrix of a number-conserving Pauli sum inside a fixed-particle sector.
//
// `serial` applies every Pauli string to every basis state one at a time.
// `omp` groups strings by their X mask (one target state per group) and builds
// columns in parallel. Both throw ValidationError if the operator maps a
// sector state out of the sector or has complex matrix elements.
namespace qdmet::kernels {

namespace serial {
Eigen::MatrixXd sector_matrix(const PauliSum& h, const SectorBasis& basis);
}

namespace omp {
Eigen::MatrixXd sector_matrix(const PauliSum& h, const SectorBasis& basis);
}

}  // namespace qdmet::kernels
