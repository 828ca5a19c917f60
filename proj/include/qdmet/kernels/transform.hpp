#pragma once

#include <Eigen/Dense>

#include "qdmet/integrals.hpp"

// Four-index integral transformation (pq|rs) -> (ab|cd) by the columns of C.
//
// `serial` is the direct quarter-by-quarter reference kept for testing.
// `omp` performs the same contraction as two half transforms over packed
// pair indices, parallel over pairs.
namespace qdmet::kernels {

namespace serial {
TwoBodyTensor transform_two_body(const TwoBodyTensor& eri, const Eigen::MatrixXd& c);
}

namespace omp {
TwoBodyTensor transform_two_body(const TwoBodyTensor& eri, const Eigen::MatrixXd& c);
}

}  // namespace qdmet::kernels
