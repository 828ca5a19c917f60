#include "qdmet/kernels/transform.hpp"

#include <vector>

namespace qdmet::kernels {

namespace serial {

TwoBodyTensor transform_two_body(const TwoBodyTensor& eri, const Eigen::MatrixXd& c) {
  const auto n = static_cast<std::size_t>(c.rows());
  const auto m = static_cast<std::size_t>(c.cols());
  std::vector<double> a = eri.dense();
  std::vector<double> b(n * n * n * m, 0.0);

  // Contract one index at a time, always on the last slot, rotating the
  // tensor so the next untransformed index becomes last.
  auto quarter = [&](const std::vector<double>& in, std::size_t d0, std::size_t d1,
                     std::size_t d2, std::size_t d3) {
    // in: [d0][d1][d2][d3] -> out: [d3'][d0][d1][d2], d3' in 0..m
    std::vector<double> out(m * d0 * d1 * d2, 0.0);
    for (std::size_t i = 0; i < d0; ++i)
      for (std::size_t j = 0; j < d1; ++j)
        for (std::size_t k = 0; k < d2; ++k)
          for (std::size_t x = 0; x < m; ++x) {
            double sum = 0.0;
            for (std::size_t l = 0; l < d3; ++l)
              sum += c(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(x)) *
                     in[((i * d1 + j) * d2 + k) * d3 + l];
            out[((x * d0 + i) * d1 + j) * d2 + k] = sum;
          }
    return out;
  };
  a = quarter(a, n, n, n, n);  // [s'][p][q][r]
  a = quarter(a, m, n, n, n);  // [r'][s'][p][q]
  a = quarter(a, m, m, n, n);  // [q'][r'][s'][p]
  a = quarter(a, m, m, m, n);  // [p'][q'][r'][s']
  return TwoBodyTensor::from_dense(m, a);
}

}  // namespace serial

namespace omp {

TwoBodyTensor transform_two_body(const TwoBodyTensor& eri, const Eigen::MatrixXd& c) {
  const auto n = static_cast<Eigen::Index>(c.rows());
  const auto m = static_cast<Eigen::Index>(c.cols());
  const Eigen::Index npair_in = n * (n + 1) / 2;
  const Eigen::Index npair_out = m * (m + 1) / 2;

  // half[pq][ab] = sum_rs C_ra C_sb (pq|rs)
  Eigen::MatrixXd half(npair_in, npair_out);
#pragma omp parallel
  {
    Eigen::MatrixXd slice(n, n);
    Eigen::MatrixXd rotated(m, m);
#pragma omp for schedule(static)
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = 0; q <= p; ++q) {
        for (Eigen::Index r = 0; r < n; ++r)
          for (Eigen::Index s = 0; s <= r; ++s) {
            const double v = eri(p, q, r, s);
            slice(r, s) = v;
            slice(s, r) = v;
          }
        rotated.noalias() = c.transpose() * slice * c;
        const Eigen::Index pq = p * (p + 1) / 2 + q;
        for (Eigen::Index a = 0; a < m; ++a)
          for (Eigen::Index b = 0; b <= a; ++b) half(pq, a * (a + 1) / 2 + b) = rotated(a, b);
      }
    }
  }

  TwoBodyTensor out(static_cast<std::size_t>(m));
  auto packed = out.packed();
#pragma omp parallel
  {
    Eigen::MatrixXd slice(n, n);
    Eigen::MatrixXd rotated(m, m);
#pragma omp for schedule(static)
    for (Eigen::Index ab = 0; ab < npair_out; ++ab) {
      for (Eigen::Index p = 0; p < n; ++p)
        for (Eigen::Index q = 0; q <= p; ++q) {
          const double v = half(p * (p + 1) / 2 + q, ab);
          slice(p, q) = v;
          slice(q, p) = v;
        }
      rotated.noalias() = c.transpose() * slice * c;
      // Only canonical (cd) >= (ab) slots are written by this ab.
      for (Eigen::Index cc = 0; cc < m; ++cc)
        for (Eigen::Index d = 0; d <= cc; ++d) {
          const Eigen::Index cd = cc * (cc + 1) / 2 + d;
          if (cd < ab) continue;
          packed[TwoBodyTensor::pair_index(static_cast<std::size_t>(cd),
                                           static_cast<std::size_t>(ab))] = rotated(cc, d);
        }
    }
  }
  return out;
}

}  // namespace omp

}  // namespace qdmet::kernels
