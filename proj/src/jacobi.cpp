#include "mlz/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mlz/errors.hpp"

namespace mlz {

namespace {

double off_norm(const CMatrix& a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i != j) {
        s += std::norm(a(i, j));
      }
    }
  }
  return std::sqrt(s);
}

} // namespace

HermitianEigen jacobi_eigen(const CMatrix& h, double tolerance, int max_sweeps) {
  const Eigen::Index n = h.rows();
  // Work on the Hermitian part so round-off asymmetry in the input is ignored.
  CMatrix a = 0.5 * (h + h.adjoint());
  CMatrix v = CMatrix::Identity(n, n);
  const double threshold = tolerance * std::max(1.0, a.norm());

  int sweep = 0;
  while (off_norm(a) > threshold) {
    if (sweep == max_sweeps) {
      throw EigensolverNoConvergence("Jacobi eigensolver did not converge");
    }
    ++sweep;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag == 0.0) {
          continue;
        }
        // Unitary rotation in the (p, q) plane:
        //   G = [[c, -s e^{i phi}], [s e^{-i phi}, c]],  e^{i phi} = apq / |apq|
        // chosen so that (G^H A G)_{pq} = 0.
        const Complex phase = apq / mag;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (app - aqq) / (2.0 * mag);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const Complex sp = s * phase;           // s e^{i phi}
        const Complex sm = s * std::conj(phase); // s e^{-i phi}

        // A <- A G (columns p, q)
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex akp = a(k, p);
          const Complex akq = a(k, q);
          a(k, p) = c * akp + sm * akq;
          a(k, q) = -sp * akp + c * akq;
        }
        // A <- G^H A (rows p, q)
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex apk = a(p, k);
          const Complex aqk = a(q, k);
          a(p, k) = c * apk + sp * aqk;
          a(q, k) = -sm * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex vkp = v(k, p);
          const Complex vkq = v(k, q);
          v(k, p) = c * vkp + sm * vkq;
          v(k, q) = -sp * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&a](Eigen::Index x, Eigen::Index y) { return a(x, x).real() < a(y, y).real(); });

  HermitianEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]).real();
    out.vectors.col(k) = v.col(order[k]);
  }
  out.sweeps = sweep;
  return out;
}

} // namespace mlz
