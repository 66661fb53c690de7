#include "causalop/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "causalop/error.hpp"

namespace causalop::linalg {

bool is_symmetric(const Eigen::MatrixXd& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

SymmetricEigen jacobi_eigen(Eigen::MatrixXd a, int max_sweeps) {
  const Eigen::Index n = a.rows();
  require(n == a.cols(), Errc::invalid_argument, "jacobi_eigen needs a square matrix");
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double total = std::max(a.norm(), 1e-300);

  int sweep = 0;
  for (;; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= 1e-15 * total) break;
    if (sweep == max_sweeps) fail(Errc::eigen_failure, "Jacobi did not converge");

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) < a(j, j); });

  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  out.sweeps = sweep;
  return out;
}

Eigen::MatrixXd hessenberg(Eigen::MatrixXd a) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index k = 0; k + 2 < n; ++k) {
    Eigen::VectorXd x = a.col(k).tail(n - k - 1);
    const double norm = x.norm();
    if (norm == 0.0) continue;
    const double alpha = x[0] > 0.0 ? -norm : norm;
    x[0] -= alpha;
    const double vnorm = x.norm();
    if (vnorm == 0.0) continue;
    x /= vnorm;
    auto rows = a.bottomRows(n - k - 1);
    rows -= 2.0 * x * (x.transpose() * rows);
    auto cols = a.rightCols(n - k - 1);
    cols -= 2.0 * (cols * x) * x.transpose();
    a.col(k).tail(n - k - 2).setZero();
  }
  return a;
}

std::vector<std::complex<double>> hessenberg_qr(Eigen::MatrixXd a, int max_iterations) {
  const int n = static_cast<int>(a.rows());
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n));
  if (n == 0) return out;

  double anorm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));

  const double eps = std::numeric_limits<double>::epsilon();
  int nn = n - 1;
  int total_iterations = 0;
  double shift = 0.0;
  double p = 0.0, q = 0.0, r = 0.0, s = 0.0, w = 0.0, x = 0.0, y = 0.0, z = 0.0;

  while (nn >= 0) {
    int its = 0;
    int l = 0;
    do {
      for (l = nn; l > 0; --l) {
        s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) <= eps * s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      x = a(nn, nn);
      if (l == nn) {
        out[static_cast<std::size_t>(nn)] = {x + shift, 0.0};
        --nn;
      } else {
        y = a(nn - 1, nn - 1);
        w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          p = 0.5 * (y - x);
          q = p * p + w;
          z = std::sqrt(std::abs(q));
          x += shift;
          if (q >= 0.0) {
            z = p + std::copysign(z, p);
            const double hi = x + z;
            const double lo = z != 0.0 ? x - w / z : hi;
            out[static_cast<std::size_t>(nn - 1)] = {hi, 0.0};
            out[static_cast<std::size_t>(nn)] = {lo, 0.0};
          } else {
            out[static_cast<std::size_t>(nn - 1)] = {x + p, z};
            out[static_cast<std::size_t>(nn)] = {x + p, -z};
          }
          nn -= 2;
        } else {
          if (its == 30 || total_iterations >= max_iterations)
            fail(Errc::eigen_failure, "shifted QR did not converge");
          if (its == 10 || its == 20) {
            // exceptional shift
            shift += x;
            for (int i = 0; i <= nn; ++i) a(i, i) -= x;
            s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          ++total_iterations;
          int m = nn - 2;
          for (; m >= l; --m) {
            z = a(m, m);
            r = x - z;
            s = y - z;
            p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - r - s;
            r = a(m + 2, m + 1);
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
            const double v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
            if (u <= eps * v) break;
          }
          for (int i = m; i < nn - 1; ++i) {
            a(i + 2, i) = 0.0;
            if (i != m) a(i + 2, i - 1) = 0.0;
          }
          for (int k = m; k < nn; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = 0.0;
              if (k + 1 != nn) r = a(k + 2, k - 1);
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            s = std::copysign(std::sqrt(p * p + q * q + r * r), p);
            if (s == 0.0) continue;
            if (k == m) {
              if (l != m) a(k, k - 1) = -a(k, k - 1);
            } else {
              a(k, k - 1) = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            z = r / s;
            q /= p;
            r /= p;
            for (int j = k; j < n; ++j) {
              p = a(k, j) + q * a(k + 1, j);
              if (k + 1 != nn) {
                p += r * a(k + 2, j);
                a(k + 2, j) -= p * z;
              }
              a(k + 1, j) -= p * y;
              a(k, j) -= p * x;
            }
            const int mmin = nn < k + 3 ? nn : k + 3;
            for (int i = 0; i <= mmin; ++i) {
              p = x * a(i, k) + y * a(i, k + 1);
              if (k + 1 != nn) {
                p += z * a(i, k + 2);
                a(i, k + 2) -= p * r;
              }
              a(i, k + 1) -= p * q;
              a(i, k) -= p;
            }
          }
        }
      }
    } while (l + 1 < nn);
  }
  return out;
}

namespace {

// Diagonal similarity scaling by powers of two; leaves eigenvalues unchanged.
void balance(Eigen::MatrixXd& a) {
  constexpr double radix = 2.0;
  constexpr double sqrdx = radix * radix;
  const Eigen::Index n = a.rows();
  bool done = false;
  while (!done) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double r = 0.0;
      double c = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

}  // namespace

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& a) {
  require(a.rows() == a.cols(), Errc::invalid_argument, "eigenvalues needs a square matrix");
  Eigen::MatrixXd work = a;
  balance(work);
  return hessenberg_qr(hessenberg(std::move(work)), 30 * static_cast<int>(a.rows()));
}

Eigen::VectorXcd inverse_iteration(const Eigen::MatrixXd& a, std::complex<double> lambda,
                                   int iterations) {
  const Eigen::Index n = a.rows();
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1.0);
  // Nudge off the exact eigenvalue so the factorisation stays nonsingular.
  const std::complex<double> mu = lambda + std::complex<double>(1.0, 1.0) * (1e-13 * scale);
  Eigen::MatrixXcd shifted = a.cast<std::complex<double>>();
  shifted.diagonal().array() -= mu;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(shifted);

  Eigen::VectorXcd x = Eigen::VectorXcd::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] += std::complex<double>(0.0, 1e-3 * double(i + 1));
  x.normalize();
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXcd y = lu.solve(x);
    const double norm = y.norm();
    require(std::isfinite(norm) && norm > 0.0, Errc::eigen_failure, "inverse iteration broke down");
    x = y / norm;
  }
  return x;
}

}  // namespace causalop::linalg
