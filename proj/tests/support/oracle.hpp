#pragma once
// Independent reference implementations used by the tests. Nothing here calls
// into the library except for plain data types.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

namespace oracle {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;

// single-site operators in the basis (|empty>, |occupied>)
inline Mat pauli(char which) {
  Mat m = Mat::Zero(2, 2);
  switch (which) {
    case 'x': m(0, 1) = 1; m(1, 0) = 1; break;
    case 'y': m(0, 1) = cd(0, -1); m(1, 0) = cd(0, 1); break;
    case 'z': m(0, 0) = -1; m(1, 1) = 1; break;
    default: m = Mat::Identity(2, 2);
  }
  return m;
}

// Operator acting with `op` on `site` of an n-site chain. Full-space index
// = sum_i occ_i 2^i, so site n-1 is the leftmost Kronecker factor.
inline Mat site_op(int n, int site, char op) {
  Mat out = Mat::Identity(1, 1);
  for (int s = n - 1; s >= 0; --s) {
    const Mat f = s == site ? pauli(op) : Mat::Identity(2, 2);
    Mat next = Eigen::kroneckerProduct(out, f).eval();
    out = next;
  }
  return out;
}

inline Mat full_hamiltonian(int n, double J, double delta, const std::vector<double>& fields) {
  const Eigen::Index d = Eigen::Index{1} << n;
  Mat H = Mat::Zero(d, d);
  for (int i = 0; i + 1 < n; ++i) {
    H += J * (site_op(n, i, 'x') * site_op(n, i + 1, 'x') + site_op(n, i, 'y') * site_op(n, i + 1, 'y') +
              delta * site_op(n, i, 'z') * site_op(n, i + 1, 'z'));
  }
  for (int i = 0; i < n; ++i) H += fields[static_cast<std::size_t>(i)] * site_op(n, i, 'z');
  return H;
}

inline Mat propagator(const Mat& H, double dt) {
  const Mat A = (cd(0, -dt) * H).eval();
  return A.exp();
}

struct Kick {
  int site;
  double time;
};

// Pure-state evolution in the full 2^n space, recording |psi><psi| at each
// sample time. Kicks at time <= sample time are applied before recording.
inline std::vector<Mat> evolve_with_kicks(int n, const Mat& H, Eigen::VectorXcd psi,
                                          const std::vector<Kick>& kicks, const std::vector<double>& times) {
  std::vector<Mat> out;
  double t = 0.0;
  std::size_t next = 0;
  for (double ts : times) {
    while (next < kicks.size() && kicks[next].time <= ts) {
      psi = propagator(H, kicks[next].time - t) * psi;
      t = kicks[next].time;
      psi = site_op(n, kicks[next].site, 'z') * psi;
      ++next;
    }
    psi = propagator(H, ts - t) * psi;
    t = ts;
    out.push_back(psi * psi.adjoint());
  }
  return out;
}

inline double weibull_cdf(double t, double nu, double rc) {
  const double mu = 1.0 / (rc * std::tgamma(1.0 + 1.0 / nu));
  return t <= 0.0 ? 0.0 : 1.0 - std::exp(-std::pow(t / mu, nu));
}

// Asymptotic Kolmogorov tail with the Stephens small-sample correction.
inline double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

template <class Cdf>
double ks_statistic(std::vector<double> x, Cdf cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

// Von Neumann entropy (natural log) of the reduced state of the first `cut`
// sites, from the full-space state vector by explicit partial trace.
inline double entropy_left(int n, int cut, const Eigen::VectorXcd& psi) {
  const Eigen::Index dl = Eigen::Index{1} << cut;
  const Eigen::Index dr = Eigen::Index{1} << (n - cut);
  Mat A(dl, dr);
  for (Eigen::Index r = 0; r < dr; ++r)
    for (Eigen::Index l = 0; l < dl; ++l) A(l, r) = psi(l + r * dl);
  const Mat rho = A * A.adjoint();
  Eigen::SelfAdjointEigenSolver<Mat> es(rho);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double p = es.eigenvalues()(i);
    if (p > 1e-14) s -= p * std::log(p);
  }
  return s;
}

inline std::uint64_t binomial_pascal(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::vector<std::uint64_t> row{1};
  for (int i = 1; i <= n; ++i) {
    std::vector<std::uint64_t> next(row.size() + 1, 1);
    for (std::size_t j = 1; j < row.size(); ++j) next[j] = row[j - 1] + row[j];
    row = std::move(next);
  }
  return row[static_cast<std::size_t>(k)];
}

}  // namespace oracle
