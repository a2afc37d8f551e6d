#pragma once

// Closed-form results for thermal inputs. These are the independent oracles the
// numerical engine is checked against; none of them touch a density matrix.

#include <cmath>
#include <complex>
#include <optional>

#include "cavcool/errors.hpp"
#include "cavcool/fock.hpp"

namespace cavcool::analytic {

// Exact probability of finding one electron in |+> after D(g) acts on a
// thermal state: (1 + exp(-|g|^2 (nbar + 1/2))) / 2.
template <typename Real>
Real p_plus_exact(Real nbar, std::complex<Real> g) {
  return Real(0.5) * (Real(1) + std::exp(-std::norm(g) * (nbar + Real(0.5))));
}

// Photon number after one cooling block, leading order in |g|^2.
template <typename Real>
Real nbar_one_round(Real nbar0, std::complex<Real> g) {
  return nbar0 * (Real(1) - Real(2) * std::norm(g) * (nbar0 + Real(1)));
}

// Probability that all four electrons of one block select |+>, leading order.
template <typename Real>
Real prob_one_round(Real nbar0, std::complex<Real> g) {
  return Real(1) - std::norm(g) * (Real(2) * nbar0 + Real(1));
}

// Compounded k-block forms with the temperature factor frozen at nbar0.
// Valid for k << |g|^-2; k = 1 reproduces the one-round values bitwise.
template <typename Real>
Real nbar_k_rounds(Real nbar0, std::complex<Real> g, int k) {
  if (k < 0) {
    throw DomainError("nbar_k_rounds: k must be non-negative");
  }
  const Real factor = Real(1) - Real(2) * std::norm(g) * (nbar0 + Real(1));
  Real value = nbar0;
  for (int i = 0; i < k; ++i) {
    value = value * factor;
  }
  return value;
}

template <typename Real>
Real prob_k_rounds(Real nbar0, std::complex<Real> g, int k) {
  if (k < 0) {
    throw DomainError("prob_k_rounds: k must be non-negative");
  }
  const Real factor = Real(1) - std::norm(g) * (Real(2) * nbar0 + Real(1));
  if (k == 0) {
    return Real(1);
  }
  Real value = factor;
  for (int i = 1; i < k; ++i) {
    value = value * factor;
  }
  return value;
}

// Linearized k-block forms.
template <typename Real>
Real nbar_k_rounds_linear(Real nbar0, std::complex<Real> g, int k) {
  return nbar0 * (Real(1) - Real(2) * Real(k) * std::norm(g) * (nbar0 + Real(1)));
}

template <typename Real>
Real prob_k_rounds_linear(Real nbar0, std::complex<Real> g, int k) {
  return Real(1) - Real(k) * std::norm(g) * (Real(2) * nbar0 + Real(1));
}

// <m|D(g)|m> = exp(-|g|^2/2) sum_{j<=m} C(m,j) (-|g|^2)^j / j!, i.e. a
// Laguerre polynomial L_m(|g|^2) times the Gaussian.
template <typename Real>
Real displacement_diagonal(int m, std::complex<Real> g) {
  const Real x = std::norm(g);
  Real term = Real(1);  // C(m, j) (-x)^j / j! at j = 0
  Real sum = term;
  for (int j = 1; j <= m; ++j) {
    term *= -x * Real(m - j + 1) / (Real(j) * Real(j));
    sum += term;
  }
  return std::exp(-x / Real(2)) * sum;
}

// 1 - |g|^2 (a^dag a + (1 - i)/2), the block Kraus product to order |g|^2.
template <typename Real = double>
ComplexMatrixT<Real> d_ocb_approx_matrix(const FockSpace& space, std::complex<Real> g) {
  const Real g2 = std::norm(g);
  ComplexMatrixT<Real> m = ComplexMatrixT<Real>::Zero(space.dim(), space.dim());
  for (Index n = 0; n < space.dim(); ++n) {
    m(n, n) = std::complex<Real>(Real(1) - Real(0.5) * g2 * (Real(2 * n) + Real(1)),
                                 Real(0.5) * g2);
  }
  return m;
}

enum class Order { one_round, k_rounds };

struct PerturbativePrediction {
  double nbar_pred;
  double prob_pred;
  Order order;
  int rounds;
};

inline PerturbativePrediction predict(double nbar0, Complex g, int k = 1) {
  if (k == 1) {
    return {nbar_one_round(nbar0, g), prob_one_round(nbar0, g), Order::one_round, 1};
  }
  return {nbar_k_rounds(nbar0, g, k), prob_k_rounds(nbar0, g, k), Order::k_rounds, k};
}

// The expansion parameter |g|^2 (2 nbar + 1); above 0.5 the leading-order
// forms are no longer trustworthy.
inline std::optional<Warning> validity_warning(double nbar0, Complex g) {
  const double x = std::norm(g) * (2.0 * nbar0 + 1.0);
  if (x > 0.5) {
    return Warning{"ValidityWarning", "|g|^2 (2 nbar + 1) = " + std::to_string(x) +
                                          " is outside the perturbative regime"};
  }
  return std::nullopt;
}

}  // namespace cavcool::analytic
