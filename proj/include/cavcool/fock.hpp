#pragma once

// Truncated single-mode Fock space: ladder operators, displacement operators
// and expectation values. Everything here is dense and templated on the real
// scalar so the same code runs in double or long double.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <sstream>

#include "cavcool/errors.hpp"

namespace cavcool {

using Index = Eigen::Index;

template <typename Real>
using ComplexMatrixT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

using Complex = std::complex<double>;
using ComplexMatrix = ComplexMatrixT<double>;
using ComplexVector = Eigen::VectorXcd;

// Basis |0>, ..., |dim-1> of one bosonic mode.
class FockSpace {
 public:
  explicit FockSpace(Index dim) : dim_(dim) {
    if (dim < 2) {
      throw DomainError("FockSpace: dim must be >= 2, got " + std::to_string(dim));
    }
  }

  Index dim() const { return dim_; }

  bool operator==(const FockSpace&) const = default;

 private:
  Index dim_;
};

inline void require_square(const auto& m, Index dim, const char* what) {
  if (m.rows() != dim || m.cols() != dim) {
    std::ostringstream msg;
    msg << what << ": expected " << dim << "x" << dim << ", got " << m.rows() << "x" << m.cols();
    throw DimensionMismatch(msg.str());
  }
}

template <typename Real = double>
ComplexMatrixT<Real> identity(const FockSpace& space) {
  return ComplexMatrixT<Real>::Identity(space.dim(), space.dim());
}

// <n-1|a|n> = sqrt(n).
template <typename Real = double>
ComplexMatrixT<Real> annihilation(const FockSpace& space) {
  ComplexMatrixT<Real> a = ComplexMatrixT<Real>::Zero(space.dim(), space.dim());
  for (Index n = 1; n < space.dim(); ++n) {
    a(n - 1, n) = std::sqrt(static_cast<Real>(n));
  }
  return a;
}

template <typename Real = double>
ComplexMatrixT<Real> creation(const FockSpace& space) {
  return annihilation<Real>(space).adjoint();
}

template <typename Real = double>
ComplexMatrixT<Real> number(const FockSpace& space) {
  ComplexMatrixT<Real> n = ComplexMatrixT<Real>::Zero(space.dim(), space.dim());
  for (Index k = 0; k < space.dim(); ++k) {
    n(k, k) = static_cast<Real>(k);
  }
  return n;
}

// Parity operator diag((-1)^n).
template <typename Real = double>
ComplexMatrixT<Real> parity(const FockSpace& space) {
  ComplexMatrixT<Real> p = ComplexMatrixT<Real>::Zero(space.dim(), space.dim());
  for (Index k = 0; k < space.dim(); ++k) {
    p(k, k) = (k % 2 == 0) ? Real(1) : Real(-1);
  }
  return p;
}

// D(g) = exp(g a^dag - g^* a) on the truncated space.
//
// The anti-Hermitian generator G is exponentiated through the Hermitian
// eigendecomposition of iG = V diag(lambda) V^dag, giving
// D = V diag(exp(-i lambda)) V^dag, unitary to floating-point accuracy.
template <typename Real = double>
ComplexMatrixT<Real> displacement(const FockSpace& space, std::complex<Real> g) {
  if (!std::isfinite(g.real()) || !std::isfinite(g.imag())) {
    throw DomainError("displacement: coupling must be finite");
  }
  if (g == std::complex<Real>(0)) {
    return identity<Real>(space);
  }
  const ComplexMatrixT<Real> a = annihilation<Real>(space);
  const std::complex<Real> i(0, 1);
  const ComplexMatrixT<Real> hermitian = i * (g * a.adjoint() - std::conj(g) * a);
  Eigen::SelfAdjointEigenSolver<ComplexMatrixT<Real>> eig(hermitian);
  if (eig.info() != Eigen::Success) {
    throw Error("displacement: eigendecomposition failed");
  }
  const auto& vecs = eig.eigenvectors();
  const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1> phases =
      (-i * eig.eigenvalues().template cast<std::complex<Real>>()).array().exp();
  return vecs * phases.asDiagonal() * vecs.adjoint();
}

// max |(U^dag U - I)_{mn}| over m, n < block.
template <typename Real>
Real unitarity_defect(const ComplexMatrixT<Real>& u, Index block) {
  block = std::min(block, u.cols());
  const ComplexMatrixT<Real> gram = u.leftCols(block).adjoint() * u.leftCols(block);
  return (gram - ComplexMatrixT<Real>::Identity(block, block)).cwiseAbs().maxCoeff();
}

inline constexpr double kUnitarityTolerance = 1e-8;

// Truncation check on the lower half of the basis. The truncated exponential
// is unitary to rounding, so leakage shows up in the shift identity
// D^dag a D = a + g instead; both defects are compared against tol.
template <typename Real>
Real shift_defect(const ComplexMatrixT<Real>& u, std::complex<Real> g, Index block) {
  const FockSpace space(u.cols());
  block = std::min(block, u.cols());
  const ComplexMatrixT<Real> a = annihilation<Real>(space);
  ComplexMatrixT<Real> shifted = u.adjoint() * a * u.leftCols(block) - a.leftCols(block);
  shifted.topRows(block).diagonal() -= ComplexMatrixT<Real>::Constant(block, 1, g);
  return shifted.topRows(block).cwiseAbs().maxCoeff();
}

template <typename Real>
std::optional<Warning> check_unitarity(const ComplexMatrixT<Real>& u, std::complex<Real> g,
                                       double tol = kUnitarityTolerance) {
  const Index half = u.cols() / 2;
  const double defect = static_cast<double>(
      std::max(unitarity_defect<Real>(u, half), shift_defect<Real>(u, g, half)));
  if (defect > tol) {
    std::ostringstream msg;
    msg << "displacement by |g|=" << std::abs(g) << " deviates by " << defect
        << " on the lower half-basis (dim=" << u.cols() << ")";
    return Warning{"TruncationWarning", msg.str()};
  }
  return std::nullopt;
}

// Tr(op * rho).
template <typename Real>
std::complex<Real> expectation(const ComplexMatrixT<Real>& op, const ComplexMatrixT<Real>& rho) {
  if (op.rows() != rho.rows() || op.cols() != rho.cols() || op.rows() != op.cols()) {
    std::ostringstream msg;
    msg << "expectation: operator is " << op.rows() << "x" << op.cols() << " but state is "
        << rho.rows() << "x" << rho.cols();
    throw DimensionMismatch(msg.str());
  }
  return op.cwiseProduct(rho.transpose()).sum();
}

// Suggested truncation for a thermal state of occupation nbar kicked by |g|.
inline Index recommended_dim(double nbar, double g_abs) {
  const auto thermal = static_cast<Index>(std::ceil(8.0 * (nbar + 1.0)));
  const auto spread = static_cast<Index>(std::ceil(16.0 * g_abs * g_abs));
  return std::max<Index>(32, thermal + spread + 16);
}

}  // namespace cavcool
