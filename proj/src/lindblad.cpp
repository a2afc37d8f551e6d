#include "cavcool/lindblad.hpp"

#include <cmath>
#include <sstream>

namespace cavcool {

void BathSpec::validate() const {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
    throw InvalidConfig("bath: kappa must be finite and non-negative");
  }
  if (!(nbar_bath >= 0.0) || !std::isfinite(nbar_bath)) {
    throw InvalidConfig("bath: nbar_bath must be finite and non-negative");
  }
}

void IntegratorSpec::validate() const {
  if (!(max_step > 0.0) || !std::isfinite(max_step)) {
    throw InvalidConfig("integrator: max_step must be positive");
  }
}

namespace {

// Precomputed elementwise factors so one RHS evaluation is O(dim^2):
//   (a rho a^dag)_{ij}   = s_i s_j rho_{i+1,j+1}
//   (a^dag rho a)_{ij}   = s_{i-1} s_{j-1} rho_{i-1,j-1}
//   (N rho + rho N)_{ij} = (i + j) rho_{ij}
//   (a a^dag) = diag(1, 2, ..., dim-1, 0) in the truncated space
struct Generator {
  Generator(Index dim, double nbar_bath)
      : dim(dim), up(nbar_bath + 1.0), down(nbar_bath), ladder(dim - 1, dim - 1),
        loss(dim, dim) {
    for (Index i = 0; i < dim - 1; ++i) {
      for (Index j = 0; j < dim - 1; ++j) {
        ladder(i, j) = 2.0 * std::sqrt(static_cast<double>((i + 1) * (j + 1)));
      }
    }
    auto aad = [dim](Index i) { return i + 1 < dim ? static_cast<double>(i + 1) : 0.0; };
    for (Index i = 0; i < dim; ++i) {
      for (Index j = 0; j < dim; ++j) {
        loss(i, j) = up * static_cast<double>(i + j) + down * (aad(i) + aad(j));
      }
    }
  }

  void apply(const ComplexMatrix& rho, ComplexMatrix& out) const {
    const Index n = dim - 1;
    out.array() = -loss.array() * rho.array();
    out.topLeftCorner(n, n).array() +=
        up * ladder.array() * rho.bottomRightCorner(n, n).array();
    if (down != 0.0) {
      out.bottomRightCorner(n, n).array() +=
          down * ladder.array() * rho.topLeftCorner(n, n).array();
    }
  }

  Index dim;
  double up;
  double down;
  Eigen::MatrixXd ladder;
  Eigen::MatrixXd loss;
};

}  // namespace

ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, double nbar_bath) {
  if (rho.rows() != rho.cols()) {
    throw DimensionMismatch("lindblad_rhs: rho must be square");
  }
  ComplexMatrix out(rho.rows(), rho.cols());
  Generator(rho.rows(), nbar_bath).apply(rho, out);
  return out;
}

DensityMatrix evolve(const DensityMatrix& rho, double duration, const BathSpec& bath,
                     const IntegratorSpec& integrator, Warnings* warnings, EvolveStats* stats) {
  bath.validate();
  integrator.validate();
  if (!(duration >= 0.0) || !std::isfinite(duration)) {
    throw DomainError("evolve: duration must be finite and non-negative");
  }
  const double span = bath.kappa * duration;  // in units of 1/kappa
  if (span == 0.0) {
    if (stats != nullptr) {
      *stats = {};
    }
    return rho;
  }

  const Index steps = std::max<Index>(1, static_cast<Index>(std::ceil(span / integrator.max_step - 1e-9)));
  const double h = span / static_cast<double>(steps);
  const Index dim = rho.dim();
  const Generator gen(dim, bath.nbar_bath);

  ComplexMatrix state = rho.matrix();
  ComplexMatrix k1(dim, dim), k2(dim, dim), k3(dim, dim), k4(dim, dim), tmp(dim, dim);
  for (Index s = 0; s < steps; ++s) {
    gen.apply(state, k1);
    tmp = state + (0.5 * h) * k1;
    gen.apply(tmp, k2);
    tmp = state + (0.5 * h) * k2;
    gen.apply(tmp, k3);
    tmp = state + h * k3;
    gen.apply(tmp, k4);
    state += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    tmp = 0.5 * (state + state.adjoint());
    state = tmp;
  }

  const double trace = state.trace().real();
  if (stats != nullptr) {
    stats->steps = steps;
    stats->trace_before_renormalization = trace;
  }
  DensityMatrix out = DensityMatrix::normalized(state, rho.trace_deficit());

  const double lo = out.min_eigenvalue();
  if (lo < -kEvolvePositivityFloor) {
    std::ostringstream msg;
    msg << "evolve: smallest eigenvalue " << lo << " after kappa*t=" << span
        << " (step too large or dim=" << dim << " too small)";
    throw PositivityError(msg.str());
  }
  const double top = out.population(dim - 1) + out.population(dim - 2);
  if (top > kTopPopulationLimit) {
    std::ostringstream msg;
    msg << "evolve: top two Fock levels hold population " << top << " (dim=" << dim << ")";
    emit(warnings, "TruncationWarning", msg.str());
  }
  return out;
}

}  // namespace cavcool
