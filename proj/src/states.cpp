#include "cavcool/states.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace cavcool {

namespace {

void validate(const ComplexMatrix& m, double trace_deficit) {
  if (m.rows() != m.cols() || m.rows() < 2) {
    throw DimensionMismatch("DensityMatrix: entries must be square with dim >= 2");
  }
  if (!m.allFinite()) {
    throw DomainError("DensityMatrix: non-finite entry");
  }
  const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kHermiticityTolerance) {
    std::ostringstream msg;
    msg << "DensityMatrix: not Hermitian (max deviation " << asym << ")";
    throw DomainError(msg.str());
  }
  const double tr = m.trace().real();
  if (tr < 1.0 - trace_deficit - kTraceTolerance || tr > 1.0 + kTraceTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "DensityMatrix: trace " << tr << " outside [1 - " << trace_deficit << ", 1]";
    throw DomainError(msg.str());
  }
}

}  // namespace

DensityMatrix::DensityMatrix(ComplexMatrix entries, double trace_deficit)
    : entries_(std::move(entries)), trace_deficit_(trace_deficit) {
  if (!(trace_deficit >= 0.0)) {
    throw DomainError("DensityMatrix: trace deficit must be non-negative");
  }
  validate(entries_, trace_deficit_);
}

DensityMatrix DensityMatrix::normalized(const ComplexMatrix& entries, double trace_deficit) {
  ComplexMatrix h = 0.5 * (entries + entries.adjoint());
  const double tr = h.trace().real();
  if (!(tr > 0.0) || !std::isfinite(tr)) {
    throw DomainError("DensityMatrix::normalized: trace is not positive");
  }
  h /= tr;
  return DensityMatrix(std::move(h), trace_deficit);
}

DensityMatrix DensityMatrix::pure(const ComplexVector& psi) {
  const double norm2 = psi.squaredNorm();
  if (!(norm2 > 0.0)) {
    throw DomainError("DensityMatrix::pure: zero vector");
  }
  return DensityMatrix::normalized(psi * psi.adjoint() / norm2);
}

DensityMatrix DensityMatrix::fock(const FockSpace& space, Index n) {
  if (n < 0 || n >= space.dim()) {
    throw DomainError("DensityMatrix::fock: level outside the truncated basis");
  }
  ComplexMatrix m = ComplexMatrix::Zero(space.dim(), space.dim());
  m(n, n) = 1.0;
  return DensityMatrix(std::move(m));
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(entries_, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

void DensityMatrix::check_positive(double tol) const {
  const double lo = min_eigenvalue();
  if (lo < -tol) {
    std::ostringstream msg;
    msg << "density matrix lost positivity: smallest eigenvalue " << lo << " < -" << tol;
    throw PositivityError(msg.str());
  }
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("trace_distance: dimension mismatch");
  }
  const ComplexMatrix diff = a.matrix() - b.matrix();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(0.5 * (diff + diff.adjoint()),
                                                   Eigen::EigenvaluesOnly);
  return 0.5 * eig.eigenvalues().cwiseAbs().sum();
}

DensityMatrix thermal_state(const FockSpace& space, double nbar) {
  if (!(nbar >= 0.0) || !std::isfinite(nbar)) {
    throw DomainError("thermal_state: nbar must be finite and non-negative");
  }
  const Index dim = space.dim();
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  if (nbar == 0.0) {
    m(0, 0) = 1.0;
    return DensityMatrix(std::move(m));
  }
  const double ratio = nbar / (nbar + 1.0);
  const double tail = std::pow(ratio, static_cast<double>(dim));
  if (tail > kThermalTailThreshold) {
    std::ostringstream msg;
    msg << "thermal_state: dim=" << dim << " discards population " << tail << " at nbar=" << nbar
        << "; need dim >= " << std::ceil(std::log(kThermalTailThreshold) / std::log(ratio));
    throw TruncationError(msg.str());
  }
  double weight = 1.0 / (nbar + 1.0);
  for (Index n = 0; n < dim; ++n) {
    m(n, n) = weight;
    weight *= ratio;
  }
  m /= m.trace().real();
  return DensityMatrix(std::move(m), tail);
}

double mean_photons(const DensityMatrix& rho) {
  // Tr(N rho) with N diagonal.
  Complex total = 0.0;
  for (Index n = 1; n < rho.dim(); ++n) {
    total += static_cast<double>(n) * rho.matrix()(n, n);
  }
  if (std::abs(total.imag()) > 1e-10) {
    throw DomainError("mean_photons: expectation has an imaginary part");
  }
  return total.real();
}

double thermal_wigner_value(double nbar, double x, double p) {
  const double width = 2.0 * nbar + 1.0;
  return std::exp(-(x * x + p * p) / width) / (kPi * width);
}

double WignerGrid::dx() const {
  return x_values.size() > 1 ? x_values[1] - x_values[0] : 1.0;
}

double WignerGrid::dp() const {
  return p_values.size() > 1 ? p_values[1] - p_values[0] : 1.0;
}

double WignerGrid::integral() const { return values.sum() * dx() * dp(); }

std::vector<double> uniform_axis(double lo, double hi, Index n) {
  if (n < 1 || !(hi >= lo)) {
    throw DomainError("uniform_axis: need n >= 1 and hi >= lo");
  }
  std::vector<double> axis(static_cast<std::size_t>(n));
  if (n == 1) {
    axis[0] = lo;
    return axis;
  }
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (Index i = 0; i < n; ++i) {
    axis[static_cast<std::size_t>(i)] = lo + step * static_cast<double>(i);
  }
  return axis;
}

namespace {

constexpr double kWignerSupportFloor = 1e-15;

bool uniform(const std::vector<double>& axis) {
  if (axis.size() < 3) {
    return true;
  }
  const double step = axis[1] - axis[0];
  for (std::size_t i = 1; i < axis.size(); ++i) {
    const double d = axis[i] - axis[i - 1];
    if (!(d > 0.0) || std::abs(d - step) > 1e-9 * std::max(1.0, std::abs(step))) {
      return false;
    }
  }
  return true;
}

}  // namespace

WignerGrid wigner(const DensityMatrix& rho, const std::vector<double>& x_values,
                  const std::vector<double>& p_values, Warnings* warnings,
                  Index max_work_dim) {
  if (x_values.empty() || p_values.empty()) {
    throw DomainError("wigner: empty grid");
  }
  for (const auto* axis : {&x_values, &p_values}) {
    for (double v : *axis) {
      if (!std::isfinite(v)) {
        throw DomainError("wigner: non-finite grid coordinate");
      }
    }
    if (!uniform(*axis)) {
      throw DomainError("wigner: grid axes must be ascending and uniformly spaced");
    }
  }

  // Only Fock levels carrying population contribute.
  Index support = 1;
  for (Index n = 0; n < rho.dim(); ++n) {
    if (rho.population(n) > kWignerSupportFloor) {
      support = n + 1;
    }
  }

  double r_max = 0.0;
  for (double x : x_values) {
    for (double p : p_values) {
      r_max = std::max(r_max, std::sqrt(2.0) * std::hypot(x, p));
    }
  }
  const double reach = std::sqrt(static_cast<double>(support)) + r_max + 10.0;
  Index work = std::max<Index>(support + 16, static_cast<Index>(std::ceil(reach * reach)));
  if (work > max_work_dim) {
    std::ostringstream msg;
    msg << "wigner: grid reaches |alpha| = " << r_max / 2.0
        << " which needs a working dimension of " << work << "; clamped to "
        << max_work_dim << ", outer grid values are unconverged";
    emit(warnings, "TruncationWarning", msg.str());
    work = std::max(max_work_dim, support);
  }

  // i(a^dag - a) = R (a + a^dag) R^dag with R = diag(i^n); a + a^dag is real
  // symmetric tridiagonal.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(work);
  Eigen::VectorXd sub(work - 1);
  for (Index n = 1; n < work; ++n) {
    sub(n - 1) = std::sqrt(static_cast<double>(n));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  eig.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (eig.info() != Eigen::Success) {
    throw Error("wigner: eigendecomposition failed");
  }
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const Eigen::MatrixXd u = eig.eigenvectors().topRows(support);

  // D(r)_{mn} = i^{m-n} sum_j U_mj U_nj exp(-i r lambda_j). Fold rho, parity
  // and the i^{m-n} phase into coefficients indexed by (j, m - n).
  const Index bands = 2 * support - 1;
  const Index centre = support - 1;
  ComplexMatrix weights(support, support);
  static const Complex kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (Index n = 0; n < support; ++n) {
    for (Index m = 0; m < support; ++m) {
      const Index shift = ((m - n) % 4 + 4) % 4;
      const double sign = (n % 2 == 0) ? 1.0 : -1.0;
      weights(n, m) = sign * kIPow[shift] * rho.matrix()(n, m);
    }
  }
  ComplexMatrix coeff = ComplexMatrix::Zero(work, bands);
  for (Index j = 0; j < work; ++j) {
    for (Index n = 0; n < support; ++n) {
      const double un = u(n, j);
      for (Index m = 0; m < support; ++m) {
        coeff(j, m - n + centre) += weights(n, m) * (u(m, j) * un);
      }
    }
  }

  WignerGrid grid{x_values, p_values,
                  Eigen::MatrixXd(static_cast<Index>(p_values.size()),
                                  static_cast<Index>(x_values.size()))};
  std::map<double, Eigen::RowVectorXcd> radial;
  Eigen::VectorXcd rotation(bands);
  for (std::size_t ip = 0; ip < p_values.size(); ++ip) {
    for (std::size_t ix = 0; ix < x_values.size(); ++ix) {
      const double x = x_values[ix];
      const double p = p_values[ip];
      const double r = std::sqrt(2.0) * std::hypot(x, p);
      auto it = radial.find(r);
      if (it == radial.end()) {
        const Eigen::VectorXcd kernel =
            (Complex(0.0, -r) * lambda.cast<Complex>()).array().exp().matrix();
        it = radial.emplace(r, kernel.transpose() * coeff).first;
      }
      const double phi = std::atan2(p, x);
      for (Index d = 0; d < bands; ++d) {
        rotation(d) = std::polar(1.0, phi * static_cast<double>(d - centre));
      }
      const Complex value = it->second * rotation;
      grid.values(static_cast<Index>(ip), static_cast<Index>(ix)) = value.real() / kPi;
    }
  }
  return grid;
}

double nbar_from_temperature(double frequency_hz, double temperature_k) {
  if (!(frequency_hz > 0.0) || !(temperature_k > 0.0) || !std::isfinite(frequency_hz) ||
      !std::isfinite(temperature_k)) {
    throw DomainError("nbar_from_temperature: frequency and temperature must be positive");
  }
  const double quantum = kHbar * 2.0 * kPi * frequency_hz / (kBoltzmann * temperature_k);
  return 1.0 / std::expm1(quantum);
}

double temperature_from_nbar(double frequency_hz, double nbar) {
  if (!(frequency_hz > 0.0) || !(nbar > 0.0) || !std::isfinite(frequency_hz) ||
      !std::isfinite(nbar)) {
    throw DomainError("temperature_from_nbar: frequency and nbar must be positive");
  }
  return kHbar * 2.0 * kPi * frequency_hz / (kBoltzmann * std::log1p(1.0 / nbar));
}

}  // namespace cavcool
