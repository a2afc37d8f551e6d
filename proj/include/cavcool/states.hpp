#pragma once

#include <Eigen/Dense>

#include <vector>

#include "cavcool/errors.hpp"
#include "cavcool/fock.hpp"

namespace cavcool {

inline constexpr double kHermiticityTolerance = 1e-12;
inline constexpr double kTraceTolerance = 1e-10;
inline constexpr double kPositivityTolerance = 1e-10;
inline constexpr double kThermalTailThreshold = 1e-6;

// Physical constants (CODATA 2018, exact SI values where defined).
inline constexpr double kHbar = 1.054571817e-34;      // J s
inline constexpr double kBoltzmann = 1.380649e-23;    // J / K
inline constexpr double kPi = 3.14159265358979323846;

// Cavity state. Construction enforces Hermiticity and unit trace (less the
// population the truncation discarded); positivity is checked on demand since
// it needs an eigendecomposition.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix entries, double trace_deficit = 0.0);

  // Hermitizes (rho + rho^dag)/2 and rescales to unit trace before validating.
  static DensityMatrix normalized(const ComplexMatrix& entries, double trace_deficit = 0.0);

  // Pure state |psi><psi| (psi need not be normalized).
  static DensityMatrix pure(const ComplexVector& psi);

  static DensityMatrix fock(const FockSpace& space, Index n);

  const ComplexMatrix& matrix() const { return entries_; }
  Index dim() const { return entries_.rows(); }
  FockSpace space() const { return FockSpace(dim()); }
  double trace_deficit() const { return trace_deficit_; }

  double trace() const { return entries_.trace().real(); }
  double min_eigenvalue() const;
  // Throws PositivityError if the smallest eigenvalue is below -tol.
  void check_positive(double tol = kPositivityTolerance) const;

  // Population of |n>.
  double population(Index n) const { return entries_(n, n).real(); }

 private:
  ComplexMatrix entries_;
  double trace_deficit_;
};

// 0.5 * sum |eigenvalues(a - b)|.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

// Geometric Fock populations (nbar/(nbar+1))^n / (nbar+1), renormalized over
// the truncated basis. Throws TruncationError if the discarded tail exceeds
// kThermalTailThreshold.
DensityMatrix thermal_state(const FockSpace& space, double nbar);

// Tr(a^dag a rho).
double mean_photons(const DensityMatrix& rho);

// Closed-form thermal Wigner function in dimensionless quadratures.
double thermal_wigner_value(double nbar, double x, double p);

struct WignerGrid {
  std::vector<double> x_values;
  std::vector<double> p_values;
  Eigen::MatrixXd values;  // rows index p, columns index x

  double dx() const;
  double dp() const;
  // Riemann sum of values * dx * dp.
  double integral() const;
};

// n uniformly spaced points covering [lo, hi].
std::vector<double> uniform_axis(double lo, double hi, Index n);

// W(x, p) = (1/pi) Tr[rho D(alpha) Pi D(alpha)^dag], alpha = (x + i p)/sqrt(2).
//
// D(alpha) Pi D(alpha)^dag = D(2 alpha) Pi, and D(r e^{i phi}) is a phase
// rotation of the real displacement D(r), so one Hermitian eigendecomposition
// of i(a^dag - a) on an enlarged working space serves every grid point. The
// working space is capped at max_work_dim, with a TruncationWarning.
inline constexpr Index kWignerMaxWorkDim = 4096;

WignerGrid wigner(const DensityMatrix& rho, const std::vector<double>& x_values,
                  const std::vector<double>& p_values, Warnings* warnings = nullptr,
                  Index max_work_dim = kWignerMaxWorkDim);

// Bose-Einstein occupation at angular frequency 2 pi frequency_hz.
double nbar_from_temperature(double frequency_hz, double temperature_k);
double temperature_from_nbar(double frequency_hz, double nbar);

}  // namespace cavcool
