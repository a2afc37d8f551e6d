#pragma once

#include "cavcool/errors.hpp"
#include "cavcool/states.hpp"

namespace cavcool {

// Thermal environment of the cavity mode.
struct BathSpec {
  double kappa = 1.0;      // dissipation rate, 1/time
  double nbar_bath = 1.0;  // environment occupation

  void validate() const;
};

// Fixed-step classical RK4. max_step is measured in units of 1/kappa.
struct IntegratorSpec {
  double max_step = 1e-3;

  void validate() const;
};

inline constexpr double kEvolvePositivityFloor = 1e-6;
inline constexpr double kTopPopulationLimit = 1e-6;

// Right-hand side of the thermal master equation at kappa = 1:
//   (nbar+1)(2 a rho a^dag - a^dag a rho - rho a^dag a)
//   + nbar (2 a^dag rho a - a a^dag rho - rho a a^dag)
// with every product taken in the truncated space, so the generator is
// exactly trace-free.
ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, double nbar_bath);

struct EvolveStats {
  Index steps = 0;
  double trace_before_renormalization = 1.0;
};

// rho(duration) for physical time `duration` under the bath. Returns the input
// unchanged when kappa * duration == 0. Throws PositivityError if the result
// has an eigenvalue below -kEvolvePositivityFloor; pushes a TruncationWarning
// when the top two Fock populations exceed kTopPopulationLimit.
DensityMatrix evolve(const DensityMatrix& rho, double duration, const BathSpec& bath,
                     const IntegratorSpec& integrator = {}, Warnings* warnings = nullptr,
                     EvolveStats* stats = nullptr);

}  // namespace cavcool
