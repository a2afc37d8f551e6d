#include <doctest.h>

#include <random>

#include "cavcool/lindblad.hpp"

using namespace cavcool;

namespace {

// The master equation written literally with dense truncated operators.
ComplexMatrix dense_rhs(const ComplexMatrix& rho, double nbar) {
  const FockSpace space(rho.rows());
  const ComplexMatrix a = annihilation(space);
  const ComplexMatrix ad = a.adjoint();
  const ComplexMatrix n = ad * a;
  const ComplexMatrix m = a * ad;
  return (nbar + 1.0) * (2.0 * a * rho * ad - n * rho - rho * n) +
         nbar * (2.0 * ad * rho * a - m * rho - rho * m);
}

DensityMatrix coherent(const FockSpace& space, Complex g) {
  ComplexVector vac = ComplexVector::Zero(space.dim());
  vac(0) = 1.0;
  return DensityMatrix::pure(displacement(space, g) * vac);
}

}  // namespace

TEST_CASE("structured RHS equals the dense operator form") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  ComplexMatrix b(10, 10);
  for (Index i = 0; i < 10; ++i) {
    for (Index j = 0; j < 10; ++j) {
      b(i, j) = Complex(normal(rng), normal(rng));
    }
  }
  const ComplexMatrix rho = b * b.adjoint();
  for (double nbar : {0.0, 0.7, 3.0}) {
    CHECK((lindblad_rhs(rho, nbar) - dense_rhs(rho, nbar)).cwiseAbs().maxCoeff() < 1e-12);
    // Trace-free generator.
    CHECK(std::abs(lindblad_rhs(rho, nbar).trace()) < 1e-12);
  }
}

TEST_CASE("zero dissipation leaves the state untouched") {
  const DensityMatrix rho = thermal_state(FockSpace(32), 1.0);
  const DensityMatrix out = evolve(rho, 3.0, BathSpec{0.0, 2.0});
  CHECK((out.matrix() - rho.matrix()).cwiseAbs().maxCoeff() < 1e-14);
  const DensityMatrix same = evolve(rho, 0.0, BathSpec{1.0, 2.0});
  CHECK(same.matrix() == rho.matrix());
}

TEST_CASE("vacuum heats as nbar (1 - exp(-2 kappa t))") {
  const DensityMatrix vac = DensityMatrix::fock(FockSpace(64), 0);
  for (double kt : {0.1, 0.5, 2.0}) {
    const double n = mean_photons(evolve(vac, kt, BathSpec{1.0, 1.0}));
    CAPTURE(kt);
    CHECK(std::abs(n - (1.0 - std::exp(-2.0 * kt))) < 1e-6);
  }
  // Time scales with 1/kappa.
  const double n = mean_photons(evolve(vac, 0.25, BathSpec{2.0, 1.0}));
  CHECK(std::abs(n - (1.0 - std::exp(-1.0))) < 1e-6);
}

TEST_CASE("thermal(3) relaxes to thermal(1)") {
  const FockSpace space(128);
  const DensityMatrix out = evolve(thermal_state(space, 3.0), 5.0, BathSpec{1.0, 1.0});
  CHECK(trace_distance(out, thermal_state(space, 1.0)) < 1e-4);
}

TEST_CASE("bath thermal state is a fixed point") {
  const FockSpace space(64);
  const DensityMatrix th = thermal_state(space, 0.8);
  for (double kt : {0.05, 1.0}) {
    CHECK(trace_distance(evolve(th, kt, BathSpec{1.0, 0.8}), th) < 1e-8);
  }
}

TEST_CASE("trace is preserved before renormalization") {
  const FockSpace space(48);
  EvolveStats stats;
  evolve(coherent(space, {1.0, 0.5}), 10.0, BathSpec{1.0, 1.0}, {}, nullptr, &stats);
  CHECK(stats.steps == 10000);
  CHECK(std::abs(stats.trace_before_renormalization - 1.0) < 1e-9);
}

TEST_CASE("mean photon number relaxes exponentially for displaced states") {
  const FockSpace space(64);
  const DensityMatrix start = coherent(space, {1.2, -0.7});
  const double n0 = mean_photons(start);
  for (double kt : {0.3, 1.0}) {
    const double expected = 0.5 + (n0 - 0.5) * std::exp(-2.0 * kt);
    const double n = mean_photons(evolve(start, kt, BathSpec{1.0, 0.5}));
    CHECK(std::abs(n / expected - 1.0) < 1e-5);
  }
}

TEST_CASE("step halving changes the mean by less than 1e-8") {
  const FockSpace space(48);
  const DensityMatrix start = coherent(space, {0.9, 0.3});
  const double coarse = mean_photons(evolve(start, 1.0, BathSpec{1.0, 1.0}, {1e-3}));
  const double fine = mean_photons(evolve(start, 1.0, BathSpec{1.0, 1.0}, {5e-4}));
  CHECK(std::abs(coarse - fine) < 1e-8);
}

TEST_CASE("invalid inputs") {
  const DensityMatrix rho = DensityMatrix::fock(FockSpace(4), 0);
  CHECK_THROWS_AS(evolve(rho, -1.0, BathSpec{}), DomainError);
  CHECK_THROWS_AS(evolve(rho, 1.0, BathSpec{-1.0, 0.0}), InvalidConfig);
  CHECK_THROWS_AS(evolve(rho, 1.0, BathSpec{1.0, -0.5}), InvalidConfig);
  CHECK_THROWS_AS(evolve(rho, 1.0, BathSpec{}, IntegratorSpec{0.0}), InvalidConfig);
}

TEST_CASE("top-level population triggers a truncation warning") {
  Warnings w;
  evolve(DensityMatrix::fock(FockSpace(6), 0), 2.0, BathSpec{1.0, 4.0}, {}, &w);
  REQUIRE(w.size() == 1);
  CHECK(w[0].kind == "TruncationWarning");
}
