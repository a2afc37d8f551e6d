#include <doctest.h>

#include "cavcool/analytic.hpp"
#include "cavcool/protocol.hpp"

using namespace cavcool;

namespace {

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

CoolingTrace synthetic(const std::vector<double>& block_values) {
  CoolingTrace t;
  double time = 0.0;
  for (std::size_t k = 0; k < block_values.size(); ++k) {
    for (int phase = 0; phase < 4; ++phase) {
      t.events.push_back({time, block_values[k], 1.0, EventTag::post_kick, phase,
                          static_cast<int>(k + 1)});
      time += 0.1;
    }
  }
  t.completed_ocb = static_cast<int>(block_values.size());
  return t;
}

}  // namespace

TEST_CASE("Kraus pair basics") {
  const FockSpace space(64);
  CHECK(kraus_plus(space, Complex(0.0)) == identity(space));
  const Complex g(0.3, 0.2);
  const ComplexMatrix kp = kraus_plus(space, g);
  const ComplexMatrix km = kraus_minus(space, g);
  CHECK((kp + km - identity(space)).cwiseAbs().maxCoeff() < 1e-15);
  const ComplexMatrix completeness = kp.adjoint() * kp + km.adjoint() * km;
  CHECK((completeness - identity(space)).topLeftCorner(32, 32).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("post-selection at zero coupling is trivial") {
  const DensityMatrix rho = thermal_state(FockSpace(32), 1.0);
  const Selected s = apply_postselected(rho, Complex(0.0));
  CHECK(s.probability == 1.0);
  CHECK(s.state.matrix() == rho.matrix());
}

TEST_CASE("post-selection probability on thermal states equals the closed form") {
  const FockSpace space(256);
  for (double nbar : {0.5, 1.0, 5.0}) {
    const DensityMatrix rho = thermal_state(space, nbar);
    for (double g : {0.1, 0.3, 0.6}) {
      const Complex coupling = std::polar(g, 0.7);
      const double p = apply_postselected(rho, coupling).probability;
      CAPTURE(nbar);
      CAPTURE(g);
      CHECK(std::abs(p - analytic::p_plus_exact(nbar, coupling)) < 1e-8);
    }
  }
}

TEST_CASE("vacuum post-selection probability") {
  const FockSpace space(64);
  const double p = apply_postselected(DensityMatrix::fock(space, 0), Complex(0.2)).probability;
  CHECK(p == doctest::Approx(0.5 * (1.0 + std::exp(-0.02))).epsilon(1e-13));
  const Complex d00 = displacement(space, Complex(0.2))(0, 0);
  CHECK(p == doctest::Approx(0.5 * (1.0 + d00.real())).epsilon(1e-13));
}

TEST_CASE("post-selection that annihilates the state raises DegenerateSelection") {
  // Eigenvector of D(g) with eigenvalue -1 is killed by (1 + D)/2.
  const FockSpace space(16);
  const ComplexMatrix a = annihilation(space);
  const ComplexMatrix h = Complex(0.0, 1.0) * (a.adjoint() - a);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(h);
  const Index j = space.dim() - 1;
  const double g = 3.14159265358979323846 / eig.eigenvalues()(j);
  const DensityMatrix rho = DensityMatrix::pure(eig.eigenvectors().col(j));
  CHECK_THROWS_AS(apply_postselected(rho, Complex(g, 0.0)), DegenerateSelection);
}

TEST_CASE("ocb_phases order") {
  const auto p = ocb_phases(Complex(0.1, 0.0));
  CHECK(p[0] == Complex(0.1, 0.0));
  CHECK(p[1] == Complex(0.0, 0.1));
  CHECK(p[2] == Complex(-0.1, 0.0));
  CHECK(p[3] == Complex(0.0, -0.1));
  CHECK(std::abs(p[0] + p[1] + p[2] + p[3]) == 0.0);
  for (const Complex z : ocb_phases(Complex(0.0))) {
    CHECK(z == Complex(0.0));
  }
}

TEST_CASE("one OCB at small g follows the perturbative forms") {
  const DensityMatrix rho = thermal_state(FockSpace(128), 1.0);
  const Complex g(0.01, 0.0);
  const Selected s = apply_ocb(rho, g);
  const double g4 = std::pow(std::abs(g), 4);
  CHECK(std::abs(mean_photons(s.state) - analytic::nbar_one_round(1.0, g)) < 10.0 * g4);
  CHECK(std::abs(s.probability - analytic::prob_one_round(1.0, g)) < 10.0 * g4);

  const Selected none = apply_ocb(rho, Complex(0.0));
  CHECK(none.probability == 1.0);
  CHECK(none.state.matrix() == rho.matrix());
}

TEST_CASE("apply_ocb equals the composed Kraus product") {
  const FockSpace space(64);
  const DensityMatrix rho = thermal_state(space, 0.7);
  const Complex g(0.25, 0.1);
  const ComplexMatrix k = ocb_kraus(space, g);
  const ComplexMatrix kept = k * rho.matrix() * k.adjoint();
  const Selected s = apply_ocb(rho, g);
  CHECK(std::abs(s.probability - kept.trace().real()) < 1e-12);
  CHECK((s.state.matrix() - kept / kept.trace()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("composed Kraus product approaches the second-order expansion as |g|^4") {
  const FockSpace space(64);
  std::vector<double> gs = {0.01, 0.02, 0.04, 0.08};
  std::vector<double> errs;
  for (double g : gs) {
    const ComplexMatrix diff =
        (ocb_kraus(space, Complex(g)) - analytic::d_ocb_approx_matrix(space, Complex(g)))
            .topLeftCorner(32, 32);
    Eigen::JacobiSVD<ComplexMatrix> svd(diff);
    errs.push_back(svd.singularValues()(0));
  }
  CHECK(loglog_slope(gs, errs) == doctest::Approx(4.0).epsilon(0.3 / 4.0));
  for (std::size_t i = 0; i < gs.size(); ++i) {
    CHECK(errs[i] < 1e3 * std::pow(gs[i], 4));
  }
}

TEST_CASE("one small-g OCB keeps the state nearly thermal") {
  const FockSpace space(128);
  const DensityMatrix rho = thermal_state(space, 1.0);
  const std::vector<double> gs = {0.02, 0.04};
  std::vector<double> dist;
  for (double g : gs) {
    const Selected s = apply_ocb(rho, Complex(g));
    dist.push_back(trace_distance(s.state, thermal_state(space, mean_photons(s.state))));
  }
  CHECK(dist[0] < 1e-5);
  CHECK(dist[1] > dist[0]);
}

TEST_CASE("joint conditional displacement projects onto the Kraus pair") {
  const FockSpace space(32);
  const Complex g(0.4, -0.2);
  const ComplexMatrix cd = joint_cd_matrix(space, g);
  const double s = 1.0 / std::sqrt(2.0);
  const Eigen::Vector2cd plus(s, s);
  const Eigen::Vector2cd minus(s, -s);
  CHECK((electron_matrix_element(cd, plus, plus) - kraus_plus(space, g)).cwiseAbs().maxCoeff() <
        1e-14);
  CHECK((electron_matrix_element(cd, minus, plus) - kraus_minus(space, g)).cwiseAbs().maxCoeff() <
        1e-14);
  CHECK(joint_cd_matrix(space, Complex(0.0)) == ComplexMatrix::Identity(64, 64));

  // Block unitarity on the lower half of each electron branch.
  const ComplexMatrix gram = cd.adjoint() * cd;
  double defect = 0.0;
  for (Index e : {Index(0), Index(1)}) {
    const auto block = gram.block(e * 32, e * 32, 16, 16);
    defect = std::max(defect, (block - ComplexMatrix::Identity(16, 16)).cwiseAbs().maxCoeff());
  }
  CHECK(defect < 1e-10);
  CHECK(gram.block(0, 32, 32, 32).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("run_cooling without a bath follows the recursive one-round forms") {
  ProtocolConfig c;
  c.g = Complex(0.02, 0.0);
  c.delta_t_kappa = 0.0;
  c.bath = {0.0, 1.0};
  c.nbar_initial = 1.0;
  c.max_ocb = 5;
  c.stop_at_stability = false;
  c.dim = 64;
  const CoolingTrace t = run_cooling(c);
  REQUIRE(t.completed_ocb == 5);

  double nbar = 1.0;
  double prob = 1.0;
  const double budget = 20.0 * std::pow(0.02, 4);
  for (const auto& e : t.events) {
    if (e.tag == EventTag::post_kick && e.kick_phase == 3) {
      prob *= analytic::prob_one_round(nbar, c.g);
      nbar = analytic::nbar_one_round(nbar, c.g);
      CAPTURE(e.ocb);
      CHECK(std::abs(e.nbar - nbar) < budget * e.ocb);
      CHECK(std::abs(e.cumulative_prob - prob) < budget * e.ocb);
    }
  }
}

TEST_CASE("trace structure invariants") {
  ProtocolConfig c;
  c.g = Complex(0.3, 0.0);
  c.delta_t_kappa = 0.05;
  c.dim = 48;
  c.max_ocb = 6;
  c.stop_at_stability = false;
  const CoolingTrace t = run_cooling(c);
  CHECK(t.completed_ocb == 6);
  REQUIRE(t.events.front().tag == EventTag::initial);
  CHECK(t.events.size() == 1 + 6 * 8);
  for (int block = 1; block <= 6; ++block) {
    std::vector<int> phases;
    for (const auto& e : t.events) {
      if (e.ocb == block && e.tag == EventTag::post_kick) {
        phases.push_back(*e.kick_phase);
      }
    }
    CHECK(phases == std::vector<int>{0, 1, 2, 3});
  }
  for (std::size_t i = 1; i < t.events.size(); ++i) {
    CHECK(t.events[i].time_kappa >= t.events[i - 1].time_kappa);
    CHECK(t.events[i].cumulative_prob <= t.events[i - 1].cumulative_prob);
    CHECK(t.events[i].cumulative_prob > 0.0);
  }
  CHECK(t.events.back().time_kappa == doctest::Approx(6 * 4 * 0.05));
}

TEST_CASE("zero coupling: pure relaxation and no selection loss") {
  ProtocolConfig c;
  c.g = Complex(0.0);
  c.delta_t_kappa = 0.1;
  c.nbar_initial = 2.0;
  c.bath = {1.0, 1.0};
  c.dim = 64;
  c.max_ocb = 3;
  c.stop_at_stability = false;
  const CoolingTrace t = run_cooling(c);
  for (const auto& e : t.events) {
    CHECK(e.cumulative_prob == 1.0);
    const double expected = 1.0 + std::exp(-2.0 * e.time_kappa);
    CHECK(std::abs(e.nbar - expected) < 1e-6);
  }
}

TEST_CASE("drift_first starts with a bath segment") {
  ProtocolConfig c;
  c.drift_first = true;
  c.dim = 32;
  c.max_ocb = 1;
  const CoolingTrace t = run_cooling(c);
  REQUIRE(t.events.size() >= 2);
  CHECK(t.events[1].tag == EventTag::post_drift);
  CHECK_FALSE(t.events[1].kick_phase.has_value());
  CHECK(t.events[2].tag == EventTag::post_kick);
}

TEST_CASE("per-block coupling schedule") {
  ProtocolConfig c;
  c.g = Complex(0.2);
  c.g_schedule = {Complex(0.2), Complex(0.0)};
  c.delta_t_kappa = 0.0;
  c.bath = {0.0, 1.0};
  c.dim = 48;
  c.max_ocb = 3;
  c.stop_at_stability = false;
  const CoolingTrace t = run_cooling(c);
  const auto at_end = [&](int block) {
    double p = 0.0;
    for (const auto& e : t.events) {
      if (e.ocb == block) p = e.cumulative_prob;
    }
    return p;
  };
  CHECK(at_end(2) == at_end(1));  // g = 0 block selects nothing away
  CHECK(at_end(3) < at_end(2));   // falls back to g afterwards
}

TEST_CASE("stable_metrics on synthetic traces") {
  const StableMetrics flat = stable_metrics(synthetic({0.7, 0.7, 0.7}), 0.01);
  CHECK(flat.reached);
  CHECK(flat.ocb_at_stability == 2);
  CHECK(flat.nbar_final == 0.7);

  std::vector<double> geometric;
  double v = 1.0;
  for (int k = 0; k < 20; ++k) {
    geometric.push_back(v);
    v *= 0.9;
  }
  const StableMetrics none = stable_metrics(synthetic(geometric), 0.01);
  CHECK_FALSE(none.reached);
  CHECK(none.nbar_final == doctest::Approx(geometric.back()));

  const StableMetrics later = stable_metrics(synthetic({1.0, 0.8, 0.7, 0.695}), 0.01);
  CHECK(later.reached);
  CHECK(later.ocb_at_stability == 4);
  CHECK(later.nbar_final == 0.695);
  CHECK_THROWS_AS(stable_metrics(synthetic({1.0}), 0.0), DomainError);
}

TEST_CASE("end-to-end run reaches stability below the initial occupation") {
  ProtocolConfig c;
  c.g = Complex(0.1);
  c.delta_t_kappa = 0.05;
  c.nbar_initial = 1.0;
  c.bath = {1.0, 1.0};
  c.dim = 64;
  const CoolingTrace t = run_cooling(c);
  const StableMetrics m = stable_metrics(t, 0.01);
  CHECK(m.reached);
  CHECK(m.nbar_final < 1.0);
  CHECK(m.prob_final > 0.0);
  CHECK(m.prob_final < 1.0);
  REQUIRE(t.stable_at_ocb.has_value());
  CHECK(*t.stable_at_ocb == m.ocb_at_stability);
  CHECK(t.completed_ocb == m.ocb_at_stability + c.confirm_ocb);

  // Sawtooth: drifts below the bath occupation heat the mode.
  for (std::size_t i = 1; i < t.events.size(); ++i) {
    if (t.events[i].tag == EventTag::post_drift && t.events[i - 1].nbar < 1.0) {
      CHECK(t.events[i].nbar > t.events[i - 1].nbar);
    }
  }
}

TEST_CASE("stable occupation grows with the electron spacing") {
  double previous = 0.0;
  for (double dt : {0.01, 0.05, 0.1}) {
    ProtocolConfig c;
    c.g = Complex(0.1);
    c.delta_t_kappa = dt;
    c.dim = 48;
    const StableMetrics m = stable_metrics(run_cooling(c), 0.01);
    REQUIRE(m.reached);
    CHECK(m.nbar_final > previous);
    previous = m.nbar_final;
  }
}

TEST_CASE("config validation") {
  ProtocolConfig c;
  c.stability_rel_tol = 1.5;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = {};
  c.max_ocb = 0;
  CHECK_THROWS_AS(run_cooling(c), InvalidConfig);
  c = {};
  c.delta_t_kappa = -0.1;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = {};
  c.g = Complex(std::nan(""), 0.0);
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = {};
  c.nbar_initial = 5.0;
  c.dim = 16;
  CHECK_THROWS_AS(run_cooling(c), TruncationError);
}

TEST_CASE("event tags round-trip through strings") {
  for (EventTag tag : {EventTag::initial, EventTag::post_kick, EventTag::post_drift}) {
    CHECK(event_tag_from_string(to_string(tag)) == tag);
  }
  CHECK_THROWS_AS(event_tag_from_string("kick"), DomainError);
}
