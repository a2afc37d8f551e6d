#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cavcool/fock.hpp"
#include "cavcool/lindblad.hpp"
#include "cavcool/states.hpp"

namespace cavcool {

inline constexpr double kDegenerateSelection = 1e-12;

// D_+(g) = (1 + D(g)) / 2, the cavity map after the electron is found in |+>.
ComplexMatrix kraus_plus(const FockSpace& space, Complex g);
// D_-(g) = (1 - D(g)) / 2.
ComplexMatrix kraus_minus(const FockSpace& space, Complex g);

struct Selected {
  DensityMatrix state;
  double probability;
};

// K rho K^dag renormalized, with probability Tr(K rho K^dag).
// Throws DegenerateSelection when the probability falls below 1e-12.
Selected apply_postselected(const DensityMatrix& rho, const ComplexMatrix& kraus);
Selected apply_postselected(const DensityMatrix& rho, Complex g);

// Electron couplings of one cooling block in application order.
std::array<Complex, 4> ocb_phases(Complex g);

// Four post-selected kicks with couplings g, ig, -g, -ig and no bath.
// probability is the product of the four per-electron probabilities.
Selected apply_ocb(const DensityMatrix& rho, Complex g);

// Product D_+(-ig) D_+(-g) D_+(ig) D_+(g).
ComplexMatrix ocb_kraus(const FockSpace& space, Complex g);

// |0><0| (x) 1 + |1><1| (x) D(g) on electron (x) cavity, electron index major.
ComplexMatrix joint_cd_matrix(const FockSpace& space, Complex g);

// <bra| M |ket> over the electron qubit of a joint (2 dim) x (2 dim) matrix.
ComplexMatrix electron_matrix_element(const ComplexMatrix& joint, const Eigen::Vector2cd& bra,
                                      const Eigen::Vector2cd& ket);

struct ProtocolConfig {
  Complex g{0.1, 0.0};
  // Optional per-block couplings; block k (0-based) uses g_schedule[k] when
  // present and g otherwise.
  std::vector<Complex> g_schedule;
  double delta_t_kappa = 0.05;  // kappa * (electron spacing)
  BathSpec bath;
  double nbar_initial = 1.0;
  int max_ocb = 200;
  double stability_rel_tol = 0.01;
  // Blocks simulated after the stability point before stopping.
  int confirm_ocb = 2;
  bool stop_at_stability = true;
  // Start with a drift segment instead of a kick at t = 0.
  bool drift_first = false;
  Index dim = 128;
  IntegratorSpec integrator;
  // Keep the final density matrix in the trace.
  bool keep_final_state = false;

  void validate() const;
  Complex coupling_for_block(int block) const;
};

enum class EventTag { initial, post_kick, post_drift };

const char* to_string(EventTag tag);
EventTag event_tag_from_string(const std::string& s);

struct TraceEvent {
  double time_kappa;
  double nbar;
  double cumulative_prob;
  EventTag tag;
  std::optional<int> kick_phase;
  int ocb;  // 1-based cooling block the event belongs to
};

struct CoolingTrace {
  std::vector<TraceEvent> events;
  int completed_ocb = 0;
  std::optional<int> stable_at_ocb;  // first block meeting the criterion online
  Warnings warnings;
  std::optional<DensityMatrix> final_state;
};

// Kick/drift sequence from thermal(nbar_initial). Each electron is an
// instantaneous post-selected kick followed by a kappa*dt bath segment.
CoolingTrace run_cooling(const ProtocolConfig& config);

struct StableMetrics {
  double nbar_final = 0.0;
  double prob_final = 1.0;
  int ocb_at_stability = 0;
  bool reached = false;
};

// Largest nbar over the events of each block, in block order.
std::vector<std::pair<double, double>> block_maxima(const CoolingTrace& trace);

// First block whose nbar maximum differs from the previous block's by less
// than rel_tol (relative). nbar_final is that maximum and prob_final the
// cumulative probability at the same event. When never reached, the last
// observed values are returned with reached = false.
StableMetrics stable_metrics(const CoolingTrace& trace, double rel_tol);

}  // namespace cavcool
