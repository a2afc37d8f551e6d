#pragma once

#include <string>
#include <vector>

#include "cavcool/protocol.hpp"

namespace cavcool {

struct SweepConfig {
  std::vector<double> g_values;   // ascending, positive
  std::vector<double> dt_values;  // ascending kappa*dt, non-negative
  ProtocolConfig base;            // g and delta_t_kappa are overridden per cell
  int worker_count = 1;

  void validate() const;
  // 17 log-spaced couplings in [0.05, 1] by 13 spacings in [0.001, 0.4] with
  // nbar0 = nbar_bath = 1, dim = 128, max_ocb = 200.
  static SweepConfig acceptance_default();
};

struct SweepCell {
  double g = 0.0;
  double dt_kappa = 0.0;
  double cooling_ratio = 0.0;
  double prob_final = 0.0;
  bool reached = false;
  int ocb_at_stability = 0;
  bool failed = false;
  std::string error;
};

// Cells ordered row-major: dt index outer, g index inner.
struct SweepResult {
  std::vector<double> g_values;
  std::vector<double> dt_values;
  std::vector<SweepCell> cells;

  const SweepCell& at(std::size_t dt_index, std::size_t g_index) const {
    return cells[dt_index * g_values.size() + g_index];
  }
  std::size_t failed_count() const;
};

// One cell: run_cooling + stable_metrics. Errors are captured in the cell.
SweepCell run_cell(const ProtocolConfig& base, double g, double dt_kappa);

// Cells run on a pool of worker_count threads; output is independent of the
// pool size.
SweepResult run_sweep(const SweepConfig& config);

enum class SliceAxis { fixed_dt, fixed_g };

// Row (fixed_dt) or column (fixed_g) of the grid at `value`, which must match
// a grid point within 1e-12. Throws DomainError listing the grid otherwise.
std::vector<SweepCell> slice(const SweepResult& result, SliceAxis axis, double value);

std::vector<double> log_axis(double lo, double hi, int n);

}  // namespace cavcool
