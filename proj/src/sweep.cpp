#include "cavcool/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace cavcool {

namespace {

void require_ascending(const std::vector<double>& v, const char* name, bool strictly_positive) {
  if (v.empty()) {
    throw InvalidConfig(std::string("sweep: ") + name + " is empty");
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    const bool ok = std::isfinite(v[i]) && (strictly_positive ? v[i] > 0.0 : v[i] >= 0.0);
    if (!ok || (i > 0 && !(v[i] > v[i - 1]))) {
      throw InvalidConfig(std::string("sweep: ") + name +
                          " must be ascending and " +
                          (strictly_positive ? "positive" : "non-negative"));
    }
  }
}

}  // namespace

void SweepConfig::validate() const {
  require_ascending(g_values, "g_values", true);
  require_ascending(dt_values, "dt_values", false);
  base.validate();
  if (!(base.nbar_initial > 0.0)) {
    throw InvalidConfig("sweep: nbar_initial must be positive for a cooling ratio");
  }
  if (worker_count < 1) {
    throw InvalidConfig("sweep: worker_count must be positive");
  }
}

std::vector<double> log_axis(double lo, double hi, int n) {
  if (n < 1 || !(lo > 0.0) || !(hi >= lo)) {
    throw DomainError("log_axis: need n >= 1 and 0 < lo <= hi");
  }
  std::vector<double> axis(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    axis[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, t);
  }
  axis.front() = lo;
  axis.back() = hi;
  return axis;
}

SweepConfig SweepConfig::acceptance_default() {
  SweepConfig c;
  c.g_values = log_axis(0.05, 1.0, 17);
  // The low end matters: factor-ten cooling needs kappa*dt well below 0.01.
  c.dt_values = {0.001, 0.0025, 0.005, 0.01, 0.02, 0.03, 0.05, 0.075, 0.1, 0.15, 0.2, 0.3, 0.4};
  c.base.nbar_initial = 1.0;
  c.base.bath = {1.0, 1.0};
  c.base.dim = 128;
  c.base.max_ocb = 200;
  c.worker_count = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return c;
}

std::size_t SweepResult::failed_count() const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [](const SweepCell& c) { return c.failed; }));
}

SweepCell run_cell(const ProtocolConfig& base, double g, double dt_kappa) {
  SweepCell cell;
  cell.g = g;
  cell.dt_kappa = dt_kappa;
  ProtocolConfig config = base;
  config.g = Complex(g, 0.0);
  config.g_schedule.clear();
  config.delta_t_kappa = dt_kappa;
  config.keep_final_state = false;
  try {
    const CoolingTrace trace = run_cooling(config);
    const StableMetrics m = stable_metrics(trace, config.stability_rel_tol);
    cell.cooling_ratio = m.nbar_final / config.nbar_initial;
    cell.prob_final = m.prob_final;
    cell.reached = m.reached;
    cell.ocb_at_stability = m.ocb_at_stability;
  } catch (const std::exception& e) {
    cell.failed = true;
    cell.error = e.what();
  }
  return cell;
}

SweepResult run_sweep(const SweepConfig& config) {
  config.validate();
  SweepResult result{config.g_values, config.dt_values, {}};
  const std::size_t ng = config.g_values.size();
  const std::size_t total = ng * config.dt_values.size();
  result.cells.resize(total);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1)) {
      result.cells[i] = run_cell(config.base, config.g_values[i % ng], config.dt_values[i / ng]);
    }
  };
  const auto workers = static_cast<std::size_t>(config.worker_count);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back(worker);
    }
  }
  return result;
}

std::vector<SweepCell> slice(const SweepResult& result, SliceAxis axis, double value) {
  const auto& grid = axis == SliceAxis::fixed_dt ? result.dt_values : result.g_values;
  const auto hit = std::find_if(grid.begin(), grid.end(),
                                [&](double v) { return std::abs(v - value) <= 1e-12; });
  if (hit == grid.end()) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "slice: " << (axis == SliceAxis::fixed_dt ? "dt_kappa" : "g") << "=" << value
        << " is not a grid value; available:";
    for (double v : grid) {
      msg << ' ' << v;
    }
    throw DomainError(msg.str());
  }
  const auto k = static_cast<std::size_t>(hit - grid.begin());
  std::vector<SweepCell> out;
  if (axis == SliceAxis::fixed_dt) {
    for (std::size_t j = 0; j < result.g_values.size(); ++j) {
      out.push_back(result.at(k, j));
    }
  } else {
    for (std::size_t i = 0; i < result.dt_values.size(); ++i) {
      out.push_back(result.at(i, k));
    }
  }
  return out;
}

}  // namespace cavcool
