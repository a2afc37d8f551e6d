#include "cavcool/protocol.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace cavcool {

ComplexMatrix kraus_plus(const FockSpace& space, Complex g) {
  return 0.5 * (identity(space) + displacement(space, g));
}

ComplexMatrix kraus_minus(const FockSpace& space, Complex g) {
  return 0.5 * (identity(space) - displacement(space, g));
}

Selected apply_postselected(const DensityMatrix& rho, const ComplexMatrix& kraus) {
  require_square(kraus, rho.dim(), "apply_postselected");
  const ComplexMatrix kept = kraus * rho.matrix() * kraus.adjoint();
  const double prob = kept.trace().real();
  if (!(prob >= kDegenerateSelection)) {
    std::ostringstream msg;
    msg << "post-selection probability " << prob << " below " << kDegenerateSelection;
    throw DegenerateSelection(msg.str());
  }
  // Renormalize to the input's trace so truncation deficits carry through.
  return {DensityMatrix::normalized(kept, rho.trace_deficit()), std::min(prob, 1.0)};
}

Selected apply_postselected(const DensityMatrix& rho, Complex g) {
  if (g == Complex(0.0)) {
    return {rho, 1.0};
  }
  return apply_postselected(rho, kraus_plus(rho.space(), g));
}

std::array<Complex, 4> ocb_phases(Complex g) {
  const Complex i(0.0, 1.0);
  return {g, i * g, -g, -i * g};
}

Selected apply_ocb(const DensityMatrix& rho, Complex g) {
  Selected current{rho, 1.0};
  for (const Complex phase : ocb_phases(g)) {
    Selected next = apply_postselected(current.state, phase);
    current = {std::move(next.state), current.probability * next.probability};
  }
  return current;
}

ComplexMatrix ocb_kraus(const FockSpace& space, Complex g) {
  ComplexMatrix product = identity(space);
  for (const Complex phase : ocb_phases(g)) {
    product = kraus_plus(space, phase) * product;
  }
  return product;
}

ComplexMatrix joint_cd_matrix(const FockSpace& space, Complex g) {
  const Index dim = space.dim();
  ComplexMatrix joint = ComplexMatrix::Zero(2 * dim, 2 * dim);
  joint.topLeftCorner(dim, dim).setIdentity();
  joint.bottomRightCorner(dim, dim) = displacement(space, g);
  return joint;
}

ComplexMatrix electron_matrix_element(const ComplexMatrix& joint, const Eigen::Vector2cd& bra,
                                      const Eigen::Vector2cd& ket) {
  if (joint.rows() != joint.cols() || joint.rows() % 2 != 0) {
    throw DimensionMismatch("electron_matrix_element: joint matrix must be square of even size");
  }
  const Index dim = joint.rows() / 2;
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  for (Index e = 0; e < 2; ++e) {
    for (Index f = 0; f < 2; ++f) {
      out += std::conj(bra(e)) * ket(f) * joint.block(e * dim, f * dim, dim, dim);
    }
  }
  return out;
}

void ProtocolConfig::validate() const {
  auto finite = [](Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); };
  if (!finite(g)) {
    throw InvalidConfig("config: g must be finite");
  }
  for (const Complex z : g_schedule) {
    if (!finite(z)) {
      throw InvalidConfig("config: g_schedule entries must be finite");
    }
  }
  if (!(delta_t_kappa >= 0.0) || !std::isfinite(delta_t_kappa)) {
    throw InvalidConfig("config: delta_t_kappa must be finite and non-negative");
  }
  bath.validate();
  integrator.validate();
  if (!(nbar_initial >= 0.0) || !std::isfinite(nbar_initial)) {
    throw InvalidConfig("config: nbar_initial must be finite and non-negative");
  }
  if (max_ocb < 1) {
    throw InvalidConfig("config: max_ocb must be positive");
  }
  if (!(stability_rel_tol > 0.0 && stability_rel_tol < 1.0)) {
    throw InvalidConfig("config: stability_rel_tol must lie in (0, 1)");
  }
  if (confirm_ocb < 0) {
    throw InvalidConfig("config: confirm_ocb must be non-negative");
  }
  if (dim < 2) {
    throw InvalidConfig("config: dim must be >= 2");
  }
}

Complex ProtocolConfig::coupling_for_block(int block) const {
  if (block >= 0 && static_cast<std::size_t>(block) < g_schedule.size()) {
    return g_schedule[static_cast<std::size_t>(block)];
  }
  return g;
}

const char* to_string(EventTag tag) {
  switch (tag) {
    case EventTag::initial:
      return "initial";
    case EventTag::post_kick:
      return "post_kick";
    case EventTag::post_drift:
      return "post_drift";
  }
  return "?";
}

EventTag event_tag_from_string(const std::string& s) {
  if (s == "initial") return EventTag::initial;
  if (s == "post_kick") return EventTag::post_kick;
  if (s == "post_drift") return EventTag::post_drift;
  throw DomainError("unknown event tag '" + s + "'");
}

namespace {

bool within(double current, double previous, double rel_tol) {
  const double diff = std::abs(current - previous);
  if (previous == 0.0) {
    return diff == 0.0;
  }
  return diff < rel_tol * std::abs(previous);
}

// Keeps the first warning of each kind and counts repeats.
class WarningLog {
 public:
  void add(const Warnings& batch) {
    for (const auto& w : batch) {
      auto [it, inserted] = counts_.try_emplace(w.kind, 0);
      if (inserted) {
        first_.push_back(w);
      }
      ++it->second;
    }
  }

  Warnings finish() const {
    Warnings out = first_;
    for (auto& w : out) {
      const int n = counts_.at(w.kind);
      if (n > 1) {
        w.message += " (repeated " + std::to_string(n) + " times)";
      }
    }
    return out;
  }

 private:
  Warnings first_;
  std::map<std::string, int> counts_;
};

}  // namespace

CoolingTrace run_cooling(const ProtocolConfig& config) {
  config.validate();
  const FockSpace space(config.dim);
  DensityMatrix rho = thermal_state(space, config.nbar_initial);

  CoolingTrace trace;
  WarningLog log;
  double time = 0.0;
  double prob = 1.0;
  trace.events.push_back({time, mean_photons(rho), prob, EventTag::initial, std::nullopt, 1});

  const double duration =
      config.bath.kappa > 0.0 ? config.delta_t_kappa / config.bath.kappa : 0.0;
  auto drift = [&](std::optional<int> phase, int block) {
    if (config.delta_t_kappa <= 0.0) {
      return;
    }
    Warnings w;
    rho = evolve(rho, duration, config.bath, config.integrator, &w);
    log.add(w);
    time += config.delta_t_kappa;
    trace.events.push_back({time, mean_photons(rho), prob, EventTag::post_drift, phase, block});
  };

  if (config.drift_first) {
    drift(std::nullopt, 1);
  }

  std::optional<Complex> cached_g;
  std::array<ComplexMatrix, 4> kraus;
  std::vector<double> maxima;
  int remaining = -1;

  for (int block = 0; block < config.max_ocb; ++block) {
    const int label = block + 1;
    const Complex g = config.coupling_for_block(block);
    if (!cached_g || *cached_g != g) {
      const auto phases = ocb_phases(g);
      for (std::size_t k = 0; k < 4; ++k) {
        const ComplexMatrix d = displacement(space, phases[k]);
        if (auto w = check_unitarity(d, phases[k])) {
          log.add({*w});
        }
        kraus[k] = 0.5 * (identity(space) + d);
      }
      cached_g = g;
    }

    for (int phase = 0; phase < 4; ++phase) {
      if (g != Complex(0.0)) {
        Selected sel = apply_postselected(rho, kraus[static_cast<std::size_t>(phase)]);
        rho = std::move(sel.state);
        prob *= sel.probability;
      }
      trace.events.push_back({time, mean_photons(rho), prob, EventTag::post_kick, phase, label});
      drift(phase, label);
    }
    trace.completed_ocb = label;

    double block_max = -1.0;
    for (auto it = trace.events.rbegin(); it != trace.events.rend() && it->ocb == label; ++it) {
      block_max = std::max(block_max, it->nbar);
    }
    maxima.push_back(block_max);

    if (!trace.stable_at_ocb && maxima.size() >= 2 &&
        within(maxima.back(), maxima[maxima.size() - 2], config.stability_rel_tol)) {
      trace.stable_at_ocb = label;
      remaining = config.confirm_ocb;
    }
    if (config.stop_at_stability && trace.stable_at_ocb) {
      if (remaining == 0) {
        break;
      }
      --remaining;
    }
  }

  trace.warnings = log.finish();
  if (config.keep_final_state) {
    trace.final_state = std::move(rho);
  }
  return trace;
}

std::vector<std::pair<double, double>> block_maxima(const CoolingTrace& trace) {
  std::vector<std::pair<double, double>> maxima;
  int current = 0;
  for (const auto& e : trace.events) {
    if (e.ocb != current) {
      maxima.emplace_back(e.nbar, e.cumulative_prob);
      current = e.ocb;
    } else if (e.nbar > maxima.back().first) {
      maxima.back() = {e.nbar, e.cumulative_prob};
    }
  }
  return maxima;
}

StableMetrics stable_metrics(const CoolingTrace& trace, double rel_tol) {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) {
    throw DomainError("stable_metrics: rel_tol must lie in (0, 1)");
  }
  const auto maxima = block_maxima(trace);
  for (std::size_t k = 1; k < maxima.size(); ++k) {
    if (within(maxima[k].first, maxima[k - 1].first, rel_tol)) {
      return {maxima[k].first, maxima[k].second, static_cast<int>(k + 1), true};
    }
  }
  StableMetrics none;
  if (!trace.events.empty()) {
    none.nbar_final = trace.events.back().nbar;
    none.prob_final = trace.events.back().cumulative_prob;
  }
  none.ocb_at_stability = 0;
  return none;
}

}  // namespace cavcool
