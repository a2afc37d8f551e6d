#include "cavcool/io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace cavcool::io {

std::string fmt17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& text, const char* what) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw InvalidConfig(std::string(what) + ": cannot parse '" + text + "' as a number");
  }
  if (used != t.size()) {
    throw InvalidConfig(std::string(what) + ": trailing characters in '" + text + "'");
  }
  return v;
}

}  // namespace

Complex parse_complex(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) {
    return {parse_double(text, "complex"), 0.0};
  }
  return {parse_double(text.substr(0, comma), "complex"),
          parse_double(text.substr(comma + 1), "complex")};
}

std::string format_complex(Complex z) {
  if (z.imag() == 0.0) {
    return fmt17(z.real());
  }
  return fmt17(z.real()) + "," + fmt17(z.imag());
}

void write_trace_csv(std::ostream& out, const CoolingTrace& trace) {
  out << "t_kappa,nbar,p_succ,tag,phase\n";
  for (const auto& e : trace.events) {
    out << fmt17(e.time_kappa) << ',' << fmt17(e.nbar) << ',' << fmt17(e.cumulative_prob) << ','
        << to_string(e.tag) << ',';
    if (e.kick_phase) {
      out << *e.kick_phase;
    }
    out << '\n';
  }
}

namespace {

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j) {
  if (j.is_number()) {
    return {j.get<double>(), 0.0};
  }
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

}  // namespace

json to_json(const ProtocolConfig& c) {
  json schedule = json::array();
  for (const Complex z : c.g_schedule) {
    schedule.push_back(complex_json(z));
  }
  return {
      {"g", complex_json(c.g)},
      {"g_schedule", schedule},
      {"delta_t_kappa", c.delta_t_kappa},
      {"kappa", c.bath.kappa},
      {"nbar_bath", c.bath.nbar_bath},
      {"nbar_initial", c.nbar_initial},
      {"max_ocb", c.max_ocb},
      {"stability_rel_tol", c.stability_rel_tol},
      {"confirm_ocb", c.confirm_ocb},
      {"stop_at_stability", c.stop_at_stability},
      {"drift_first", c.drift_first},
      {"dim", c.dim},
      {"max_step", c.integrator.max_step},
  };
}

ProtocolConfig protocol_config_from_json(const json& j) {
  ProtocolConfig c;
  c.g = complex_from_json(j.at("g"));
  for (const auto& z : j.value("g_schedule", json::array())) {
    c.g_schedule.push_back(complex_from_json(z));
  }
  c.delta_t_kappa = j.at("delta_t_kappa").get<double>();
  c.bath.kappa = j.at("kappa").get<double>();
  c.bath.nbar_bath = j.at("nbar_bath").get<double>();
  c.nbar_initial = j.at("nbar_initial").get<double>();
  c.max_ocb = j.at("max_ocb").get<int>();
  c.stability_rel_tol = j.at("stability_rel_tol").get<double>();
  c.confirm_ocb = j.value("confirm_ocb", c.confirm_ocb);
  c.stop_at_stability = j.value("stop_at_stability", c.stop_at_stability);
  c.drift_first = j.value("drift_first", c.drift_first);
  c.dim = j.at("dim").get<Index>();
  c.integrator.max_step = j.value("max_step", c.integrator.max_step);
  c.validate();
  return c;
}

json trace_to_json(const CoolingTrace& trace, const ProtocolConfig& config) {
  json events = json::array();
  for (const auto& e : trace.events) {
    events.push_back({{"t_kappa", e.time_kappa},
                      {"nbar", e.nbar},
                      {"p_succ", e.cumulative_prob},
                      {"tag", to_string(e.tag)},
                      {"phase", e.kick_phase ? json(*e.kick_phase) : json(nullptr)},
                      {"ocb", e.ocb}});
  }
  json warnings = json::array();
  for (const auto& w : trace.warnings) {
    warnings.push_back({{"kind", w.kind}, {"message", w.message}});
  }
  return {{"config", to_json(config)},
          {"completed_ocb", trace.completed_ocb},
          {"stable_at_ocb", trace.stable_at_ocb ? json(*trace.stable_at_ocb) : json(nullptr)},
          {"warnings", warnings},
          {"events", events}};
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells) {
  out << "g,dt_kappa,cooling_ratio,prob_final,reached,ocb_at_stability\n";
  for (const auto& c : cells) {
    out << fmt17(c.g) << ',' << fmt17(c.dt_kappa) << ',' << fmt17(c.cooling_ratio) << ','
        << fmt17(c.prob_final) << ',' << (c.reached ? "true" : "false") << ','
        << c.ocb_at_stability << '\n';
  }
}

json to_json(const SweepConfig& c) {
  return {{"g_values", c.g_values},
          {"dt_values", c.dt_values},
          {"base", to_json(c.base)},
          {"worker_count", c.worker_count}};
}

json sweep_to_json(const SweepResult& result, const SweepConfig& config) {
  json cells = json::array();
  for (const auto& c : result.cells) {
    json cell = {{"g", c.g},
                 {"dt_kappa", c.dt_kappa},
                 {"cooling_ratio", c.cooling_ratio},
                 {"prob_final", c.prob_final},
                 {"reached", c.reached},
                 {"ocb_at_stability", c.ocb_at_stability}};
    if (c.failed) {
      cell["error"] = c.error;
    }
    cells.push_back(cell);
  }
  return {{"config", to_json(config)}, {"cells", cells}};
}

void write_wigner_csv(std::ostream& out, const WignerGrid& grid) {
  out << "x,p,w\n";
  for (std::size_t ip = 0; ip < grid.p_values.size(); ++ip) {
    for (std::size_t ix = 0; ix < grid.x_values.size(); ++ix) {
      out << fmt17(grid.x_values[ix]) << ',' << fmt17(grid.p_values[ip]) << ','
          << fmt17(grid.values(static_cast<Index>(ip), static_cast<Index>(ix))) << '\n';
    }
  }
}

void write_state(std::ostream& out, const DensityMatrix& rho) {
  out << "dim=" << rho.dim() << '\n';
  for (Index r = 0; r < rho.dim(); ++r) {
    for (Index c = 0; c < rho.dim(); ++c) {
      const Complex v = rho.matrix()(r, c);
      out << r << ' ' << c << ' ' << fmt17(v.real()) << ' ' << fmt17(v.imag()) << '\n';
    }
  }
}

DensityMatrix read_state(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || trim(header).rfind("dim=", 0) != 0) {
    throw InvalidConfig("state file: first line must be 'dim=N'");
  }
  const double dim_value = parse_double(trim(header).substr(4), "state file dim");
  const auto dim = static_cast<Index>(dim_value);
  if (dim < 2 || static_cast<double>(dim) != dim_value) {
    throw InvalidConfig("state file: dim must be an integer >= 2");
  }
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> seen =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(dim, dim, false);
  std::string line;
  Index count = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) {
      continue;
    }
    std::istringstream row(line);
    Index r = -1, c = -1;
    std::string re, im;
    if (!(row >> r >> c >> re >> im) || r < 0 || c < 0 || r >= dim || c >= dim) {
      throw InvalidConfig("state file: malformed entry '" + line + "'");
    }
    if (seen(r, c)) {
      throw InvalidConfig("state file: duplicate entry '" + line + "'");
    }
    seen(r, c) = true;
    m(r, c) = Complex(parse_double(re, "state file"), parse_double(im, "state file"));
    ++count;
  }
  if (count != dim * dim) {
    throw InvalidConfig("state file: expected " + std::to_string(dim * dim) + " entries, got " +
                        std::to_string(count));
  }
  return DensityMatrix(std::move(m));
}

std::map<std::string, std::string> parse_key_value(std::istream& in) {
  std::map<std::string, std::string> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    if (trim(line).empty()) {
      continue;
    }
    const auto eq = line.find('=');
    const std::string key = eq == std::string::npos ? "" : trim(line.substr(0, eq));
    if (key.empty()) {
      throw InvalidConfig("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (!entries.emplace(key, value).second) {
      throw InvalidConfig("config line " + std::to_string(lineno) + ": repeated key '" + key + "'");
    }
  }
  return entries;
}

void write_key_value(std::ostream& out, const std::map<std::string, std::string>& entries) {
  for (const auto& [key, value] : entries) {
    out << key << " = " << value << '\n';
  }
}

}  // namespace cavcool::io
