#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "cavcool/protocol.hpp"
#include "cavcool/states.hpp"
#include "cavcool/sweep.hpp"

namespace cavcool::io {

using json = nlohmann::json;

// 17 significant digits, enough to round-trip a double.
std::string fmt17(double value);

// "re" or "re,im".
Complex parse_complex(const std::string& text);
std::string format_complex(Complex z);

// Header: t_kappa,nbar,p_succ,tag,phase
void write_trace_csv(std::ostream& out, const CoolingTrace& trace);
json to_json(const ProtocolConfig& config);
ProtocolConfig protocol_config_from_json(const json& j);
json trace_to_json(const CoolingTrace& trace, const ProtocolConfig& config);

// Header: g,dt_kappa,cooling_ratio,prob_final,reached,ocb_at_stability
void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells);
json to_json(const SweepConfig& config);
json sweep_to_json(const SweepResult& result, const SweepConfig& config);

// Header: x,p,w; rows run over p (outer) then x (inner).
void write_wigner_csv(std::ostream& out, const WignerGrid& grid);

// "dim=N" then N^2 lines "row col re im".
void write_state(std::ostream& out, const DensityMatrix& rho);
DensityMatrix read_state(std::istream& in);

// Flat "key = value" lines; '#' starts a comment. Throws InvalidConfig on
// malformed lines or repeated keys.
std::map<std::string, std::string> parse_key_value(std::istream& in);
void write_key_value(std::ostream& out, const std::map<std::string, std::string>& entries);

}  // namespace cavcool::io
