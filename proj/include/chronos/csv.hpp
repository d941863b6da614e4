#pragma once

#include <string>
#include <vector>

#include "chronos/avar.hpp"
#include "chronos/sim.hpp"

namespace chronos {

/// Writes the run trace as `k,entity,x1_s,x2,u` rows. Entities are
/// mac1..macN, gac1..gacG and (for supervised runs) sup, whose x1/x2 columns
/// carry the tracking-error estimate. Paths ending in .gz are gzipped.
void write_trace_csv(const SimTrace& trace, const std::string& path);

SimTrace read_trace_csv(const std::string& path);

std::string trace_to_csv(const SimTrace& trace);
SimTrace trace_from_csv(const std::string& text);

/// AVAR CSV: `tau_s,avar,entity,kind`, one row per curve point.
void write_avar_csv(const std::vector<AvarCurve>& curves, const std::string& path);
std::string avar_to_csv(const std::vector<AvarCurve>& curves);

} // namespace chronos
