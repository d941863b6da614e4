#pragma once

#include <string>

#include "chronos/sim.hpp"

namespace chronos {

/// A scenario file parsed and fully validated: the scenario itself plus the
/// design knobs and optional default output paths.
struct ScenarioFile {
    std::string name;
    Scenario scenario;
    DesignConfig design;
    std::string gains_out;  // optional defaults from the file
    std::string trace_out;
};

/// Parses and validates a scenario JSON document. Unknown keys are rejected;
/// indices in the file are 1-based. Throws ValidationError with the
/// offending key in the message.
ScenarioFile parse_scenario_json(const std::string& text);

ScenarioFile load_scenario_file(const std::string& path);

} // namespace chronos
