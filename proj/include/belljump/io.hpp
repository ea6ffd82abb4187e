#pragma once

// Serialization: the JSON model format, trajectory JSON lines, ensemble
// and assumption reports, and CSV tables.

#include <cstdint>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "belljump/checks.hpp"
#include "belljump/ensemble.hpp"
#include "belljump/models.hpp"
#include "belljump/oracle.hpp"

namespace belljump {

using Json = nlohmann::ordered_json;

/// {"dim", "hamiltonian": row-major [re, im] pairs, "povm": [{label, matrix}],
///  "psi0": [re, im] pairs}. A "name" field is written and optional on input.
Json model_to_json(const ModelSpec& model);

/// Every ValidationError thrown names a JSON path such as
/// "$.povm[2].matrix[5]".
ModelSpec model_from_json(const Json& doc, const std::string& fallback_name = "custom");

/// A bundled model name, or the path of a JSON model file.
ModelSpec load_model(const std::string& name_or_path);

/// {"index":i,"status":"...","events":[[t,"label"],...]} on one line.
std::string trajectory_to_jsonl(std::uint64_t index, const Trajectory& traj, const Povm& pov);

Json report_to_json(const EnsembleReport& report);
Json assumption_report_to_json(const AssumptionReport& report);

/// Header `t,label,empirical,expected`, one row per (checkpoint, label).
void write_checkpoint_csv(std::ostream& os, const EnsembleReport& report);

/// Header `t,label,weight,method`.
void write_oracle_csv(std::ostream& os, const OracleSolution& solution, const Povm& pov);

/// Round-trip decimal text for a double ("inf" for infinity).
std::string format_real(double v);

}  // namespace belljump
