#include "belljump/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <regex>

namespace belljump {

namespace {

Json complex_pair(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex parse_complex(const Json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ValidationError(path, "expected a [re, im] pair of numbers");
  }
  const Complex z(v[0].get<double>(), v[1].get<double>());
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw ValidationError(path, "entry is not finite");
  return z;
}

CMatrix parse_matrix(const Json& v, std::size_t dim, const std::string& path) {
  if (!v.is_array()) throw ValidationError(path, "expected an array of [re, im] pairs");
  if (v.size() != dim * dim) {
    throw ValidationError(path, "expected " + std::to_string(dim * dim) + " entries, found " + std::to_string(v.size()));
  }
  CMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      const std::size_t k = i * dim + j;
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          parse_complex(v[k], path + "[" + std::to_string(k) + "]");
    }
  }
  return m;
}

Json matrix_json(const CMatrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(complex_pair(m(i, j)));
  }
  return out;
}

const Json& require(const Json& doc, const char* key) {
  if (!doc.contains(key)) throw ValidationError(std::string("$.") + key, "missing field");
  return doc.at(key);
}

// Library validators report matrix entries as "name(i,j)"; rewrite those to
// the flat row-major JSON index.
std::string json_path(const std::string& lib_path, std::size_t dim) {
  static const std::regex entry(R"((hamiltonian|povm\[\d+\]|povm_sum)\((\d+),(\d+)\))");
  static const std::regex indexed(R"(psi0\[(\d+)\]|povm\[(\d+)\])");
  std::smatch m;
  if (std::regex_match(lib_path, m, entry)) {
    const std::size_t flat = std::stoul(m[2]) * dim + std::stoul(m[3]);
    const std::string name = m[1];
    if (name == "hamiltonian") return "$.hamiltonian[" + std::to_string(flat) + "]";
    if (name == "povm_sum") return "$.povm";
    return "$." + name + ".matrix[" + std::to_string(flat) + "]";
  }
  if (std::regex_match(lib_path, m, indexed) || lib_path == "psi0" || lib_path == "povm" ||
      lib_path == "hamiltonian") {
    return "$." + lib_path;
  }
  return "$";
}

}  // namespace

std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json model_to_json(const ModelSpec& model) {
  Json doc;
  doc["name"] = model.name;
  doc["dim"] = model.dim();
  doc["hamiltonian"] = matrix_json(model.H.matrix());
  Json povm = Json::array();
  for (LabelId x = 0; x < model.pov.size(); ++x) {
    povm.push_back(Json{{"label", model.pov.label(x)}, {"matrix", matrix_json(model.pov.element(x))}});
  }
  doc["povm"] = std::move(povm);
  Json psi = Json::array();
  const CVector& a = model.psi0.amplitudes();
  for (Eigen::Index i = 0; i < a.size(); ++i) psi.push_back(complex_pair(a[i]));
  doc["psi0"] = std::move(psi);
  return doc;
}

ModelSpec model_from_json(const Json& doc, const std::string& fallback_name) {
  if (!doc.is_object()) throw ValidationError("$", "model document must be a JSON object");
  const Json& jdim = require(doc, "dim");
  if (!jdim.is_number_integer() || jdim.get<long long>() < 1) {
    throw ValidationError("$.dim", "must be a positive integer");
  }
  const auto dim = static_cast<std::size_t>(jdim.get<long long>());
  std::string name = fallback_name;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw ValidationError("$.name", "must be a string");
    name = doc["name"].get<std::string>();
  }

  const CMatrix h = parse_matrix(require(doc, "hamiltonian"), dim, "$.hamiltonian");

  const Json& jpovm = require(doc, "povm");
  if (!jpovm.is_array() || jpovm.empty()) throw ValidationError("$.povm", "expected a non-empty array");
  std::vector<std::string> labels;
  std::vector<CMatrix> elements;
  for (std::size_t k = 0; k < jpovm.size(); ++k) {
    const std::string path = "$.povm[" + std::to_string(k) + "]";
    const Json& e = jpovm[k];
    if (!e.is_object()) throw ValidationError(path, "expected an object with label and matrix");
    if (!e.contains("label")) throw ValidationError(path + ".label", "missing field");
    const Json& lab = e["label"];
    if (lab.is_string()) labels.push_back(lab.get<std::string>());
    else if (lab.is_number_integer()) labels.push_back(std::to_string(lab.get<long long>()));
    else throw ValidationError(path + ".label", "must be a string or integer");
    if (!e.contains("matrix")) throw ValidationError(path + ".matrix", "missing field");
    elements.push_back(parse_matrix(e["matrix"], dim, path + ".matrix"));
  }

  const Json& jpsi = require(doc, "psi0");
  if (!jpsi.is_array() || jpsi.size() != dim) {
    throw ValidationError("$.psi0", "expected " + std::to_string(dim) + " [re, im] pairs");
  }
  CVector psi(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    psi[static_cast<Eigen::Index>(i)] = parse_complex(jpsi[i], "$.psi0[" + std::to_string(i) + "]");
  }

  try {
    ModelSpec model{name, HermitianOperator(h), Povm(std::move(labels), std::move(elements)),
                    StateVector(psi), {}};
    model.validate();
    return model;
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    const std::string prefix = e.path() + ": ";
    if (!e.path().empty() && msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
    throw ValidationError(json_path(e.path(), dim), msg);
  }
}

ModelSpec load_model(const std::string& name_or_path) {
  if (auto m = bundled_model(name_or_path)) return *m;
  const std::filesystem::path p(name_or_path);
  std::ifstream in(p);
  if (!in) throw ValidationError("model", "no bundled model or readable file named '" + name_or_path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError("$", std::string("malformed JSON: ") + e.what());
  }
  return model_from_json(doc, p.stem().string());
}

std::string trajectory_to_jsonl(std::uint64_t index, const Trajectory& traj, const Povm& pov) {
  Json events = Json::array();
  for (const Event& e : traj.events) events.push_back(Json::array({e.time, pov.label(e.label)}));
  Json line;
  line["index"] = index;
  line["status"] = to_string(traj.status);
  line["events"] = std::move(events);
  if (traj.diagnostic) {
    line["diagnostic"] = Json{{"time", traj.diagnostic->time},
                              {"label", pov.label(traj.diagnostic->label)},
                              {"reason", traj.diagnostic->reason}};
  }
  return line.dump();
}

Json report_to_json(const EnsembleReport& r) {
  Json doc;
  doc["n_trajectories"] = r.n_trajectories;
  doc["t0"] = r.t0;
  doc["t_end"] = r.t_end;
  doc["labels"] = r.labels;
  Json cps = Json::array();
  for (std::size_t c = 0; c < r.checkpoints.size(); ++c) {
    cps.push_back(Json{{"t", r.checkpoints[c]},
                       {"empirical", r.empirical[c].weights},
                       {"expected", r.expected[c].weights},
                       {"tv_distance", r.tv_distance[c]},
                       {"envelope_violations", r.envelope_violations[c]}});
  }
  doc["checkpoints"] = std::move(cps);
  doc["mean_jumps"] = r.mean_jumps;
  doc["jumps_standard_error"] = r.jumps_standard_error;
  doc["max_jumps_observed"] = r.max_jumps_observed;
  doc["expected_jumps"] = r.expected_jumps ? Json(*r.expected_jumps) : Json(nullptr);
  doc["explosion_count"] = r.explosion_count;
  doc["cemetery_count"] = r.cemetery_count;
  doc["min_weight_visited"] = std::isfinite(r.min_weight_visited) ? Json(r.min_weight_visited) : Json(nullptr);
  doc["node_occupancy"] = r.node_occupancy;
  doc["ks_statistics"] = Json::object();
  for (const auto& [k, v] : r.ks_statistics) doc["ks_statistics"][k] = v;
  Json diags = Json::array();
  for (const Diagnostic& d : r.diagnostics) {
    diags.push_back(Json{{"time", d.time}, {"label", r.labels.at(d.label)}, {"reason", d.reason}});
  }
  doc["diagnostics"] = std::move(diags);
  return doc;
}

Json assumption_report_to_json(const AssumptionReport& r) {
  Json doc;
  doc["a1_trivially_satisfied"] = r.a1_trivially_satisfied;
  doc["a2_integral"] = r.a2_integral;
  doc["t0"] = r.t0;
  doc["t1"] = r.t1;
  doc["hs_norm"] = r.hs_norm;
  doc["hs_bound_ok"] = r.hs_bound_ok;
  doc["worst_ratio"] = r.worst_ratio;
  doc["hs_trials"] = r.hs_trials;
  doc["povm_valid"] = r.povm_valid;
  return doc;
}

void write_checkpoint_csv(std::ostream& os, const EnsembleReport& r) {
  os << "t,label,empirical,expected\n";
  for (std::size_t c = 0; c < r.checkpoints.size(); ++c) {
    for (std::size_t x = 0; x < r.labels.size(); ++x) {
      os << format_real(r.checkpoints[c]) << ',' << r.labels[x] << ',' << format_real(r.empirical[c].weights[x])
         << ',' << format_real(r.expected[c].weights[x]) << '\n';
    }
  }
}

void write_oracle_csv(std::ostream& os, const OracleSolution& s, const Povm& pov) {
  os << "t,label,weight,method\n";
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    for (LabelId x = 0; x < pov.size(); ++x) {
      os << format_real(s.times[k]) << ',' << pov.label(x) << ',' << format_real(s.distributions[k].weights[x])
         << ',' << to_string(s.method) << '\n';
    }
  }
}

}  // namespace belljump
