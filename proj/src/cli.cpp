#include "qdmet/cli.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "qdmet/error.hpp"
#include "qdmet/fci.hpp"
#include "qdmet/meanfield.hpp"

namespace qdmet::cli {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  throw ValidationError("field '" + path + "': " + what);
}

// Read-only view over a JSON object that rejects unknown keys.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) field_error(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& get(const std::string& key) const {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_number()) field_error(at(key), "expected a number");
    return v.get<double>();
  }
  int integer(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_number_integer()) field_error(at(key), "expected an integer");
    return v.get<int>();
  }
  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_boolean()) field_error(at(key), "expected true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_string()) field_error(at(key), "expected a string");
    return v.get<std::string>();
  }

  void reject_unknown() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) field_error(at(it.key()), "unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  mutable std::set<std::string> seen_;
};

std::vector<OrbitalSet> parse_sets(const json& j, const std::string& path) {
  if (!j.is_array()) field_error(path, "expected a list of index lists");
  std::vector<OrbitalSet> out;
  for (std::size_t a = 0; a < j.size(); ++a) {
    const std::string p = path + "[" + std::to_string(a) + "]";
    if (!j[a].is_array()) field_error(p, "expected a list of orbital indices");
    OrbitalSet s;
    for (const auto& v : j[a]) {
      if (!v.is_number_unsigned()) field_error(p, "orbital indices must be non-negative integers");
      s.push_back(v.get<std::size_t>());
    }
    out.push_back(std::move(s));
  }
  return out;
}

InputSpec parse_input(const json& j, const std::string& path) {
  Fields f(j, path);
  InputSpec in;
  in.label = f.string("label", "");
  const bool has_file = f.has("fcidump");
  const bool has_hub = f.has("hubbard");
  if (has_file == has_hub) field_error(path, "exactly one of 'fcidump' or 'hubbard' is required");
  if (has_file) {
    in.fcidump = f.string("fcidump", "");
    if (in.fcidump->empty()) field_error(f.at("fcidump"), "empty path");
    if (in.label.empty()) in.label = std::filesystem::path(*in.fcidump).stem().string();
  } else {
    Fields h(f.get("hubbard"), f.at("hubbard"));
    HubbardParams p;
    const int n = h.integer("n", -1);
    if (n < 1) field_error(h.at("n"), "site count must be a positive integer");
    p.n_sites = static_cast<std::size_t>(n);
    p.t = h.number("t", 1.0);
    p.u = h.number("u", 0.0);
    p.periodic = h.boolean("periodic", false);
    p.n_electrons = h.integer("n_electrons", -1);
    h.reject_unknown();
    in.hubbard = p;
    if (in.label.empty()) in.label = "hubbard" + std::to_string(n);
  }
  f.reject_unknown();
  return in;
}

json input_to_json(const InputSpec& in) {
  json j;
  j["label"] = in.label;
  if (in.fcidump) j["fcidump"] = *in.fcidump;
  if (in.hubbard) {
    const auto& p = *in.hubbard;
    j["hubbard"] = {{"n", p.n_sites}, {"t", p.t}, {"u", p.u}, {"periodic", p.periodic},
                    {"n_electrons", p.n_electrons}};
  }
  return j;
}

std::string fmt_double(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

Method parse_method(const std::string& name) {
  if (name == "rhf") return Method::rhf;
  if (name == "fci") return Method::fci;
  if (name == "vqe") return Method::vqe;
  if (name == "dmet-fci") return Method::dmet_fci;
  if (name == "dmet-esvqe") return Method::dmet_esvqe;
  throw ValidationError("field 'method': unknown method '" + name +
                        "' (expected rhf, fci, vqe, dmet-fci or dmet-esvqe)");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::rhf: return "rhf";
    case Method::fci: return "fci";
    case Method::vqe: return "vqe";
    case Method::dmet_fci: return "dmet-fci";
    case Method::dmet_esvqe: return "dmet-esvqe";
  }
  return "unknown";
}

bool is_dmet(Method m) { return m == Method::dmet_fci || m == Method::dmet_esvqe; }

void RunConfig::validate() const {
  if (is_dmet(method) && !partition && !single_orbital_fragments)
    field_error("partition", "required for method " + to_string(method));
  try {
    dmet.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("field 'dmet': ") + e.what());
  }
  if (!(vqe.epsilon >= 0.0)) field_error("vqe.epsilon", "must be non-negative");
  if (!(vqe.optimizer_tol > 0.0)) field_error("vqe.optimizer_tol", "must be positive");
  if (vqe.max_evals < 1) field_error("vqe.max_evals", "must be positive");
  if (!(vqe.bracket_lo < vqe.bracket_hi)) field_error("vqe.bracket", "lower bound must be below upper bound");
  for (std::size_t i = 0; i < inputs.size(); ++i)
    if (inputs[i].fcidump.has_value() == inputs[i].hubbard.has_value())
      field_error("inputs[" + std::to_string(i) + "]", "exactly one of 'fcidump' or 'hubbard' is required");
}

std::filesystem::path RunConfig::resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(0, std::string("config is not valid JSON: ") + e.what());
  }
  Fields root(j, "");
  RunConfig cfg;
  cfg.base_dir = base_dir;
  cfg.method = parse_method(root.string("method", "fci"));

  const bool one = root.has("input"), many = root.has("inputs");
  if (one && many) field_error("input", "give either 'input' or 'inputs', not both");
  if (one) cfg.inputs.push_back(parse_input(root.get("input"), "input"));
  if (many) {
    const json& list = root.get("inputs");
    if (!list.is_array()) field_error("inputs", "expected a list");
    for (std::size_t i = 0; i < list.size(); ++i)
      cfg.inputs.push_back(parse_input(list[i], "inputs[" + std::to_string(i) + "]"));
  }

  if (root.has("partition")) {
    Fields p(root.get("partition"), "partition");
    FragmentPartition part;
    if (p.has("fragments")) {
      const json& fr = p.get("fragments");
      if (fr.is_string()) {
        if (fr.get<std::string>() != "single") field_error("partition.fragments", "the only named partition is \"single\"");
        cfg.single_orbital_fragments = true;
      } else {
        part.fragments = parse_sets(fr, "partition.fragments");
      }
    } else {
      field_error("partition.fragments", "required");
    }
    if (p.has("inactive")) part.inactive = parse_sets(p.get("inactive"), "partition.inactive");
    p.reject_unknown();
    if (!cfg.single_orbital_fragments) cfg.partition = std::move(part);
    else if (!part.inactive.empty()) field_error("partition.inactive", "not allowed with \"single\" fragments");
  }

  if (root.has("dmet")) {
    Fields d(root.get("dmet"), "dmet");
    cfg.dmet.tau = d.number("tau", cfg.dmet.tau);
    cfg.dmet.eta = d.number("eta", cfg.dmet.eta);
    cfg.dmet.mu_max_iter = d.integer("mu_max_iter", cfg.dmet.mu_max_iter);
    cfg.dmet.mu_step = d.number("mu_step", cfg.dmet.mu_step);
    cfg.dmet.gamma = d.number("gamma", cfg.dmet.gamma);
    cfg.dmet.fit_max_iter = d.integer("fit_max_iter", cfg.dmet.fit_max_iter);
    cfg.dmet.fit_tol = d.number("fit_tol", cfg.dmet.fit_tol);
    try {
      cfg.dmet.mode = parse_dmet_mode(d.string("mode", to_string(cfg.dmet.mode)));
    } catch (const ValidationError& e) {
      field_error("dmet.mode", e.what());
    }
    d.reject_unknown();
  }

  if (root.has("vqe")) {
    Fields v(root.get("vqe"), "vqe");
    cfg.vqe.epsilon = v.number("epsilon", cfg.vqe.epsilon);
    cfg.vqe.optimizer_tol = v.number("optimizer_tol", cfg.vqe.optimizer_tol);
    cfg.vqe.max_evals = v.integer("max_evals", cfg.vqe.max_evals);
    if (v.has("bracket")) {
      const json& b = v.get("bracket");
      if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number())
        field_error("vqe.bracket", "expected [lower, upper]");
      cfg.vqe.bracket_lo = b[0].get<double>();
      cfg.vqe.bracket_hi = b[1].get<double>();
    }
    cfg.vqe.analytic_gradient = v.boolean("analytic_gradient", cfg.vqe.analytic_gradient);
    cfg.vqe.fine_tuning = v.boolean("fine_tuning", cfg.vqe.fine_tuning);
    v.reject_unknown();
  }

  cfg.output = root.string("output", "");
  cfg.log = root.string("log", "");
  root.reject_unknown();
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::string serialize_config(const RunConfig& cfg) {
  json j;
  j["method"] = to_string(cfg.method);
  j["inputs"] = json::array();
  for (const auto& in : cfg.inputs) j["inputs"].push_back(input_to_json(in));
  if (cfg.single_orbital_fragments) {
    j["partition"] = {{"fragments", "single"}};
  } else if (cfg.partition) {
    j["partition"] = {{"fragments", cfg.partition->fragments}, {"inactive", cfg.partition->inactive}};
  }
  const auto& d = cfg.dmet;
  j["dmet"] = {{"tau", d.tau},         {"eta", d.eta},         {"mu_max_iter", d.mu_max_iter},
               {"mu_step", d.mu_step}, {"gamma", d.gamma},     {"fit_max_iter", d.fit_max_iter},
               {"fit_tol", d.fit_tol}, {"mode", to_string(d.mode)}};
  const auto& v = cfg.vqe;
  j["vqe"] = {{"epsilon", v.epsilon},
              {"optimizer_tol", v.optimizer_tol},
              {"max_evals", v.max_evals},
              {"bracket", {v.bracket_lo, v.bracket_hi}},
              {"analytic_gradient", v.analytic_gradient},
              {"fine_tuning", v.fine_tuning}};
  j["output"] = cfg.output;
  j["log"] = cfg.log;
  return j.dump(2);
}

std::string csv_header() { return "label,method,energy_hartree,mu_star,converged,n_qubits,wall_seconds,error"; }

std::string format_row(const RunRow& r) {
  std::string s = csv_escape(r.label) + "," + r.method + ",";
  if (r.energy) s += fmt_double("%.10f", *r.energy);
  s += ",";
  if (r.mu_star) s += fmt_double("%.8f", *r.mu_star + 0.0);
  s += std::string(",") + (r.converged ? "true" : "false") + ",";
  s += std::to_string(r.n_qubits) + "," + fmt_double("%.3f", r.wall_seconds) + ",";
  s += csv_escape(r.error);
  return s;
}

IntegralSet load_input(const RunConfig& cfg, const InputSpec& in) {
  if (in.fcidump) return read_fcidump_file(cfg.resolve(*in.fcidump).string());
  if (in.hubbard) return build_hubbard(*in.hubbard);
  throw ValidationError("input '" + in.label + "' has no source");
}

FragmentPartition partition_for(const RunConfig& cfg, std::size_t n) {
  if (cfg.single_orbital_fragments) {
    FragmentPartition p;
    for (std::size_t i = 0; i < n; ++i) p.fragments.push_back({i});
    return p;
  }
  if (!cfg.partition) throw ValidationError("field 'partition': required for DMET methods");
  return *cfg.partition;
}

RunRow run_input(const RunConfig& cfg, const InputSpec& input, const LogSink& log) {
  RunRow row;
  row.label = input.label;
  row.method = to_string(cfg.method);
  const auto t0 = std::chrono::steady_clock::now();
  auto emit = [&](json j) {
    if (!log) return;
    j["label"] = input.label;
    log(j.dump());
  };
  try {
    const IntegralSet ints = load_input(cfg, input);
    switch (cfg.method) {
      case Method::rhf: {
        const MeanFieldState mf = run_rhf(ints, cfg.dmet.scf);
        for (const auto& it : mf.trace)
          emit({{"event", "scf"}, {"iteration", it.iteration}, {"energy", it.energy},
                {"density_residual", it.density_residual}});
        row.energy = mf.energy;
        row.converged = true;
        break;
      }
      case Method::fci: {
        row.energy = fci_ground_state(ints).energy;
        row.n_qubits = 2 * ints.n_spatial();
        row.converged = true;
        break;
      }
      case Method::vqe: {
        const EsvqeResult r = run_esvqe(ints, cfg.vqe, cfg.dmet.scf);
        json table = json::array();
        for (const auto& e : r.screened.entries)
          table.push_back({{"op", e.op.to_string()}, {"delta_e", e.delta_e}, {"theta_opt", e.theta_opt}});
        emit({{"event", "screening"}, {"reference_energy", r.screened.reference_energy},
              {"pool_size", r.pool_size}, {"retained", table}});
        for (const auto& it : r.minimize.trace)
          emit({{"event", "vqe"}, {"iteration", it.iteration}, {"energy", it.energy},
                {"gradient_norm", it.gradient_norm}, {"evaluations", it.evaluations}});
        row.energy = r.energy;
        row.n_qubits = r.n_qubits;
        row.converged = r.minimize.converged;
        break;
      }
      case Method::dmet_fci:
      case Method::dmet_esvqe: {
        DmetConfig dcfg = cfg.dmet;
        dcfg.on_iteration = [&](const MuIteration& it) {
          emit({{"event", "mu"}, {"iteration", it.iteration}, {"mu", it.mu}, {"deviation", it.deviation},
                {"fragment_energies", it.fragment_energies}, {"wall_seconds", it.wall_seconds}});
        };
        std::mutex mu_log;
        FragmentSolver solver =
            cfg.method == Method::dmet_fci
                ? make_fci_solver()
                : make_esvqe_solver(cfg.vqe, [&](const EmbeddingProblem& p, const EsvqeResult& r) {
                    std::lock_guard<std::mutex> lock(mu_log);
                    emit({{"event", "fragment_vqe"}, {"mu", p.mu}, {"n_qubits", r.n_qubits},
                          {"pool_size", r.pool_size}, {"retained", r.screened.entries.size()},
                          {"energy", r.energy}, {"evaluations", r.minimize.evaluations},
                          {"converged", r.minimize.converged}});
                  });
        const DmetResult r = run_dmet(ints, partition_for(cfg, ints.n_spatial()), solver, dcfg);
        row.energy = r.total_energy;
        row.mu_star = r.mu_star;
        row.converged = r.converged;
        row.n_qubits = r.n_qubits();
        break;
      }
    }
  } catch (const std::exception& e) {
    row.error = e.what();
    row.converged = false;
  }
  row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

int run_scan(const RunConfig& cfg, const ScanOptions& opts, std::ostream& csv, const LogSink& log) {
  const std::size_t n = cfg.inputs.size();
  csv << csv_header() << "\n" << std::flush;
  std::vector<std::optional<RunRow>> rows(n);
  std::mutex m;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};
  LogSink safe_log;
  if (log)
    safe_log = [&](const std::string& line) {
      std::lock_guard<std::mutex> lock(m);
      log(line);
    };

  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      RunRow r = run_input(cfg, cfg.inputs[i], safe_log);
      std::lock_guard<std::mutex> lock(m);
      rows[i] = std::move(r);
      ready.notify_all();
    }
  };
  const int workers = std::max(1, std::min<int>(opts.parallel, static_cast<int>(n)));
  std::vector<std::thread> pool;
  if (workers > 1)
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);

  int status = 0;
  std::size_t written = 0;
  auto flush_ready = [&] {
    while (written < n && rows[written]) {
      const RunRow& r = *rows[written];
      csv << format_row(r) << "\n" << std::flush;
      if (!r.converged && !opts.allow_unconverged) status = 1;
      ++written;
    }
  };
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      rows[i] = run_input(cfg, cfg.inputs[i], log);
      flush_ready();
    }
  } else {
    std::unique_lock<std::mutex> lock(m);
    while (written < n) {
      ready.wait(lock, [&] { return rows[written].has_value(); });
      flush_ready();
    }
    lock.unlock();
    for (auto& t : pool) t.join();
  }
  return status;
}

}  // namespace qdmet::cli
