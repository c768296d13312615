#include "fsw/cli/runner.hpp"

#include <chrono>
#include <map>
#include <optional>
#include <sstream>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "fsw/analysis/checks.hpp"
#include "fsw/cli/config.hpp"
#include "fsw/la/factor.hpp"
#include "fsw/model/classify.hpp"
#include "fsw/model/registry.hpp"
#include "fsw/mor/reduce.hpp"
#include "fsw/sections/sections.hpp"

namespace fsw::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using model::FriedrichsSystem;
using model::ParamPoint;

namespace {

std::string join_mu(const ParamPoint& mu) {
  std::string s;
  for (std::size_t i = 0; i < mu.size(); ++i) s += (i ? ";" : "") + format_double(mu[i]);
  return s;
}

class OutputWriter {
public:
  OutputWriter(std::string dir, const Config& cfg) : dir_(std::move(dir)), cfg_(cfg) {
    fs::create_directories(dir_);
    start_ = std::chrono::steady_clock::now();
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path target = fs::path(dir_) / name;
    const fs::path tmp = fs::path(dir_) / (name + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary);
      if (!out) throw Error("cannot write " + tmp.string());
      out << content;
    }
    fs::rename(tmp, target);
    files_.push_back({name, content.size(), fnv1a64(content)});
  }

  void stage(const std::string& name) {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - last_stage_).count();
    stages_.push_back({name, ms});
    last_stage_ = now;
  }

  void finish() {
    json doc;
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(cfg_.hash()));
    doc["config_hash"] = std::string(hex);
    doc["version"] = "0.1.0";
    const auto now = std::chrono::steady_clock::now();
    doc["wall_ms"] = std::chrono::duration<double, std::milli>(now - start_).count();
    json st = json::object();
    for (const auto& [n, ms] : stages_) st[n] = ms;
    doc["stages"] = st;
    json inv = json::array();
    for (const auto& f : files_) {
      std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(f.hash));
      inv.push_back({{"name", f.name}, {"bytes", f.bytes}, {"fnv64", std::string(hex)}});
    }
    doc["files"] = inv;
    const std::string text = doc.dump(2) + "\n";
    const fs::path tmp = fs::path(dir_) / "manifest.json.tmp";
    {
      std::ofstream out(tmp, std::ios::binary);
      out << text;
    }
    fs::rename(tmp, fs::path(dir_) / "manifest.json");
  }

  const std::string& dir() const { return dir_; }

private:
  struct FileEntry {
    std::string name;
    std::size_t bytes;
    std::uint64_t hash;
  };
  std::string dir_;
  const Config& cfg_;
  std::vector<FileEntry> files_;
  std::vector<std::pair<std::string, double>> stages_;
  std::chrono::steady_clock::time_point start_, last_stage_ = std::chrono::steady_clock::now();
};

FriedrichsSystem require_system(const Config& cfg) {
  if (!cfg.system) throw ConfigError("this command requires a 'system' section");
  try {
    return model::registry_get(cfg.system->id, cfg.system->overrides);
  } catch (const Error& e) {
    // registry rejections stem from the config (unknown id, bad overrides)
    throw ConfigError(e.what());
  }
}

std::function<double(double)> make_profile(const ProfileCfg& p) {
  if (p.type == "gaussian") {
    const double c = p.center, w = p.width;
    return [c, w](double x) {
      const double d = x - c;
      return std::exp(-d * d / (2.0 * w * w));
    };
  }
  if (p.type == "sin") {
    const double k = p.k;
    return [k](double x) { return std::sin(2.0 * 3.14159265358979323846 * k * x); };
  }
  const double lo = p.lo, hi = p.hi;
  return [lo, hi](double x) { return (x >= lo && x <= hi) ? 1.0 : 0.0; };
}

mor::RefNorm ref_norm_from(const std::string& name) {
  if (name == "l2") return mor::RefNorm::L2;
  if (name == "x0") return mor::RefNorm::X0;
  return mor::RefNorm::Auto;
}

// ---- commands --------------------------------------------------------------

int cmd_validate(const Config& cfg, OutputWriter& out) {
  FriedrichsSystem sys = require_system(cfg);
  const model::ValidationReport rep = model::validate_friedrichs(sys, cfg.validation);
  out.stage("validate");

  bool grams_ok = true;
  std::string gram_note;
  {
    // default to a small mesh when none is configured so the Gram positivity
    // check always runs
    dg::StructuredMesh mesh;
    if (cfg.mesh) {
      mesh = make_mesh(cfg, &sys);
    } else {
      mesh.dim = sys.space_dim;
      mesh.box = sys.domain;
      for (std::size_t i = 0; i < mesh.dim; ++i) mesh.cells[i] = 8;
      mesh.check_valid();
    }
    const dg::DGSpace space = dg::build_space(mesh, cfg.dg_order, sys.state_dim);
    Rng rng(cfg.validation.seed);
    gram_note = "ok";
    for (std::size_t t = 0; t < std::max<std::size_t>(1, cfg.validation.mu_samples / 2); ++t) {
      const ParamPoint mu = sys.params.sample(rng);
      dg::AssembleParts parts;
      parts.system = false;
      parts.grams = true;
      const dg::AssembledProblem ap = dg::assemble(sys, space, mu, parts);
      try {
        dg::GramFactor fg(ap.graph_gram);
        dg::GramFactor fm(ap.mass);
        dg::GramFactor fa(ap.adjoint_gram);
      } catch (const Error& e) {
        grams_ok = false;
        gram_note = e.what();
        break;
      }
    }
    out.stage("grams");
  }

  json doc;
  doc["system"] = sys.id;
  doc["fs1_pass"] = rep.fs1_pass;
  doc["fs2_pass"] = rep.fs2_pass;
  doc["m1_pass"] = rep.m1_pass;
  doc["finite_pass"] = rep.finite_pass;
  doc["epsilon_estimate"] = rep.epsilon_estimate;
  doc["epsilon_declared"] = sys.epsilon_bound;
  doc["max_asymmetry"] = rep.max_asymmetry;
  doc["m1_min_eigenvalue"] = rep.m1_min_eigenvalue;
  doc["grams_spd"] = grams_ok;
  doc["gram_note"] = gram_note;
  doc["worst_mu"] = rep.worst_mu;
  doc["failures"] = rep.failures;
  const bool pass = rep.pass() && grams_ok;
  doc["pass"] = pass;
  out.write("validation.json", doc.dump(2) + "\n");
  return pass ? kExitOk : kExitValidation;
}

int cmd_classify(const Config& cfg, OutputWriter& out) {
  FriedrichsSystem sys = require_system(cfg);
  const model::SystemClassification cls = model::classify_system(sys);
  json doc = cls.to_json();
  doc["system"] = sys.id;
  doc["solve_supported"] = sys.solve_supported;
  out.stage("classify");
  out.write("classification.json", doc.dump(2) + "\n");
  return kExitOk;
}

int cmd_solve(const Config& cfg, OutputWriter& out, bool debug_matrices) {
  FriedrichsSystem sys = require_system(cfg);
  if (!cfg.solve_mu) throw ConfigError("solve requires 'solve.mu'");
  if (!sys.solve_supported) throw ConfigError("system '" + sys.id + "' does not support solves");
  const dg::StructuredMesh mesh = make_mesh(cfg, &sys);
  const dg::DGSpace space = dg::build_space(mesh, cfg.dg_order, sys.state_dim);
  const ParamPoint mu = *cfg.solve_mu;
  dg::AssembleParts parts;
  parts.grams = true;
  const dg::AssembledProblem ap = dg::assemble(sys, space, mu, parts);
  out.stage("assemble");
  const la::Vector u = la::sparse_solve(ap.system, ap.rhs);
  out.stage("solve");

  if (debug_matrices) out.write("system.mtx", la::to_matrix_market(ap.system));

  std::string csv = "dof,value\n";
  for (std::size_t i = 0; i < u.size(); ++i)
    csv += std::to_string(i) + "," + format_double(u[i]) + "\n";
  out.write("solution.csv", csv);

  la::Vector r = ap.system.apply(u);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= ap.rhs[i];
  dg::GramFactor mass(ap.mass), graph(ap.graph_gram);
  json doc;
  doc["system"] = sys.id;
  doc["mu"] = mu;
  doc["dofs"] = u.size();
  doc["residual"] = la::norm2(r) / std::max(1e-300, la::norm2(ap.rhs));
  doc["l2_norm"] = mass.norm(u);
  doc["graph_norm"] = graph.norm(u);
  out.write("solve.json", doc.dump(2) + "\n");
  return kExitOk;
}

mor::SnapshotSet run_sweep(const Config& cfg, const FriedrichsSystem& sys,
                           const dg::DGSpace& space, std::uint64_t seed_override,
                           bool reference_only = false) {
  if (!cfg.sampling) throw ConfigError("this command requires a 'sampling' section");
  const std::vector<ParamPoint> mus = make_samples(*cfg.sampling, sys.params, seed_override);
  mor::SweepOptions opts;
  opts.ref = ref_norm_from(cfg.reduction.ref_norm);
  opts.threads = cfg.threads;
  opts.reference_norm_only = reference_only;
  return mor::sweep(sys, space, mus, opts);
}

int cmd_sweep(const Config& cfg, OutputWriter& out, std::uint64_t seed_override) {
  FriedrichsSystem sys = require_system(cfg);
  const dg::StructuredMesh mesh = make_mesh(cfg, &sys);
  const dg::DGSpace space = dg::build_space(mesh, cfg.dg_order, sys.state_dim);
  const mor::SnapshotSet snaps = run_sweep(cfg, sys, space, seed_override);
  out.stage("sweep");

  std::string csv;
  for (std::size_t i = 0; i < sys.params.dimension(); ++i)
    csv += "mu_" + std::to_string(i) + ",";
  csv += "residual,l2_norm,graph_norm\n";
  dg::GramFactor mass(dg::l2_gram(space));
  for (std::size_t j = 0; j < snaps.size(); ++j) {
    for (double v : snaps.mus[j]) csv += format_double(v) + ",";
    csv += format_double(snaps.residuals[j]) + "," + format_double(mass.norm(snaps.solutions[j])) +
           "," + format_double(snaps.gram_factors[j].norm(snaps.solutions[j])) + "\n";
  }
  out.write("sweep.csv", csv);

  json doc;
  doc["system"] = sys.id;
  doc["samples"] = snaps.size();
  doc["dofs"] = snaps.dofs;
  double max_res = 0.0;
  for (double r : snaps.residuals) max_res = std::max(max_res, r);
  doc["max_residual"] = max_res;
  out.write("sweep.json", doc.dump(2) + "\n");
  return kExitOk;
}

int cmd_nwidth(const Config& cfg, OutputWriter& out, std::uint64_t seed_override) {
  FriedrichsSystem sys = require_system(cfg);
  const dg::StructuredMesh mesh = make_mesh(cfg, &sys);
  const dg::DGSpace space = dg::build_space(mesh, cfg.dg_order, sys.state_dim);
  const mor::SnapshotSet snaps = run_sweep(cfg, sys, space, seed_override);
  out.stage("sweep");

  const std::size_t n_max = std::min(cfg.reduction.n_max, snaps.size());
  const std::size_t q_b = sys.expansion ? sys.expansion->q_b() : 1;
  const mor::DecayReport pod_rep = mor::nwidth_estimate(snaps, n_max, q_b);
  out.stage("pod");
  const mor::GreedyResult greedy = mor::strong_greedy(snaps, n_max, cfg.reduction.tol);
  out.stage("greedy");
  const model::SystemClassification cls = model::classify_system(sys);

  std::string csv = "N,pod_err,greedy_err,selected_mu\n";
  for (std::size_t n = 1; n <= n_max; ++n) {
    csv += std::to_string(n) + "," + format_double(pod_rep.errors[n - 1]) + ",";
    if (n <= greedy.rel_errors.size()) csv += format_double(greedy.rel_errors[n - 1]);
    csv += ",";
    if (n <= greedy.selected.size()) csv += join_mu(snaps.mus[greedy.selected[n - 1]]);
    csv += "\n";
  }
  out.write("nwidth.csv", csv);

  json doc = pod_rep.to_json();
  doc["system"] = sys.id;
  doc["classification"] = cls.verdict_string();
  doc["greedy_errors"] = greedy.rel_errors;
  doc["greedy_e0"] = greedy.e0;
  doc["samples"] = snaps.size();
  doc["dofs"] = snaps.dofs;
  out.write("nwidth.json", doc.dump(2) + "\n");
  return kExitOk;
}

int cmd_sectional(const Config& cfg, OutputWriter& out, std::uint64_t seed_override) {
  if (!cfg.sectional) throw ConfigError("sectional requires a 'sectional' section");
  const SectionalCfg& sc = *cfg.sectional;

  std::optional<FriedrichsSystem> sys;
  if (cfg.system) sys = require_system(cfg);

  // spaces and training parameters
  dg::StructuredMesh mesh = make_mesh(cfg, sys ? &*sys : nullptr);
  const std::size_t state_dim = sys ? sys->state_dim : 1;
  const dg::DGSpace space = dg::build_space(mesh, cfg.dg_order, state_dim);

  model::ParameterDomain dom;
  if (sys)
    dom = sys->params;
  else if (sc.parameters) {
    dom.bounds = *sc.parameters;
    dom.check_valid();
  } else {
    throw ConfigError("sectional without a system requires 'sectional.parameters'");
  }
  if (!cfg.sampling) throw ConfigError("sectional requires a 'sampling' section");
  const std::vector<ParamPoint> mus = make_samples(*cfg.sampling, dom, seed_override);

  // target section, per-parameter norms and (for system targets) snapshots
  std::optional<mor::SnapshotSet> snaps;
  std::vector<dg::GramFactor> norms;
  std::optional<sections::Section> target;
  if (sc.target == "solution") {
    if (!sys) throw ConfigError("sectional.target = solution requires a system");
    if (!sys->solve_supported)
      throw ConfigError("system '" + sys->id + "' does not support solves");
    mor::SweepOptions sopts;
    sopts.ref = ref_norm_from(cfg.reduction.ref_norm);
    sopts.threads = cfg.threads;
    sopts.reference_norm_only = sc.norm == "reference";
    snaps = mor::sweep(*sys, space, mus, sopts);
    norms = snaps->gram_factors;
    target = sections::Section::solution(*sys, space);
  } else {
    if (mesh.dim != 1 || !mesh.periodic[0])
      throw ConfigError("shifted-profile targets require a periodic 1D mesh");
    const double scale = sc.target_shift_scale;
    target = sections::Section::shifted_profile(
        space, make_profile(sc.target_profile),
        [scale](const ParamPoint& mu) { return scale * mu[0]; }, "target");
    const dg::GramFactor mass(dg::l2_gram(space));
    norms.assign(mus.size(), mass);
  }
  out.stage("target");

  // dictionaries
  std::vector<sections::SectionDictionary> dicts;
  std::vector<std::string> dict_kinds;
  for (std::size_t d = 0; d < sc.dictionaries.size(); ++d) {
    const DictionaryCfg& dc = sc.dictionaries[d];
    const std::string id = dc.kind + "-" + std::to_string(d);
    if (dc.kind == "shift") {
      std::vector<std::function<double(double)>> profiles;
      for (const auto& p : dc.profiles) profiles.push_back(make_profile(p));
      const double scale = dc.shift_scale;
      dicts.push_back(sections::shift_dictionary(
          space, profiles, [scale](const ParamPoint& mu) { return scale * mu[0]; }, id));
    } else {
      // constant dictionary generated from target evaluations
      std::vector<la::Vector> fields;
      if (snaps) {
        fields = snaps->solutions;
      } else {
        for (const auto& mu : mus) fields.push_back(target->evaluate(mu));
      }
      if (dc.generator == "pod") {
        mor::SnapshotSet tmp;
        tmp.dofs = space.dof_count();
        tmp.mus = mus;
        tmp.solutions = fields;
        tmp.residuals.assign(mus.size(), 0.0);
        tmp.ref_factor = dg::GramFactor(dg::l2_gram(space));
        tmp.gram_factors.assign(mus.size(), tmp.ref_factor);
        const std::size_t n = dc.count ? dc.count : std::min<std::size_t>(10, mus.size());
        const mor::PodResult p = mor::pod(tmp, std::min(n, mus.size()));
        fields.clear();
        for (std::size_t k = 0; k < p.modes; ++k) {
          la::Vector v(space.dof_count());
          for (std::size_t i = 0; i < v.size(); ++i) v[i] = p.basis(i, k);
          fields.push_back(v);
        }
      } else if (dc.count && dc.count < fields.size()) {
        fields.resize(dc.count);
      }
      dicts.push_back(sections::constant_dictionary(space, fields, id));
    }
    dict_kinds.push_back(dc.kind);
  }

  sections::SectionalOptions sopts;
  sopts.n_max = sc.n_max;
  sopts.tol = sc.tol;
  sopts.exhaustive = sc.exhaustive;

  std::vector<sections::SectionalResult> results;
  for (const auto& d : dicts)
    results.push_back(sections::sectional_estimate(*target, d, mus, norms, sopts));
  out.stage("sectional");

  // classic/sectional identity cross-check: constant dictionary over the full
  // snapshot set with the parameter-independent reference norm
  json identity = json::object();
  if (sys && snaps && sc.norm == "reference") {
    for (std::size_t d = 0; d < dicts.size(); ++d) {
      if (dict_kinds[d] != "constant" || sc.dictionaries[d].generator != "snapshots" ||
          (sc.dictionaries[d].count && sc.dictionaries[d].count < snaps->size()))
        continue;
      const mor::GreedyResult g = mor::strong_greedy(
          *snaps, std::min(sc.n_max, snaps->size()), sc.tol);
      double max_delta = 0.0;
      const std::size_t upto = std::min(results[d].errors.size(), g.errors.size());
      for (std::size_t n = 0; n < upto; ++n)
        max_delta = std::max(max_delta, std::abs(results[d].errors[n] - g.errors[n]));
      identity["dictionary"] = results[d].dictionary_id;
      identity["max_delta"] = max_delta;
      identity["compared_steps"] = upto;
      identity["pass"] = max_delta <= 1e-10 * std::max(1.0, g.e0);
      break;
    }
  }

  std::string csv = "dictionary,N,err,rel_err,selected\n";
  for (const auto& r : results) {
    for (std::size_t i = 0; i < r.n_values.size(); ++i) {
      csv += r.dictionary_id + "," + std::to_string(r.n_values[i]) + "," +
             format_double(r.errors[i]) + "," + format_double(r.rel_errors[i]) + ",";
      if (i < r.selected.size()) csv += std::to_string(r.selected[i]);
      csv += "\n";
    }
  }
  out.write("sectional.csv", csv);

  json doc;
  doc["results"] = json::array();
  for (const auto& r : results) doc["results"].push_back(r.to_json());
  if (!identity.empty()) doc["identity_check"] = identity;
  doc["training_samples"] = mus.size();
  out.write("sectional.json", doc.dump(2) + "\n");
  return kExitOk;
}

int cmd_report(OutputWriter& out) {
  // melt existing trajectory CSVs into a long-format table plus a gnuplot
  // script
  const fs::path dir(out.dir());
  std::string plot = "source,series,N,value\n";
  bool any = false;
  if (fs::exists(dir / "nwidth.csv")) {
    std::ifstream in(dir / "nwidth.csv");
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::string n, pod, greedy;
      std::getline(ss, n, ',');
      std::getline(ss, pod, ',');
      std::getline(ss, greedy, ',');
      if (!pod.empty()) plot += "nwidth,pod," + n + "," + pod + "\n";
      if (!greedy.empty()) plot += "nwidth,greedy," + n + "," + greedy + "\n";
    }
    any = true;
  }
  if (fs::exists(dir / "sectional.csv")) {
    std::ifstream in(dir / "sectional.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::string d, n, err, rel;
      std::getline(ss, d, ',');
      std::getline(ss, n, ',');
      std::getline(ss, err, ',');
      std::getline(ss, rel, ',');
      plot += "sectional," + d + "," + n + "," + rel + "\n";
    }
    any = true;
  }
  if (!any)
    throw ConfigError("report: no nwidth.csv or sectional.csv found in " + out.dir() +
                      "; run nwidth/sectional first");
  out.write("plot.csv", plot);

  std::string gp;
  gp += "set datafile separator ','\n";
  gp += "set logscale y\n";
  gp += "set xlabel 'N'\n";
  gp += "set ylabel 'relative error'\n";
  gp += "set key outside\n";
  gp += "series = system(\"awk -F, 'NR>1{print $2}' plot.csv | sort -u\")\n";
  gp += "plot for [s in series] 'plot.csv' \\\n";
  gp += "  using 3:(strcol(2) eq s ? column(4) : 1/0) with linespoints title s\n";
  out.write("plot.gp", gp);
  out.stage("report");
  return kExitOk;
}

int dispatch(const Config& cfg, const RunOptions& opts, OutputWriter& out) {
  if (opts.command == "validate") return cmd_validate(cfg, out);
  if (opts.command == "classify") return cmd_classify(cfg, out);
  if (opts.command == "solve") return cmd_solve(cfg, out, opts.debug_matrices);
  if (opts.command == "sweep") return cmd_sweep(cfg, out, opts.seed);
  if (opts.command == "nwidth") return cmd_nwidth(cfg, out, opts.seed);
  if (opts.command == "sectional") return cmd_sectional(cfg, out, opts.seed);
  if (opts.command == "report") return cmd_report(out);
  throw ConfigError("unknown command '" + opts.command + "'");
}

int run_once(Config cfg, const RunOptions& opts, const std::string& out_dir) {
  if (opts.threads_override != UINT_MAX) cfg.threads = opts.threads_override;
  OutputWriter out(out_dir, cfg);
  const int code = dispatch(cfg, opts, out);
  out.finish();
  return code;
}

struct ManifestFiles {
  std::map<std::string, std::string> hashes; // name -> fnv64 hex
};

ManifestFiles read_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw Error("no manifest.json in " + dir.string());
  json doc = json::parse(in);
  ManifestFiles mf;
  for (const auto& f : doc.at("files"))
    mf.hashes[f.at("name").get<std::string>()] = f.at("fnv64").get<std::string>();
  return mf;
}

} // namespace

int run(const RunOptions& opts) {
  try {
    Config cfg = load_config(opts.config_path);
    const std::string out_dir = opts.out_override.empty() ? cfg.out_dir : opts.out_override;

    if (!opts.check) return run_once(cfg, opts, out_dir);

    // --check: recompute into a scratch directory and compare hashes
    const ManifestFiles expected = read_manifest(out_dir);
    const std::string scratch = (fs::path(out_dir) / ".check").string();
    fs::remove_all(scratch);
    const int code = run_once(cfg, opts, scratch);
    if (code != kExitOk && code != kExitValidation) return code;
    const ManifestFiles got = read_manifest(scratch);
    bool match = expected.hashes.size() == got.hashes.size();
    for (const auto& [name, hash] : expected.hashes) {
      auto it = got.hashes.find(name);
      if (it == got.hashes.end() || it->second != hash) {
        std::cerr << "check: mismatch for " << name << "\n";
        match = false;
      }
    }
    fs::remove_all(scratch);
    if (match) {
      std::cout << "check: " << expected.hashes.size() << " files match\n";
      return kExitOk;
    }
    std::cerr << "check: output differs from the recorded manifest\n";
    return kExitValidation;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

} // namespace fsw::cli
