#include "fsw/cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace fsw::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config error at " + (path.empty() ? "$" : path) + ": " + what);
}

void expect_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) fail(path + "." + it.key(), "unknown key");
}

double get_num(const json& obj, const std::string& path, const std::string& key, double dflt) {
  if (!obj.contains(key)) return dflt;
  if (!obj.at(key).is_number()) fail(path + "." + key, "expected a number");
  return obj.at(key).get<double>();
}

std::size_t get_count(const json& obj, const std::string& path, const std::string& key,
                      std::size_t dflt) {
  if (!obj.contains(key)) return dflt;
  if (!obj.at(key).is_number_unsigned() && !obj.at(key).is_number_integer())
    fail(path + "." + key, "expected a non-negative integer");
  const auto v = obj.at(key).get<long long>();
  if (v < 0) fail(path + "." + key, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

std::string get_string(const json& obj, const std::string& path, const std::string& key,
                       const std::string& dflt) {
  if (!obj.contains(key)) return dflt;
  if (!obj.at(key).is_string()) fail(path + "." + key, "expected a string");
  return obj.at(key).get<std::string>();
}

bool get_bool(const json& obj, const std::string& path, const std::string& key, bool dflt) {
  if (!obj.contains(key)) return dflt;
  if (!obj.at(key).is_boolean()) fail(path + "." + key, "expected a boolean");
  return obj.at(key).get<bool>();
}

std::vector<std::array<double, 2>> get_box(const json& arr, const std::string& path) {
  if (!arr.is_array() || arr.empty()) fail(path, "expected an array of [lo, hi] pairs");
  std::vector<std::array<double, 2>> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& p = arr.at(i);
    if (!p.is_array() || p.size() != 2 || !p.at(0).is_number() || !p.at(1).is_number())
      fail(path + "[" + std::to_string(i) + "]", "expected [lo, hi]");
    out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  }
  return out;
}

ProfileCfg parse_profile(const json& obj, const std::string& path) {
  expect_keys(obj, path, {"type", "center", "width", "k", "lo", "hi"});
  ProfileCfg p;
  p.type = get_string(obj, path, "type", "gaussian");
  if (p.type != "gaussian" && p.type != "sin" && p.type != "box")
    fail(path + ".type", "expected gaussian | sin | box");
  p.center = get_num(obj, path, "center", 0.5);
  p.width = get_num(obj, path, "width", 0.05);
  p.k = get_num(obj, path, "k", 1.0);
  p.lo = get_num(obj, path, "lo", 0.25);
  p.hi = get_num(obj, path, "hi", 0.75);
  return p;
}

} // namespace

std::uint64_t Config::hash() const { return fnv1a64(raw.dump()); }

Config parse_config(const json& doc) {
  Config cfg;
  expect_keys(doc, "", {"system", "mesh", "dg", "sampling", "validation", "solve", "reduction",
                        "sectional", "output", "threads", "debug_matrices"});
  cfg.raw = doc;

  if (doc.contains("system")) {
    const auto& s = doc.at("system");
    expect_keys(s, "system", {"id", "overrides"});
    SystemCfg sc;
    sc.id = get_string(s, "system", "id", "");
    if (sc.id.empty()) fail("system.id", "required");
    if (s.contains("overrides")) {
      if (!s.at("overrides").is_object()) fail("system.overrides", "expected an object");
      sc.overrides = s.at("overrides");
    }
    cfg.system = sc;
  }

  if (doc.contains("mesh")) {
    const auto& m = doc.at("mesh");
    expect_keys(m, "mesh", {"cells", "box", "periodic"});
    MeshCfg mc;
    if (!m.contains("cells") || !m.at("cells").is_array() || m.at("cells").empty() ||
        m.at("cells").size() > 2)
      fail("mesh.cells", "expected an array of 1 or 2 cell counts");
    for (const auto& c : m.at("cells")) {
      if (!c.is_number_integer() && !c.is_number_unsigned()) fail("mesh.cells", "expected integers");
      mc.cells.push_back(c.get<std::size_t>());
    }
    if (m.contains("box")) mc.box = get_box(m.at("box"), "mesh.box");
    if (m.contains("periodic")) {
      if (!m.at("periodic").is_array()) fail("mesh.periodic", "expected an array of booleans");
      for (const auto& p : m.at("periodic")) {
        if (!p.is_boolean()) fail("mesh.periodic", "expected booleans");
        mc.periodic.push_back(p.get<bool>());
      }
    }
    cfg.mesh = mc;
  }

  if (doc.contains("dg")) {
    const auto& d = doc.at("dg");
    expect_keys(d, "dg", {"order"});
    cfg.dg_order = get_count(d, "dg", "order", 1);
    if (cfg.dg_order > 1) fail("dg.order", "supported orders are 0 and 1");
  }

  if (doc.contains("sampling")) {
    const auto& s = doc.at("sampling");
    expect_keys(s, "sampling", {"kind", "count", "seed"});
    SamplingCfg sc;
    sc.kind = get_string(s, "sampling", "kind", "grid");
    if (sc.kind != "grid" && sc.kind != "random") fail("sampling.kind", "expected grid | random");
    sc.count = get_count(s, "sampling", "count", 10);
    if (sc.count < 1) fail("sampling.count", "must be at least 1");
    sc.seed = get_count(s, "sampling", "seed", 1);
    cfg.sampling = sc;
  }

  if (doc.contains("validation")) {
    const auto& v = doc.at("validation");
    expect_keys(v, "validation", {"samples_per_axis", "random_samples", "mu_samples", "seed"});
    cfg.validation.samples_per_axis = get_count(v, "validation", "samples_per_axis", 4);
    cfg.validation.random_samples = get_count(v, "validation", "random_samples", 256);
    cfg.validation.mu_samples = get_count(v, "validation", "mu_samples", 10);
    cfg.validation.seed = get_count(v, "validation", "seed", cfg.validation.seed);
  }

  if (doc.contains("solve")) {
    const auto& s = doc.at("solve");
    expect_keys(s, "solve", {"mu"});
    if (!s.contains("mu") || !s.at("mu").is_array()) fail("solve.mu", "expected an array");
    std::vector<double> mu;
    for (const auto& v : s.at("mu")) {
      if (!v.is_number()) fail("solve.mu", "expected numbers");
      mu.push_back(v.get<double>());
    }
    cfg.solve_mu = mu;
  }

  if (doc.contains("reduction")) {
    const auto& r = doc.at("reduction");
    expect_keys(r, "reduction", {"n_max", "tol", "ref_norm"});
    cfg.reduction.n_max = get_count(r, "reduction", "n_max", 20);
    cfg.reduction.tol = get_num(r, "reduction", "tol", 1e-6);
    cfg.reduction.ref_norm = get_string(r, "reduction", "ref_norm", "auto");
    if (cfg.reduction.ref_norm != "auto" && cfg.reduction.ref_norm != "l2" &&
        cfg.reduction.ref_norm != "x0")
      fail("reduction.ref_norm", "expected auto | l2 | x0");
  }

  if (doc.contains("sectional")) {
    const auto& s = doc.at("sectional");
    expect_keys(s, "sectional",
                {"target", "target_profile", "target_shift_scale", "dictionaries", "n_max", "tol",
                 "exhaustive", "norm", "parameters"});
    SectionalCfg sc;
    sc.target = get_string(s, "sectional", "target", "solution");
    if (sc.target != "solution" && sc.target != "shifted-profile")
      fail("sectional.target", "expected solution | shifted-profile");
    if (s.contains("target_profile"))
      sc.target_profile = parse_profile(s.at("target_profile"), "sectional.target_profile");
    sc.target_shift_scale = get_num(s, "sectional", "target_shift_scale", 1.0);
    if (!s.contains("dictionaries") || !s.at("dictionaries").is_array() ||
        s.at("dictionaries").empty())
      fail("sectional.dictionaries", "expected a non-empty array");
    for (std::size_t i = 0; i < s.at("dictionaries").size(); ++i) {
      const auto& d = s.at("dictionaries").at(i);
      const std::string path = "sectional.dictionaries[" + std::to_string(i) + "]";
      expect_keys(d, path, {"kind", "generator", "count", "profiles", "shift_scale"});
      DictionaryCfg dc;
      dc.kind = get_string(d, path, "kind", "constant");
      if (dc.kind != "constant" && dc.kind != "shift")
        fail(path + ".kind", "expected constant | shift");
      dc.generator = get_string(d, path, "generator", "snapshots");
      if (dc.generator != "snapshots" && dc.generator != "pod")
        fail(path + ".generator", "expected snapshots | pod");
      dc.count = get_count(d, path, "count", 0);
      dc.shift_scale = get_num(d, path, "shift_scale", 1.0);
      if (d.contains("profiles")) {
        if (!d.at("profiles").is_array()) fail(path + ".profiles", "expected an array");
        for (std::size_t k = 0; k < d.at("profiles").size(); ++k)
          dc.profiles.push_back(parse_profile(d.at("profiles").at(k),
                                              path + ".profiles[" + std::to_string(k) + "]"));
      }
      if (dc.kind == "shift" && dc.profiles.empty())
        fail(path + ".profiles", "shift dictionaries need at least one profile");
      sc.dictionaries.push_back(dc);
    }
    sc.n_max = get_count(s, "sectional", "n_max", 10);
    sc.tol = get_num(s, "sectional", "tol", 0.0);
    sc.exhaustive = get_bool(s, "sectional", "exhaustive", false);
    sc.norm = get_string(s, "sectional", "norm", "per-mu");
    if (sc.norm != "per-mu" && sc.norm != "reference")
      fail("sectional.norm", "expected per-mu | reference");
    if (s.contains("parameters")) {
      const auto& p = s.at("parameters");
      expect_keys(p, "sectional.parameters", {"box"});
      if (!p.contains("box")) fail("sectional.parameters.box", "required");
      sc.parameters = get_box(p.at("box"), "sectional.parameters.box");
    }
    cfg.sectional = sc;
  }

  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    expect_keys(o, "output", {"dir"});
    cfg.out_dir = get_string(o, "output", "dir", "out");
  }
  if (doc.contains("threads")) {
    cfg.threads = static_cast<unsigned>(get_count(doc, "", "threads", 0));
  }
  cfg.debug_matrices = get_bool(doc, "", "debug_matrices", false);
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // byte offset -> line and column
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("malformed JSON in " + path + " at line " + std::to_string(line) +
                      ", column " + std::to_string(col) + ": " + e.what());
  }
  return parse_config(doc);
}

dg::StructuredMesh make_mesh(const Config& cfg, const model::FriedrichsSystem* sys) {
  if (!cfg.mesh) throw ConfigError("this command requires a 'mesh' section");
  const MeshCfg& mc = *cfg.mesh;
  dg::StructuredMesh mesh;
  mesh.dim = mc.cells.size();
  for (std::size_t i = 0; i < mesh.dim; ++i) mesh.cells[i] = mc.cells[i];
  if (mc.box) {
    if (mc.box->size() != mesh.dim) throw ConfigError("mesh.box dimension mismatch");
    mesh.box.dim = mesh.dim;
    for (std::size_t i = 0; i < mesh.dim; ++i) {
      mesh.box.lo[i] = (*mc.box)[i][0];
      mesh.box.hi[i] = (*mc.box)[i][1];
    }
  } else if (sys) {
    mesh.box = sys->domain;
  } else {
    mesh.box.dim = mesh.dim;
    for (std::size_t i = 0; i < mesh.dim; ++i) {
      mesh.box.lo[i] = 0.0;
      mesh.box.hi[i] = 1.0;
    }
  }
  if (!mc.periodic.empty()) {
    if (mc.periodic.size() != mesh.dim) throw ConfigError("mesh.periodic dimension mismatch");
    for (std::size_t i = 0; i < mesh.dim; ++i) mesh.periodic[i] = mc.periodic[i];
  }
  if (sys && mesh.dim != sys->space_dim)
    throw ConfigError("mesh dimension does not match the system");
  mesh.check_valid();
  return mesh;
}

std::vector<model::ParamPoint> make_samples(const SamplingCfg& sampling,
                                            const model::ParameterDomain& dom,
                                            std::uint64_t seed_override) {
  const std::uint64_t seed = seed_override ? seed_override : sampling.seed;
  std::vector<model::ParamPoint> mus;
  const std::size_t p = dom.dimension();
  if (sampling.kind == "random") {
    Rng rng(seed);
    for (std::size_t i = 0; i < sampling.count; ++i) mus.push_back(dom.sample(rng));
    return mus;
  }
  // tensor grid with `count` points per axis
  std::vector<std::size_t> idx(p, 0);
  while (true) {
    model::ParamPoint mu(p);
    for (std::size_t i = 0; i < p; ++i) {
      const auto& b = dom.bounds[i];
      mu[i] = sampling.count == 1
                  ? 0.5 * (b[0] + b[1])
                  : b[0] + (b[1] - b[0]) * (static_cast<double>(idx[i]) / (sampling.count - 1));
    }
    mus.push_back(mu);
    std::size_t axis = 0;
    while (axis < p && ++idx[axis] == sampling.count) idx[axis++] = 0;
    if (axis == p) break;
  }
  return mus;
}

} // namespace fsw::cli
