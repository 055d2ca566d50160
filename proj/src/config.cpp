#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <set>
#include <sstream>

#include "fibrelab/error.hpp"
#include "fibrelab/study.hpp"

namespace fibrelab {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::ConfigError, what); }

// Numbers, or strings such as "pi", "2pi", "0.5*pi".
double scalar(const json& j, const std::string& key) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    std::string t = j.get<std::string>();
    std::string compact;
    for (char c : t) {
      if (c != ' ' && c != '*') compact += c;
    }
    const auto at = compact.find("pi");
    if (at != std::string::npos && at + 2 == compact.size()) {
      const std::string factor = compact.substr(0, at);
      try {
        return (factor.empty() ? 1.0 : std::stod(factor)) * std::numbers::pi;
      } catch (const std::exception&) {
      }
    }
    try {
      std::size_t used = 0;
      const double v = std::stod(compact, &used);
      if (used == compact.size()) return v;
    } catch (const std::exception&) {
    }
  }
  bad("'" + key + "' must be a number or a multiple of pi");
}

std::vector<double> numbers(const json& obj, const char* key) {
  std::vector<double> out;
  if (!obj.contains(key)) return out;
  if (!obj[key].is_array()) bad(std::string("'") + key + "' must be an array");
  for (const json& v : obj[key]) out.push_back(scalar(v, key));
  return out;
}

PeriodicProfile profile(const json& obj, double period, double default_constant) {
  if (!obj.is_object()) bad("profile blocks must be objects");
  PeriodicProfile p;
  p.period = period;
  p.constant = obj.contains("constant") ? scalar(obj["constant"], "constant") : default_constant;
  p.cosine_amps = numbers(obj, "cos");
  p.sine_amps = numbers(obj, "sin");
  return p;
}

BundleGeometry geometry(const json& g) {
  if (!g.is_object() || !g.contains("type")) bad("geometry.type is required");
  const std::string type = g["type"].get<std::string>();
  if (type == "warped_torus") {
    WarpedTorusGeometry t;
    if (g.contains("L")) t.half_length = scalar(g["L"], "L");
    if (g.contains("fiber_length")) t.fiber_length = scalar(g["fiber_length"], "fiber_length");
    const double period = 2.0 * t.half_length;
    const json warp = g.value("warp", json::object());
    const std::string form = warp.value("form", "series");
    if (form != "series" && form != "exp") bad("warp.form must be 'series' or 'exp'");
    t.warp.exponential = form == "exp";
    t.warp.profile = profile(warp, period, t.warp.exponential ? 0.0 : 1.0);
    t.modulation.period = period;
    if (g.contains("modulation")) t.modulation = profile(g["modulation"], period, 0.0);
    return t;
  }
  if (type == "waveguide") {
    WaveguideGeometry w;
    if (g.contains("length")) w.base_length = scalar(g["length"], "length");
    w.curvature = profile(g.value("curvature", json::object()), w.base_length, 0.0);
    return w;
  }
  bad("geometry.type must be 'warped_torus' or 'waveguide'");
}

const std::set<std::string> kKnownChecks = {"eig_rate", "supnorm_rate", "hausdorff_rate",
                                            "isotopy",  "boundary",     "courant"};

}  // namespace

StudyConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    bad(std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) bad("config must be a JSON object");

  StudyConfig cfg;
  cfg.source = text;
  try {
    cfg.name = root.value("name", "study");
    if (!root.contains("geometry")) bad("geometry block is required");
    cfg.geometry = geometry(root["geometry"]);
    try {
      validate(cfg.geometry);
    } catch (const Error& e) {
      bad(e.what());
    }

    cfg.epsilons = numbers(root, "epsilons");
    for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
      const double e = cfg.epsilons[i];
      if (!(e > 0.0 && e < 1.0)) bad("epsilons must lie in (0, 1)");
      if (i > 0 && !(e < cfg.epsilons[i - 1])) bad("epsilons must be strictly decreasing");
      if (const auto* w = std::get_if<WaveguideGeometry>(&cfg.geometry)) {
        try {
          w->check_epsilon(e);
        } catch (const Error& err) {
          bad(err.what());
        }
      }
    }

    const json grid = root.value("grid", json::object());
    cfg.grid.n_s = grid.value("n_s", cfg.grid.n_s);
    cfg.grid.n_f = grid.value("n_f", cfg.grid.n_f);
    cfg.grid.stencil_order = grid.value("stencil_order", cfg.grid.stencil_order);
    cfg.grid.s_offset = grid.value("s_offset", 0.0);
    cfg.refine = grid.value("refine", 2);
    if (cfg.grid.n_s < 16 || cfg.grid.n_f < 16) bad("grid needs n_s, n_f >= 16");
    if (cfg.grid.stencil_order != 2 && cfg.grid.stencil_order != 4) bad("stencil_order must be 2 or 4");
    if (cfg.refine < 2) bad("grid.refine must be at least 2");

    const json solver = root.value("solver", json::object());
    cfg.solver.k = solver.value("k", 6);
    cfg.solver.tol = solver.value("tol", 1e-10);
    cfg.solver.max_iter = solver.value("max_iter", 500);
    cfg.solver.seed = solver.value("seed", std::uint64_t{1});
    if (solver.contains("shift") && !solver["shift"].is_null()) {
      cfg.solver.shift = scalar(solver["shift"], "shift");
    }
    if (cfg.solver.k < 1 || !(cfg.solver.tol > 0.0) || cfg.solver.max_iter < 1) {
      bad("solver needs k >= 1, tol > 0, max_iter >= 1");
    }

    const json study = root.value("study", json::object());
    cfg.mode_index = study.value("mode_index", 0);
    if (cfg.mode_index < 0) bad("mode_index must be non-negative");
    cfg.out = study.value("out", std::string{});
    if (study.contains("checks")) {
      for (const json& c : study["checks"]) {
        const std::string name = c.get<std::string>();
        if (!kKnownChecks.count(name)) bad("unknown check '" + name + "'");
        cfg.checks.push_back(name);
      }
    }
    const bool guide = fiber_dirichlet(cfg.geometry);
    cfg.thresholds = {{"eig_rate", guide ? 0.8 : 1.7}, {"supnorm_rate", 0.9}, {"hausdorff_rate", 0.9}};
    if (study.contains("thresholds")) {
      for (const auto& [key, value] : study["thresholds"].items()) {
        if (!cfg.thresholds.count(key)) bad("unknown threshold '" + key + "'");
        cfg.thresholds[key] = scalar(value, key);
      }
    }
    for (const std::string& c : cfg.checks) {
      if (c.size() > 5 && c.substr(c.size() - 5) == "_rate" && cfg.epsilons.size() < 3) {
        bad("rate checks need at least three epsilons");
      }
    }
    if (cfg.epsilons.empty()) bad("epsilons must not be empty");
  } catch (const json::exception& e) {
    bad(std::string("config type error: ") + e.what());
  }
  return cfg;
}

StudyConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace fibrelab
