#include "bdflow/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bdflow/errors.hpp"

namespace bdflow {

namespace {

using nlohmann::json;

FourierSeries parse_series(const json& j, const char* what) {
  FourierSeries s;
  if (!j.is_object()) throw ValidationError(std::string(what) + ": expected an object");
  s.mean = j.value("mean", 0.0);
  if (j.contains("terms")) {
    if (!j["terms"].is_array()) throw ValidationError(std::string(what) + ".terms must be an array");
    for (const auto& t : j["terms"]) {
      FourierSeries::Term term;
      if (!t.contains("k")) throw ValidationError(std::string(what) + ".terms entries need k");
      term.k = t["k"].get<int>();
      term.cos_coeff = t.value("cos", 0.0);
      term.sin_coeff = t.value("sin", 0.0);
      if (term.k < 1) throw ValidationError(std::string(what) + ": harmonic index must be >= 1");
      s.terms.push_back(term);
    }
  }
  return s;
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }

  RunConfig c;

  if (!j.contains("domain")) throw ValidationError("config: missing domain");
  const auto& dom = j["domain"];
  const std::string kind = dom.value("kind", "circle");
  if (kind == "circle") {
    c.domain.kind = CurveKind::Circle;
    c.domain.radius = dom.value("radius", 1.0);
  } else if (kind == "ellipse") {
    c.domain.kind = CurveKind::Ellipse;
    c.domain.semi_major = dom.value("semi_major", 1.0);
    c.domain.semi_minor = dom.value("semi_minor", 0.5);
  } else if (kind == "star") {
    c.domain.kind = CurveKind::Star;
    c.domain.amplitude = dom.value("amplitude", 0.1);
    c.domain.lobes = dom.value("lobes", 3);
  } else {
    throw ValidationError("config: domain.kind must be circle, ellipse, or star");
  }
  if (!dom.contains("N")) throw ValidationError("config: missing domain.N");
  c.n = dom["N"].get<int>();

  if (!j.contains("problem")) throw ValidationError("config: missing problem");
  const auto& prob = j["problem"];
  if (!prob.contains("p")) throw ValidationError("config: missing problem.p");
  c.p = prob["p"].get<double>();
  if (!(c.p > 0.0)) throw ValidationError("config: problem.p must be positive");
  if (std::abs(c.p - 1.0) < 0.05)
    throw ValidationError("config: problem.p must satisfy |p-1| >= 0.05");
  if (prob.contains("a")) c.a = parse_series(prob["a"], "problem.a");
  c.zero_tol_rel = prob.value("zero_tol", 1e-8);

  if (j.contains("initial")) {
    c.initial = parse_series(j["initial"], "initial");
    c.initial_offset = j["initial"].value("offset", 0.0);
  }
  if (j.contains("initial_second"))
    c.initial_second = parse_series(j["initial_second"], "initial_second");
  if (j.contains("mass_target")) c.mass_target = j["mass_target"].get<double>();

  if (j.contains("time")) {
    const auto& t = j["time"];
    const std::string mode = t.value("mode", "physical");
    if (mode == "physical")
      c.mode = FlowMode::Physical;
    else if (mode == "normalized")
      c.mode = FlowMode::Normalized;
    else
      throw ValidationError("config: time.mode must be physical or normalized");
    c.controls.horizon = t.value("horizon", 1.0);
    c.controls.rtol = t.value("rtol", 1e-8);
    c.controls.dt_init = t.value("dt_init", 1e-4);
    c.controls.dt_max = t.value("dt_max", 0.25);
    c.controls.store_stride = t.value("store_stride", 1);
    c.controls.halt_floor_factor = t.value("halt_floor", 1e-3);
    c.controls.halt_ceiling_factor = t.value("halt_ceiling", 1e3);
    if (t.contains("fixed_dt") && !t["fixed_dt"].is_null())
      c.controls.fixed_dt = t["fixed_dt"].get<double>();
    if (!(c.controls.horizon > 0.0)) throw ValidationError("config: time.horizon must be positive");
  }

  if (j.contains("dtn")) {
    const auto& d = j["dtn"];
    const std::string method = d.value("method", "");
    if (method == "spectral")
      c.dtn.method = DtnMethod::Spectral;
    else if (method == "mfs")
      c.dtn.method = DtnMethod::Mfs;
    else if (!method.empty())
      throw ValidationError("config: dtn.method must be spectral or mfs");
    c.dtn.offset = d.value("offset", 0.6);
    c.dtn.reg = d.value("reg", 1e-12);
  }
  if (!j.contains("dtn") || !j["dtn"].contains("method"))
    c.dtn.method = c.domain.kind == CurveKind::Circle ? DtnMethod::Spectral : DtnMethod::Mfs;
  if (c.dtn.method == DtnMethod::Spectral && c.domain.kind != CurveKind::Circle)
    throw ValidationError("config: the spectral operator requires a circle domain");

  if (j.contains("rates")) {
    const auto& r = j["rates"];
    c.rates.window_fraction = r.value("window_fraction", 0.4);
    c.rates.tail_fraction = r.value("tail_fraction", 0.5);
    c.rates.modes = r.value("modes", 8);
  }

  if (j.contains("output")) c.out_dir = j["output"].value("directory", "out");
  c.seed = j.value("seed", 1234ull);
  if (j.contains("verify") && j["verify"].contains("N")) {
    c.verify_n_override = j["verify"]["N"].get<int>();
  }

  c.hash = fnv1a_hex(j.dump());
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config file not readable: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace bdflow
