#include "perifsi/scenarios.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"

namespace perifsi {

using nlohmann::json;

std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::custom: return "custom";
    case ScenarioKind::chamber_detonation: return "chamber_detonation";
    case ScenarioKind::brittle_cylinder: return "brittle_cylinder";
    case ScenarioKind::ductile_square: return "ductile_square";
    case ScenarioKind::sod_tube: return "sod_tube";
  }
  return "custom";
}

ScenarioKind scenario_from_string(const std::string& s) {
  if (s == "custom") return ScenarioKind::custom;
  if (s == "chamber_detonation") return ScenarioKind::chamber_detonation;
  if (s == "brittle_cylinder") return ScenarioKind::brittle_cylinder;
  if (s == "ductile_square") return ScenarioKind::ductile_square;
  if (s == "sod_tube") return ScenarioKind::sod_tube;
  throw Error(ErrorKind::config, "unknown scenario '" + s + "'");
}

bool ProblemSpec::operator==(const ProblemSpec& o) const {
  return scenario == o.scenario && level == o.level && domain == o.domain &&
         elements[0] == o.elements[0] && elements[1] == o.elements[1] &&
         degree == o.degree && gas == o.gas &&
         ambient_pressure == o.ambient_pressure &&
         ambient_temperature == o.ambient_temperature &&
         detonation == o.detonation && riemann == o.riemann && solid == o.solid &&
         integrator == o.integrator && stab == o.stab && dt == o.dt &&
         dt_reference == o.dt_reference && end_time == o.end_time &&
         decouple_time == o.decouple_time && probes == o.probes &&
         output == o.output;
}

namespace {

int level_index(const std::string& level, std::initializer_list<const char*> names,
                const char* what) {
  int i = 0;
  for (const char* n : names) {
    if (level == n) return i;
    ++i;
  }
  std::string msg = "unknown ";
  msg += what;
  msg += " level '" + level + "' (expected one of:";
  for (const char* n : names) msg += std::string(" ") + n;
  msg += ")";
  throw Error(ErrorKind::config, msg);
}

MaterialParams steel_j2() {
  MaterialParams m;
  m.youngs = 200e9;
  m.poisson = 0.29;
  m.yield_stress = 0.4e9;
  m.hardening = 0.1e9;
  m.density = 7870.0;
  return m;
}

StabConfig si_air_stab(double p_amb, double T_amb, const GasParams& gas) {
  StabConfig s;
  const double c = std::sqrt(gas.gamma * gas.R * T_amb);
  s.y_ref = Vec4(p_amb, c, c, T_amb);
  return s;
}

}  // namespace

ProblemSpec chamber_spec(const std::string& level) {
  const int idx = level_index(level, {"coarse", "medium", "fine"}, "chamber");
  const int fluid_elems[3] = {40, 80, 120};
  const int solid_nx[3] = {60, 120, 180};
  const double dt_ref[3] = {0.5e-6, 0.25e-6, 0.166e-6};

  ProblemSpec s;
  s.scenario = ScenarioKind::chamber_detonation;
  s.level = level;
  s.domain = {0.0, 0.0, 0.4, 0.4};
  s.elements[0] = s.elements[1] = fluid_elems[idx];
  s.degree = 2;
  s.gas = GasParams{};
  s.ambient_pressure = 0.1e6;
  s.ambient_temperature = 290.0;
  s.stab = si_air_stab(s.ambient_pressure, s.ambient_temperature, s.gas);

  DetonationSpec det;
  det.center = Vec2(0.0, 0.2);  // left-wall center; the disc clips to a half disc
  det.radius = 6.1e-3;
  s.detonation = det;

  SolidSpec solid;
  solid.geometry = SolidGeometry::block;
  solid.center = Vec2(0.2, 0.2);
  solid.size = Vec2(0.2, 0.1);
  solid.spacing = 0.2 / solid_nx[idx];
  solid.material = steel_j2();
  solid.pd_order = 2;
  solid.bond_associated = true;
  solid.support = SupportShape::rectangular;
  solid.horizon_ratio = solid.pd_order + 1;
  s.solid = solid;

  s.dt = 0.0;  // quoted steps break the acoustic CFL; derive a safe one
  s.dt_reference = dt_ref[idx];
  s.end_time = 0.7e-3;

  s.probes = {{"p_detonation", ProbeSpec::Kind::pressure, Vec2(0.0, 0.2)},
              {"p_right_wall", ProbeSpec::Kind::pressure, Vec2(0.4, 0.2)},
              {"com_x", ProbeSpec::Kind::com_displacement_x, Vec2::Zero()}};
  return s;
}

ProblemSpec brittle_spec(const std::string& level) {
  const int idx = level_index(level, {"D1", "D2", "D3", "D4"}, "brittle");
  const double spacing[4] = {2.5e-3, 2.0e-3, 1.5e-3, 1.0e-3};
  const double dt_ref[4] = {2.5e-6, 2.0e-6, 1.5e-6, 1.0e-6};

  ProblemSpec s;
  s.scenario = ScenarioKind::brittle_cylinder;
  s.level = level;
  s.domain = {0.0, 0.0, 0.3, 0.3};
  const int ne = static_cast<int>(std::lround(0.3 / (3.0 * spacing[idx])));
  s.elements[0] = s.elements[1] = ne;
  s.degree = 2;
  s.gas = GasParams{};
  s.ambient_pressure = 0.1e6;
  s.ambient_temperature = 290.0;
  s.stab = si_air_stab(s.ambient_pressure, s.ambient_temperature, s.gas);

  DetonationSpec det;
  det.center = Vec2(0.15, 0.15);
  det.radius = 3.5e-2;
  s.detonation = det;

  SolidSpec solid;
  solid.geometry = SolidGeometry::annulus;
  solid.center = Vec2(0.15, 0.15);
  solid.inner_radius = 0.07;
  solid.outer_radius = 0.10;
  solid.spacing = spacing[idx];
  solid.material = steel_j2();
  solid.material.yield_stress = 1.0e30;  // elastic response, failure by stress
  solid.material.hardening = 0.0;
  solid.material.law = DamageLaw::brittle;
  solid.material.critical_stress = 3.0e9;
  solid.pd_order = 2;
  solid.bond_associated = true;
  solid.support = SupportShape::circular;  // polar layout
  solid.horizon_ratio = solid.pd_order + 1;
  s.solid = solid;

  s.dt = 0.0;
  s.dt_reference = dt_ref[idx];
  s.end_time = 300e-6;

  s.probes = {{"p_center", ProbeSpec::Kind::pressure, Vec2(0.15, 0.15)}};
  return s;
}

ProblemSpec ductile_spec(const std::string& level) {
  const int idx = level_index(level, {"D1", "D2", "D3", "D4"}, "ductile");
  const double spacing[4] = {2.5e-3, 2.0e-3, 1.5e-3, 1.0e-3};
  const double dt_ref[4] = {1.8e-6, 1.2e-6, 0.9e-6, 0.6e-6};

  ProblemSpec s;
  s.scenario = ScenarioKind::ductile_square;
  s.level = level;
  s.domain = {0.0, 0.0, 0.4, 0.4};
  const int ne = static_cast<int>(std::lround(0.4 / (4.0 * spacing[idx])));
  s.elements[0] = s.elements[1] = ne;
  s.degree = 2;
  s.gas = GasParams{};
  s.ambient_pressure = 0.1e6;
  s.ambient_temperature = 290.0;
  s.stab = si_air_stab(s.ambient_pressure, s.ambient_temperature, s.gas);

  DetonationSpec det;
  det.center = Vec2(0.2, 0.2);
  det.radius = 5.0e-2;
  s.detonation = det;

  SolidSpec solid;
  solid.geometry = SolidGeometry::hollow_square;
  solid.center = Vec2(0.2, 0.2);
  solid.inner_width = 0.10;
  solid.outer_width = 0.16;
  solid.spacing = spacing[idx];
  solid.material = steel_j2();
  solid.material.law = DamageLaw::ductile;
  solid.material.eqps_threshold = 0.18;
  solid.material.eqps_critical = 0.2;
  solid.pd_order = 2;
  solid.bond_associated = true;
  solid.support = SupportShape::rectangular;
  solid.horizon_ratio = solid.pd_order + 1;
  s.solid = solid;

  s.dt = 0.0;
  s.dt_reference = dt_ref[idx];
  s.end_time = 375e-6;

  s.probes = {{"p_center", ProbeSpec::Kind::pressure, Vec2(0.2, 0.2)}};
  return s;
}

ProblemSpec sod_spec() {
  ProblemSpec s;
  s.scenario = ScenarioKind::sod_tube;
  s.level = "";
  s.domain = {0.0, 0.0, 1.0, 0.005};
  s.elements[0] = 200;
  s.elements[1] = 1;
  s.degree = 2;
  s.gas = GasParams{0.0, 0.72, 1.4, 1.0};
  s.ambient_pressure = 1.0;
  s.ambient_temperature = 1.0;
  s.riemann = RiemannSpec{0.5, 1.0, 1.0, 0.1, 0.8};
  s.stab.y_ref = Vec4::Ones();
  s.dt = 3.125e-4;
  s.end_time = 0.2;
  return s;
}

ProblemSpec builtin_spec(ScenarioKind kind, const std::string& level) {
  switch (kind) {
    case ScenarioKind::chamber_detonation: return chamber_spec(level);
    case ScenarioKind::brittle_cylinder: return brittle_spec(level);
    case ScenarioKind::ductile_square: return ductile_spec(level);
    case ScenarioKind::sod_tube: return sod_spec();
    case ScenarioKind::custom: break;
  }
  ProblemSpec s;
  s.level = level;
  return s;
}

// ---------------------------------------------------------------------------
// JSON configuration

namespace {

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        ok = true;
        break;
      }
    if (!ok)
      throw Error(ErrorKind::config,
                  "unknown config key '" + path + "." + it.key() + "'");
  }
}

double num_or(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number())
    throw Error(ErrorKind::config, std::string("config key '") + key +
                                       "' must be a number");
  return obj[key].get<double>();
}

int int_or(const json& obj, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  return obj[key].get<int>();
}

bool bool_or(const json& obj, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  return obj[key].get<bool>();
}

Vec2 vec2_at(const json& arr, const char* key) {
  if (!arr.is_array() || arr.size() != 2)
    throw Error(ErrorKind::config,
                std::string("config key '") + key + "' must be a 2-array");
  return Vec2(arr[0].get<double>(), arr[1].get<double>());
}

void apply_domain(const json& j, ProblemSpec& s) {
  reject_unknown(j, "domain", {"origin", "size", "elements", "degree"});
  Vec2 origin(s.domain.x0, s.domain.y0);
  Vec2 size(s.domain.width(), s.domain.height());
  if (j.contains("origin")) origin = vec2_at(j["origin"], "domain.origin");
  if (j.contains("size")) size = vec2_at(j["size"], "domain.size");
  s.domain = Rect{origin.x(), origin.y(), origin.x() + size.x(), origin.y() + size.y()};
  if (j.contains("elements")) {
    const Vec2 e = vec2_at(j["elements"], "domain.elements");
    s.elements[0] = static_cast<int>(e.x());
    s.elements[1] = static_cast<int>(e.y());
  }
  s.degree = int_or(j, "degree", s.degree);
}

void apply_gas(const json& j, ProblemSpec& s) {
  reject_unknown(j, "gas", {"mu", "prandtl", "gamma", "gas_constant"});
  s.gas.mu = num_or(j, "mu", s.gas.mu);
  s.gas.prandtl = num_or(j, "prandtl", s.gas.prandtl);
  s.gas.gamma = num_or(j, "gamma", s.gas.gamma);
  s.gas.R = num_or(j, "gas_constant", s.gas.R);
}

void apply_material(const json& j, MaterialParams& m) {
  reject_unknown(j, "solid.material",
                 {"youngs", "poisson", "yield_stress", "hardening", "density",
                  "damage", "critical_stress", "eqps_threshold", "eqps_critical"});
  m.youngs = num_or(j, "youngs", m.youngs);
  m.poisson = num_or(j, "poisson", m.poisson);
  m.yield_stress = num_or(j, "yield_stress", m.yield_stress);
  m.hardening = num_or(j, "hardening", m.hardening);
  m.density = num_or(j, "density", m.density);
  if (j.contains("damage")) {
    const std::string d = j["damage"].get<std::string>();
    if (d == "none")
      m.law = DamageLaw::none;
    else if (d == "brittle")
      m.law = DamageLaw::brittle;
    else if (d == "ductile")
      m.law = DamageLaw::ductile;
    else
      throw Error(ErrorKind::config, "unknown damage law '" + d + "'");
  }
  m.critical_stress = num_or(j, "critical_stress", m.critical_stress);
  m.eqps_threshold = num_or(j, "eqps_threshold", m.eqps_threshold);
  m.eqps_critical = num_or(j, "eqps_critical", m.eqps_critical);
}

void apply_solid(const json& j, ProblemSpec& s) {
  reject_unknown(j, "solid",
                 {"geometry", "center", "size", "inner_radius", "outer_radius",
                  "inner_width", "outer_width", "spacing", "mass_scale",
                  "material", "pd"});
  if (!s.solid) s.solid = SolidSpec{};
  SolidSpec& b = *s.solid;
  if (j.contains("geometry")) {
    const std::string g = j["geometry"].get<std::string>();
    if (g == "block")
      b.geometry = SolidGeometry::block;
    else if (g == "annulus")
      b.geometry = SolidGeometry::annulus;
    else if (g == "hollow_square")
      b.geometry = SolidGeometry::hollow_square;
    else
      throw Error(ErrorKind::config, "unknown solid geometry '" + g + "'");
  }
  if (j.contains("center")) b.center = vec2_at(j["center"], "solid.center");
  if (j.contains("size")) b.size = vec2_at(j["size"], "solid.size");
  b.inner_radius = num_or(j, "inner_radius", b.inner_radius);
  b.outer_radius = num_or(j, "outer_radius", b.outer_radius);
  b.inner_width = num_or(j, "inner_width", b.inner_width);
  b.outer_width = num_or(j, "outer_width", b.outer_width);
  b.spacing = num_or(j, "spacing", b.spacing);
  b.mass_scale = num_or(j, "mass_scale", b.mass_scale);
  if (j.contains("material")) apply_material(j["material"], b.material);
  if (j.contains("pd")) {
    const json& p = j["pd"];
    reject_unknown(p, "solid.pd",
                   {"order", "bond_associated", "support", "horizon_ratio"});
    b.pd_order = int_or(p, "order", b.pd_order);
    b.bond_associated = bool_or(p, "bond_associated", b.bond_associated);
    if (p.contains("support")) {
      const std::string sup = p["support"].get<std::string>();
      if (sup == "circular")
        b.support = SupportShape::circular;
      else if (sup == "rectangular")
        b.support = SupportShape::rectangular;
      else
        throw Error(ErrorKind::config, "unknown support shape '" + sup + "'");
    }
    b.horizon_ratio = num_or(p, "horizon_ratio", b.horizon_ratio);
  }
}

void validate_spec(const ProblemSpec& s) {
  if (s.elements[0] < 1 || s.elements[1] < 1)
    throw Error(ErrorKind::config, "domain.elements must be >= 1");
  if (s.domain.width() <= 0.0 || s.domain.height() <= 0.0)
    throw Error(ErrorKind::config, "domain.size must be positive");
  s.gas.validate();
  s.integrator.validate();
  if (s.ambient_pressure <= 0.0 || s.ambient_temperature <= 0.0)
    throw Error(ErrorKind::config, "ambient state must have p > 0 and T > 0");
  if (s.end_time < 0.0) throw Error(ErrorKind::config, "end_time must be >= 0");
  if (s.detonation) {
    const auto& d = *s.detonation;
    if (d.radius <= 0.0)
      throw Error(ErrorKind::config, "detonation.radius must be positive");
    if (d.radius > std::min(s.domain.width(), s.domain.height()))
      throw Error(ErrorKind::config, "detonation.radius exceeds the domain size");
    if (!s.domain.contains(d.center))
      throw Error(ErrorKind::config, "detonation.center lies outside the domain");
    if (d.pressure <= 0.0 || d.temperature <= 0.0)
      throw Error(ErrorKind::config, "detonation state must have p > 0 and T > 0");
  }
  if (s.solid) {
    const auto& b = *s.solid;
    if (b.spacing <= 0.0)
      throw Error(ErrorKind::config, "solid.spacing must be positive");
    b.material.validate();
    if (b.pd_order < 1 || b.pd_order > 3)
      throw Error(ErrorKind::config, "solid.pd.order must be in [1, 3]");
    if (b.horizon_ratio <= 0.0)
      throw Error(ErrorKind::config, "solid.pd.horizon_ratio must be positive");
    if (!s.domain.contains(b.center))
      throw Error(ErrorKind::config, "solid.center lies outside the domain");
  }
  for (const auto& p : s.probes)
    if (p.kind == ProbeSpec::Kind::pressure && !s.domain.contains(p.position))
      throw Error(ErrorKind::config, "probe '" + p.name + "' lies outside the domain");
}

}  // namespace

ProblemSpec parse_config(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // Byte offset to line/column for a friendlier message.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream msg;
    msg << origin << ":" << line << ":" << col << ": " << e.what();
    throw Error(ErrorKind::config, msg.str());
  }
  if (!j.is_object())
    throw Error(ErrorKind::config, origin + ": config root must be an object");

  reject_unknown(j, "",
                 {"scenario", "level", "domain", "gas", "ambient", "detonation",
                  "riemann", "solid", "integrator", "stabilization", "dt",
                  "dt_reference", "end_time", "decouple_time", "probes",
                  "output"});

  ScenarioKind kind = ScenarioKind::custom;
  if (j.contains("scenario"))
    kind = scenario_from_string(j["scenario"].get<std::string>());
  std::string level;
  if (j.contains("level")) level = j["level"].get<std::string>();

  ProblemSpec s = builtin_spec(kind, level);

  if (j.contains("domain")) apply_domain(j["domain"], s);
  if (j.contains("gas")) apply_gas(j["gas"], s);
  if (j.contains("ambient")) {
    reject_unknown(j["ambient"], "ambient", {"pressure", "temperature"});
    s.ambient_pressure = num_or(j["ambient"], "pressure", s.ambient_pressure);
    s.ambient_temperature =
        num_or(j["ambient"], "temperature", s.ambient_temperature);
  }
  if (j.contains("detonation")) {
    if (j["detonation"].is_null()) {
      s.detonation.reset();
    } else {
      reject_unknown(j["detonation"], "detonation",
                     {"center", "radius", "pressure", "temperature"});
      DetonationSpec d = s.detonation.value_or(DetonationSpec{});
      if (j["detonation"].contains("center"))
        d.center = vec2_at(j["detonation"]["center"], "detonation.center");
      d.radius = num_or(j["detonation"], "radius", d.radius);
      d.pressure = num_or(j["detonation"], "pressure", d.pressure);
      d.temperature = num_or(j["detonation"], "temperature", d.temperature);
      s.detonation = d;
    }
  }
  if (j.contains("riemann")) {
    if (j["riemann"].is_null()) {
      s.riemann.reset();
    } else {
      reject_unknown(j["riemann"], "riemann",
                     {"split", "p_left", "T_left", "p_right", "T_right"});
      RiemannSpec r = s.riemann.value_or(RiemannSpec{});
      r.split = num_or(j["riemann"], "split", r.split);
      r.p_left = num_or(j["riemann"], "p_left", r.p_left);
      r.T_left = num_or(j["riemann"], "T_left", r.T_left);
      r.p_right = num_or(j["riemann"], "p_right", r.p_right);
      r.T_right = num_or(j["riemann"], "T_right", r.T_right);
      s.riemann = r;
    }
  }
  if (j.contains("solid")) {
    if (j["solid"].is_null())
      s.solid.reset();
    else
      apply_solid(j["solid"], s);
  }
  if (j.contains("integrator")) {
    reject_unknown(j["integrator"], "integrator", {"rho_inf", "passes", "cfl"});
    s.integrator.rho_inf = num_or(j["integrator"], "rho_inf", s.integrator.rho_inf);
    s.integrator.passes = int_or(j["integrator"], "passes", s.integrator.passes);
    s.integrator.cfl_number = num_or(j["integrator"], "cfl", s.integrator.cfl_number);
  }
  if (j.contains("stabilization")) {
    reject_unknown(j["stabilization"], "stabilization", {"c_i", "c_dc", "reference"});
    s.stab.c_i = num_or(j["stabilization"], "c_i", s.stab.c_i);
    s.stab.c_dc = num_or(j["stabilization"], "c_dc", s.stab.c_dc);
    if (j["stabilization"].contains("reference")) {
      const json& r = j["stabilization"]["reference"];
      if (!r.is_array() || r.size() != 4)
        throw Error(ErrorKind::config, "stabilization.reference must be a 4-array");
      for (int i = 0; i < 4; ++i) s.stab.y_ref[i] = r[i].get<double>();
    }
  }
  s.dt = num_or(j, "dt", s.dt);
  s.dt_reference = num_or(j, "dt_reference", s.dt_reference);
  s.end_time = num_or(j, "end_time", s.end_time);
  s.decouple_time = num_or(j, "decouple_time", s.decouple_time);
  if (j.contains("probes")) {
    s.probes.clear();
    for (const auto& pj : j["probes"]) {
      reject_unknown(pj, "probes[]", {"name", "kind", "position"});
      ProbeSpec p;
      p.name = pj.at("name").get<std::string>();
      const std::string kindstr = pj.at("kind").get<std::string>();
      if (kindstr == "pressure")
        p.kind = ProbeSpec::Kind::pressure;
      else if (kindstr == "com_displacement_x")
        p.kind = ProbeSpec::Kind::com_displacement_x;
      else
        throw Error(ErrorKind::config, "unknown probe kind '" + kindstr + "'");
      if (pj.contains("position")) p.position = vec2_at(pj["position"], "probes[].position");
      s.probes.push_back(p);
    }
  }
  if (j.contains("output")) {
    reject_unknown(j["output"], "output", {"probe_stride", "field_stride"});
    s.output.probe_stride = int_or(j["output"], "probe_stride", s.output.probe_stride);
    s.output.field_stride = int_or(j["output"], "field_stride", s.output.field_stride);
  }

  validate_spec(s);
  return s;
}

ProblemSpec load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::string save_config(const ProblemSpec& s) {
  json j;
  j["scenario"] = to_string(s.scenario);
  j["level"] = s.level;
  j["domain"] = {{"origin", {s.domain.x0, s.domain.y0}},
                 {"size", {s.domain.width(), s.domain.height()}},
                 {"elements", {s.elements[0], s.elements[1]}},
                 {"degree", s.degree}};
  j["gas"] = {{"mu", s.gas.mu},
              {"prandtl", s.gas.prandtl},
              {"gamma", s.gas.gamma},
              {"gas_constant", s.gas.R}};
  j["ambient"] = {{"pressure", s.ambient_pressure},
                  {"temperature", s.ambient_temperature}};
  if (s.detonation) {
    const auto& d = *s.detonation;
    j["detonation"] = {{"center", {d.center.x(), d.center.y()}},
                       {"radius", d.radius},
                       {"pressure", d.pressure},
                       {"temperature", d.temperature}};
  }
  if (s.riemann) {
    const auto& r = *s.riemann;
    j["riemann"] = {{"split", r.split},
                    {"p_left", r.p_left},
                    {"T_left", r.T_left},
                    {"p_right", r.p_right},
                    {"T_right", r.T_right}};
  }
  if (s.solid) {
    const auto& b = *s.solid;
    json m = {{"youngs", b.material.youngs},
              {"poisson", b.material.poisson},
              {"yield_stress", b.material.yield_stress},
              {"hardening", b.material.hardening},
              {"density", b.material.density},
              {"critical_stress", b.material.critical_stress},
              {"eqps_threshold", b.material.eqps_threshold},
              {"eqps_critical", b.material.eqps_critical}};
    m["damage"] = b.material.law == DamageLaw::none
                      ? "none"
                      : (b.material.law == DamageLaw::brittle ? "brittle" : "ductile");
    const char* g = b.geometry == SolidGeometry::block
                        ? "block"
                        : (b.geometry == SolidGeometry::annulus ? "annulus"
                                                                : "hollow_square");
    j["solid"] = {{"geometry", g},
                  {"center", {b.center.x(), b.center.y()}},
                  {"size", {b.size.x(), b.size.y()}},
                  {"inner_radius", b.inner_radius},
                  {"outer_radius", b.outer_radius},
                  {"inner_width", b.inner_width},
                  {"outer_width", b.outer_width},
                  {"spacing", b.spacing},
                  {"mass_scale", b.mass_scale},
                  {"material", m},
                  {"pd",
                   {{"order", b.pd_order},
                    {"bond_associated", b.bond_associated},
                    {"support", b.support == SupportShape::circular ? "circular"
                                                                    : "rectangular"},
                    {"horizon_ratio", b.horizon_ratio}}}};
  }
  j["integrator"] = {{"rho_inf", s.integrator.rho_inf},
                     {"passes", s.integrator.passes},
                     {"cfl", s.integrator.cfl_number}};
  j["stabilization"] = {
      {"c_i", s.stab.c_i},
      {"c_dc", s.stab.c_dc},
      {"reference", {s.stab.y_ref[0], s.stab.y_ref[1], s.stab.y_ref[2], s.stab.y_ref[3]}}};
  j["dt"] = s.dt;
  j["dt_reference"] = s.dt_reference;
  j["end_time"] = s.end_time;
  j["decouple_time"] = s.decouple_time;
  j["probes"] = json::array();
  for (const auto& p : s.probes)
    j["probes"].push_back(
        {{"name", p.name},
         {"kind", p.kind == ProbeSpec::Kind::pressure ? "pressure"
                                                      : "com_displacement_x"},
         {"position", {p.position.x(), p.position.y()}}});
  j["output"] = {{"probe_stride", s.output.probe_stride},
                 {"field_stride", s.output.field_stride}};
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// State construction

namespace {

void generate_annulus(PDNodeSet& nodes, const SolidSpec& b) {
  const int nr = std::max(
      1, static_cast<int>(std::lround((b.outer_radius - b.inner_radius) / b.spacing)));
  const double dr = (b.outer_radius - b.inner_radius) / nr;
  for (int k = 0; k < nr; ++k) {
    const double r = b.inner_radius + (k + 0.5) * dr;
    const int m = std::max(1, static_cast<int>(std::lround(2.0 * M_PI * r / dr)));
    const double ring_area = M_PI * dr * (2.0 * b.inner_radius + (2 * k + 1) * dr);
    const double vol = ring_area / m;
    for (int i = 0; i < m; ++i) {
      const double th = 2.0 * M_PI * i / m;
      const Vec2 x = b.center + r * Vec2(std::cos(th), std::sin(th));
      nodes.ref_pos.push_back(x);
      nodes.pos.push_back(x);
      nodes.vel.push_back(Vec2::Zero());
      nodes.volume.push_back(vol);
      nodes.density.push_back(b.material.density * b.mass_scale);
    }
  }
}

void generate_hollow_square(PDNodeSet& nodes, const SolidSpec& b) {
  const int n = std::max(1, static_cast<int>(std::lround(b.outer_width / b.spacing)));
  const double h = b.outer_width / n;
  const Vec2 origin = b.center - 0.5 * Vec2(b.outer_width, b.outer_width);
  const double half_inner = 0.5 * b.inner_width;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec2 x = origin + Vec2((i + 0.5) * h, (j + 0.5) * h);
      const Vec2 d = x - b.center;
      if (std::abs(d.x()) < half_inner && std::abs(d.y()) < half_inner) continue;
      nodes.ref_pos.push_back(x);
      nodes.pos.push_back(x);
      nodes.vel.push_back(Vec2::Zero());
      nodes.volume.push_back(h * h);
      nodes.density.push_back(b.material.density * b.mass_scale);
    }
}

}  // namespace

SimState build_state(const ProblemSpec& spec, WorkerPool& pool) {
  validate_spec(spec);

  SimState s;
  s.patch = BSplinePatch::uniform(spec.domain, spec.elements[0], spec.elements[1],
                                  spec.degree);
  s.gas = spec.gas;
  s.stab = spec.stab;
  s.integ = spec.integrator;
  s.decouple_time = spec.decouple_time;

  auto initial = [&](const Vec2& x) -> Vec4 {
    double p = spec.ambient_pressure, T = spec.ambient_temperature;
    if (spec.riemann) {
      const auto& r = *spec.riemann;
      if (x.x() <= r.split) {
        p = r.p_left;
        T = r.T_left;
      } else {
        p = r.p_right;
        T = r.T_right;
      }
    }
    if (spec.detonation &&
        (x - spec.detonation->center).norm() <= spec.detonation->radius) {
      p = spec.detonation->pressure;
      T = spec.detonation->temperature;
    }
    return {p, 0.0, 0.0, T};
  };

  const int ncp = s.patch.num_cp_total();
  s.y.resize(4, ncp);
  s.ydot.setZero(4, ncp);
  for (int j = 0; j < s.patch.num_cp(1); ++j)
    for (int i = 0; i < s.patch.num_cp(0); ++i)
      s.y.col(s.patch.cp_index(i, j)) = initial(s.patch.greville(i, j));
  s.constraints = wall_normal_constraints(s.patch);
  for (const auto& [cp, comp] : s.constraints) s.y(comp, cp) = 0.0;

  if (spec.solid) {
    const SolidSpec& b = *spec.solid;
    s.has_solid = true;
    s.material = b.material;
    s.solid_spacing = b.spacing;
    s.solid.config.order = b.pd_order;
    s.solid.config.bond_associated = b.bond_associated;
    s.solid.config.support = b.support;
    s.solid.config.horizon = b.horizon_ratio * b.spacing;
    switch (b.geometry) {
      case SolidGeometry::block: {
        const int nx = std::max(1, static_cast<int>(std::lround(b.size.x() / b.spacing)));
        const int ny = std::max(1, static_cast<int>(std::lround(b.size.y() / b.spacing)));
        append_node_grid(s.solid, b.center - 0.5 * b.size, b.size, nx, ny,
                         b.material.density * b.mass_scale);
        break;
      }
      case SolidGeometry::annulus:
        generate_annulus(s.solid, b);
        break;
      case SolidGeometry::hollow_square:
        generate_hollow_square(s.solid, b);
        break;
    }
    for (const Vec2& x : s.solid.pos)
      if (!spec.domain.contains(x))
        throw Error(ErrorKind::config, "solid geometry extends outside the domain");
    refresh_solid_state(s, pool);
  }

  s.dt = spec.dt > 0.0 ? spec.dt : cfl_estimate(s, pool);
  return s;
}

}  // namespace perifsi
