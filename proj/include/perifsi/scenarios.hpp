#ifndef PERIFSI_SCENARIOS_HPP
#define PERIFSI_SCENARIOS_HPP

#include <optional>
#include <string>
#include <vector>

#include "perifsi/common.hpp"
#include "perifsi/simulation.hpp"

namespace perifsi {

enum class ScenarioKind { custom, chamber_detonation, brittle_cylinder, ductile_square, sod_tube };

std::string to_string(ScenarioKind k);
ScenarioKind scenario_from_string(const std::string& s);

// High-pressure/high-temperature patch, intersected with the domain (a disc
// centered on a wall becomes a half disc).
struct DetonationSpec {
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
  double pressure = 6.75e6;
  double temperature = 1465.0;

  bool operator==(const DetonationSpec& o) const {
    return (center.array() == o.center.array()).all() && radius == o.radius &&
           pressure == o.pressure && temperature == o.temperature;
  }
};

// Two-state initial condition split at x = split (shock-tube style).
struct RiemannSpec {
  double split = 0.5;
  double p_left = 1.0, T_left = 1.0;
  double p_right = 0.1, T_right = 0.8;
  bool operator==(const RiemannSpec&) const = default;
};

enum class SolidGeometry { block, annulus, hollow_square };

struct SolidSpec {
  SolidGeometry geometry = SolidGeometry::block;
  Vec2 center = Vec2::Zero();
  Vec2 size = Vec2::Zero();        // block width/height
  double inner_radius = 0.0;       // annulus
  double outer_radius = 0.0;
  double inner_width = 0.0;        // hollow square (full widths)
  double outer_width = 0.0;
  double spacing = 0.0;
  double mass_scale = 1.0;         // optional areal-density scaling
  MaterialParams material;
  int pd_order = 2;
  bool bond_associated = true;
  SupportShape support = SupportShape::rectangular;
  double horizon_ratio = 3.0;      // horizon = ratio * spacing

  bool operator==(const SolidSpec& o) const {
    return geometry == o.geometry &&
           (center.array() == o.center.array()).all() &&
           (size.array() == o.size.array()).all() &&
           inner_radius == o.inner_radius && outer_radius == o.outer_radius &&
           inner_width == o.inner_width && outer_width == o.outer_width &&
           spacing == o.spacing && mass_scale == o.mass_scale &&
           material == o.material && pd_order == o.pd_order &&
           bond_associated == o.bond_associated && support == o.support &&
           horizon_ratio == o.horizon_ratio;
  }
};

struct ProbeSpec {
  enum class Kind { pressure, com_displacement_x };
  std::string name;
  Kind kind = Kind::pressure;
  Vec2 position = Vec2::Zero();

  bool operator==(const ProbeSpec& o) const {
    return name == o.name && kind == o.kind &&
           (position.array() == o.position.array()).all();
  }
};

struct OutputSpec {
  int probe_stride = 1;   // sample probes every N steps
  int field_stride = 0;   // write field snapshots every N steps; 0 = end only
  bool operator==(const OutputSpec&) const = default;
};

struct ProblemSpec {
  ScenarioKind scenario = ScenarioKind::custom;
  std::string level;

  Rect domain{0.0, 0.0, 1.0, 1.0};
  int elements[2] = {1, 1};
  int degree = 2;

  GasParams gas;
  double ambient_pressure = 1.0e5;
  double ambient_temperature = 290.0;
  std::optional<DetonationSpec> detonation;
  std::optional<RiemannSpec> riemann;
  std::optional<SolidSpec> solid;

  GenAlphaParams integrator;
  StabConfig stab;
  double dt = 0.0;            // 0: derive from the CFL estimate at setup
  double dt_reference = 0.0;  // step size quoted for the experiment, informational
  double end_time = 0.0;
  double decouple_time = -1.0;

  std::vector<ProbeSpec> probes;
  OutputSpec output;

  bool operator==(const ProblemSpec& o) const;
};

// Built-in experiment definitions. Levels: coarse|medium|fine for the chamber,
// D1..D4 for the fragmentation problems; sod_tube ignores the level.
ProblemSpec builtin_spec(ScenarioKind kind, const std::string& level);
ProblemSpec chamber_spec(const std::string& level);
ProblemSpec brittle_spec(const std::string& level);
ProblemSpec ductile_spec(const std::string& level);
ProblemSpec sod_spec();

// JSON config files; the loader expands a builtin scenario first, then applies
// the remaining keys as overrides. Unknown keys are rejected.
ProblemSpec load_config(const std::string& path);
ProblemSpec parse_config(const std::string& text, const std::string& origin);
std::string save_config(const ProblemSpec& spec);

SimState build_state(const ProblemSpec& spec, WorkerPool& pool);

struct ProbeSeries {
  std::string name;
  std::vector<std::pair<double, double>> samples;  // (t, value)
};

}  // namespace perifsi

#endif
