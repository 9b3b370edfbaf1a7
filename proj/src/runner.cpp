#include "perifsi/runner.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "perifsi/output.hpp"

namespace perifsi {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Applies "a.b.c=value" onto a JSON document; values parse as JSON literals
// and fall back to strings.
void apply_override(json& j, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos)
    throw Error(ErrorKind::config, "override '" + kv + "' is not key=value");
  const std::string path = kv.substr(0, eq);
  const std::string value = kv.substr(eq + 1);

  json* node = &j;
  std::size_t pos = 0;
  while (true) {
    const auto dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot - pos);
    if (key.empty())
      throw Error(ErrorKind::config, "override '" + kv + "' has an empty key");
    if (dot == std::string::npos) {
      json parsed = json::parse(value, nullptr, false);
      (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
      return;
    }
    node = &(*node)[key];
    pos = dot + 1;
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string edited_config_text(const RunOptions& opts) {
  std::string text = slurp(opts.config_path);
  if (opts.level.empty() && opts.overrides.empty()) return text;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::config, opts.config_path + ": " + e.what());
  }
  if (!opts.level.empty()) j["level"] = opts.level;
  for (const auto& kv : opts.overrides) apply_override(j, kv);
  return j.dump(2);
}

struct ProbeSampler {
  std::vector<ProbeSpec> specs;
  std::vector<ProbeSeries> series;
  double com_x0 = 0.0;

  void init(const ProblemSpec& spec, const SimState& s) {
    specs = spec.probes;
    series.clear();
    for (const auto& p : specs) series.push_back({p.name, {}});
    com_x0 = s.has_solid ? s.solid_center_of_mass().x() : 0.0;
  }

  void sample(const SimState& s) {
    for (std::size_t i = 0; i < specs.size(); ++i) {
      double v = 0.0;
      switch (specs[i].kind) {
        case ProbeSpec::Kind::pressure:
          v = s.pressure_at(specs[i].position);
          break;
        case ProbeSpec::Kind::com_displacement_x:
          v = s.solid_center_of_mass().x() - com_x0;
          break;
      }
      series[i].samples.emplace_back(s.time, v);
    }
  }
};

struct RunProducts {
  std::vector<std::string> probe_files;
};

RunProducts execute(const ProblemSpec& spec, const std::string& config_text,
                    const std::string& out_dir, long max_steps) {
  WorkerPool pool;
  SimState state = build_state(spec, pool);

  fs::create_directories(out_dir);
  RunManifest manifest;
  manifest.config_hash = [&] {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(save_config(spec))));
    return std::string(buf);
  }();
  manifest.code_version = kCodeVersion;
  manifest.started = timestamp();
  (void)config_text;

  ProbeSampler probes;
  probes.init(spec, state);
  probes.sample(state);

  auto field_paths = [&](long step) {
    char tag[32];
    std::snprintf(tag, sizeof tag, "%06ld", step);
    return std::pair<std::string, std::string>(
        out_dir + "/background_" + tag + ".vtk", out_dir + "/nodes_" + tag + ".vtk");
  };
  auto write_fields = [&](long step) {
    const auto [bg, nd] = field_paths(step);
    write_background_vtk(state, bg);
    manifest.outputs.push_back(bg);
    if (state.has_solid) {
      write_nodes_vtk(state, nd);
      manifest.outputs.push_back(nd);
    }
  };

  write_fields(0);

  const int probe_stride = std::max(1, spec.output.probe_stride);
  const int field_stride = spec.output.field_stride;
  double cfl_bound = cfl_estimate(state, pool);
  if (state.dt > cfl_bound)
    std::fprintf(stderr,
                 "perifsi: warning: dt = %.4g s exceeds the CFL estimate %.4g s\n",
                 state.dt, cfl_bound);

  long steps_done = 0;
  while (state.time < spec.end_time - 0.5 * state.dt &&
         (max_steps < 0 || steps_done < max_steps)) {
    step(state, pool);
    ++steps_done;
    if (steps_done % probe_stride == 0) probes.sample(state);
    if (field_stride > 0 && steps_done % field_stride == 0)
      write_fields(state.step_count);
    manifest.diagnostics.push_back(diagnostics(state));
    if (steps_done % 25 == 0) {
      cfl_bound = cfl_estimate(state, pool);
      if (state.dt > cfl_bound)
        std::fprintf(stderr,
                     "perifsi: warning: dt = %.4g s exceeds the CFL estimate "
                     "%.4g s at step %ld\n",
                     state.dt, cfl_bound, steps_done);
    }
  }

  if (field_stride <= 0 || steps_done % std::max(1, field_stride) != 0)
    write_fields(state.step_count);

  RunProducts products;
  for (const auto& s : probes.series) {
    const std::string path = out_dir + "/" + s.name + ".csv";
    write_probe_csv(s, path);
    manifest.outputs.push_back(path);
    products.probe_files.push_back(path);
  }

  manifest.finished = timestamp();
  manifest.steps = steps_done;
  write_manifest(manifest, out_dir + "/run_manifest.json");
  std::printf("perifsi: %ld steps to t = %.9g s, outputs in %s\n", steps_done,
              state.time, out_dir.c_str());
  return products;
}

}  // namespace

ProblemSpec effective_spec(const RunOptions& opts) {
  return parse_config(edited_config_text(opts), opts.config_path);
}

int run(const RunOptions& opts) {
  try {
    const std::string text = edited_config_text(opts);
    const ProblemSpec spec = parse_config(text, opts.config_path);

    if (opts.seed_check) {
      const long steps = opts.max_steps >= 0 ? opts.max_steps : 25;
      const auto a = execute(spec, text, opts.out_dir + "/check_a", steps);
      const auto b = execute(spec, text, opts.out_dir + "/check_b", steps);
      for (std::size_t i = 0; i < a.probe_files.size(); ++i) {
        if (slurp(a.probe_files[i]) != slurp(b.probe_files[i])) {
          std::fprintf(stderr, "perifsi: determinism check FAILED on %s\n",
                       a.probe_files[i].c_str());
          return kExitFailure;
        }
      }
      std::printf("perifsi: determinism check passed (%zu probe files)\n",
                  a.probe_files.size());
      return kExitOk;
    }

    execute(spec, text, opts.out_dir, opts.max_steps);
    return kExitOk;
  } catch (const Error& e) {
    std::fprintf(stderr, "perifsi: error: %s\n", e.what());
    switch (e.kind()) {
      case ErrorKind::config: return kExitConfig;
      case ErrorKind::io: return kExitIo;
      case ErrorKind::numerical: return kExitNumerical;
      case ErrorKind::domain: return kExitNumerical;
    }
    return kExitFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "perifsi: error: %s\n", e.what());
    return kExitFailure;
  }
}

}  // namespace perifsi
