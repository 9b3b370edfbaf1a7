#ifndef PERIFSI_OUTPUT_HPP
#define PERIFSI_OUTPUT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "perifsi/scenarios.hpp"
#include "perifsi/simulation.hpp"

namespace perifsi {

// Background fields (p, velocity, T, |v|) sampled on a uniform lattice,
// written as a legacy-VTK structured-points ASCII file. samples_per_element
// lattice cells per background element.
void write_background_vtk(const SimState& s, const std::string& path,
                          int samples_per_element = 4);

// PD nodes as legacy-VTK polydata with velocity, damage, equivalent plastic
// strain, and a broken flag (1 = fully separated, for viewer filtering).
void write_nodes_vtk(const SimState& s, const std::string& path);

// One CSV per probe: "t,<name>" header then one row per sample.
void write_probe_csv(const ProbeSeries& series, const std::string& path);

struct RunManifest {
  std::string config_hash;
  std::string code_version;
  std::string started;
  std::string finished;
  long steps = 0;
  std::vector<StepDiagnostics> diagnostics;
  std::vector<std::string> outputs;  // files written by the run
};

// Written atomically (temp file + rename) at run end.
void write_manifest(const RunManifest& m, const std::string& path);

std::uint64_t fnv1a64(const std::string& data);

extern const char* const kCodeVersion;

}  // namespace perifsi

#endif
