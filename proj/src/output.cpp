#include "perifsi/output.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>

#include "json.hpp"

namespace perifsi {

const char* const kCodeVersion = "0.1.0";

namespace {

class FileWriter {
public:
  explicit FileWriter(const std::string& path) : path_(path) {
    f_ = std::fopen(path.c_str(), "w");
    if (!f_) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
  }
  ~FileWriter() {
    if (f_) std::fclose(f_);
  }
  FileWriter(const FileWriter&) = delete;
  FileWriter& operator=(const FileWriter&) = delete;

  void printf(const char* fmt, ...) __attribute__((format(printf, 2, 3))) {
    va_list args;
    va_start(args, fmt);
    if (std::vfprintf(f_, fmt, args) < 0) {
      va_end(args);
      throw Error(ErrorKind::io, "write failed for '" + path_ + "'");
    }
    va_end(args);
  }

  void close() {
    if (f_ && std::fclose(f_) != 0) {
      f_ = nullptr;
      throw Error(ErrorKind::io, "close failed for '" + path_ + "'");
    }
    f_ = nullptr;
  }

private:
  std::string path_;
  std::FILE* f_ = nullptr;
};

}  // namespace

void write_background_vtk(const SimState& s, const std::string& path,
                          int samples_per_element) {
  const auto& patch = s.patch;
  const int nx = patch.num_elems(0) * samples_per_element + 1;
  const int ny = patch.num_elems(1) * samples_per_element + 1;
  const double dx = patch.domain().width() / (nx - 1);
  const double dy = patch.domain().height() / (ny - 1);

  std::vector<double> p(nx * ny), T(nx * ny), vx(nx * ny), vy(nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Vec2 x(patch.domain().x0 + i * dx, patch.domain().y0 + j * dy);
      const BasisEval be = patch.eval_basis(x);
      Vec4 yq = Vec4::Zero();
      for (int k = 0; k < be.count; ++k)
        for (int c = 0; c < 4; ++c) yq[c] += be.value[k] * s.y(c, be.index[k]);
      const int id = j * nx + i;
      p[id] = yq[0];
      vx[id] = yq[1];
      vy[id] = yq[2];
      T[id] = yq[3];
    }

  FileWriter out(path);
  out.printf("# vtk DataFile Version 3.0\n");
  out.printf("perifsi background fields t=%.17g\n", s.time);
  out.printf("ASCII\nDATASET STRUCTURED_POINTS\n");
  out.printf("DIMENSIONS %d %d 1\n", nx, ny);
  out.printf("ORIGIN %.17g %.17g 0\n", patch.domain().x0, patch.domain().y0);
  out.printf("SPACING %.17g %.17g 1\n", dx, dy);
  out.printf("POINT_DATA %d\n", nx * ny);
  out.printf("SCALARS pressure double 1\nLOOKUP_TABLE default\n");
  for (double v : p) out.printf("%.17g\n", v);
  out.printf("SCALARS temperature double 1\nLOOKUP_TABLE default\n");
  for (double v : T) out.printf("%.17g\n", v);
  out.printf("SCALARS speed double 1\nLOOKUP_TABLE default\n");
  for (int i = 0; i < nx * ny; ++i) out.printf("%.17g\n", std::hypot(vx[i], vy[i]));
  out.printf("VECTORS velocity double\n");
  for (int i = 0; i < nx * ny; ++i) out.printf("%.17g %.17g 0\n", vx[i], vy[i]);
  out.close();
}

void write_nodes_vtk(const SimState& s, const std::string& path) {
  const PDNodeSet& nodes = s.solid;
  const int n = nodes.count();

  FileWriter out(path);
  out.printf("# vtk DataFile Version 3.0\n");
  out.printf("perifsi solid nodes t=%.17g\n", s.time);
  out.printf("ASCII\nDATASET POLYDATA\n");
  out.printf("POINTS %d double\n", n);
  for (int i = 0; i < n; ++i)
    out.printf("%.17g %.17g 0\n", nodes.pos[i].x(), nodes.pos[i].y());
  out.printf("VERTICES %d %d\n", n, 2 * n);
  for (int i = 0; i < n; ++i) out.printf("1 %d\n", i);
  out.printf("POINT_DATA %d\n", n);
  out.printf("SCALARS damage double 1\nLOOKUP_TABLE default\n");
  std::vector<double> dmg(n);
  for (int i = 0; i < n; ++i) {
    dmg[i] = node_damage(nodes, i);
    out.printf("%.17g\n", dmg[i]);
  }
  out.printf("SCALARS eqps double 1\nLOOKUP_TABLE default\n");
  for (int i = 0; i < n; ++i) {
    // influence-weighted bond average
    double num = 0.0, den = 0.0;
    for (int b = nodes.fam_start[i]; b < nodes.fam_start[i + 1]; ++b) {
      const double w = nodes.volume[nodes.fam_node[b]];
      num += w * nodes.bond[b].eqps;
      den += w;
    }
    out.printf("%.17g\n", den > 0.0 ? num / den : 0.0);
  }
  out.printf("SCALARS broken int 1\nLOOKUP_TABLE default\n");
  for (int i = 0; i < n; ++i) out.printf("%d\n", dmg[i] >= 1.0 ? 1 : 0);
  out.printf("VECTORS velocity double\n");
  for (int i = 0; i < n; ++i)
    out.printf("%.17g %.17g 0\n", nodes.vel[i].x(), nodes.vel[i].y());
  out.close();
}

void write_probe_csv(const ProbeSeries& series, const std::string& path) {
  FileWriter out(path);
  out.printf("t,%s\n", series.name.c_str());
  for (const auto& [t, v] : series.samples) out.printf("%.17g,%.17g\n", t, v);
  out.close();
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void write_manifest(const RunManifest& m, const std::string& path) {
  nlohmann::json j;
  j["config_hash"] = m.config_hash;
  j["code_version"] = m.code_version;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["steps"] = m.steps;
  j["outputs"] = m.outputs;
  j["diagnostics"] = nlohmann::json::array();
  for (const auto& d : m.diagnostics)
    j["diagnostics"].push_back({{"step", d.step},
                                {"t", d.time},
                                {"dt", d.dt},
                                {"max_residual", d.max_residual},
                                {"broken_bond_fraction", d.broken_bond_fraction},
                                {"plastic_dissipation", d.plastic_dissipation},
                                {"degraded_kernels", d.degraded_kernels}});
  const std::string tmp = path + ".tmp";
  {
    FileWriter out(tmp);
    out.printf("%s\n", j.dump(2).c_str());
    out.close();
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::io, "cannot finalize manifest '" + path + "'");
}

}  // namespace perifsi
