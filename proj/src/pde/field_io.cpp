#include "csgame/pde/field_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <fmt/format.h>
#include <fmt/os.h>

#include "csgame/error.hpp"

namespace csgame {

namespace {

constexpr char kMagic[8] = {'C', 'S', 'G', 'F', 'I', 'E', 'L', 'D'};
constexpr std::uint32_t kVersion = 1;

std::string num(double v) { return std::isnan(v) ? std::string("nan") : fmt::format("{:.10g}", v); }

}  // namespace

std::vector<int> slice_levels(const Grid& grid, int count) {
  const int nt = grid.nt();
  count = std::max(2, std::min(count, nt + 1));
  std::vector<int> out;
  for (int i = 0; i < count; ++i) {
    const int n = static_cast<int>(std::lround(static_cast<double>(i) * nt / (count - 1)));
    if (out.empty() || out.back() != n) out.push_back(n);
  }
  return out;
}

void write_field_csv(const std::filesystem::path& path, const GridField& field, const std::vector<int>& levels,
                     const VIReport* report) {
  const Grid& grid = field.grid();
  const int d = grid.dim();
  try {
    auto out = fmt::output_file(path.string());
    out.print("{}", d == 1 ? "t,x1,u,ux1,residual_minmax,residual_maxmin,inC,inI\n"
                           : "t,x1,x2,u,ux1,ux2,residual_minmax,residual_maxmin,inC,inI\n");
    double x[2], grad[2];
    for (int n : levels) {
      const double t = grid.time(n);
      for (std::size_t k = 0; k < grid.nodes(); ++k) {
        grid.node_x(k, x);
        field.nodal_gradient(n, k, grad);
        std::string line = num(t);
        for (int a = 0; a < d; ++a) line += "," + num(x[a]);
        line += "," + num(field.at(n, k));
        for (int a = 0; a < d; ++a) line += "," + num(grad[a]);
        if (report) {
          const std::size_t idx = report->index(n, k);
          line += fmt::format(",{},{},{},{}\n", num(report->residual_minmax.at(n, k)),
                              num(report->residual_maxmin.at(n, k)), report->in_C[idx], report->in_I[idx]);
        } else {
          line += ",nan,nan,0,0\n";
        }
        out.print("{}", line);
      }
    }
  } catch (const std::system_error& e) {
    throw IoError(fmt::format("cannot write {}: {}", path.string(), e.what()));
  }
}

void write_region_pgm_1d(const std::filesystem::path& path, const VIReport& report, const std::vector<int>& levels) {
  const Grid& grid = report.residual_minmax.grid();
  try {
    auto out = fmt::output_file(path.string());
    out.print("P2\n{} {}\n2\n", grid.nodes(), levels.size());
    for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
      for (std::size_t k = 0; k < grid.nodes(); ++k) {
        out.print("{}{}", k == 0 ? "" : " ", static_cast<int>(report.region[report.index(*it, k)]));
      }
      out.print("\n");
    }
  } catch (const std::system_error& e) {
    throw IoError(fmt::format("cannot write {}: {}", path.string(), e.what()));
  }
}

void write_region_pgm_2d(const std::filesystem::path& path, const VIReport& report, int level) {
  const Grid& grid = report.residual_minmax.grid();
  const int nx = grid.nx();
  try {
    auto out = fmt::output_file(path.string());
    out.print("P2\n{} {}\n2\n", nx, nx);
    for (int j = nx - 1; j >= 0; --j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t k = static_cast<std::size_t>(j) * nx + i;
        out.print("{}{}", i == 0 ? "" : " ", static_cast<int>(report.region[report.index(level, k)]));
      }
      out.print("\n");
    }
  } catch (const std::system_error& e) {
    throw IoError(fmt::format("cannot write {}: {}", path.string(), e.what()));
  }
}

void write_field_binary(const std::filesystem::path& path, const GridField& field) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(fmt::format("cannot write {}", path.string()));
  const Grid& g = field.grid();
  const std::int32_t ints[3] = {g.dim(), g.nx(), g.nt()};
  const double reals[2] = {g.radius(), g.horizon()};
  os.write(kMagic, sizeof kMagic);
  os.write(reinterpret_cast<const char*>(&kVersion), sizeof kVersion);
  os.write(reinterpret_cast<const char*>(ints), sizeof ints);
  os.write(reinterpret_cast<const char*>(reals), sizeof reals);
  const auto v = field.values();
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!os) throw IoError(fmt::format("short write to {}", path.string()));
}

GridField read_field_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(fmt::format("cannot open {}", path.string()));
  char magic[8];
  std::uint32_t version = 0;
  std::int32_t ints[3];
  double reals[2];
  is.read(magic, sizeof magic);
  is.read(reinterpret_cast<char*>(&version), sizeof version);
  is.read(reinterpret_cast<char*>(ints), sizeof ints);
  is.read(reinterpret_cast<char*>(reals), sizeof reals);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0 || version != kVersion) {
    throw IoError(fmt::format("{} is not a field file", path.string()));
  }
  GridField field(Grid(ints[0], reals[0], ints[1], ints[2], reals[1]));
  auto v = field.values();
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!is) throw IoError(fmt::format("{} is truncated", path.string()));
  return field;
}

}  // namespace csgame
