#include "nldiff/io.hpp"

#include <cstdio>
#include <fstream>

namespace nldiff {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write " + path);
  out << text;
}

void write_profile_csv(const std::string& path, const Profile& p) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write " + path);
  out << "xi,f\n";
  for (std::size_t i = 0; i < p.xi_grid.size(); ++i)
    out << fmt17(p.xi_grid[i]) << ',' << fmt17(p.f_values[i]) << '\n';
}

void write_series_csv(const std::string& path,
                      const std::vector<std::pair<double, double>>& series,
                      const std::string& header) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write " + path);
  out << header << '\n';
  for (const auto& [a, b] : series)
    out << fmt17(a) << ',' << fmt17(b) << '\n';
}

void write_field_csv(const std::string& path, const Grid& grid,
                     const std::vector<double>& values) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write " + path);
  out << (grid.dimension == 2 ? "x,y,u\n" : "x,u\n");
  for (int iy = 0; iy < grid.n[1]; ++iy)
    for (int ix = 0; ix < grid.n[0]; ++ix) {
      out << fmt17(grid.x(ix));
      if (grid.dimension == 2) out << ',' << fmt17(grid.y(iy));
      out << ',' << fmt17(values[grid.idx(ix, iy)]) << '\n';
    }
}

void write_segments_csv(const std::string& path,
                        const std::vector<std::array<double, 4>>& segments) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write " + path);
  out << "x1,y1,x2,y2\n";
  for (const auto& s : segments)
    out << fmt17(s[0]) << ',' << fmt17(s[1]) << ',' << fmt17(s[2]) << ','
        << fmt17(s[3]) << '\n';
}

nlohmann::json profile_summary(const Profile& p) {
  nlohmann::json j;
  j["kind"] = p.kind == ProfileKind::half_line ? "half_line" : "whole_line";
  j["c"] = p.c;
  j["v_prime_at_zero"] = p.v_prime_at_zero;
  j["mass_residual"] = mass_identity_residual(p);
  if (p.match_point)
    j["match_point"] = *p.match_point;
  else
    j["match_point"] = nullptr;
  return j;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace nldiff
