#include "flowsteer/chirality.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "flowsteer/error.hpp"
#include "format.hpp"

namespace flowsteer {
namespace {

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double triple_product(const Vec3& x1, const Vec3& x2, const Vec3& x3, const Vec3& x4) {
  return dot3(cross(sub(x2, x1), sub(x3, x1)), sub(x4, x1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    auto b = cell.find_first_not_of(" \t\r");
    auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return out;
}

std::size_t parse_index(const std::string& s, const std::string& context) {
  std::size_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError(context + ": bad index '" + s + "'");
  return v;
}

}  // namespace

std::string_view to_string(Handedness h) { return h == Handedness::R ? "R" : "S"; }
std::string_view to_string(CenterSource s) { return s == CenterSource::reactant ? "reactant" : "product"; }

double handedness_sign(Handedness h) { return h == Handedness::R ? 1.0 : -1.0; }

double chiral_volume(const Vec3& x1, const Vec3& x2, const Vec3& x3, const Vec3& x4) {
  return triple_product(x1, x2, x3, x4) / 6.0;
}

double normalized_chiral_volume(const Vec3& x1, const Vec3& x2, const Vec3& x3, const Vec3& x4) {
  const double l2 = std::sqrt(dot3(sub(x2, x1), sub(x2, x1)));
  const double l3 = std::sqrt(dot3(sub(x3, x1), sub(x3, x1)));
  const double l4 = std::sqrt(dot3(sub(x4, x1), sub(x4, x1)));
  if (l2 == 0.0 || l3 == 0.0 || l4 == 0.0) throw DegenerateGeometryError("chiral tetrahedron has a zero-length edge");
  return triple_product(x1, x2, x3, x4) / (l2 * l3 * l4);
}

Vec3 atom_position(std::span<const double> geometry, std::size_t atom) {
  if (3 * atom + 2 >= geometry.size()) throw DomainError("atom index out of range");
  return {geometry[3 * atom], geometry[3 * atom + 1], geometry[3 * atom + 2]};
}

double center_volume(std::span<const double> geometry, const ChiralCenter& c) {
  const auto& n = c.neighbors;
  return chiral_volume(atom_position(geometry, n[0]), atom_position(geometry, n[1]),
                       atom_position(geometry, n[2]), atom_position(geometry, n[3]));
}

double center_normalized_volume(std::span<const double> geometry, const ChiralCenter& c) {
  const auto& n = c.neighbors;
  return normalized_chiral_volume(atom_position(geometry, n[0]), atom_position(geometry, n[1]),
                                  atom_position(geometry, n[2]), atom_position(geometry, n[3]));
}

double chirality_potential(std::span<const double> geometry, std::span<const ChiralCenter> centers) {
  double total = 0.0;
  for (const auto& c : centers) total += std::max(0.0, handedness_sign(c.handedness) * center_volume(geometry, c));
  return total;
}

bool consistent_chirality_error(std::span<const double> geometry, std::span<const ChiralCenter> centers) {
  return std::any_of(centers.begin(), centers.end(), [&](const ChiralCenter& c) {
    return handedness_sign(c.handedness) * center_volume(geometry, c) > 0.0;
  });
}

bool thresholded_chirality_error(std::span<const double> geometry, std::span<const ChiralCenter> centers,
                                 double threshold) {
  if (!(threshold > 0.0)) throw DomainError("chirality threshold must be positive");
  return std::any_of(centers.begin(), centers.end(), [&](const ChiralCenter& c) {
    const double v = center_normalized_volume(geometry, c);
    return handedness_sign(c.handedness) * v > 0.0 && std::abs(v) > threshold;
  });
}

void validate_centers(std::span<const ChiralCenter> centers, std::size_t n_atoms) {
  for (const auto& c : centers) {
    for (std::size_t i = 0; i < 4; ++i) {
      if (c.neighbors[i] >= n_atoms)
        throw DomainError("chiral centre '" + c.id + "': neighbour index out of range");
      for (std::size_t j = 0; j < i; ++j)
        if (c.neighbors[i] == c.neighbors[j])
          throw DomainError("chiral centre '" + c.id + "': neighbour indices must be distinct");
    }
  }
}

Potential make_chirality_potential(std::size_t n_atoms, std::vector<ChiralCenter> centers) {
  validate_centers(centers, n_atoms);
  return {"chirality", 3 * n_atoms,
          [centers = std::move(centers)](std::span<const double> x) { return chirality_potential(x, centers); }};
}

std::vector<ChiralCenter> read_chiral_centers_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open chiral-centre file '" + path + "'");
  std::vector<ChiralCenter> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (line_no == 1 && !cells.empty() && cells[0] == "center_id") continue;
    const std::string ctx = path + ":" + std::to_string(line_no);
    if (cells.size() != 7) throw ConfigError(ctx + ": expected 7 columns");
    ChiralCenter c;
    c.id = cells[0];
    for (std::size_t i = 0; i < 4; ++i) c.neighbors[i] = parse_index(cells[1 + i], ctx);
    if (cells[5] == "R")
      c.handedness = Handedness::R;
    else if (cells[5] == "S")
      c.handedness = Handedness::S;
    else
      throw ConfigError(ctx + ": handedness must be R or S");
    if (cells[6] == "reactant")
      c.source = CenterSource::reactant;
    else if (cells[6] == "product")
      c.source = CenterSource::product;
    else
      throw ConfigError(ctx + ": source must be reactant or product");
    out.push_back(std::move(c));
  }
  return out;
}

void write_chiral_centers_csv(const std::string& path, std::span<const ChiralCenter> centers) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << "center_id,i1,i2,i3,i4,handedness,source\n";
  for (const auto& c : centers) {
    out << c.id;
    for (auto i : c.neighbors) out << ',' << i;
    out << ',' << to_string(c.handedness) << ',' << to_string(c.source) << '\n';
  }
}

std::vector<double> read_geometry_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open geometry file '" + path + "'");
  std::map<std::size_t, Vec3> atoms;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    const std::string ctx = path + ":" + std::to_string(line_no);
    if (cells.size() != 4) throw ConfigError(ctx + ": expected atom_index,x,y,z");
    const auto idx = parse_index(cells[0], ctx);
    Vec3 p{detail::parse_double(cells[1], ctx), detail::parse_double(cells[2], ctx),
           detail::parse_double(cells[3], ctx)};
    if (!atoms.emplace(idx, p).second) throw ConfigError(ctx + ": duplicate atom index");
  }
  std::vector<double> out;
  out.reserve(3 * atoms.size());
  std::size_t expected = 0;
  for (const auto& [idx, p] : atoms) {
    if (idx != expected) throw ConfigError(path + ": atom indices must be contiguous from 0");
    out.insert(out.end(), p.begin(), p.end());
    ++expected;
  }
  return out;
}

void write_geometry_csv(const std::string& path, std::span<const double> geometry) {
  if (geometry.size() % 3 != 0) throw DomainError("geometry length must be a multiple of 3");
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  std::string line;
  for (std::size_t a = 0; a < geometry.size() / 3; ++a) {
    line = std::to_string(a);
    for (std::size_t k = 0; k < 3; ++k) {
      line += ',';
      detail::append_double(line, geometry[3 * a + k]);
    }
    line += '\n';
    out << line;
  }
}

}  // namespace flowsteer
