#pragma once

// Tetrahedral chirality: signed volumes of priority-ordered neighbour
// tetrahedra, the ReLU chirality potential and the two error classifiers.
//
// Sign convention: a centre has its declared handedness when
// sign(h) * V < 0, with sign(R) = +1 and sign(S) = -1. In other words the
// label R denotes the arrangement whose ordered chiral volume is negative.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flowsteer/potentials.hpp"

namespace flowsteer {

using Vec3 = std::array<double, 3>;

enum class Handedness { R, S };
enum class CenterSource { reactant, product };

std::string_view to_string(Handedness h);
std::string_view to_string(CenterSource s);

struct ChiralCenter {
  std::string id;
  std::array<std::size_t, 4> neighbors{};  // descending priority
  Handedness handedness = Handedness::R;
  CenterSource source = CenterSource::reactant;
};

/// +1 for R, -1 for S.
double handedness_sign(Handedness h);

/// [(x2 - x1) x (x3 - x1)] . (x4 - x1) / 6
double chiral_volume(const Vec3& x1, const Vec3& x2, const Vec3& x3, const Vec3& x4);

/// Triple product over the product of the three edge lengths from x1; no 1/6.
/// Throws DegenerateGeometryError if an edge has zero length.
double normalized_chiral_volume(const Vec3& x1, const Vec3& x2, const Vec3& x3, const Vec3& x4);

/// Atom i of a flattened geometry (x0 y0 z0 x1 y1 z1 ...).
Vec3 atom_position(std::span<const double> geometry, std::size_t atom);

double center_volume(std::span<const double> geometry, const ChiralCenter& c);
double center_normalized_volume(std::span<const double> geometry, const ChiralCenter& c);

/// sum_c max(0, sign(h_c) V_c). Zero iff every centre has its declared handedness.
double chirality_potential(std::span<const double> geometry, std::span<const ChiralCenter> centers);

/// True iff some centre's volume sign contradicts its handedness. Pass only
/// centres whose handedness is the same in reactant and product.
bool consistent_chirality_error(std::span<const double> geometry, std::span<const ChiralCenter> centers);

/// True iff some centre has the wrong sign of the normalised volume and
/// |V~| > threshold.
bool thresholded_chirality_error(std::span<const double> geometry, std::span<const ChiralCenter> centers,
                                 double threshold = 0.25);

/// Throws DomainError if any neighbour index is out of range or repeated.
void validate_centers(std::span<const ChiralCenter> centers, std::size_t n_atoms);

Potential make_chirality_potential(std::size_t n_atoms, std::vector<ChiralCenter> centers);

/// Rows: center_id,i1,i2,i3,i4,handedness(R|S),source(reactant|product).
/// A leading header row starting with "center_id" is skipped.
std::vector<ChiralCenter> read_chiral_centers_csv(const std::string& path);
void write_chiral_centers_csv(const std::string& path, std::span<const ChiralCenter> centers);

/// Rows: atom_index,x,y,z with indices 0..n-1 in any order. Returns 3n values.
std::vector<double> read_geometry_csv(const std::string& path);
void write_geometry_csv(const std::string& path, std::span<const double> geometry);

}  // namespace flowsteer
