#pragma once

#include <array>
#include <vector>

namespace dgflow {

enum class FaceKind { Interior, Dirichlet };

/// Reference-coordinate side of a cell touched by a face: 0 is the lower end
/// of the face-normal axis, 1 the upper end.
enum class CellSide : int { Lower = 0, Upper = 1 };

struct Face {
  FaceKind kind = FaceKind::Interior;
  int axis = 0;          // 0: face normal along x, 1: along y
  int left_cell = -1;    // E1, the cell on the negative side (the only cell on boundary faces)
  int right_cell = -1;   // E2, absent (-1) on boundary faces
  double normal_sign = 1.0;  // +1 on interior faces, outward orientation on boundary faces
  double measure = 0.0;

  [[nodiscard]] bool is_boundary() const { return kind != FaceKind::Interior; }
  [[nodiscard]] std::array<double, 2> normal() const {
    std::array<double, 2> n{0.0, 0.0};
    n[axis] = normal_sign;
    return n;
  }
  /// Side of left_cell this face lies on.
  [[nodiscard]] CellSide left_side() const {
    return normal_sign > 0 ? CellSide::Upper : CellSide::Lower;
  }
};

struct DomainBounds {
  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
};

/// Uniform axis-aligned rectangular mesh. Periodic directions are identified at
/// construction, so downstream loops only see interior and Dirichlet faces.
class StructuredMesh2D {
 public:
  StructuredMesh2D(int nx, int ny, DomainBounds bounds, std::array<bool, 2> periodic);

  [[nodiscard]] int nx() const { return nx_; }
  [[nodiscard]] int ny() const { return ny_; }
  [[nodiscard]] int n_cells() const { return nx_ * ny_; }
  [[nodiscard]] const DomainBounds& bounds() const { return bounds_; }
  [[nodiscard]] bool periodic(int axis) const { return periodic_[axis]; }

  [[nodiscard]] double hx() const { return hx_; }
  [[nodiscard]] double hy() const { return hy_; }
  [[nodiscard]] double h(int axis) const { return axis == 0 ? hx_ : hy_; }
  [[nodiscard]] double cell_measure() const { return hx_ * hy_; }
  [[nodiscard]] double domain_measure() const {
    return (bounds_.x_max - bounds_.x_min) * (bounds_.y_max - bounds_.y_min);
  }

  [[nodiscard]] int cell_index(int i, int j) const { return j * nx_ + i; }
  [[nodiscard]] std::array<int, 2> cell_ij(int c) const { return {c % nx_, c / nx_}; }
  /// Lower-left corner of a cell.
  [[nodiscard]] std::array<double, 2> cell_origin(int c) const;

  [[nodiscard]] const std::vector<Face>& faces() const { return faces_; }
  [[nodiscard]] int n_faces() const { return static_cast<int>(faces_.size()); }
  [[nodiscard]] int n_interior_faces() const { return n_interior_; }
  [[nodiscard]] int n_boundary_faces() const { return n_faces() - n_interior_; }

  /// Face indices of a cell, ordered (x-lower, x-upper, y-lower, y-upper).
  [[nodiscard]] const std::array<int, 4>& cell_faces(int c) const { return cell_faces_[c]; }

  /// Penalty length scale: min(|E1|,|E2|)/|e| on interior faces, |E|/|e| on boundary faces.
  [[nodiscard]] double face_h_e(const Face& face) const;

 private:
  int nx_, ny_;
  DomainBounds bounds_;
  std::array<bool, 2> periodic_;
  double hx_, hy_;
  std::vector<Face> faces_;
  std::vector<std::array<int, 4>> cell_faces_;
  int n_interior_ = 0;
};

/// Index into StructuredMesh2D::cell_faces for a given axis and side.
constexpr int local_face(int axis, CellSide side) { return 2 * axis + static_cast<int>(side); }

}  // namespace dgflow
