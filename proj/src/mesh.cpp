#include "dgflow/mesh.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace dgflow {

StructuredMesh2D::StructuredMesh2D(int nx, int ny, DomainBounds bounds,
                                   std::array<bool, 2> periodic)
    : nx_(nx), ny_(ny), bounds_(bounds), periodic_(periodic) {
  if (nx < 1 || ny < 1)
    throw std::invalid_argument("mesh: cell counts must be positive, got " +
                                std::to_string(nx) + "x" + std::to_string(ny));
  if (!(bounds.x_min < bounds.x_max) || !(bounds.y_min < bounds.y_max))
    throw std::invalid_argument("mesh: degenerate domain bounds");

  hx_ = (bounds.x_max - bounds.x_min) / nx;
  hy_ = (bounds.y_max - bounds.y_min) / ny;
  cell_faces_.assign(n_cells(), {-1, -1, -1, -1});

  auto add_face = [&](Face f) {
    const int id = static_cast<int>(faces_.size());
    faces_.push_back(f);
    return id;
  };

  // Faces with normal along x: x-lines i = 0..nx.
  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i <= nx_; ++i) {
      Face f;
      f.axis = 0;
      f.measure = hy_;
      if (i > 0 && i < nx_) {
        f.left_cell = cell_index(i - 1, j);
        f.right_cell = cell_index(i, j);
      } else if (periodic_[0]) {
        if (i == nx_) continue;  // identified with i == 0
        f.left_cell = cell_index(nx_ - 1, j);
        f.right_cell = cell_index(0, j);
      } else {
        f.kind = FaceKind::Dirichlet;
        f.left_cell = cell_index(i == 0 ? 0 : nx_ - 1, j);
        f.normal_sign = i == 0 ? -1.0 : 1.0;
      }
      const int id = add_face(f);
      if (f.kind == FaceKind::Interior) {
        cell_faces_[f.left_cell][local_face(0, CellSide::Upper)] = id;
        cell_faces_[f.right_cell][local_face(0, CellSide::Lower)] = id;
      } else {
        cell_faces_[f.left_cell][local_face(0, f.left_side())] = id;
      }
    }
  }
  // Faces with normal along y: y-lines j = 0..ny.
  for (int j = 0; j <= ny_; ++j) {
    for (int i = 0; i < nx_; ++i) {
      Face f;
      f.axis = 1;
      f.measure = hx_;
      if (j > 0 && j < ny_) {
        f.left_cell = cell_index(i, j - 1);
        f.right_cell = cell_index(i, j);
      } else if (periodic_[1]) {
        if (j == ny_) continue;
        f.left_cell = cell_index(i, ny_ - 1);
        f.right_cell = cell_index(i, 0);
      } else {
        f.kind = FaceKind::Dirichlet;
        f.left_cell = cell_index(i, j == 0 ? 0 : ny_ - 1);
        f.normal_sign = j == 0 ? -1.0 : 1.0;
      }
      const int id = add_face(f);
      if (f.kind == FaceKind::Interior) {
        cell_faces_[f.left_cell][local_face(1, CellSide::Upper)] = id;
        cell_faces_[f.right_cell][local_face(1, CellSide::Lower)] = id;
      } else {
        cell_faces_[f.left_cell][local_face(1, f.left_side())] = id;
      }
    }
  }
  n_interior_ = static_cast<int>(std::count_if(
      faces_.begin(), faces_.end(), [](const Face& f) { return !f.is_boundary(); }));
}

std::array<double, 2> StructuredMesh2D::cell_origin(int c) const {
  const auto [i, j] = cell_ij(c);
  return {bounds_.x_min + i * hx_, bounds_.y_min + j * hy_};
}

double StructuredMesh2D::face_h_e(const Face& face) const {
  // Uniform mesh: min(|E1|,|E2|) on interior faces and |E| on boundary faces coincide.
  return cell_measure() / face.measure;
}

}  // namespace dgflow
