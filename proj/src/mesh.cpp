#include "vpfp/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vpfp {

Mesh1D Mesh1D::uniform(double length, int num_cells) {
  if (!(length > 0.0)) throw std::invalid_argument("mesh: length must be positive");
  if (num_cells < 2) throw std::invalid_argument("mesh: need at least 2 cells");
  Mesh1D mesh;
  mesh.length_ = length;
  const double h = length / num_cells;
  mesh.endpoints_.resize(num_cells + 1);
  for (int j = 0; j <= num_cells; ++j) mesh.endpoints_[j] = h * j;
  mesh.endpoints_[num_cells] = length;
  // All cells share the bitwise-identical size so that interface factors
  // cancel exactly in the operator assembly.
  mesh.sizes_.assign(num_cells, h);
  mesh.finalize();
  return mesh;
}

Mesh1D Mesh1D::from_nodes(const std::vector<double>& nodes, double length) {
  if (!(length > 0.0)) throw std::invalid_argument("mesh: length must be positive");
  if (nodes.size() < 3) throw std::invalid_argument("mesh: need at least 2 cells");
  for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
    if (!(nodes[j] < nodes[j + 1]))
      throw std::invalid_argument("mesh: nodes must be strictly increasing");
  }
  const double span = nodes.back() - nodes.front();
  const double tol = 8.0 * std::numeric_limits<double>::epsilon() * length;
  if (std::abs(span - length) > tol)
    throw std::invalid_argument("mesh: last - first node must equal the period length");
  Mesh1D mesh;
  mesh.length_ = length;
  mesh.endpoints_ = nodes;
  mesh.sizes_.resize(nodes.size() - 1);
  for (std::size_t j = 0; j + 1 < nodes.size(); ++j)
    mesh.sizes_[j] = nodes[j + 1] - nodes[j];
  mesh.finalize();
  return mesh;
}

void Mesh1D::finalize() {
  h_max_ = *std::max_element(sizes_.begin(), sizes_.end());
  h_min_ = *std::min_element(sizes_.begin(), sizes_.end());
  uniform_ = true;
  for (const double h : sizes_) {
    if (h != sizes_[0]) {
      uniform_ = false;
      break;
    }
  }
}

int Mesh1D::locate(double x) const {
  if (!(x >= endpoints_.front()) || !(x < endpoints_.front() + length_))
    throw std::invalid_argument("mesh: point outside the periodic domain");
  const auto it = std::upper_bound(endpoints_.begin(), endpoints_.end(), x);
  int j = static_cast<int>(it - endpoints_.begin()) - 1;
  return std::clamp(j, 0, num_cells() - 1);
}

bool Mesh1D::same_partition(const Mesh1D& other) const {
  if (this == &other) return true;
  return length_ == other.length_ && endpoints_ == other.endpoints_;
}

MeshPtr make_uniform_mesh(double length, int num_cells) {
  return std::make_shared<const Mesh1D>(Mesh1D::uniform(length, num_cells));
}

MeshPtr make_mesh_from_nodes(const std::vector<double>& nodes, double length) {
  return std::make_shared<const Mesh1D>(Mesh1D::from_nodes(nodes, length));
}

}  // namespace vpfp
