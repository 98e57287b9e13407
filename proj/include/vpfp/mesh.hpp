#ifndef VPFP_MESH_HPP
#define VPFP_MESH_HPP

#include <memory>
#include <vector>

namespace vpfp {

/// Periodic partition of the torus [x0, x0 + L].
///
/// Interfaces are stored once: interface i in {0,...,Nx-1} sits at
/// endpoints[i], between cell (i-1+Nx)%Nx on the left and cell i on the
/// right, so every interface loop visits exactly Nx interfaces and the
/// wrap interface is never double counted.
class Mesh1D {
public:
  static Mesh1D uniform(double length, int num_cells);
  static Mesh1D from_nodes(const std::vector<double>& nodes, double length);

  double length() const { return length_; }
  int num_cells() const { return static_cast<int>(sizes_.size()); }
  const std::vector<double>& endpoints() const { return endpoints_; }
  const std::vector<double>& cell_sizes() const { return sizes_; }

  double cell_size(int j) const { return sizes_[j]; }
  double cell_left(int j) const { return endpoints_[j]; }
  double cell_right(int j) const { return endpoints_[j + 1]; }
  double cell_center(int j) const { return endpoints_[j] + 0.5 * sizes_[j]; }

  int left_cell(int interface) const {
    return interface == 0 ? num_cells() - 1 : interface - 1;
  }
  int right_cell(int interface) const { return interface; }

  /// h_{j-1/2} = min(h_{j-1}, h_j), the jump-seminorm weight.
  double interface_size(int interface) const {
    return std::min(sizes_[left_cell(interface)], sizes_[right_cell(interface)]);
  }

  double h_max() const { return h_max_; }
  double h_min() const { return h_min_; }
  double quasi_uniformity() const { return h_max_ / h_min_; }
  bool is_uniform() const { return uniform_; }

  /// Index of the cell containing x, for x in [x0, x0 + L); throws otherwise.
  int locate(double x) const;

  bool same_partition(const Mesh1D& other) const;

private:
  Mesh1D() = default;
  void finalize();

  double length_ = 0.0;
  std::vector<double> endpoints_;  // size Nx + 1, last = first + L
  std::vector<double> sizes_;      // size Nx
  double h_max_ = 0.0, h_min_ = 0.0;
  bool uniform_ = false;
};

using MeshPtr = std::shared_ptr<const Mesh1D>;

MeshPtr make_uniform_mesh(double length, int num_cells);
MeshPtr make_mesh_from_nodes(const std::vector<double>& nodes, double length);

}  // namespace vpfp

#endif
