#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hflow/domain.hpp"
#include "hflow/field.hpp"

namespace hflow {

/// Pixel grid over the bounding box of a domain. Unknowns are the pixels
/// whose centre lies inside the domain (the mask); images are stored as
/// vectors over the masked pixels in row-major (y outer, x inner) order.
class PixelGrid {
 public:
  PixelGrid(const Domain& domain, int nx, int ny);
  PixelGrid(Vec2 lower, Vec2 upper, int nx, int ny, std::vector<char> mask);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  const Vec2& lower() const { return lower_; }
  const Vec2& upper() const { return upper_; }
  const Vec2& spacing() const { return h_; }
  double cell_area() const { return h_(0) * h_(1); }

  bool masked(int i, int j) const { return mask_[flat(i, j)] != 0; }
  const std::vector<char>& mask() const { return mask_; }
  /// Number of masked pixels.
  int unknowns() const { return static_cast<int>(cells_.size()); }
  /// (i, j) of masked pixel k.
  std::pair<int, int> cell(int k) const { return cells_[static_cast<std::size_t>(k)]; }
  /// Masked index of (i, j), -1 outside the mask.
  int index(int i, int j) const { return index_[flat(i, j)]; }

  Vec2 centre(int i, int j) const;

  /// Bilinear weights on masked pixels; nodes outside the grid or the mask
  /// contribute nothing.
  void bilinear(const Vec2& x, std::vector<std::pair<int, double>>& out) const;
  double interpolate(const Eigen::VectorXd& image, const Vec2& x) const;

  /// f at the masked pixel centres.
  Eigen::VectorXd sample(const ScalarField& f) const;

  /// nx * ny image (row-major), zero outside the mask.
  Eigen::VectorXd to_full(const Eigen::VectorXd& image) const;

  /// Neighbouring masked pixel pairs (k, l) in x then y direction.
  std::vector<std::pair<int, int>> neighbour_pairs() const;

 private:
  std::size_t flat(int i, int j) const { return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i); }
  void build_index();

  int nx_ = 0, ny_ = 0;
  Vec2 lower_ = Vec2::Zero(), upper_ = Vec2::Zero(), h_ = Vec2::Zero();
  std::vector<char> mask_;
  std::vector<int> index_;
  std::vector<std::pair<int, int>> cells_;
};

/// Masked discrete L^2 norm of (estimate - truth), relative to |truth| when nonzero.
double l2_error(const PixelGrid& grid, const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth);

/// CSV matrix (ny rows of nx values, header c0..c{nx-1}) plus a JSON sidecar
/// <stem>.json with bounds, spacing and mask.
void write_grid_image(const PixelGrid& grid, const Eigen::VectorXd& image, const std::filesystem::path& csv_path);

} // namespace hflow
