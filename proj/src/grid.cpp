#include "hflow/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "hflow/errors.hpp"

namespace hflow {

PixelGrid::PixelGrid(const Domain& domain, int nx, int ny) {
  if (nx < 2 || ny < 2) throw ContractViolation("PixelGrid needs at least 2x2 pixels");
  const Box box = domain.bounding_box();
  nx_ = nx;
  ny_ = ny;
  lower_ = box.lower;
  upper_ = box.upper;
  h_ = Vec2((upper_(0) - lower_(0)) / nx, (upper_(1) - lower_(1)) / ny);
  mask_.assign(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), 0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) mask_[flat(i, j)] = domain.contains(centre(i, j)) ? 1 : 0;
  build_index();
}

PixelGrid::PixelGrid(Vec2 lower, Vec2 upper, int nx, int ny, std::vector<char> mask)
    : nx_(nx), ny_(ny), lower_(lower), upper_(upper), mask_(std::move(mask)) {
  if (mask_.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny)) {
    throw ContractViolation("PixelGrid: mask size does not match nx * ny");
  }
  h_ = Vec2((upper_(0) - lower_(0)) / nx, (upper_(1) - lower_(1)) / ny);
  build_index();
}

void PixelGrid::build_index() {
  index_.assign(mask_.size(), -1);
  cells_.clear();
  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i < nx_; ++i) {
      if (!mask_[flat(i, j)]) continue;
      index_[flat(i, j)] = static_cast<int>(cells_.size());
      cells_.emplace_back(i, j);
    }
  }
}

Vec2 PixelGrid::centre(int i, int j) const {
  return Vec2(lower_(0) + (i + 0.5) * h_(0), lower_(1) + (j + 0.5) * h_(1));
}

void PixelGrid::bilinear(const Vec2& x, std::vector<std::pair<int, double>>& out) const {
  out.clear();
  const double u = (x(0) - lower_(0)) / h_(0) - 0.5;
  const double v = (x(1) - lower_(1)) / h_(1) - 0.5;
  const int i0 = static_cast<int>(std::floor(u));
  const int j0 = static_cast<int>(std::floor(v));
  const double fu = u - i0, fv = v - j0;
  const double w[2][2] = {{(1 - fu) * (1 - fv), (1 - fu) * fv}, {fu * (1 - fv), fu * fv}};
  for (int di = 0; di < 2; ++di) {
    for (int dj = 0; dj < 2; ++dj) {
      const int i = i0 + di, j = j0 + dj;
      if (i < 0 || j < 0 || i >= nx_ || j >= ny_) continue;
      const int k = index(i, j);
      if (k >= 0 && w[di][dj] != 0.0) out.emplace_back(k, w[di][dj]);
    }
  }
}

double PixelGrid::interpolate(const Eigen::VectorXd& image, const Vec2& x) const {
  std::vector<std::pair<int, double>> w;
  bilinear(x, w);
  double v = 0.0;
  for (const auto& [k, wk] : w) v += wk * image(k);
  return v;
}

Eigen::VectorXd PixelGrid::sample(const ScalarField& f) const {
  Eigen::VectorXd out(unknowns());
  for (int k = 0; k < unknowns(); ++k) {
    const auto [i, j] = cell(k);
    out(k) = f.value(centre(i, j));
  }
  return out;
}

Eigen::VectorXd PixelGrid::to_full(const Eigen::VectorXd& image) const {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(nx_ * ny_);
  for (int k = 0; k < unknowns(); ++k) {
    const auto [i, j] = cell(k);
    full(static_cast<Eigen::Index>(flat(i, j))) = image(k);
  }
  return full;
}

std::vector<std::pair<int, int>> PixelGrid::neighbour_pairs() const {
  std::vector<std::pair<int, int>> pairs;
  for (int j = 0; j < ny_; ++j)
    for (int i = 0; i + 1 < nx_; ++i)
      if (index(i, j) >= 0 && index(i + 1, j) >= 0) pairs.emplace_back(index(i, j), index(i + 1, j));
  for (int j = 0; j + 1 < ny_; ++j)
    for (int i = 0; i < nx_; ++i)
      if (index(i, j) >= 0 && index(i, j + 1) >= 0) pairs.emplace_back(index(i, j), index(i, j + 1));
  return pairs;
}

double l2_error(const PixelGrid& grid, const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth) {
  if (estimate.size() != grid.unknowns() || truth.size() != grid.unknowns()) {
    throw ContractViolation("l2_error: image sizes do not match the grid");
  }
  const double diff = (estimate - truth).norm();
  const double ref = truth.norm();
  return ref > 0.0 ? diff / ref : diff * std::sqrt(grid.cell_area());
}

void write_grid_image(const PixelGrid& grid, const Eigen::VectorXd& image, const std::filesystem::path& csv_path) {
  if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
  const Eigen::VectorXd full = grid.to_full(image);
  std::ofstream csv(csv_path);
  for (int i = 0; i < grid.nx(); ++i) csv << (i ? "," : "") << 'c' << i;
  csv << '\n';
  char buf[40];
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", full(j * grid.nx() + i));
      csv << (i ? "," : "") << buf;
    }
    csv << '\n';
  }
  nlohmann::ordered_json side;
  side["nx"] = grid.nx();
  side["ny"] = grid.ny();
  side["lower"] = {grid.lower()(0), grid.lower()(1)};
  side["upper"] = {grid.upper()(0), grid.upper()(1)};
  side["spacing"] = {grid.spacing()(0), grid.spacing()(1)};
  std::vector<std::vector<int>> mask(static_cast<std::size_t>(grid.ny()));
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) mask[static_cast<std::size_t>(j)].push_back(grid.masked(i, j) ? 1 : 0);
  side["mask"] = mask;
  std::filesystem::path side_path = csv_path;
  side_path.replace_extension(".json");
  std::ofstream(side_path) << side.dump(2) << '\n';
  if (!csv) throw Error("cannot write " + csv_path.string());
}

} // namespace hflow
