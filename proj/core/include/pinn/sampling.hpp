#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pinn/errors.hpp"

namespace pinn {

enum class Role { Interior, DirichletBoundary, NeumannBoundary, Initial, Data };
const char* role_name(Role r);

/// Immutable set of collocation points. Coordinates are stored axis-major
/// (one contiguous column per axis) so evaluators can gather lanes directly.
class CollocationSet {
 public:
  CollocationSet() = default;
  CollocationSet(int dim, Role role) : dim_(dim), role_(role), cols_(static_cast<std::size_t>(dim)) {}

  int dim() const { return dim_; }
  Role role() const { return role_; }
  std::size_t size() const { return dim_ == 0 ? 0 : cols_[0].size(); }

  std::span<const double> column(int axis) const { return cols_.at(static_cast<std::size_t>(axis)); }
  double coord(std::size_t point, int axis) const { return cols_.at(static_cast<std::size_t>(axis))[point]; }
  std::vector<double> point(std::size_t i) const;

  bool has_normals() const { return !normal_cols_.empty(); }
  double normal(std::size_t point, int axis) const { return normal_cols_.at(static_cast<std::size_t>(axis))[point]; }

  void append(std::span<const double> coords);
  void append_with_normal(std::span<const double> coords, std::span<const double> normal);

  /// Pointers to the coordinate columns, for chunked evaluation.
  std::vector<const double*> column_ptrs() const;

  std::string to_csv(std::span<const std::string> axis_names) const;

 private:
  int dim_ = 0;
  Role role_ = Role::Interior;
  std::vector<std::vector<double>> cols_;
  std::vector<std::vector<double>> normal_cols_;
};

struct AxisSpec {
  double lo = 0.0;
  double hi = 1.0;
  int count = 2;
};

/// Tensor-product grid including endpoints; first axis slowest. Counts must
/// be >= 2 and bounds finite with lo < hi.
CollocationSet uniform_grid(std::span<const AxisSpec> axes, Role role = Role::Interior);

/// Like uniform_grid but an axis may be a single fixed value (count == 1,
/// lo == hi). Used for evaluation slices, not a spec-facing constructor.
CollocationSet grid_with_slices(std::span<const AxisSpec> axes, Role role = Role::Interior);

enum class EdgeSelect { All, XMin, XMax, YMin, YMax, XEdges, YEdges };

/// Boundary nodes of the rectangle spanned by the two spatial axes, crossed
/// with an optional time grid. Corners belong to the x-edges (x-axis
/// priority), so XEdges/YEdges partition the boundary without duplicates.
/// Outward unit normals are attached for Neumann sets.
CollocationSet boundary_subset(const AxisSpec& x_axis, const AxisSpec& y_axis,
                               EdgeSelect which, const AxisSpec* time_axis,
                               Role role);

/// Spatial grid with the time coordinate pinned to exactly t0.
CollocationSet initial_subset(std::span<const AxisSpec> spatial_axes, double t0 = 0.0,
                              Role role = Role::Initial);

/// Deterministic Fisher-Yates permutation of [0, n) for one epoch.
std::vector<std::uint32_t> epoch_permutation(std::size_t n, std::uint64_t seed, int epoch);

/// Shuffled partition of a set's indices into batches for one epoch; every
/// index appears exactly once, the last batch may be short.
std::vector<std::vector<std::uint32_t>> batches(std::size_t n_points, int batch_size,
                                                std::uint64_t seed, int epoch = 0);

/// [begin, end) ranges that split n items into exactly n_slices nearly-equal
/// runs (slice s = [floor(s*n/S), floor((s+1)*n/S))).
std::vector<std::pair<std::size_t, std::size_t>> partition_slices(std::size_t n,
                                                                  std::size_t n_slices);

}  // namespace pinn
