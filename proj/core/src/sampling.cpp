#include "pinn/sampling.hpp"

#include <cmath>
#include <random>

#include "detail_math.hpp"
#include "pinn/csv.hpp"

namespace pinn {

const char* role_name(Role r) {
  switch (r) {
    case Role::Interior: return "interior";
    case Role::DirichletBoundary: return "dirichlet-boundary";
    case Role::NeumannBoundary: return "neumann-boundary";
    case Role::Initial: return "initial";
    case Role::Data: return "data";
  }
  return "?";
}

std::vector<double> CollocationSet::point(std::size_t i) const {
  std::vector<double> p(static_cast<std::size_t>(dim_));
  for (int a = 0; a < dim_; ++a) p[static_cast<std::size_t>(a)] = cols_[static_cast<std::size_t>(a)][i];
  return p;
}

void CollocationSet::append(std::span<const double> coords) {
  if (static_cast<int>(coords.size()) != dim_) throw Error("point dimension mismatch");
  for (int a = 0; a < dim_; ++a) cols_[static_cast<std::size_t>(a)].push_back(coords[static_cast<std::size_t>(a)]);
}

void CollocationSet::append_with_normal(std::span<const double> coords,
                                        std::span<const double> normal) {
  append(coords);
  if (normal_cols_.empty()) normal_cols_.resize(normal.size());
  if (normal_cols_.size() != normal.size()) throw Error("normal dimension mismatch");
  for (std::size_t a = 0; a < normal.size(); ++a) normal_cols_[a].push_back(normal[a]);
}

std::vector<const double*> CollocationSet::column_ptrs() const {
  std::vector<const double*> ptrs(static_cast<std::size_t>(dim_));
  for (int a = 0; a < dim_; ++a) ptrs[static_cast<std::size_t>(a)] = cols_[static_cast<std::size_t>(a)].data();
  return ptrs;
}

std::string CollocationSet::to_csv(std::span<const std::string> axis_names) const {
  std::string out;
  for (int a = 0; a < dim_; ++a) {
    if (a) out += ',';
    out += a < static_cast<int>(axis_names.size()) ? axis_names[static_cast<std::size_t>(a)]
                                                   : "axis" + std::to_string(a);
  }
  out += ",role\n";
  for (std::size_t i = 0; i < size(); ++i) {
    for (int a = 0; a < dim_; ++a) {
      if (a) out += ',';
      out += fmt_double(coord(i, a));
    }
    out += ',';
    out += role_name(role_);
    out += '\n';
  }
  return out;
}

namespace {

void check_axis(const AxisSpec& axis, bool allow_singleton) {
  if (!std::isfinite(axis.lo) || !std::isfinite(axis.hi)) throw BadBounds("non-finite axis bounds");
  if (allow_singleton && axis.count == 1) {
    if (axis.lo != axis.hi) throw BadBounds("singleton axis needs lo == hi");
    return;
  }
  if (axis.count < 2) throw BadBounds("axis needs at least 2 points");
  if (!(axis.lo < axis.hi)) throw BadBounds("axis needs lo < hi");
}

std::vector<double> axis_values(const AxisSpec& axis) {
  std::vector<double> v(static_cast<std::size_t>(axis.count));
  if (axis.count == 1) {
    v[0] = axis.lo;
    return v;
  }
  const double step = (axis.hi - axis.lo) / static_cast<double>(axis.count - 1);
  for (int i = 0; i < axis.count; ++i) v[static_cast<std::size_t>(i)] = axis.lo + step * i;
  v.front() = axis.lo;
  v.back() = axis.hi;  // endpoints exact
  return v;
}

CollocationSet product_grid(std::span<const AxisSpec> axes, Role role, bool allow_singleton) {
  if (axes.empty()) throw BadBounds("grid needs at least one axis");
  for (const AxisSpec& a : axes) check_axis(a, allow_singleton);
  std::vector<std::vector<double>> values;
  values.reserve(axes.size());
  std::size_t total = 1;
  for (const AxisSpec& a : axes) {
    values.push_back(axis_values(a));
    total *= static_cast<std::size_t>(a.count);
  }
  CollocationSet set(static_cast<int>(axes.size()), role);
  std::vector<double> p(axes.size());
  std::vector<std::size_t> ix(axes.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    for (std::size_t a = 0; a < axes.size(); ++a) p[a] = values[a][ix[a]];
    set.append(p);
    for (std::size_t a = axes.size(); a-- > 0;) {  // first axis slowest
      if (++ix[a] < values[a].size()) break;
      ix[a] = 0;
    }
  }
  return set;
}

}  // namespace

CollocationSet uniform_grid(std::span<const AxisSpec> axes, Role role) {
  return product_grid(axes, role, /*allow_singleton=*/false);
}

CollocationSet grid_with_slices(std::span<const AxisSpec> axes, Role role) {
  return product_grid(axes, role, /*allow_singleton=*/true);
}

CollocationSet boundary_subset(const AxisSpec& x_axis, const AxisSpec& y_axis,
                               EdgeSelect which, const AxisSpec* time_axis, Role role) {
  check_axis(x_axis, false);
  check_axis(y_axis, false);
  if (time_axis != nullptr) check_axis(*time_axis, false);
  const std::vector<double> xs = axis_values(x_axis);
  const std::vector<double> ys = axis_values(y_axis);
  const std::vector<double> ts = time_axis != nullptr ? axis_values(*time_axis) : std::vector<double>{};
  const int dim = time_axis != nullptr ? 3 : 2;
  CollocationSet set(dim, role);

  const bool want_x = which == EdgeSelect::All || which == EdgeSelect::XEdges ||
                      which == EdgeSelect::XMin || which == EdgeSelect::XMax;
  const bool want_y = which == EdgeSelect::All || which == EdgeSelect::YEdges ||
                      which == EdgeSelect::YMin || which == EdgeSelect::YMax;

  auto emit = [&](double x, double y, std::span<const double> normal) {
    auto add = [&](std::span<const double> coords) {
      if (role == Role::NeumannBoundary)
        set.append_with_normal(coords, normal);
      else
        set.append(coords);
    };
    if (time_axis == nullptr) {
      const double p[2] = {x, y};
      add(std::span<const double>(p, 2));
      return;
    }
    for (double t : ts) {
      const double p[3] = {x, y, t};
      add(std::span<const double>(p, 3));
    }
  };

  if (want_x) {
    const double nx_lo[2] = {-1.0, 0.0}, nx_hi[2] = {1.0, 0.0};
    if (which != EdgeSelect::XMax)
      for (double y : ys) emit(x_axis.lo, y, nx_lo);
    if (which != EdgeSelect::XMin)
      for (double y : ys) emit(x_axis.hi, y, nx_hi);
  }
  if (want_y) {
    // Corners carry x-axis priority and never appear on y-edge sets.
    const double ny_lo[2] = {0.0, -1.0}, ny_hi[2] = {0.0, 1.0};
    for (double x : xs) {
      if (x == x_axis.lo || x == x_axis.hi) continue;
      if (which != EdgeSelect::YMax) emit(x, y_axis.lo, ny_lo);
    }
    for (double x : xs) {
      if (x == x_axis.lo || x == x_axis.hi) continue;
      if (which != EdgeSelect::YMin) emit(x, y_axis.hi, ny_hi);
    }
  }
  return set;
}

CollocationSet initial_subset(std::span<const AxisSpec> spatial_axes, double t0, Role role) {
  CollocationSet spatial = uniform_grid(spatial_axes, role);
  CollocationSet set(spatial.dim() + 1, role);
  std::vector<double> p(static_cast<std::size_t>(spatial.dim() + 1));
  for (std::size_t i = 0; i < spatial.size(); ++i) {
    for (int a = 0; a < spatial.dim(); ++a) p[static_cast<std::size_t>(a)] = spatial.coord(i, a);
    p.back() = t0;
    set.append(p);
  }
  return set;
}

std::vector<std::uint32_t> epoch_permutation(std::size_t n, std::uint64_t seed, int epoch) {
  std::vector<std::uint32_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(i);
  std::mt19937_64 rng(detail::mix64(seed ^ detail::mix64(static_cast<std::uint64_t>(epoch) + 1)));
  // Hand-rolled Fisher-Yates; std::shuffle is implementation-defined.
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

std::vector<std::vector<std::uint32_t>> batches(std::size_t n_points, int batch_size,
                                                std::uint64_t seed, int epoch) {
  if (batch_size < 1) throw Error("batch size must be >= 1");
  std::vector<std::uint32_t> perm = epoch_permutation(n_points, seed, epoch);
  std::vector<std::vector<std::uint32_t>> out;
  for (std::size_t start = 0; start < n_points; start += static_cast<std::size_t>(batch_size)) {
    std::size_t end = std::min(n_points, start + static_cast<std::size_t>(batch_size));
    out.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(start),
                     perm.begin() + static_cast<std::ptrdiff_t>(end));
  }
  if (out.empty()) out.emplace_back();
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> partition_slices(std::size_t n,
                                                                  std::size_t n_slices) {
  if (n_slices == 0) throw Error("need at least one slice");
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(n_slices);
  for (std::size_t s = 0; s < n_slices; ++s)
    out.emplace_back(s * n / n_slices, (s + 1) * n / n_slices);
  return out;
}

}  // namespace pinn
