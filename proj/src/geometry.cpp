#include "authcurr/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "authcurr/error.hpp"

namespace authcurr {

void VectorMatrix::add_row(std::string id, std::span<const double> values) {
  if (ids_.empty() && dim_ == 0) dim_ = values.size();
  if (values.size() != dim_) {
    throw DataError("row '" + id + "' has dimension " + std::to_string(values.size()) +
                    ", expected " + std::to_string(dim_));
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ids_.push_back(std::move(id));
}

void VectorMatrix::reserve(std::size_t rows) {
  data_.reserve(rows * dim_);
  ids_.reserve(rows);
}

std::size_t VectorMatrix::find(const std::string& id) const {
  auto it = std::find(ids_.begin(), ids_.end(), id);
  return static_cast<std::size_t>(it - ids_.begin());
}

double dot(std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

double norm(std::span<const double> u) { return std::sqrt(dot(u, u)); }

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw DataError("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                    std::to_string(v.size()) + ")");
  }
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu == 0.0 || nv == 0.0) throw DataError("cosine: zero-norm input");
  return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

Vector l2_normalize(std::span<const double> u) {
  const double n = norm(u);
  if (n == 0.0) throw DataError("l2_normalize: zero-norm input");
  Vector out(u.begin(), u.end());
  for (double& x : out) x /= n;
  return out;
}

namespace {

double squared_distance(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Nearest centre for every point; returns total squared distance.
double assign_points(const VectorMatrix& points, const std::vector<double>& centres,
                     std::size_t k, std::vector<std::size_t>& assignment,
                     std::vector<double>& distance) {
  const std::size_t dim = points.dim();
  const double* data = points.data().data();
  double inertia = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const double* p = data + i * dim;
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      const double d = squared_distance(p, centres.data() + c * dim, dim);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    assignment[i] = best;
    distance[i] = best_d;
    inertia += best_d;
  }
  return inertia;
}

}  // namespace

KMeansResult kmeans(const VectorMatrix& points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options) {
  const std::size_t n = points.rows();
  const std::size_t dim = points.dim();
  if (n == 0) throw DataError("kmeans: empty input");
  if (k < 1 || k > n) {
    throw ConfigError("kmeans: k=" + std::to_string(k) + " outside [1, " + std::to_string(n) +
                      "]");
  }
  const double* data = points.data().data();

  std::vector<double> centres(k * dim);
  {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::size_t chosen = pick(rng);
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    for (std::size_t c = 0; c < k; ++c) {
      std::copy_n(data + chosen * dim, dim, centres.begin() + c * dim);
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        nearest[i] = std::min(nearest[i], squared_distance(data + i * dim, data + chosen * dim, dim));
        if (nearest[i] > far_d) {
          far_d = nearest[i];
          far = i;
        }
      }
      chosen = far;
    }
  }

  KMeansResult result;
  std::vector<std::size_t> assignment(n, 0);
  std::vector<std::size_t> previous;
  std::vector<double> distance(n, 0.0);
  std::vector<double> sums(k * dim);
  std::vector<std::size_t> counts(k);

  while (result.iterations_run < options.max_iters) {
    const double inertia = assign_points(points, centres, k, assignment, distance);
    ++result.iterations_run;
    result.inertia_history.push_back(inertia);
    result.inertia = inertia;
    if (assignment == previous) break;
    previous = assignment;
    if (result.iterations_run == options.max_iters) break;

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = assignment[i];
      ++counts[c];
      const double* p = data + i * dim;
      for (std::size_t d = 0; d < dim; ++d) sums[c * dim + d] += p[d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Reseed at the point farthest from its own centroid.
        std::size_t far = 0;
        for (std::size_t i = 1; i < n; ++i) {
          if (distance[i] > distance[far]) far = i;
        }
        std::copy_n(data + far * dim, dim, centres.begin() + c * dim);
        distance[far] = 0.0;
        continue;
      }
      for (std::size_t d = 0; d < dim; ++d) {
        centres[c * dim + d] = sums[c * dim + d] / static_cast<double>(counts[c]);
      }
    }
  }

  result.assignment = std::move(assignment);
  result.centroids.reserve(k);
  for (std::size_t c = 0; c < k; ++c) {
    result.centroids.emplace_back(centres.begin() + c * dim, centres.begin() + (c + 1) * dim);
  }
  return result;
}

VectorMatrix normalized_rows(const VectorMatrix& matrix) {
  VectorMatrix out(matrix.dim());
  out.reserve(matrix.rows());
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    out.add_row(matrix.id(i), l2_normalize(matrix.row(i)));
  }
  return out;
}

std::vector<Neighbor> topk_by_dot(std::span<const double> unit_query,
                                  const VectorMatrix& unit_rows, std::size_t k) {
  if (unit_query.size() != unit_rows.dim()) {
    throw DataError("topk: query dimension " + std::to_string(unit_query.size()) +
                    " does not match matrix dimension " + std::to_string(unit_rows.dim()));
  }
  if (k < 1) throw ConfigError("topk: k must be at least 1");
  const std::size_t n = unit_rows.rows();
  std::vector<Neighbor> all(n);
  for (std::size_t i = 0; i < n; ++i) {
    all[i] = {i, std::clamp(dot(unit_query, unit_rows.row(i)), -1.0, 1.0)};
  }
  const auto& ids = unit_rows.ids();
  auto before = [&ids](const Neighbor& a, const Neighbor& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return ids[a.row] < ids[b.row];
  };
  const std::size_t keep = std::min(k, n);
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                    before);
  all.resize(keep);
  return all;
}

std::vector<Neighbor> topk_by_cosine(std::span<const double> query,
                                     const VectorMatrix& matrix, std::size_t k) {
  if (matrix.empty()) throw DataError("topk: empty matrix");
  if (query.size() != matrix.dim()) {
    throw DataError("topk: query dimension " + std::to_string(query.size()) +
                    " does not match matrix dimension " + std::to_string(matrix.dim()));
  }
  return topk_by_dot(l2_normalize(query), normalized_rows(matrix), k);
}

}  // namespace authcurr
