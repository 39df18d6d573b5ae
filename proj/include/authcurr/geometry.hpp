#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace authcurr {

using Vector = std::vector<double>;

// Row-major matrix of N vectors of dimension D with a parallel list of unique
// identifiers (document or centroid ids).
class VectorMatrix {
 public:
  VectorMatrix() = default;
  explicit VectorMatrix(std::size_t dim) : dim_(dim) {}

  void add_row(std::string id, std::span<const double> values);
  void reserve(std::size_t rows);

  std::size_t rows() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  bool empty() const { return ids_.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<double>& data() const { return data_; }

  // Position of `id`, or rows() when absent. Linear scan.
  std::size_t find(const std::string& id) const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
  std::vector<std::string> ids_;
};

double dot(std::span<const double> u, std::span<const double> v);
double norm(std::span<const double> u);

// Cosine similarity clamped to [-1, 1]. Throws DataError on a dimension
// mismatch or a zero-norm input.
double cosine(std::span<const double> u, std::span<const double> v);

Vector l2_normalize(std::span<const double> u);

struct KMeansOptions {
  std::size_t max_iters = 100;
};

struct KMeansResult {
  std::vector<Vector> centroids;
  std::vector<std::size_t> assignment;
  double inertia = 0.0;
  std::size_t iterations_run = 0;
  // Inertia after each assignment step; monotone non-increasing.
  std::vector<double> inertia_history;
};

// Euclidean Lloyd's k-means. Initialization is greedy farthest-point: the
// first centre is a seeded uniform pick, every later centre is the point
// farthest from its nearest chosen centre (ties to the lowest index).
// Iterates until the assignment stops changing or max_iters is reached.
// An emptied cluster is reseeded at the point farthest from its centroid.
KMeansResult kmeans(const VectorMatrix& points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options = {});

struct Neighbor {
  std::size_t row = 0;
  double similarity = 0.0;
};

// Exact top-k by cosine; descending similarity, ties by ascending row id.
std::vector<Neighbor> topk_by_cosine(std::span<const double> query,
                                     const VectorMatrix& matrix, std::size_t k);

// Same ordering, for callers that already hold unit-norm rows and query.
std::vector<Neighbor> topk_by_dot(std::span<const double> unit_query,
                                  const VectorMatrix& unit_rows, std::size_t k);

// Copy of `matrix` with every row scaled to unit norm.
VectorMatrix normalized_rows(const VectorMatrix& matrix);

}  // namespace authcurr
