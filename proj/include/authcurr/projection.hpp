#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "authcurr/geometry.hpp"

namespace authcurr {

// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

// Bias-free linear map from D inputs to floor(D/2) outputs.
struct ProjectionModel {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  Matrix weight;  // output_dim x input_dim

  ProjectionModel() = default;
  explicit ProjectionModel(Matrix w);

  // Uniform in [-1/sqrt(D), 1/sqrt(D)] from `seed`.
  static ProjectionModel initialize(std::size_t input_dim, std::uint64_t seed);

  bool operator==(const ProjectionModel& other) const {
    return input_dim == other.input_dim && output_dim == other.output_dim &&
           weight.data == other.weight.data;
  }
};

Vector project(const ProjectionModel& model, std::span<const double> base);
// Projects every row of `base` (N x D) to N x D/2.
Matrix project_rows(const ProjectionModel& model, const Matrix& base);

struct CheckpointMeta {
  std::uint64_t epoch = 0;
  std::uint64_t seed = 0;
  double temperature = 0.0;
  double learning_rate = 0.0;
};

// Header of four little-endian uint64 (D, D/2, epoch, seed) and two float64
// (temperature, learning rate), then the weights row-major as float64.
void save_checkpoint(const std::filesystem::path& path, const ProjectionModel& model,
                     const CheckpointMeta& meta);
ProjectionModel load_checkpoint(const std::filesystem::path& path, CheckpointMeta* meta = nullptr);

}  // namespace authcurr
