#include "authcurr/projection.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <random>

#include "authcurr/error.hpp"

namespace authcurr {

ProjectionModel::ProjectionModel(Matrix w)
    : input_dim(w.cols), output_dim(w.rows), weight(std::move(w)) {
  if (output_dim != input_dim / 2) {
    throw DataError("projection weight must be floor(D/2) x D, got " + std::to_string(output_dim) +
                    " x " + std::to_string(input_dim));
  }
}

ProjectionModel ProjectionModel::initialize(std::size_t input_dim, std::uint64_t seed) {
  if (input_dim < 2) throw ConfigError("projection needs input dimension >= 2");
  Matrix w(input_dim / 2, input_dim);
  const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-bound, bound);
  for (double& x : w.data) x = uniform(rng);
  return ProjectionModel(std::move(w));
}

Vector project(const ProjectionModel& model, std::span<const double> base) {
  if (base.size() != model.input_dim) {
    throw DataError("project: input dimension " + std::to_string(base.size()) +
                    " does not match model dimension " + std::to_string(model.input_dim));
  }
  Vector out(model.output_dim);
  for (std::size_t r = 0; r < model.output_dim; ++r) out[r] = dot(model.weight.row(r), base);
  return out;
}

Matrix project_rows(const ProjectionModel& model, const Matrix& base) {
  if (base.cols != model.input_dim) {
    throw DataError("project: input dimension " + std::to_string(base.cols) +
                    " does not match model dimension " + std::to_string(model.input_dim));
  }
  Matrix out(base.rows, model.output_dim);
  for (std::size_t i = 0; i < base.rows; ++i) {
    for (std::size_t r = 0; r < model.output_dim; ++r) {
      out(i, r) = dot(model.weight.row(r), base.row(i));
    }
  }
  return out;
}

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> bytes;
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes.data(), 8);
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), 8);
  if (!in) throw DataError("checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ProjectionModel& model,
                     const CheckpointMeta& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  put_u64(out, model.input_dim);
  put_u64(out, model.output_dim);
  put_u64(out, meta.epoch);
  put_u64(out, meta.seed);
  put_f64(out, meta.temperature);
  put_f64(out, meta.learning_rate);
  for (double w : model.weight.data) put_f64(out, w);
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

ProjectionModel load_checkpoint(const std::filesystem::path& path, CheckpointMeta* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read checkpoint " + path.string());
  const std::uint64_t d = get_u64(in);
  const std::uint64_t half = get_u64(in);
  CheckpointMeta m;
  m.epoch = get_u64(in);
  m.seed = get_u64(in);
  m.temperature = get_f64(in);
  m.learning_rate = get_f64(in);
  if (d < 2 || half != d / 2 || d > (1u << 20)) {
    throw DataError("checkpoint header has inconsistent dimensions");
  }
  Matrix w(half, d);
  for (double& x : w.data) {
    x = get_f64(in);
    if (!std::isfinite(x)) throw DataError("checkpoint holds a non-finite weight");
  }
  if (meta) *meta = m;
  return ProjectionModel(std::move(w));
}

}  // namespace authcurr
