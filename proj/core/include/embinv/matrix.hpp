#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace embinv {

// Dense vector of 64-bit floats.
struct Vector {
  std::vector<double> data;

  Vector() = default;
  explicit Vector(std::size_t dim, double fill = 0.0) : data(dim, fill) {}
  Vector(std::initializer_list<double> init) : data(init) {}
  explicit Vector(std::vector<double> values) : data(std::move(values)) {}

  std::size_t dim() const { return data.size(); }
  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  double norm() const;
  bool all_finite() const;
};

// Dense row-major matrix of 64-bit floats. Embedding matrices store one
// sample per row.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // rows * cols, row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> values);

  static Matrix identity(std::size_t n);

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

  Vector row_vector(std::size_t i) const;
  void set_row(std::size_t i, const Vector& v);

  double frobenius_norm() const;
  bool all_finite() const;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix subtract(const Matrix& a, const Matrix& b);

double dot(const Vector& a, const Vector& b);
double dot(std::span<const double> a, std::span<const double> b);

// Masked mean of token embeddings: rows of `token_embeddings` are token
// vectors, `mask` holds 0/1 per token. Throws std::invalid_argument on an
// all-zero mask or non-0/1 entries.
Vector mean_pool(const Matrix& token_embeddings, const Vector& mask);

// v / ||v||. Throws std::invalid_argument on a zero vector.
Vector l2_normalize(const Vector& v);

}  // namespace embinv
