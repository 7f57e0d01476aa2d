#include "embinv/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace embinv {

double Vector::norm() const {
  double s = 0.0;
  for (double x : data) s += x * x;
  return std::sqrt(s);
}

bool Vector::all_finite() const {
  for (double x : data) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != rows * cols) {
    throw std::invalid_argument("matrix data length does not match rows * cols");
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector Matrix::row_vector(std::size_t i) const {
  Vector v(cols);
  const auto r = row(i);
  for (std::size_t j = 0; j < cols; ++j) v[j] = r[j];
  return v;
}

void Matrix::set_row(std::size_t i, const Vector& v) {
  if (v.dim() != cols) throw std::invalid_argument("row dimension mismatch");
  auto r = row(i);
  for (std::size_t j = 0; j < cols; ++j) r[j] = v[j];
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double x : data) s += x * x;
  return std::sqrt(s);
}

bool Matrix::all_finite() const {
  for (double x : data) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul dimension mismatch");
  Matrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.data.data() + i * a.cols;
    double* crow = c.data.data() + i * c.cols;
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.data.data() + k * b.cols;
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  }
  return t;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw std::invalid_argument("subtract dimension mismatch");
  }
  Matrix c(a.rows, a.cols);
  for (std::size_t i = 0; i < a.data.size(); ++i) c.data[i] = a.data[i] - b.data[i];
  return c;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double dot(const Vector& a, const Vector& b) {
  return dot(std::span<const double>(a.data), std::span<const double>(b.data));
}

Vector mean_pool(const Matrix& token_embeddings, const Vector& mask) {
  if (mask.dim() != token_embeddings.rows) {
    throw std::invalid_argument("mask length does not match token count");
  }
  double selected = 0.0;
  for (double m : mask.data) {
    if (m != 0.0 && m != 1.0) {
      throw std::invalid_argument("mask entries must be 0 or 1");
    }
    selected += m;
  }
  if (selected == 0.0) {
    throw std::invalid_argument("all-zero attention mask: mean pooling would divide by zero");
  }
  Vector pooled(token_embeddings.cols);
  for (std::size_t j = 0; j < token_embeddings.rows; ++j) {
    if (mask[j] == 0.0) continue;
    const auto r = token_embeddings.row(j);
    for (std::size_t k = 0; k < token_embeddings.cols; ++k) pooled[k] += r[k];
  }
  for (double& x : pooled.data) x /= selected;
  return pooled;
}

Vector l2_normalize(const Vector& v) {
  const double n = v.norm();
  if (n == 0.0) throw std::invalid_argument("cannot normalize a zero vector");
  Vector out(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) out[i] = v[i] / n;
  return out;
}

}  // namespace embinv
