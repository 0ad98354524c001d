#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace purify {

// Dense row-major tensor of 64-bit reals. Rank 1 (vectors) and rank 2
// (row batches / matrices) cover everything this project needs.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape_);
    Tensor(std::vector<std::size_t> shape_, std::vector<double> data_);

    static Tensor zeros(std::initializer_list<std::size_t> dims);
    static Tensor vector(std::vector<double> values);

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t rows() const;
    std::size_t cols() const;

    double& at(std::size_t i, std::size_t j);
    double at(std::size_t i, std::size_t j) const;
    std::span<double> row(std::size_t i);
    std::span<const double> row(std::size_t i) const;

    // Extract/insert a single row as a rank-1 tensor.
    Tensor row_copy(std::size_t i) const;
    void set_row(std::size_t i, const Tensor& v);

    std::string shape_str() const;
    bool all_finite() const;
};

// Throws ShapeError naming both shapes when they differ.
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

// In debug builds, throws NumericError if any entry is non-finite.
void debug_check_finite(const Tensor& t, const char* what);

// y = a*x + y, element-wise over equal-shaped tensors.
void axpy(double a, const Tensor& x, Tensor& y);
Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(double s, const Tensor& a);

void scale_inplace(Tensor& t, double s);
void clamp_inplace(Tensor& t, double lo, double hi);

double dot(std::span<const double> a, std::span<const double> b);
double squared_l2(const Tensor& t);
double l2_norm(const Tensor& t);
double linf_norm(const Tensor& t);

// C[m x n] = A[m x k] * B[k x n]
Tensor matmul(const Tensor& a, const Tensor& b);
// C[m x n] = A[m x k] * B[n x k]^T  (the MLP forward pattern: X * W^T)
Tensor matmul_nt(const Tensor& a, const Tensor& b);
// C[k x n] = A[m x k]^T * B[m x n]  (the weight-gradient pattern)
Tensor matmul_tn(const Tensor& a, const Tensor& b);

// Adds a rank-1 bias to every row of a rank-2 tensor.
void add_row_bias(Tensor& t, const Tensor& bias);

}  // namespace purify
