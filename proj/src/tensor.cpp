#include "purify/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "purify/errors.hpp"

namespace purify {

namespace {
std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}
}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape_)
    : shape(std::move(shape_)), data(shape_product(shape), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape_, std::vector<double> data_)
    : shape(std::move(shape_)), data(std::move(data_)) {
    if (shape_product(shape) != data.size()) {
        throw ShapeError("tensor data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_str());
    }
}

Tensor Tensor::zeros(std::initializer_list<std::size_t> dims) {
    return Tensor(std::vector<std::size_t>(dims));
}

Tensor Tensor::vector(std::vector<double> values) {
    std::vector<std::size_t> shape{values.size()};
    return Tensor(std::move(shape), std::move(values));
}

std::size_t Tensor::rows() const {
    if (shape.empty()) throw ShapeError("rows() on rank-0 tensor");
    return rank() == 1 ? 1 : shape[0];
}

std::size_t Tensor::cols() const {
    if (shape.empty()) throw ShapeError("cols() on rank-0 tensor");
    return rank() == 1 ? shape[0] : shape[1];
}

double& Tensor::at(std::size_t i, std::size_t j) { return data[i * cols() + j]; }
double Tensor::at(std::size_t i, std::size_t j) const { return data[i * cols() + j]; }

std::span<double> Tensor::row(std::size_t i) {
    return std::span<double>(data.data() + i * cols(), cols());
}

std::span<const double> Tensor::row(std::size_t i) const {
    return std::span<const double>(data.data() + i * cols(), cols());
}

Tensor Tensor::row_copy(std::size_t i) const {
    auto r = row(i);
    return Tensor::vector(std::vector<double>(r.begin(), r.end()));
}

void Tensor::set_row(std::size_t i, const Tensor& v) {
    if (v.size() != cols()) {
        throw ShapeError("set_row: row length " + v.shape_str() + " vs tensor " + shape_str());
    }
    std::copy(v.data.begin(), v.data.end(), data.begin() + i * cols());
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? " x " : "") << shape[i];
    os << "]";
    return os.str();
}

bool Tensor::all_finite() const {
    return std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (a.shape != b.shape) {
        throw ShapeError(std::string(what) + ": shape mismatch " + a.shape_str() + " vs " +
                         b.shape_str());
    }
}

void debug_check_finite(const Tensor& t, const char* what) {
#ifndef NDEBUG
    if (!t.all_finite()) {
        throw NumericError(std::string(what) + ": non-finite value in tensor " + t.shape_str());
    }
#else
    (void)t;
    (void)what;
#endif
}

void axpy(double a, const Tensor& x, Tensor& y) {
    require_same_shape(x, y, "axpy");
    const double* xs = x.data.data();
    double* ys = y.data.data();
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) ys[i] += a * xs[i];
}

Tensor operator+(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "operator+");
    Tensor out = a;
    axpy(1.0, b, out);
    return out;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "operator-");
    Tensor out = a;
    axpy(-1.0, b, out);
    return out;
}

Tensor operator*(double s, const Tensor& a) {
    Tensor out = a;
    scale_inplace(out, s);
    return out;
}

void scale_inplace(Tensor& t, double s) {
    for (double& v : t.data) v *= s;
}

void clamp_inplace(Tensor& t, double lo, double hi) {
    for (double& v : t.data) v = std::clamp(v, lo, hi);
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double squared_l2(const Tensor& t) { return dot(t.data, t.data); }

double l2_norm(const Tensor& t) { return std::sqrt(squared_l2(t)); }

double linf_norm(const Tensor& t) {
    double m = 0.0;
    for (double v : t.data) m = std::max(m, std::abs(v));
    return m;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    if (b.rows() != k) {
        throw ShapeError("matmul: inner dims " + a.shape_str() + " vs " + b.shape_str());
    }
    Tensor c({m, n});
    // ikj order keeps the B row contiguous in the inner loop.
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a.data.data() + i * k;
        double* crow = c.data.data() + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double av = arow[kk];
            const double* brow = b.data.data() + kk * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    if (b.cols() != k) {
        throw ShapeError("matmul_nt: inner dims " + a.shape_str() + " vs " + b.shape_str());
    }
    Tensor c({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a.data.data() + i * k;
        double* crow = c.data.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            crow[j] = dot(std::span<const double>(arow, k),
                          std::span<const double>(b.data.data() + j * k, k));
        }
    }
    return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    if (b.rows() != m) {
        throw ShapeError("matmul_tn: outer dims " + a.shape_str() + " vs " + b.shape_str());
    }
    Tensor c({k, n});
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a.data.data() + i * k;
        const double* brow = b.data.data() + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double av = arow[kk];
            double* crow = c.data.data() + kk * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

void add_row_bias(Tensor& t, const Tensor& bias) {
    const std::size_t n = t.cols();
    if (bias.size() != n) {
        throw ShapeError("add_row_bias: bias " + bias.shape_str() + " vs rows of " + t.shape_str());
    }
    for (std::size_t i = 0; i < t.rows(); ++i) {
        double* row = t.data.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) row[j] += bias.data[j];
    }
}

}  // namespace purify
