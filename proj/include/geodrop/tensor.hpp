#pragma once

#include <cmath>
#include <cstddef>

#include "geodrop/matrix.hpp"

namespace geodrop {

// Cubic array for connection coefficients: element (a,b,c) reads as the
// coefficient with upper index a and lower indices (b,c).
class Tensor3 {
  public:
    Tensor3() = default;
    explicit Tensor3(std::size_t dim) : d_(dim), data_(dim * dim * dim, 0.0) {}

    std::size_t dim() const { return d_; }
    double& operator()(std::size_t a, std::size_t b, std::size_t c) {
        return data_[(a * d_ + b) * d_ + c];
    }
    double operator()(std::size_t a, std::size_t b, std::size_t c) const {
        return data_[(a * d_ + b) * d_ + c];
    }
    Vec& raw() { return data_; }
    const Vec& raw() const { return data_; }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::fabs(v));
        return m;
    }

  private:
    std::size_t d_ = 0;
    Vec data_;
};

// Quartic array for the curvature tensor: element (r,i,j,k) is the
// component with upper index r and lower indices (i,j,k).
class Tensor4 {
  public:
    Tensor4() = default;
    explicit Tensor4(std::size_t dim)
        : d_(dim), data_(dim * dim * dim * dim, 0.0) {}

    std::size_t dim() const { return d_; }
    double& operator()(std::size_t r, std::size_t i, std::size_t j,
                       std::size_t k) {
        return data_[((r * d_ + i) * d_ + j) * d_ + k];
    }
    double operator()(std::size_t r, std::size_t i, std::size_t j,
                      std::size_t k) const {
        return data_[((r * d_ + i) * d_ + j) * d_ + k];
    }
    Vec& raw() { return data_; }
    const Vec& raw() const { return data_; }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::fabs(v));
        return m;
    }

  private:
    std::size_t d_ = 0;
    Vec data_;
};

} // namespace geodrop
