#pragma once
// Dense double-double storage in split (structure-of-arrays) layout: the hi
// and lo words live in separate contiguous buffers so rows can be fed
// straight to the SIMD kernels.

#include <cstddef>
#include <span>
#include <vector>

#include "ks/dd.hpp"

namespace ks {

class DDVector {
public:
    DDVector() = default;
    explicit DDVector(std::size_t n) : hi_(n, 0.0), lo_(n, 0.0) {}

    std::size_t size() const { return hi_.size(); }
    bool empty() const { return hi_.empty(); }

    DD operator[](std::size_t i) const { return {hi_[i], lo_[i]}; }
    void set(std::size_t i, DD v) {
        hi_[i] = v.hi;
        lo_[i] = v.lo;
    }

    double* hi() { return hi_.data(); }
    double* lo() { return lo_.data(); }
    const double* hi() const { return hi_.data(); }
    const double* lo() const { return lo_.data(); }

    std::vector<double> to_double() const;

    bool operator==(const DDVector&) const = default;

private:
    std::vector<double> hi_;
    std::vector<double> lo_;
};

class DDMatrix {
public:
    DDMatrix() = default;
    DDMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), hi_(rows * cols, 0.0), lo_(rows * cols, 0.0) {}

    static DDMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    DD operator()(std::size_t r, std::size_t c) const {
        std::size_t k = r * cols_ + c;
        return {hi_[k], lo_[k]};
    }
    void set(std::size_t r, std::size_t c, DD v) {
        std::size_t k = r * cols_ + c;
        hi_[k] = v.hi;
        lo_[k] = v.lo;
    }

    double* row_hi(std::size_t r) { return hi_.data() + r * cols_; }
    double* row_lo(std::size_t r) { return lo_.data() + r * cols_; }
    const double* row_hi(std::size_t r) const { return hi_.data() + r * cols_; }
    const double* row_lo(std::size_t r) const { return lo_.data() + r * cols_; }

    // y = A x using the dispatched dot kernel.
    DDVector multiply(const DDVector& x) const;

    bool is_symmetric() const;

    bool operator==(const DDMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> hi_;
    std::vector<double> lo_;
};

DDMatrix operator-(const DDMatrix& a, const DDMatrix& b);

}  // namespace ks
