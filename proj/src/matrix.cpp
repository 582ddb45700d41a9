#include "ks/matrix.hpp"

#include <stdexcept>

#include "ks/simd.hpp"

namespace ks {

std::vector<double> DDVector::to_double() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = hi_[i] + lo_[i];
    return out;
}

DDMatrix DDMatrix::identity(std::size_t n) {
    DDMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, DD(1.0));
    return m;
}

DDVector DDMatrix::multiply(const DDVector& x) const {
    if (x.size() != cols_) throw std::invalid_argument("DDMatrix::multiply: dimension mismatch");
    const auto& k = simd::active();
    DDVector y(rows_);
    for (std::size_t r = 0; r < rows_; ++r) y.set(r, k.dot(row_hi(r), row_lo(r), x.hi(), x.lo(), cols_));
    return y;
}

bool DDMatrix::is_symmetric() const {
    if (rows_ != cols_) return false;
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = i + 1; j < cols_; ++j)
            if ((*this)(i, j) != (*this)(j, i)) return false;
    return true;
}

DDMatrix operator-(const DDMatrix& a, const DDMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("DDMatrix subtraction: shape mismatch");
    DDMatrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out.set(i, j, a(i, j) - b(i, j));
    return out;
}

}  // namespace ks
