#pragma once

// Banded LU factorization with partial pivoting (LAPACK gbtrf layout idea,
// row-major storage of the band).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace micro_reynolds {

/// General band matrix with kl sub- and ku super-diagonals. Storage reserves
/// kl extra super-diagonals for fill-in from row interchanges.
class BandMatrix {
public:
    BandMatrix(std::size_t n, std::size_t kl, std::size_t ku)
        : n_(n), kl_(kl), ku_(ku), width_(2 * kl + ku + 1), data_(n * width_, 0.0) {}

    std::size_t size() const noexcept { return n_; }
    std::size_t lower() const noexcept { return kl_; }
    std::size_t upper() const noexcept { return ku_; }

    /// Entry (i, j) with j - i in [-kl, ku + kl].
    double& operator()(std::size_t i, std::size_t j) { return data_[i * width_ + (j + kl_ - i)]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * width_ + (j + kl_ - i)]; }

    bool in_band(std::size_t i, std::size_t j) const {
        return j + kl_ >= i && j <= i + ku_;
    }

    /// y = A x - b accumulated in extended precision, on the original band.
    std::vector<long double> residual(const std::vector<double>& x, const std::vector<double>& b) const {
        std::vector<long double> y(n_, 0.0L);
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t j0 = i >= kl_ ? i - kl_ : 0;
            const std::size_t j1 = std::min(n_ - 1, i + ku_);
            long double s = -static_cast<long double>(b[i]);
            for (std::size_t j = j0; j <= j1; ++j) {
                s += static_cast<long double>((*this)(i, j)) * static_cast<long double>(x[j]);
            }
            y[i] = s;
        }
        return y;
    }

    /// Solves A x = b followed by one step of iterative refinement with an
    /// extended-precision residual. A itself is left untouched.
    std::vector<double> solve(const std::vector<double>& b) const {
        BandMatrix lu = *this;
        std::vector<std::size_t> pivots(n_);
        lu.factor(pivots);
        auto x = lu.substitute(pivots, b);
        const auto r = residual(x, b);
        std::vector<double> rd(n_);
        for (std::size_t i = 0; i < n_; ++i) rd[i] = static_cast<double>(r[i]);
        const auto d = lu.substitute(pivots, std::move(rd));
        for (std::size_t i = 0; i < n_; ++i) x[i] -= d[i];
        return x;
    }

private:
    void factor(std::vector<std::size_t>& pivots) {
        BandMatrix& lu = *this;
        const std::size_t ku_fill = ku_ + kl_;
        for (std::size_t k = 0; k < n_; ++k) {
            const std::size_t last_row = std::min(n_ - 1, k + kl_);
            std::size_t piv = k;
            double best = std::abs(lu(k, k));
            for (std::size_t i = k + 1; i <= last_row; ++i) {
                if (std::abs(lu(i, k)) > best) {
                    best = std::abs(lu(i, k));
                    piv = i;
                }
            }
            if (best == 0.0) throw SingularDiscreteSystem("zero pivot in banded LU");
            const std::size_t last_col = std::min(n_ - 1, k + ku_fill);
            pivots[k] = piv;
            if (piv != k) {
                for (std::size_t j = k; j <= last_col; ++j) std::swap(lu(k, j), lu(piv, j));
            }
            const double inv = 1.0 / lu(k, k);
            for (std::size_t i = k + 1; i <= last_row; ++i) {
                const double m = lu(i, k) * inv;
                lu(i, k) = m;
                if (m == 0.0) continue;
                for (std::size_t j = k + 1; j <= last_col; ++j) lu(i, j) -= m * lu(k, j);
            }
        }
    }

    std::vector<double> substitute(const std::vector<std::size_t>& pivots, std::vector<double> b) const {
        const BandMatrix& lu = *this;
        const std::size_t ku_fill = ku_ + kl_;
        for (std::size_t k = 0; k < n_; ++k) {
            if (pivots[k] != k) std::swap(b[k], b[pivots[k]]);
            const std::size_t last_row = std::min(n_ - 1, k + kl_);
            for (std::size_t i = k + 1; i <= last_row; ++i) b[i] -= lu(i, k) * b[k];
        }
        for (std::size_t kk = n_; kk-- > 0;) {
            const std::size_t last_col = std::min(n_ - 1, kk + ku_fill);
            double s = b[kk];
            for (std::size_t j = kk + 1; j <= last_col; ++j) s -= lu(kk, j) * b[j];
            b[kk] = s / lu(kk, kk);
        }
        return b;
    }

    std::size_t n_, kl_, ku_, width_;
    std::vector<double> data_;
};

} // namespace micro_reynolds
