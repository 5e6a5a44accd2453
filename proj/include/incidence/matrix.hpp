#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "field.hpp"

namespace incidence {

using Vec = std::vector<Fe>;

/// Dense row-major matrix over F_q.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<Fe> data)
        : rows_(rows), cols_(cols), data_(std::move(data))
    {
        if (data_.size() != rows_ * cols_)
            throw error("matrix entry count does not match rows x cols");
    }

    static Matrix from_rows(const std::vector<Vec>& rows)
    {
        if (rows.empty()) return {};
        Matrix m(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_) throw error("ragged matrix rows");
            std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
        }
        return m;
    }

    static Matrix identity(std::size_t n)
    {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    Fe& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    Fe operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<Fe> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const Fe> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    const std::vector<Fe>& data() const noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Fe> data_;
};

struct RrefResult {
    Matrix reduced;
    std::vector<std::size_t> pivots;

    std::size_t rank() const noexcept { return pivots.size(); }
};

/// Gauss-Jordan elimination. Pivot rows are scaled to a leading 1 and every
/// pivot column is cleared above and below, so the result is the unique
/// reduced row echelon form.
inline RrefResult rref(Matrix m, const PrimeField& f)
{
    std::vector<std::size_t> pivots;
    std::size_t lead_row = 0;
    for (std::size_t col = 0; col < m.cols() && lead_row < m.rows(); ++col) {
        std::size_t sel = lead_row;
        while (sel < m.rows() && m(sel, col) == 0) ++sel;
        if (sel == m.rows()) continue;
        if (sel != lead_row)
            for (std::size_t c = 0; c < m.cols(); ++c) std::swap(m(sel, c), m(lead_row, c));

        Fe scale = f.inv(m(lead_row, col));
        for (std::size_t c = col; c < m.cols(); ++c) m(lead_row, c) = f.mul(m(lead_row, c), scale);

        for (std::size_t r = 0; r < m.rows(); ++r) {
            if (r == lead_row || m(r, col) == 0) continue;
            Fe factor = m(r, col);
            for (std::size_t c = col; c < m.cols(); ++c)
                m(r, c) = f.sub(m(r, c), f.mul(factor, m(lead_row, c)));
        }
        pivots.push_back(col);
        ++lead_row;
    }
    return {std::move(m), std::move(pivots)};
}

inline std::size_t rank(const Matrix& m, const PrimeField& f) { return rref(m, f).rank(); }

// Scales v so that its first nonzero entry is 1. Zero vectors are untouched.
inline void normalize_leading(Vec& v, const PrimeField& f)
{
    for (Fe x : v) {
        if (x == 0) continue;
        if (x == 1) return;
        Fe s = f.inv(x);
        for (Fe& y : v) y = f.mul(y, s);
        return;
    }
}

/// Basis of the right null space {v : m v = 0}.
///
/// One vector per free column, free columns in ascending order; each vector
/// is rescaled so its first nonzero entry is 1.
inline std::vector<Vec> kernel_basis(const Matrix& m, const PrimeField& f)
{
    auto [red, pivots] = rref(m, f);
    std::vector<bool> is_pivot(m.cols(), false);
    for (auto p : pivots) is_pivot[p] = true;

    std::vector<Vec> basis;
    for (std::size_t free = 0; free < m.cols(); ++free) {
        if (is_pivot[free]) continue;
        Vec v(m.cols(), 0);
        v[free] = 1;
        for (std::size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = f.neg(red(i, free));
        normalize_leading(v, f);
        basis.push_back(std::move(v));
    }
    return basis;
}

inline Vec multiply(const Matrix& m, std::span<const Fe> v, const PrimeField& f)
{
    if (v.size() != m.cols()) throw error("matrix-vector dimension mismatch");
    Vec out(m.rows(), 0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        std::uint64_t acc = 0;
        auto row = m.row(r);
        for (std::size_t c = 0; c < m.cols(); ++c) acc += static_cast<std::uint64_t>(row[c]) * v[c];
        out[r] = static_cast<Fe>(acc % f.modulus());
    }
    return out;
}

} // namespace incidence
