#include <algorithm>
#include <numeric>

#include <gtest/gtest.h>

#include "incidence/field.hpp"
#include "incidence/matrix.hpp"
#include "support.hpp"

using namespace incidence;
using testing_support::mod;

namespace {

const std::uint32_t small_primes[] = {3, 5, 7, 11, 13};

// Leibniz determinant over plain integers, reduced mod q at the end.
std::uint64_t det_mod(const std::vector<std::vector<std::int64_t>>& a, std::uint32_t q)
{
    const auto n = a.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::int64_t acc = 0;
    do {
        std::int64_t term = 1;
        for (std::size_t i = 0; i < n; ++i) term = static_cast<std::int64_t>(mod(term * a[i][perm[i]], q));
        std::size_t inversions = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) inversions += perm[i] > perm[j];
        acc += inversions % 2 ? -term : term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return mod(acc, q);
}

std::vector<std::vector<std::size_t>> subsets(std::size_t n, std::size_t k)
{
    std::vector<std::vector<std::size_t>> out;
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + k, true);
    do {
        std::vector<std::size_t> s;
        for (std::size_t i = 0; i < n; ++i)
            if (pick[i]) s.push_back(i);
        out.push_back(s);
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return out;
}

// Size of the largest nonvanishing minor.
std::size_t minor_rank(const Matrix& m, std::uint32_t q)
{
    for (std::size_t k = std::min(m.rows(), m.cols()); k > 0; --k)
        for (const auto& rs : subsets(m.rows(), k))
            for (const auto& cs : subsets(m.cols(), k)) {
                std::vector<std::vector<std::int64_t>> a(k, std::vector<std::int64_t>(k));
                for (std::size_t i = 0; i < k; ++i)
                    for (std::size_t j = 0; j < k; ++j) a[i][j] = m(rs[i], cs[j]);
                if (det_mod(a, q)) return k;
            }
    return 0;
}

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, std::uint32_t q)
{
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = static_cast<Fe>(rng.below(q));
    return m;
}

} // namespace

TEST(Field, RejectsBadModuli)
{
    for (std::uint32_t q : {0u, 1u, 2u, 4u, 9u, 15u, 65536u, 65537u}) EXPECT_THROW(PrimeField{q}, invalid_modulus) << q;
    EXPECT_NO_THROW(PrimeField{65521});
}

TEST(Field, SmallCases)
{
    PrimeField f5(5), f7(7);
    EXPECT_EQ(f5.apply(FieldOp::mul, 2, 3), 1u);
    for (Fe x = 0; x < 7; ++x) EXPECT_EQ(f7.apply(FieldOp::mul, 0, x), 0u);
    EXPECT_EQ(f5.apply(FieldOp::div, 1, 2), 3u);
    EXPECT_THROW(f5.div(1, 0), division_by_zero);
}

TEST(Field, ExhaustiveAgainstIntegerArithmetic)
{
    for (auto q : small_primes) {
        PrimeField f(q);
        for (Fe a = 0; a < q; ++a)
            for (Fe b = 0; b < q; ++b) {
                EXPECT_EQ(f.add(a, b), mod(std::int64_t(a) + b, q));
                EXPECT_EQ(f.sub(a, b), mod(std::int64_t(a) - b, q));
                EXPECT_EQ(f.mul(a, b), mod(std::int64_t(a) * b, q));
                EXPECT_EQ(f.add(a, b), f.add(b, a));
                EXPECT_EQ(f.mul(a, b), f.mul(b, a));
                if (b) {
                    EXPECT_EQ(f.mul(f.div(a, b), b), a);
                    // inverse by search
                    Fe inv = 0;
                    for (Fe t = 1; t < q; ++t)
                        if (t * b % q == 1) inv = t;
                    EXPECT_EQ(f.inv(b), inv);
                }
            }
    }
}

TEST(Field, LegendreMatchesSquares)
{
    for (auto q : small_primes) {
        PrimeField f(q);
        std::set<Fe> squares;
        for (Fe x = 1; x < q; ++x) squares.insert(x * x % q);
        for (Fe a = 1; a < q; ++a) EXPECT_EQ(f.legendre(a), squares.count(a) ? 1u : q - 1) << a;
        EXPECT_EQ(f.legendre(0), 0u);
    }
}

TEST(Matrix, RrefSmallCases)
{
    PrimeField f5(5);
    auto id = rref(Matrix::identity(2), f5);
    EXPECT_EQ(id.reduced, Matrix::identity(2));
    EXPECT_EQ(id.pivots, (std::vector<std::size_t>{0, 1}));

    auto r = rref(Matrix::from_rows({{2, 4}, {1, 2}}), f5);
    EXPECT_EQ(r.reduced, Matrix::from_rows({{1, 2}, {0, 0}}));
    EXPECT_EQ(r.pivots, (std::vector<std::size_t>{0}));
}

TEST(Matrix, RankMatchesMinorOracle)
{
    Rng rng(11);
    PrimeField f7(7);
    for (int trial = 0; trial < 60; ++trial) {
        auto m = random_matrix(rng, 4, 6, 7);
        // force low rank now and then
        if (trial % 3 == 0)
            for (std::size_t c = 0; c < 6; ++c) m(3, c) = f7.add(m(0, c), f7.mul(2, m(1, c)));
        if (trial % 5 == 0)
            for (std::size_t c = 0; c < 6; ++c) m(2, c) = f7.mul(3, m(1, c));
        EXPECT_EQ(rank(m, f7), minor_rank(m, 7));
    }
}

TEST(Matrix, RrefIsReducedAndPreservesRowSpace)
{
    Rng rng(5);
    PrimeField f(11);
    for (int trial = 0; trial < 40; ++trial) {
        auto m = random_matrix(rng, 3 + trial % 3, 5, 11);
        auto r = rref(m, f);
        for (std::size_t i = 0; i < r.rank(); ++i) {
            EXPECT_EQ(r.reduced(i, r.pivots[i]), 1u);
            for (std::size_t k = 0; k < r.reduced.rows(); ++k)
                if (k != i) EXPECT_EQ(r.reduced(k, r.pivots[i]), 0u);
        }
        // stacking the original on the reduced form does not raise the rank
        std::vector<Vec> stacked;
        for (std::size_t i = 0; i < m.rows(); ++i) stacked.emplace_back(m.row(i).begin(), m.row(i).end());
        for (std::size_t i = 0; i < r.rank(); ++i)
            stacked.emplace_back(r.reduced.row(i).begin(), r.reduced.row(i).end());
        EXPECT_EQ(rank(Matrix::from_rows(stacked), f), r.rank());
    }
}

TEST(Matrix, KernelSmallCases)
{
    PrimeField f5(5);
    EXPECT_TRUE(kernel_basis(Matrix::identity(3), f5).empty());
    auto k = kernel_basis(Matrix::from_rows({{1, 1}}), f5);
    ASSERT_EQ(k.size(), 1u);
    EXPECT_EQ(k[0], (Vec{1, 4}));
}

TEST(Matrix, KernelBasisIsAnnihilatedAndComplete)
{
    Rng rng(3);
    PrimeField f(11);
    for (int trial = 0; trial < 50; ++trial) {
        auto m = random_matrix(rng, 3, 8, 11);
        if (trial % 4 == 0)
            for (std::size_t c = 0; c < 8; ++c) m(2, c) = m(0, c);
        auto basis = kernel_basis(m, f);
        EXPECT_EQ(basis.size(), 8 - minor_rank(m, 11));
        for (const auto& v : basis) {
            // m v by hand
            for (std::size_t r = 0; r < m.rows(); ++r) {
                std::uint64_t acc = 0;
                for (std::size_t c = 0; c < 8; ++c) acc += std::uint64_t(m(r, c)) * v[c];
                EXPECT_EQ(acc % 11, 0u);
            }
            auto lead = std::find_if(v.begin(), v.end(), [](Fe x) { return x != 0; });
            ASSERT_NE(lead, v.end());
            EXPECT_EQ(*lead, 1u);
        }
        EXPECT_EQ(rank(Matrix::from_rows(basis.empty() ? std::vector<Vec>{Vec(8, 0)} : basis), f), basis.size());
    }
}

TEST(Matrix, KernelOfTinyMatrixCountsSolutions)
{
    // |ker| = q^{nullity}: count solutions by enumeration.
    Rng rng(8);
    PrimeField f(3);
    for (int trial = 0; trial < 30; ++trial) {
        auto m = random_matrix(rng, 2, 4, 3);
        std::size_t solutions = 0;
        for (const auto& v : testing_support::all_points(3, 4)) {
            bool zero = true;
            for (std::size_t r = 0; r < 2; ++r) {
                std::uint64_t acc = 0;
                for (std::size_t c = 0; c < 4; ++c) acc += std::uint64_t(m(r, c)) * v[c];
                zero &= acc % 3 == 0;
            }
            solutions += zero;
        }
        std::size_t expect = 1;
        for (std::size_t i = 0; i < kernel_basis(m, f).size(); ++i) expect *= 3;
        EXPECT_EQ(solutions, expect);
    }
}
