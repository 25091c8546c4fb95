#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gmf {

/// Seasonal pattern (mu, s, d) of a multiplicative increment operator
/// prod_i (1 - B^{mu_i s_i})^{d_i}, plus the period T of the blocked sequence.
struct IncrementSpec {
    std::vector<int> mu;
    std::vector<int> s;
    std::vector<int> d;
    int T = 1;

    int r() const { return static_cast<int>(mu.size()); }
    int n_gamma() const;
    int total_order() const;
    void validate() const;
};

/// Integer coefficients e(0..n) of the expanded operator sum_k e(k) B^k.
struct IncrementPolynomial {
    std::vector<std::int64_t> coeffs;

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    std::int64_t operator[](int k) const { return coeffs[static_cast<std::size_t>(k)]; }
    /// Zero outside 0..degree.
    std::int64_t at(int k) const { return (k < 0 || k > degree()) ? 0 : coeffs[static_cast<std::size_t>(k)]; }
};

std::int64_t binomial_checked(int n, int k);

IncrementPolynomial expand_increment_operator(const IncrementSpec& spec);

/// A finite stretch of a (vector) sequence: values[i] sits at time first + i.
template <typename Scalar>
struct TimeSeries {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    long first = 0;
    std::vector<Vector> values;

    long last() const { return first + static_cast<long>(values.size()) - 1; }
    bool empty() const { return values.empty(); }
    const Vector& at(long m) const { return values[static_cast<std::size_t>(m - first)]; }
};

/// output(m) = sum_k e(k) series(m - k) for every m whose history is covered.
template <typename Scalar>
TimeSeries<Scalar> apply_increment(const TimeSeries<Scalar>& series, const IncrementPolynomial& poly)
{
    const long n = poly.degree();
    if (static_cast<long>(series.values.size()) <= n) {
        throw std::invalid_argument("apply_increment: insufficient history; first computable index is "
                                    + std::to_string(series.first + n) + " but the series ends at "
                                    + std::to_string(series.last()));
    }
    TimeSeries<Scalar> out;
    out.first = series.first + n;
    const long count = static_cast<long>(series.values.size()) - n;
    out.values.reserve(static_cast<std::size_t>(count));
    for (long m = out.first; m < out.first + count; ++m) {
        typename TimeSeries<Scalar>::Vector acc = TimeSeries<Scalar>::Vector::Zero(series.values.front().size());
        for (long k = 0; k <= n; ++k) {
            if (poly[static_cast<int>(k)] != 0)
                acc += static_cast<Scalar>(static_cast<double>(poly[static_cast<int>(k)])) * series.at(m - k);
        }
        out.values.push_back(std::move(acc));
    }
    return out;
}

template <typename Scalar>
TimeSeries<Scalar> apply_increment(const TimeSeries<Scalar>& series, const IncrementSpec& spec)
{
    return apply_increment(series, expand_increment_operator(spec));
}

/// xi_p(m) = xi(mT + p), p = 0..T-1. Only blocks lying fully inside the input are produced.
template <typename Scalar>
TimeSeries<Scalar> block_sequence(const TimeSeries<Scalar>& scalar, int T)
{
    if (T < 1) throw std::invalid_argument("block_sequence: period must be positive");
    auto floor_div = [](long a, long b) { return a >= 0 ? a / b : -((-a + b - 1) / b); };
    const long m0 = -floor_div(-scalar.first, T);           // ceil(first / T)
    const long m1 = floor_div(scalar.last() + 1, T) - 1;    // last complete block
    TimeSeries<Scalar> out;
    out.first = m0;
    for (long m = m0; m <= m1; ++m) {
        typename TimeSeries<Scalar>::Vector v(T);
        for (int p = 0; p < T; ++p) v(p) = scalar.at(m * T + p)(0);
        out.values.push_back(std::move(v));
    }
    return out;
}

template <typename Scalar>
TimeSeries<Scalar> unblock_sequence(const TimeSeries<Scalar>& blocked, int T)
{
    TimeSeries<Scalar> out;
    out.first = blocked.first * T;
    for (const auto& v : blocked.values) {
        if (v.size() != T) throw std::invalid_argument("unblock_sequence: block dimension differs from period");
        for (int p = 0; p < T; ++p) {
            typename TimeSeries<Scalar>::Vector s(1);
            s(0) = v(p);
            out.values.push_back(std::move(s));
        }
    }
    return out;
}

/// a_p(m) = a(mT + p) for mT + p <= M, zero otherwise; N = floor(M / T).
template <typename Scalar>
std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> lift_functional(const std::vector<Scalar>& weights, int T)
{
    if (T < 1) throw std::invalid_argument("lift_functional: period must be positive");
    if (weights.empty()) throw std::invalid_argument("lift_functional: need at least one weight");
    const int M = static_cast<int>(weights.size()) - 1;
    const int N = M / T;
    std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> out(static_cast<std::size_t>(N + 1),
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(T));
    for (int k = 0; k <= M; ++k) out[static_cast<std::size_t>(k / T)](k % T) = weights[static_cast<std::size_t>(k)];
    return out;
}

} // namespace gmf
