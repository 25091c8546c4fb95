#include "gmf/increment.hpp"

#include <limits>

namespace gmf {

namespace {

std::int64_t mul_checked(std::int64_t a, std::int64_t b, const char* what)
{
    std::int64_t out = 0;
    if (__builtin_mul_overflow(a, b, &out))
        throw std::overflow_error(std::string("expand_increment_operator: ") + what
                                  + " exceeds the 64-bit coefficient bound (|e(k)| < 2^63)");
    return out;
}

std::int64_t add_checked(std::int64_t a, std::int64_t b)
{
    std::int64_t out = 0;
    if (__builtin_add_overflow(a, b, &out))
        throw std::overflow_error("expand_increment_operator: coefficient sum exceeds the 64-bit bound (|e(k)| < 2^63)");
    return out;
}

} // namespace

int IncrementSpec::n_gamma() const
{
    long n = 0;
    for (int i = 0; i < r(); ++i) n += static_cast<long>(mu[i]) * s[i] * d[i];
    if (n > std::numeric_limits<int>::max()) throw std::overflow_error("IncrementSpec: n_gamma overflows int");
    return static_cast<int>(n);
}

int IncrementSpec::total_order() const
{
    int t = 0;
    for (int v : d) t += v;
    return t;
}

void IncrementSpec::validate() const
{
    if (mu.empty()) throw std::invalid_argument("IncrementSpec: need at least one seasonal pattern");
    if (s.size() != mu.size() || d.size() != mu.size())
        throw std::invalid_argument("IncrementSpec: mu, s and d must have equal length");
    for (int i = 0; i < r(); ++i) {
        if (mu[i] <= 0 || s[i] <= 0 || d[i] <= 0)
            throw std::invalid_argument("IncrementSpec: entries of mu, s, d must be positive integers (pattern "
                                        + std::to_string(i) + ")");
    }
    if (T < 1) throw std::invalid_argument("IncrementSpec: period T must be positive");
    (void)n_gamma();
}

std::int64_t binomial_checked(int n, int k)
{
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    std::int64_t c = 1;
    for (int i = 1; i <= k; ++i) {
        // c * (n - k + i) is divisible by i after the multiplication
        c = mul_checked(c, n - k + i, "binomial coefficient") / i;
    }
    return c;
}

IncrementPolynomial expand_increment_operator(const IncrementSpec& spec)
{
    spec.validate();
    std::vector<std::int64_t> acc{1};
    for (int i = 0; i < spec.r(); ++i) {
        const int step = spec.mu[i] * spec.s[i];
        const int order = spec.d[i];
        std::vector<std::int64_t> next(acc.size() + static_cast<std::size_t>(step) * order, 0);
        for (int l = 0; l <= order; ++l) {
            std::int64_t b = binomial_checked(order, l);
            if (l % 2 == 1) b = -b;
            for (std::size_t j = 0; j < acc.size(); ++j) {
                if (acc[j] == 0) continue;
                std::size_t idx = j + static_cast<std::size_t>(step) * l;
                next[idx] = add_checked(next[idx], mul_checked(acc[j], b, "binomial product"));
            }
        }
        acc = std::move(next);
    }
    return IncrementPolynomial{std::move(acc)};
}

} // namespace gmf
