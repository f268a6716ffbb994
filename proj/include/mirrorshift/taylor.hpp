#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace mirrorshift {

/// Truncated Taylor jet: coeffs[k] is the k-th Taylor coefficient f^(k)(x0)/k!.
/// Arithmetic propagates all coefficients exactly (up to rounding), so the jet
/// of a composite expression carries its derivatives with no truncation noise.
template <typename T, std::size_t Order>
struct Taylor {
    std::array<T, Order + 1> c{};

    constexpr Taylor() = default;
    constexpr Taylor(T v) { c[0] = v; }

    static constexpr Taylor variable(T v) {
        Taylor t;
        t.c[0] = v;
        if constexpr (Order >= 1) t.c[1] = T(1);
        return t;
    }

    constexpr T value() const { return c[0]; }

    /// k-th derivative: k! * c[k].
    constexpr T derivative(std::size_t k) const {
        T f = T(1);
        for (std::size_t i = 2; i <= k; ++i) f *= T(i);
        return k <= Order ? c[k] * f : T(0);
    }

    Taylor operator-() const {
        Taylor r;
        for (std::size_t k = 0; k <= Order; ++k) r.c[k] = -c[k];
        return r;
    }
    Taylor& operator+=(const Taylor& o) {
        for (std::size_t k = 0; k <= Order; ++k) c[k] += o.c[k];
        return *this;
    }
    Taylor& operator-=(const Taylor& o) {
        for (std::size_t k = 0; k <= Order; ++k) c[k] -= o.c[k];
        return *this;
    }
    friend Taylor operator+(Taylor a, const Taylor& b) { return a += b; }
    friend Taylor operator-(Taylor a, const Taylor& b) { return a -= b; }
    friend Taylor operator+(Taylor a, T s) { a.c[0] += s; return a; }
    friend Taylor operator+(T s, Taylor a) { a.c[0] += s; return a; }
    friend Taylor operator-(Taylor a, T s) { a.c[0] -= s; return a; }
    friend Taylor operator-(T s, const Taylor& a) { return -a + s; }

    friend Taylor operator*(const Taylor& a, const Taylor& b) {
        Taylor r;
        for (std::size_t k = 0; k <= Order; ++k) {
            T acc = T(0);
            for (std::size_t j = 0; j <= k; ++j) acc += a.c[j] * b.c[k - j];
            r.c[k] = acc;
        }
        return r;
    }
    friend Taylor operator*(Taylor a, T s) {
        for (std::size_t k = 0; k <= Order; ++k) a.c[k] *= s;
        return a;
    }
    friend Taylor operator*(T s, Taylor a) { return a * s; }

    friend Taylor operator/(const Taylor& a, const Taylor& b) {
        if (b.c[0] == T(0)) throw std::domain_error("taylor: division by zero");
        Taylor q;
        for (std::size_t k = 0; k <= Order; ++k) {
            T acc = a.c[k];
            for (std::size_t j = 0; j < k; ++j) acc -= q.c[j] * b.c[k - j];
            q.c[k] = acc / b.c[0];
        }
        return q;
    }
    friend Taylor operator/(Taylor a, T s) {
        for (std::size_t k = 0; k <= Order; ++k) a.c[k] /= s;
        return a;
    }
    friend Taylor operator/(T s, const Taylor& b) { return Taylor(s) / b; }
};

template <typename T, std::size_t N>
Taylor<T, N> exp(const Taylor<T, N>& a) {
    using std::exp;
    Taylor<T, N> y;
    y.c[0] = exp(a.c[0]);
    for (std::size_t k = 1; k <= N; ++k) {
        T acc = T(0);
        for (std::size_t j = 1; j <= k; ++j) acc += T(j) * a.c[j] * y.c[k - j];
        y.c[k] = acc / T(k);
    }
    return y;
}

template <typename T, std::size_t N>
Taylor<T, N> log(const Taylor<T, N>& a) {
    using std::log;
    if (!(a.c[0] > T(0))) throw std::domain_error("taylor: log of non-positive value");
    Taylor<T, N> y;
    y.c[0] = log(a.c[0]);
    for (std::size_t k = 1; k <= N; ++k) {
        T acc = T(k) * a.c[k];
        for (std::size_t j = 1; j < k; ++j) acc -= T(j) * y.c[j] * a.c[k - j];
        y.c[k] = acc / (T(k) * a.c[0]);
    }
    return y;
}

template <typename T, std::size_t N>
Taylor<T, N> sqrt(const Taylor<T, N>& a) {
    using std::sqrt;
    if (!(a.c[0] > T(0))) throw std::domain_error("taylor: sqrt of non-positive value");
    Taylor<T, N> y;
    y.c[0] = sqrt(a.c[0]);
    for (std::size_t k = 1; k <= N; ++k) {
        T acc = a.c[k];
        for (std::size_t j = 1; j < k; ++j) acc -= y.c[j] * y.c[k - j];
        y.c[k] = acc / (T(2) * y.c[0]);
    }
    return y;
}

namespace detail {
template <typename T, std::size_t N>
void sincos(const Taylor<T, N>& a, Taylor<T, N>& s, Taylor<T, N>& c) {
    using std::cos;
    using std::sin;
    s.c[0] = sin(a.c[0]);
    c.c[0] = cos(a.c[0]);
    for (std::size_t k = 1; k <= N; ++k) {
        T sa = T(0), ca = T(0);
        for (std::size_t j = 1; j <= k; ++j) {
            sa += T(j) * a.c[j] * c.c[k - j];
            ca += T(j) * a.c[j] * s.c[k - j];
        }
        s.c[k] = sa / T(k);
        c.c[k] = -ca / T(k);
    }
}
} // namespace detail

template <typename T, std::size_t N>
Taylor<T, N> sin(const Taylor<T, N>& a) {
    Taylor<T, N> s, c;
    detail::sincos(a, s, c);
    return s;
}

template <typename T, std::size_t N>
Taylor<T, N> cos(const Taylor<T, N>& a) {
    Taylor<T, N> s, c;
    detail::sincos(a, s, c);
    return c;
}

template <typename T, std::size_t N>
Taylor<T, N> tanh(const Taylor<T, N>& a) {
    using std::tanh;
    // t' = a'(1 - t^2); the square is rebuilt progressively so w[k-j] only
    // ever reads t-coefficients of index < k.
    Taylor<T, N> t, w;
    t.c[0] = tanh(a.c[0]);
    w.c[0] = t.c[0] * t.c[0];
    for (std::size_t k = 1; k <= N; ++k) {
        T acc = T(0);
        for (std::size_t j = 1; j <= k; ++j) {
            T one_minus_w = (k == j) ? (T(1) - w.c[0]) : -w.c[k - j];
            acc += T(j) * a.c[j] * one_minus_w;
        }
        t.c[k] = acc / T(k);
        T wk = T(0);
        for (std::size_t j = 0; j <= k; ++j) wk += t.c[j] * t.c[k - j];
        w.c[k] = wk;
    }
    return t;
}

template <typename T, std::size_t N>
Taylor<T, N> abs(const Taylor<T, N>& a) {
    return a.c[0] < T(0) ? -a : a;
}

/// Integer power by repeated squaring; exact for polynomial jets and valid
/// for negative bases, unlike exp(n*log(a)).
template <typename T, std::size_t N>
Taylor<T, N> powi(Taylor<T, N> a, long long n) {
    if (n < 0) return T(1) / powi(a, -n);
    Taylor<T, N> r(T(1));
    while (n > 0) {
        if (n & 1) r = r * a;
        a = a * a;
        n >>= 1;
    }
    return r;
}

inline double powi(double a, long long n) {
    if (n < 0) return 1.0 / powi(a, -n);
    double r = 1.0;
    while (n > 0) {
        if (n & 1) r *= a;
        a *= a;
        n >>= 1;
    }
    return r;
}

template <typename T, std::size_t N>
Taylor<T, N> pow(const Taylor<T, N>& a, T r) {
    if (!(a.c[0] > T(0))) throw std::domain_error("taylor: pow of non-positive base");
    Taylor<T, N> y;
    using std::pow;
    y.c[0] = pow(a.c[0], r);
    for (std::size_t k = 1; k <= N; ++k) {
        T acc = T(0);
        for (std::size_t j = 1; j <= k; ++j) acc += (r * T(j) - T(k - j)) * a.c[j] * y.c[k - j];
        y.c[k] = acc / (T(k) * a.c[0]);
    }
    return y;
}

using Jet4 = Taylor<double, 4>;

} // namespace mirrorshift
