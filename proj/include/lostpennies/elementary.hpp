#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline void require_positive(double x, const char* what)
{
    if (!(x > 0.0))
        throw std::domain_error(std::string(what) + ": argument must be positive, got " + std::to_string(x));
}

struct Elementary {
    double omega, c, d, s, beta, gamma, delta;
};

struct Omega {
    double w, wm1;  // omega and omega - 1
};

// omega - 1 = 8x/(omega + 1) keeps small x exact; past 1e300 the 8x would overflow
inline Omega omega_of(double x)
{
    if (x > 1e300) {
        double w = std::sqrt(8.0) * std::sqrt(x);
        return {w, w};
    }
    double w = std::sqrt(8.0 * x + 1.0);
    return {w, 8.0 * x / (w + 1.0)};
}

inline double omega_minus_one(double x) { return omega_of(x).wm1; }

inline double s_fn(double x)
{
    if (std::isinf(x)) return kInf;
    auto [w, wm1] = omega_of(x);
    double t = wm1 / (2.0 * std::sqrt(w + 7.0));
    return t * t;
}

// c(x) - 1 = x(omega+7) / (2(omega+1))
inline double c_minus_one(double x)
{
    if (std::isinf(x)) return kInf;
    double w = omega_of(x).w;
    return x * (0.5 + 3.0 / (w + 1.0));
}

// d(x) - 1 = (omega-1)^2 / (8(omega+1))
inline double d_minus_one(double x)
{
    if (std::isinf(x)) return kInf;
    auto [w, wm1] = omega_of(x);
    double t = wm1 / std::sqrt(8.0 * (w + 1.0));
    return t * t;
}

inline Elementary elementary(double x)
{
    require_positive(x, "elementary");
    Elementary e{};
    e.omega = omega_of(x).w;
    e.c = 1.0 + c_minus_one(x);
    e.d = 1.0 + d_minus_one(x);
    e.s = s_fn(x);
    e.beta = omega_minus_one(x) / 4.0;
    e.gamma = 1.0 / e.c;
    e.delta = 1.0 / e.d;
    return e;
}

// s_{-1}(y) = 1/s(1/y); below 1e-290 the leading term sqrt(2y) is exact to double precision
inline double s_inverse(double y)
{
    require_positive(y, "s_inverse");
    if (std::isinf(y)) return kInf;
    if (y < 1e-290) return std::sqrt(2.0 * y);
    double r = s_fn(1.0 / y);
    return r == 0.0 ? kInf : 1.0 / r;
}

// Forward orbit may underflow to 0; backward overflow is an error.
inline double s_orbit(double x, int k)
{
    require_positive(x, "s_orbit");
    double y = x;
    for (int i = 0; i < k; ++i) y = s_fn(y);
    for (int i = 0; i > k; --i) {
        y = s_inverse(y);
        if (std::isinf(y)) throw std::range_error("s_orbit: backward orbit overflows at step " + std::to_string(-i + 1));
    }
    return y;
}

// Non-throwing orbit step used by series code: inf and 0 propagate.
inline double s_step(double y, int dir)
{
    if (dir > 0) return y == 0.0 ? 0.0 : s_fn(y);
    if (y == 0.0) return 0.0;
    return s_inverse(y);
}

} // namespace lp
