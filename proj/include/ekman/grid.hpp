#pragma once

#include <cmath>
#include <string>

#include "ekman/errors.hpp"

namespace ekman {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

// Collocation grid on [0,2pi)^2 with integer wavenumbers. The 2/3 rule keeps
// |k|_inf <= floor(N/3), which makes quadratically nonlinear terms alias-free.
struct FourierGrid {
    int n = 0;
    int kmax_dealias = 0;

    double x(int j) const { return two_pi * j / n; }
    double dx() const { return two_pi / n; }
    // quadrature weight of one grid cell
    double cell() const { return dx() * dx(); }

    bool operator==(const FourierGrid& o) const { return n == o.n; }
    bool operator!=(const FourierGrid& o) const { return n != o.n; }
};

inline FourierGrid make_grid(int n) {
    if (n % 2 != 0)
        throw config_error("make_grid: N must be even (got " + std::to_string(n) + ")");
    if (n < 16 || n > 4096)
        throw config_error("make_grid: N must lie in [16, 4096] (got " +
                           std::to_string(n) + ")");
    return FourierGrid{n, n / 3};
}

} // namespace ekman
