#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace mussel::roots {

/// Bisection on a bracket [lo, hi] with f(lo), f(hi) of opposite sign.
template <class F>
double bisect(F&& f, double lo, double hi, double tol, int max_iter = 200) {
    double flo = f(lo);
    for (int it = 0; it < max_iter && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = f(mid);
        if (fmid == 0.0) return mid;
        if ((fmid < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Roots of f on the open interval (lo, hi): uniform sign scan over `subdivisions`
/// interior cells, each sign change refined by bisection to `tol`.
/// Endpoints are never evaluated, so f may be singular there.
template <class F>
std::vector<double> sign_scan(F&& f, double lo, double hi, std::size_t subdivisions, double tol) {
    std::vector<double> found;
    if (!(hi > lo) || subdivisions < 2) return found;
    const double step = (hi - lo) / static_cast<double>(subdivisions);
    double x_prev = lo + step;
    double f_prev = f(x_prev);
    for (std::size_t i = 2; i < subdivisions; ++i) {
        const double x = lo + step * static_cast<double>(i);
        const double fx = f(x);
        if (f_prev == 0.0) {
            found.push_back(x_prev);
        } else if (std::isfinite(f_prev) && std::isfinite(fx) && fx != 0.0 && (fx < 0.0) != (f_prev < 0.0)) {
            found.push_back(bisect(f, x_prev, x, tol));
        }
        x_prev = x;
        f_prev = fx;
    }
    if (f_prev == 0.0) found.push_back(x_prev);
    return found;
}

} // namespace mussel::roots
