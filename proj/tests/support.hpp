#pragma once

#include "cocycle/map_dsl.hpp"

#include <functional>
#include <numbers>
#include <random>

namespace testing_support {

using cocycle::Point;
using C = std::complex<double>;

// trapezoidal Cauchy integral for the partial derivative along coordinate b
inline C cauchy_partial(const std::function<C(const Point&)>& f, const Point& z, int b, double r = 1e-2, int m = 24) {
    C acc = 0;
    for (int k = 0; k < m; ++k) {
        C w = std::polar(r, 2 * std::numbers::pi * k / m);
        Point p = z;
        p(b) += w;
        acc += f(p) / w;
    }
    return acc / double(m);
}

inline Point random_point(std::mt19937_64& rng, int n, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Point p(n);
    for (int i = 0; i < n; ++i) p(i) = {u(rng), u(rng)};
    return p;
}

// coordinates bounded away from zero, for maps singular on the axes
inline Point annulus_point(std::mt19937_64& rng, int n, double lo = 0.3, double hi = 0.7) {
    std::uniform_real_distribution<double> r(lo, hi), a(0, 2 * std::numbers::pi);
    Point p(n);
    for (int i = 0; i < n; ++i) p(i) = std::polar(r(rng), a(rng));
    return p;
}

}  // namespace testing_support
