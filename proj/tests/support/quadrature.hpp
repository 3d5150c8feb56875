#pragma once

// Test-only adaptive quadrature used as an independent oracle.

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

namespace testsupport {

/// Adaptive Gauss-Kronrod (61-point) on [a, b]; infinite limits are mapped
/// internally by Boost.
template <class F>
double integrate(F f, double a, double b, double tol = 1e-13) {
    double error = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, tol, &error);
}

/// Tanh-sinh on a finite [a, b]; tolerates integrable endpoint singularities.
template <class F>
double integrate_endpoint_singular(F f, double a, double b, double tol = 1e-14) {
    boost::math::quadrature::tanh_sinh<double> integrator;
    return integrator.integrate(f, a, b, tol);
}

}  // namespace testsupport
