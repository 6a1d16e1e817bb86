/*
 * Copyright 2026 The mislmm Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <limits>
#include <utility>

#include "mislmm/error.hpp"

namespace mislmm
{

struct BrentResult
{
    double root = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    int iterations = 0;
};

/// Brent's bracketing root finder (inverse quadratic interpolation with
/// bisection safeguard). Requires f(lo) and f(hi) of opposite sign or zero.
/// Stops when the bracket width is below rel_tol * max(|x|, 1) or f hits
/// exactly zero.
template <class F>
BrentResult brent_root(F&& f, double lo, double hi, double rel_tol = 1e-10, int max_iter = 200)
{
    double a = lo;
    double b = hi;
    double fa = f(a);
    double fb = f(b);
    if (!std::isfinite(fa) || !std::isfinite(fb))
    {
        throw NumericalError("brent_root: non-finite function value at bracket end");
    }
    if (fa == 0.0) return {a, a, a, 0};
    if (fb == 0.0) return {b, b, b, 0};
    if ((fa > 0.0) == (fb > 0.0))
    {
        throw NumericalError("brent_root: interval does not bracket a root");
    }

    double c = a;
    double fc = fa;
    double d = b - a;
    double e = d;
    int iter = 0;
    for (; iter < max_iter; ++iter)
    {
        if ((fb > 0.0) == (fc > 0.0))
        {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb))
        {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol = 0.5 * rel_tol * std::max(std::abs(b), 1.0)
                           + 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b);
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol || fb == 0.0)
        {
            return {b, std::min(b, c), std::max(b, c), iter};
        }
        if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb))
        {
            double p;
            double q;
            const double s = fb / fa;
            if (a == c)
            {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            }
            else
            {
                const double qq = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            const double min1 = 3.0 * xm * q - std::abs(tol * q);
            const double min2 = std::abs(e * q);
            if (2.0 * p < std::min(min1, min2))
            {
                e = d;
                d = p / q;
            }
            else
            {
                d = xm;
                e = d;
            }
        }
        else
        {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += std::abs(d) > tol ? d : std::copysign(tol, xm);
        fb = f(b);
        if (!std::isfinite(fb))
        {
            throw NumericalError("brent_root: non-finite function value inside bracket");
        }
    }
    throw NumericalError("brent_root: iteration limit reached");
}

}  // namespace mislmm
