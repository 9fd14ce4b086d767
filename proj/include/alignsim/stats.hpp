// SPDX-License-Identifier: Apache-2.0
//
// alignsim - Monte Carlo simulator for interference alignment with analog CSI feedback
// Copyright (C) 2026 the alignsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
//
// Small sample-statistics toolkit used by the harness and the test suite:
// moments, normal-approximation confidence intervals, least-squares slope
// fits, and Kolmogorov-Smirnov tests (one-sample against Exp(1), and
// two-sample).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace alignsim {

inline double mean(const std::vector<double>& x) {
    if (x.empty()) throw std::invalid_argument("mean of empty sample");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

// Unbiased sample variance.
inline double variance(const std::vector<double>& x) {
    if (x.size() < 2) throw std::invalid_argument("variance needs at least two samples");
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

// Half-width of the normal-approximation 95% confidence interval on the mean.
inline double ci95_halfwidth(const std::vector<double>& x) {
    return 1.96 * std::sqrt(variance(x) / static_cast<double>(x.size()));
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
};

// Ordinary least squares y = a + b*x.
inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("fit_line: size mismatch");
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("fit_line needs at least two points");
    const double mx = mean(x);
    const double my = mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (n > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - (f.intercept + f.slope * x[i]);
            rss += r * r;
        }
        f.slope_stderr = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
    }
    return f;
}

// Kolmogorov distribution tail Q(t) = 2 * sum_{k>=1} (-1)^{k-1} exp(-2 k^2 t^2).
inline double kolmogorov_tail(double t) {
    if (t <= 0.0) return 1.0;
    double q = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * std::exp(-2.0 * k * k * t * t);
        q += (k % 2 == 1) ? term : -term;
        if (term < 1e-12) break;
    }
    return std::clamp(q, 0.0, 1.0);
}

struct KsResult {
    double statistic = 0.0;  // sup-norm distance D
    double p_value = 1.0;
};

// One-sample KS test against the unit-rate exponential CDF 1 - exp(-x).
// Uses the finite-sample tail correction t = D (sqrt(n) + 0.12 + 0.11/sqrt(n)).
inline KsResult ks_test_exp1(std::vector<double> x) {
    const std::size_t n = x.size();
    if (n == 0) throw std::invalid_argument("ks_test_exp1: empty sample");
    std::sort(x.begin(), x.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double cdf = 1.0 - std::exp(-x[i]);
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max({d, std::abs(cdf - lo), std::abs(hi - cdf)});
    }
    const double rn = std::sqrt(static_cast<double>(n));
    KsResult r;
    r.statistic = d;
    r.p_value = kolmogorov_tail(d * (rn + 0.12 + 0.11 / rn));
    return r;
}

// Two-sample KS test (asymptotic p-value).
inline KsResult ks_test_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_test_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const std::size_t na = a.size(), nb = b.size();
    std::size_t ia = 0, ib = 0;
    double d = 0.0;
    while (ia < na && ib < nb) {
        const double v = std::min(a[ia], b[ib]);
        while (ia < na && a[ia] <= v) ++ia;
        while (ib < nb && b[ib] <= v) ++ib;
        d = std::max(d, std::abs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb));
    }
    const double ne = static_cast<double>(na) * nb / (na + nb);
    const double rn = std::sqrt(ne);
    KsResult r;
    r.statistic = d;
    r.p_value = kolmogorov_tail(d * (rn + 0.12 + 0.11 / rn));
    return r;
}

}  // namespace alignsim
