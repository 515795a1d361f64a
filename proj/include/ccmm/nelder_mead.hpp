#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace ccmm {

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

/// Nelder-Mead minimization. Converged when the spread of function values across
/// the simplex falls below `tolerance`.
inline SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x0, double step, double tolerance, int max_iterations) {
    const std::size_t n = x0.size();
    SimplexResult res;
    if (n == 0) {
        res.x = x0;
        res.value = f(x0);
        res.evaluations = 1;
        res.converged = true;
        return res;
    }
    constexpr double reflect = 1.0, expand = 2.0, contract = 0.5, shrink = 0.5;

    std::vector<std::vector<double>> pts(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
    std::vector<double> fv(n + 1);
    auto eval = [&](const std::vector<double>& x) {
        ++res.evaluations;
        const double v = f(x);
        return std::isfinite(v) ? v : HUGE_VAL;
    };
    for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(pts[i]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    for (res.iterations = 0; res.iterations < max_iterations; ++res.iterations) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const auto best = order.front(), worst = order.back(), second = order[n - 1];
        if (fv[worst] - fv[best] < tolerance) {
            res.converged = true;
            break;
        }
        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[order[i]][d] / static_cast<double>(n);

        for (std::size_t d = 0; d < n; ++d) xr[d] = centroid[d] + reflect * (centroid[d] - pts[worst][d]);
        const double fr = eval(xr);
        if (fr < fv[best]) {
            for (std::size_t d = 0; d < n; ++d) xe[d] = centroid[d] + expand * (xr[d] - centroid[d]);
            const double fe = eval(xe);
            if (fe < fr) {
                pts[worst] = xe;
                fv[worst] = fe;
            } else {
                pts[worst] = xr;
                fv[worst] = fr;
            }
            continue;
        }
        if (fr < fv[second]) {
            pts[worst] = xr;
            fv[worst] = fr;
            continue;
        }
        // contraction: outside if the reflection improved on the worst point, else inside
        const bool outside = fr < fv[worst];
        for (std::size_t d = 0; d < n; ++d)
            xc[d] = outside ? centroid[d] + contract * (xr[d] - centroid[d])
                            : centroid[d] + contract * (pts[worst][d] - centroid[d]);
        const double fc = eval(xc);
        if (fc < (outside ? fr : fv[worst])) {
            pts[worst] = xc;
            fv[worst] = fc;
            continue;
        }
        for (std::size_t i = 1; i <= n; ++i) {
            auto& p = pts[order[i]];
            for (std::size_t d = 0; d < n; ++d) p[d] = pts[best][d] + shrink * (p[d] - pts[best][d]);
            fv[order[i]] = eval(p);
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    res.x = pts[best];
    res.value = fv[best];
    return res;
}

}  // namespace ccmm
