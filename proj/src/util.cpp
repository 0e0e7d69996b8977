#include "greenpot/util.hpp"

#include <cstdio>

namespace greenpot {

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    LinearFit f;
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) return f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double dn = static_cast<double>(n);
    const double det = dn * sxx - sx * sx;
    if (det == 0.0) return f;
    f.slope = (dn * sxy - sx * sy) / det;
    f.intercept = (sy - f.slope * sx) / dn;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (f.slope * x[i] + f.intercept);
        ss += r * r;
    }
    f.rms_residual = std::sqrt(ss / dn);
    return f;
}

std::string format_double(double v) {
    // %.17g always round-trips; prefer the shorter %.15g when it does too.
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back != v) std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace greenpot
