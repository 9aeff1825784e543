#include "wtomo/metrics.hpp"

#include <cmath>

namespace wtomo {

namespace {
void check_same_dims(const ImageGrid& a, const ImageGrid& b, const char* where) {
    if (a.nx != b.nx || a.ny != b.ny)
        throw std::invalid_argument(std::string(where) + ": dimension mismatch");
}
}  // namespace

double rmse(const ImageGrid& a, const ImageGrid& b) {
    check_same_dims(a, b, "rmse");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a.values[i] - b.values[i];
        s += d * d;
    }
    return std::sqrt(s / a.size());
}

double l2_distance(const ImageGrid& a, const ImageGrid& b) {
    check_same_dims(a, b, "l2_distance");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a.values[i] - b.values[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double ssim(const ImageGrid& a, const ImageGrid& b, double dynamic_range) {
    check_same_dims(a, b, "ssim");
    if (!(dynamic_range > 0.0))
        throw std::invalid_argument("ssim: dynamic_range must be > 0");
    const int win = 8;
    if (a.nx < win || a.ny < win)
        throw std::invalid_argument("ssim: image smaller than the 8x8 window");

    const double c1 = (0.01 * dynamic_range) * (0.01 * dynamic_range);
    const double c2 = (0.03 * dynamic_range) * (0.03 * dynamic_range);
    const double n = static_cast<double>(win) * win;

    double acc = 0.0;
    int windows = 0;
    for (int y0 = 0; y0 + win <= a.ny; ++y0) {
        for (int x0 = 0; x0 + win <= a.nx; ++x0) {
            double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
            for (int dy = 0; dy < win; ++dy)
                for (int dx = 0; dx < win; ++dx) {
                    const double va = a.at(x0 + dx, y0 + dy);
                    const double vb = b.at(x0 + dx, y0 + dy);
                    sa += va;
                    sb += vb;
                    saa += va * va;
                    sbb += vb * vb;
                    sab += va * vb;
                }
            const double mu_a = sa / n;
            const double mu_b = sb / n;
            const double var_a = saa / n - mu_a * mu_a;
            const double var_b = sbb / n - mu_b * mu_b;
            const double cov = sab / n - mu_a * mu_b;
            const double num = (2 * mu_a * mu_b + c1) * (2 * cov + c2);
            const double den =
                (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
            acc += num / den;
            ++windows;
        }
    }
    return acc / windows;
}

}  // namespace wtomo
