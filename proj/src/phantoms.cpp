#include "wtomo/phantoms.hpp"

namespace wtomo {

ImageGrid make_triangle4() {
    ImageGrid img(4, 4);
    img.at(1, 1) = 1.0;
    img.at(2, 1) = 1.0;
    img.at(1, 2) = 1.0;
    return img;
}

ImageGrid make_two_wedge(int nx, int ny) {
    if (nx < 16 || ny < 16)
        throw std::invalid_argument("make_two_wedge: grid must be at least 16x16");
    ImageGrid img(nx, ny);
    const double margin = 0.1;       // zero border, fraction of the field
    const double gap = 0.04;         // half-width of the anti-diagonal gap
    for (int iy = 0; iy < ny; ++iy) {
        const double v = (iy + 0.5) / ny;
        for (int ix = 0; ix < nx; ++ix) {
            const double u = (ix + 0.5) / nx;
            if (u < margin || u > 1.0 - margin || v < margin || v > 1.0 - margin)
                continue;
            const double s = u + v - 1.0;  // signed distance to the anti-diagonal
            if (s < -gap || s > gap) img.at(ix, iy) = 1.0;
        }
    }
    return img;
}

}  // namespace wtomo
