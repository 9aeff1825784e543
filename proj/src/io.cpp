#include "wtomo/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace wtomo {

namespace {
std::ofstream open_out(const std::string& path, std::ios::openmode mode) {
    std::ofstream f(path, mode);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    return f;
}
}  // namespace

void export_image(const ImageGrid& image, double lo, double hi,
                  const std::string& path) {
    if (!(lo < hi)) throw std::invalid_argument("export_image: require lo < hi");
    auto f = open_out(path, std::ios::binary);
    f << "P5\n" << image.nx << " " << image.ny << "\n255\n";
    std::vector<uint8_t> row(image.nx);
    for (int iy = 0; iy < image.ny; ++iy) {
        for (int ix = 0; ix < image.nx; ++ix) {
            double v = image.at(ix, iy);
            v = std::clamp(v, lo, hi);
            const double t = (v - lo) / (hi - lo) * 255.0;
            row[ix] = static_cast<uint8_t>(std::floor(t + 0.5));  // round half up
        }
        f.write(reinterpret_cast<const char*>(row.data()), row.size());
    }
    if (!f) throw std::runtime_error("write failed: " + path);
}

void write_raw(const ImageGrid& image, const std::string& path) {
    auto f = open_out(path, std::ios::binary);
    char header[16] = {'W', 'T', 'R', '1'};
    const uint32_t nx = static_cast<uint32_t>(image.nx);
    const uint32_t ny = static_cast<uint32_t>(image.ny);
    const uint32_t reserved = 0;
    std::memcpy(header + 4, &nx, 4);
    std::memcpy(header + 8, &ny, 4);
    std::memcpy(header + 12, &reserved, 4);
    f.write(header, 16);
    std::vector<float> buf(image.values.begin(), image.values.end());
    f.write(reinterpret_cast<const char*>(buf.data()), buf.size() * sizeof(float));
    if (!f) throw std::runtime_error("write failed: " + path);
}

ImageGrid read_raw(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    char header[16];
    f.read(header, 16);
    if (!f || std::memcmp(header, "WTR1", 4) != 0)
        throw std::runtime_error("not a WTR1 raw file: " + path);
    uint32_t nx, ny;
    std::memcpy(&nx, header + 4, 4);
    std::memcpy(&ny, header + 8, 4);
    ImageGrid img(static_cast<int>(nx), static_cast<int>(ny));
    std::vector<float> buf(img.size());
    f.read(reinterpret_cast<char*>(buf.data()), buf.size() * sizeof(float));
    if (!f) throw std::runtime_error("truncated raw file: " + path);
    for (size_t i = 0; i < buf.size(); ++i) img.values[i] = buf[i];
    return img;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
    if (header.size() != columns.size())
        throw std::invalid_argument("write_csv: header/column count mismatch");
    const size_t n = columns.empty() ? 0 : columns[0].size();
    for (const auto& c : columns)
        if (c.size() != n)
            throw std::invalid_argument("write_csv: ragged columns");

    auto f = open_out(path, std::ios::out);
    std::ostringstream os;
    os << std::setprecision(17);
    for (size_t c = 0; c < header.size(); ++c)
        os << header[c] << (c + 1 < header.size() ? "," : "\n");
    for (size_t r = 0; r < n; ++r)
        for (size_t c = 0; c < columns.size(); ++c)
            os << columns[c][r] << (c + 1 < columns.size() ? "," : "\n");
    f << os.str();
    if (!f) throw std::runtime_error("write failed: " + path);
}

std::vector<double> line_profile(const ImageGrid& image) {
    if (image.nx != image.ny)
        throw std::invalid_argument("line_profile: image must be square");
    std::vector<double> prof(image.nx);
    for (int i = 0; i < image.nx; ++i) prof[i] = image.at(i, i);
    return prof;
}

void export_line_profile(const ImageGrid& image, const std::string& path) {
    const auto prof = line_profile(image);
    std::vector<double> idx(prof.size());
    for (size_t i = 0; i < prof.size(); ++i) idx[i] = static_cast<double>(i);
    write_csv(path, {"index", "value"}, {idx, prof});
}

}  // namespace wtomo
