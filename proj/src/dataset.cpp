#include "geodrop/dataset.hpp"

#include <cstdint>
#include <fstream>
#include <vector>

#include "geodrop/errors.hpp"
#include "geodrop/rng.hpp"

namespace geodrop {

namespace {

std::uint32_t read_u32_be(std::istream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw FormatError(path + ": truncated header");
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

std::vector<unsigned char> read_bytes(std::istream& in, std::size_t n,
                                      const std::string& path) {
    std::vector<unsigned char> buf(n);
    if (!in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(n)))
        throw FormatError(path + ": truncated payload");
    return buf;
}

}  // namespace

Dataset load_mnist(const std::string& images_path, const std::string& labels_path,
                   std::size_t limit) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw ConfigError("cannot open " + images_path);
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw ConfigError("cannot open " + labels_path);

    if (read_u32_be(img, images_path) != 0x00000803u)
        throw FormatError(images_path + ": bad magic, expected 0x00000803");
    if (read_u32_be(lab, labels_path) != 0x00000801u)
        throw FormatError(labels_path + ": bad magic, expected 0x00000801");

    std::size_t n_img = read_u32_be(img, images_path);
    std::size_t rows = read_u32_be(img, images_path);
    std::size_t cols = read_u32_be(img, images_path);
    std::size_t n_lab = read_u32_be(lab, labels_path);
    if (n_img != n_lab)
        throw FormatError(images_path + ": " + std::to_string(n_img) +
                          " images but " + std::to_string(n_lab) + " labels in " +
                          labels_path);
    if (rows == 0 || cols == 0)
        throw FormatError(images_path + ": zero image dimensions");

    std::size_t n = (limit > 0 && limit < n_img) ? limit : n_img;
    std::size_t d = rows * cols;
    std::vector<unsigned char> pixels = read_bytes(img, n * d, images_path);
    std::vector<unsigned char> digits = read_bytes(lab, n, labels_path);

    Dataset data;
    data.n_classes = 10;
    data.features = Matrix(n, d);
    data.labels.resize(n);
    for (std::size_t i = 0; i < n * d; ++i)
        data.features.data()[i] = double(pixels[i]) / 255.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (digits[i] > 9)
            throw FormatError(labels_path + ": label " + std::to_string(digits[i]) +
                              " outside 0..9");
        data.labels[i] = int(digits[i]);
    }
    return data;
}

Dataset synth_blobs(std::size_t classes, std::size_t per_class, std::size_t dim,
                    double separation, std::uint64_t seed) {
    if (classes < 2) throw ConfigError("synth_blobs: need at least 2 classes");
    if (per_class < 1) throw ConfigError("synth_blobs: need at least 1 per class");
    if (dim < 1) throw ConfigError("synth_blobs: need dimension >= 1");

    Rng rng(seed);
    Dataset data;
    data.n_classes = classes;
    data.features = Matrix(classes * per_class, dim);
    data.labels.resize(classes * per_class);
    for (std::size_t c = 0; c < classes; ++c)
        for (std::size_t i = 0; i < per_class; ++i) {
            std::size_t row = c * per_class + i;
            data.labels[row] = int(c);
            for (std::size_t j = 0; j < dim; ++j) {
                double centre = (c < dim && j == c) ? separation : 0.0;
                data.features(row, j) = centre + rng.normal();
            }
        }
    return data;
}

}  // namespace geodrop
