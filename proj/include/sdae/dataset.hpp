#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "sdae/common.hpp"
#include "sdae/fileio.hpp"
#include "sdae/linalg.hpp"
#include "sdae/pgm.hpp"
#include "sdae/rng.hpp"

namespace sdae {

struct ImageDataset {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<Vector> images;  // each width*height, values in [0,1]
    std::vector<int> labels;

    std::size_t size() const { return images.size(); }
    std::size_t dim() const { return width * height; }
};

enum class CorruptionKind { masking };

struct CorruptionSpec {
    CorruptionKind kind = CorruptionKind::masking;
    double probability = 0.0;
};

// ---------------------------------------------------------------------------
// IDX container (big-endian magic + dims, raw unsigned bytes)
// ---------------------------------------------------------------------------

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

inline ImageDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw IoError("cannot open image file: " + images_path);
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw IoError("cannot open label file: " + labels_path);

    const std::uint32_t img_magic = detail::get_u32_be(img, "image magic");
    if (img_magic != kIdxImagesMagic)
        throw DataError("bad image magic in " + images_path + " (expected 0x00000803)");
    const std::uint32_t n_images = detail::get_u32_be(img, "image count");
    const std::uint32_t rows = detail::get_u32_be(img, "image rows");
    const std::uint32_t cols = detail::get_u32_be(img, "image cols");

    const std::uint32_t lab_magic = detail::get_u32_be(lab, "label magic");
    if (lab_magic != kIdxLabelsMagic)
        throw DataError("bad label magic in " + labels_path + " (expected 0x00000801)");
    const std::uint32_t n_labels = detail::get_u32_be(lab, "label count");

    if (n_images != n_labels)
        throw DataError("count mismatch: " + std::to_string(n_images) + " images vs " +
                        std::to_string(n_labels) + " labels");

    ImageDataset ds;
    ds.width = cols;
    ds.height = rows;
    ds.images.reserve(n_images);
    ds.labels.reserve(n_labels);

    const std::size_t dim = std::size_t(rows) * cols;
    std::vector<unsigned char> buf(dim);
    for (std::uint32_t i = 0; i < n_images; ++i) {
        if (!img.read(reinterpret_cast<char*>(buf.data()), std::streamsize(dim)))
            throw DataError("truncated image file: " + images_path);
        Vector px(dim);
        for (std::size_t k = 0; k < dim; ++k) px[k] = buf[k] / 255.0;
        ds.images.push_back(std::move(px));
    }
    for (std::uint32_t i = 0; i < n_labels; ++i) {
        char c;
        if (!lab.read(&c, 1)) throw DataError("truncated label file: " + labels_path);
        ds.labels.push_back(static_cast<unsigned char>(c));
    }
    return ds;
}

inline void save_idx(const ImageDataset& ds, const std::string& images_path,
                     const std::string& labels_path) {
    atomic_write(images_path, [&](std::ostream& out) {
        detail::put_u32_be(out, kIdxImagesMagic);
        detail::put_u32_be(out, static_cast<std::uint32_t>(ds.size()));
        detail::put_u32_be(out, static_cast<std::uint32_t>(ds.height));
        detail::put_u32_be(out, static_cast<std::uint32_t>(ds.width));
        std::vector<unsigned char> buf(ds.dim());
        for (const Vector& im : ds.images) {
            for (std::size_t k = 0; k < buf.size(); ++k) {
                double v = std::clamp(im[k], 0.0, 1.0);
                buf[k] = static_cast<unsigned char>(std::lround(v * 255.0));
            }
            out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
        }
    });
    atomic_write(labels_path, [&](std::ostream& out) {
        detail::put_u32_be(out, kIdxLabelsMagic);
        detail::put_u32_be(out, static_cast<std::uint32_t>(ds.labels.size()));
        for (int l : ds.labels) out.put(static_cast<char>(static_cast<unsigned char>(l)));
    });
}

// ---------------------------------------------------------------------------
// Corruption and dataset variants
// ---------------------------------------------------------------------------

// Masking noise: each element independently zeroed when the next draw falls
// below the probability. The input is left untouched.
inline Vector corrupt(const Vector& x, const CorruptionSpec& spec, RandomStream& rng) {
    Vector out = x;
    const double p = spec.probability;
    for (double& v : out)
        if (rng.next_double() < p) v = 0.0;
    return out;
}

// bg-rand: composite uniform noise under the digit by elementwise max.
inline ImageDataset gen_bg_rand(const ImageDataset& ds, RandomStream& rng) {
    ImageDataset out = ds;
    for (Vector& im : out.images)
        for (double& v : im) v = std::max(v, rng.next_double());
    return out;
}

// Rotates one image about its center by `angle` radians, sampling with
// bilinear interpolation; out-of-frame pixels are 0.
inline Vector rotate_image(const Vector& im, std::size_t width, std::size_t height,
                           double angle) {
    Vector out(im.size(), 0.0);
    const double cx = (double(width) - 1.0) / 2.0;
    const double cy = (double(height) - 1.0) / 2.0;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t col = 0; col < width; ++col) {
            // inverse map: rotate the output coordinate back into the source
            const double dx = double(col) - cx;
            const double dy = double(r) - cy;
            const double sx = c * dx + s * dy + cx;
            const double sy = -s * dx + c * dy + cy;
            const double fx = std::floor(sx);
            const double fy = std::floor(sy);
            const double ax = sx - fx;
            const double ay = sy - fy;
            const long x0 = long(fx), y0 = long(fy);
            double acc = 0.0;
            for (int oy = 0; oy <= 1; ++oy) {
                for (int ox = 0; ox <= 1; ++ox) {
                    const long xs = x0 + ox, ys = y0 + oy;
                    if (xs < 0 || ys < 0 || xs >= long(width) || ys >= long(height)) continue;
                    const double wgt = (ox ? ax : 1.0 - ax) * (oy ? ay : 1.0 - ay);
                    acc += wgt * im[std::size_t(ys) * width + std::size_t(xs)];
                }
            }
            out[r * width + col] = acc;
        }
    }
    return out;
}

// rot: every image rotated by an angle uniform in [0, 2*pi), or by
// *fixed_angle when given (CLI test hook).
inline ImageDataset gen_rot(const ImageDataset& ds, RandomStream& rng,
                            const double* fixed_angle = nullptr) {
    ImageDataset out = ds;
    for (Vector& im : out.images) {
        const double angle = fixed_angle ? *fixed_angle : rng.next_double() * 2.0 * M_PI;
        im = rotate_image(im, ds.width, ds.height, angle);
    }
    return out;
}

// Uniform top-left patch offset for cropping a (w x h) window from a
// (bg_w x bg_h) background.
inline std::pair<std::size_t, std::size_t> sample_patch_offset(std::size_t bg_w,
                                                               std::size_t bg_h,
                                                               std::size_t w, std::size_t h,
                                                               RandomStream& rng) {
    const std::size_t row = rng.next_below(bg_h - h + 1);
    const std::size_t col = rng.next_below(bg_w - w + 1);
    return {row, col};
}

// bg-img: per digit, crop a random patch from a randomly chosen background
// image and composite by max.
inline ImageDataset gen_bg_img(const ImageDataset& ds, const std::string& backgrounds_dir,
                               RandomStream& rng) {
    std::vector<PgmImage> bgs;
    {
        std::error_code ec;
        std::filesystem::directory_iterator it(backgrounds_dir, ec);
        if (ec) throw DataError("cannot read background directory: " + backgrounds_dir);
        std::vector<std::string> paths;
        for (const auto& entry : it)
            if (entry.is_regular_file()) paths.push_back(entry.path().string());
        std::sort(paths.begin(), paths.end());
        for (const std::string& p : paths) {
            PgmImage bg = read_pgm(p);
            if (bg.width < ds.width || bg.height < ds.height)
                throw DataError("background smaller than digits: " + p);
            bgs.push_back(std::move(bg));
        }
    }
    if (bgs.empty())
        throw DataError("no readable backgrounds in: " + backgrounds_dir);

    ImageDataset out = ds;
    for (Vector& im : out.images) {
        const PgmImage& bg = bgs[rng.next_below(bgs.size())];
        auto [row, col] = sample_patch_offset(bg.width, bg.height, ds.width, ds.height, rng);
        for (std::size_t r = 0; r < ds.height; ++r)
            for (std::size_t c = 0; c < ds.width; ++c) {
                const double b = bg.pixels[(row + r) * bg.width + (col + c)] / 255.0;
                double& v = im[r * ds.width + c];
                v = std::max(v, b);
            }
    }
    return out;
}

}  // namespace sdae
