#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "sdae/common.hpp"
#include "sdae/fileio.hpp"

namespace sdae {

struct PgmImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;  // row-major
};

inline void write_pgm(const PgmImage& img, const std::string& path) {
    atomic_write(path, [&](std::ostream& out) {
        out << "P5\n" << img.width << " " << img.height << "\n255\n";
        out.write(reinterpret_cast<const char*>(img.pixels.data()),
                  std::streamsize(img.pixels.size()));
    });
}

namespace detail {

// One whitespace-delimited header token, skipping '#' comments.
inline std::string pgm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

}  // namespace detail

inline PgmImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open PGM: " + path);
    if (detail::pgm_token(in) != "P5") throw DataError("not a binary PGM (P5): " + path);
    PgmImage img;
    try {
        img.width = std::stoul(detail::pgm_token(in));
        img.height = std::stoul(detail::pgm_token(in));
        const unsigned long maxval = std::stoul(detail::pgm_token(in));
        if (maxval == 0 || maxval > 255)
            throw DataError("unsupported PGM maxval in " + path);
    } catch (const std::logic_error&) {
        throw DataError("malformed PGM header: " + path);
    }
    img.pixels.resize(img.width * img.height);
    if (!in.read(reinterpret_cast<char*>(img.pixels.data()),
                 std::streamsize(img.pixels.size())))
        throw DataError("truncated PGM: " + path);
    return img;
}

}  // namespace sdae
