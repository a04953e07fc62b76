#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bccui/error.hpp"

namespace bccui {

/// Row-major 8-bit single-channel raster.
class GrayImage {
public:
    GrayImage() = default;

    GrayImage(int width, int height, std::uint8_t fill = 0)
        : width_(width), height_(height) {
        detail::require(width > 0 && height > 0, "GrayImage: dimensions must be positive");
        data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    GrayImage(int width, int height, std::vector<std::uint8_t> data)
        : width_(width), height_(height), data_(std::move(data)) {
        detail::require(width > 0 && height > 0, "GrayImage: dimensions must be positive");
        detail::require(data_.size() == size(), "GrayImage: data length must equal width*height");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }
    bool empty() const noexcept { return data_.empty(); }

    std::uint8_t operator()(int x, int y) const { return data_[index(x, y)]; }
    std::uint8_t& operator()(int x, int y) { return data_[index(x, y)]; }

    /// Clamp-to-edge sampling.
    std::uint8_t clamped(int x, int y) const {
        return (*this)(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
    }

    bool contains(int x, int y) const noexcept {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }

    std::span<const std::uint8_t> pixels() const noexcept { return data_; }
    std::span<std::uint8_t> pixels() noexcept { return data_; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Grayscale embedding into Lab space: l = v*100/255, a = b = 0.
struct PseudoLab {
    double l = 0.0;
    double a = 0.0;
    double b = 0.0;
};

struct LabPlane {
    int width = 0;
    int height = 0;
    std::vector<PseudoLab> px;

    const PseudoLab& operator()(int x, int y) const {
        return px[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
    }
    const PseudoLab& clamped(int x, int y) const {
        return (*this)(std::clamp(x, 0, width - 1), std::clamp(y, 0, height - 1));
    }
};

inline double intensity_to_lightness(double v) { return v * 100.0 / 255.0; }
inline double lightness_to_intensity(double l) { return l * 255.0 / 100.0; }

inline LabPlane to_pseudolab(const GrayImage& img) {
    LabPlane plane{img.width(), img.height(), {}};
    plane.px.reserve(img.size());
    for (auto v : img.pixels()) plane.px.push_back({intensity_to_lightness(v), 0.0, 0.0});
    return plane;
}

// ---------------------------------------------------------------------------
// PGM I/O

namespace detail {

class PnmHeaderReader {
public:
    explicit PnmHeaderReader(std::string_view bytes) : bytes_(bytes) {}

    void expect_magic(std::string_view magic) {
        if (bytes_.size() < 2) throw ParseError("PGM: truncated magic number", pos_);
        if (bytes_.substr(0, 2) != magic) {
            throw ParseError("PGM: unsupported magic '" + std::string(bytes_.substr(0, 2)) +
                                 "', expected '" + std::string(magic) + "'",
                             0);
        }
        pos_ = 2;
    }

    unsigned long next_uint(const char* field) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        unsigned long value = 0;
        while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
            value = value * 10 + static_cast<unsigned long>(bytes_[pos_] - '0');
            if (value > 1'000'000'000UL) throw ParseError(std::string("PGM: ") + field + " too large", start);
            ++pos_;
        }
        if (pos_ == start) {
            throw ParseError(std::string("PGM: expected ") + field, pos_);
        }
        return value;
    }

    /// Exactly one whitespace byte separates maxval from the raster.
    void single_space() {
        if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) {
            throw ParseError("PGM: expected single whitespace before raster", pos_);
        }
        ++pos_;
    }

    std::size_t pos() const noexcept { return pos_; }

    /// Offset of the next header token.
    std::size_t token_start() {
        skip_space_and_comments();
        return pos_;
    }

private:
    static bool is_space(char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
    }

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (is_space(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses a binary PGM ("P5", maxval <= 255).
inline GrayImage read_pgm(std::string_view bytes) {
    detail::PnmHeaderReader rd(bytes);
    rd.expect_magic("P5");
    const auto w = rd.next_uint("width");
    const auto h = rd.next_uint("height");
    const std::size_t maxval_at = rd.token_start();
    const auto maxval = rd.next_uint("maxval");
    if (w == 0 || h == 0) throw ParseError("PGM: zero image dimension", maxval_at);
    if (maxval == 0 || maxval > 255) {
        throw ParseError("PGM: maxval " + std::to_string(maxval) + " outside 1..255", maxval_at);
    }
    rd.single_space();
    const std::size_t start = rd.pos();
    const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (bytes.size() - start < n) {
        throw ParseError("PGM: truncated raster, expected " + std::to_string(n) + " bytes, got " +
                             std::to_string(bytes.size() - start),
                         bytes.size());
    }
    std::vector<std::uint8_t> data(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto v = static_cast<std::uint8_t>(bytes[start + i]);
        if (v > maxval) throw ParseError("PGM: sample exceeds maxval", start + i);
        data[i] = v;
    }
    return GrayImage(static_cast<int>(w), static_cast<int>(h), std::move(data));
}

inline std::string write_pgm(const GrayImage& img) {
    std::string out = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    out.append(img.pixels().begin(), img.pixels().end());
    return out;
}

/// 16-bit raster ("P5", maxval 65535, big-endian samples) used for label maps.
inline std::string write_pgm16(int width, int height, std::span<const std::uint16_t> samples) {
    detail::require(samples.size() == static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                    "write_pgm16: sample count must equal width*height");
    std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n65535\n";
    out.reserve(out.size() + samples.size() * 2);
    for (auto s : samples) {
        out.push_back(static_cast<char>(s >> 8));
        out.push_back(static_cast<char>(s & 0xFF));
    }
    return out;
}

struct Raster16 {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> samples;
};

inline Raster16 read_pgm16(std::string_view bytes) {
    detail::PnmHeaderReader rd(bytes);
    rd.expect_magic("P5");
    const auto w = rd.next_uint("width");
    const auto h = rd.next_uint("height");
    const std::size_t maxval_at = rd.token_start();
    const auto maxval = rd.next_uint("maxval");
    if (w == 0 || h == 0) throw ParseError("PGM: zero image dimension", maxval_at);
    if (maxval < 256 || maxval > 65535) throw ParseError("PGM16: maxval must be in 256..65535", maxval_at);
    rd.single_space();
    const std::size_t start = rd.pos();
    const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (bytes.size() - start < 2 * n) throw ParseError("PGM16: truncated raster", bytes.size());
    Raster16 r{static_cast<int>(w), static_cast<int>(h), std::vector<std::uint16_t>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const auto hi = static_cast<std::uint8_t>(bytes[start + 2 * i]);
        const auto lo = static_cast<std::uint8_t>(bytes[start + 2 * i + 1]);
        r.samples[i] = static_cast<std::uint16_t>((hi << 8) | lo);
    }
    return r;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "' for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write to '" + path.string() + "' failed");
}

inline GrayImage load_pgm(const std::filesystem::path& path) { return read_pgm(read_file(path)); }
inline void save_pgm(const std::filesystem::path& path, const GrayImage& img) {
    write_file(path, write_pgm(img));
}

// ---------------------------------------------------------------------------
// Preprocessing

/// CDF remap. A single-intensity image maps to all zeros.
inline GrayImage histogram_equalize(const GrayImage& img) {
    detail::require(!img.empty(), "histogram_equalize: zero-area image");
    std::array<std::size_t, 256> hist{};
    for (auto v : img.pixels()) ++hist[v];

    const std::size_t n = img.size();
    std::size_t cdf_min = 0;
    for (auto c : hist) {
        if (c != 0) {
            cdf_min = c;
            break;
        }
    }

    std::array<std::uint8_t, 256> lut{};
    if (n != cdf_min) {
        std::size_t cdf = 0;
        const double denom = static_cast<double>(n - cdf_min);
        for (int v = 0; v < 256; ++v) {
            cdf += hist[static_cast<std::size_t>(v)];
            const double num = cdf >= cdf_min ? static_cast<double>(cdf - cdf_min) : 0.0;
            lut[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(std::lround(255.0 * num / denom));
        }
    }

    GrayImage out = img;
    for (auto& v : out.pixels()) v = lut[v];
    return out;
}

/// Median over a (2r+1)^2 clamp-to-edge window.
inline GrayImage median_filter(const GrayImage& img, int radius) {
    detail::require(radius >= 1, "median_filter: radius must be >= 1");
    GrayImage out(img.width(), img.height());
    std::vector<std::uint8_t> window;
    const int side = 2 * radius + 1;
    window.resize(static_cast<std::size_t>(side * side));
    const auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            std::size_t k = 0;
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx) window[k++] = img.clamped(x + dx, y + dy);
            std::nth_element(window.begin(), mid, window.end());
            out(x, y) = *mid;
        }
    }
    return out;
}

inline GrayImage denoise(const GrayImage& img, int radius = 1) { return median_filter(img, radius); }

/// Mean over a (2r+1)^2 clamp-to-edge window, unrounded.
inline std::vector<double> box_blur(const GrayImage& img, int radius) {
    detail::require(radius >= 1, "box_blur: radius must be >= 1");
    std::vector<double> out(img.size());
    const double area = static_cast<double>((2 * radius + 1) * (2 * radius + 1));
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            int sum = 0;
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx) sum += img.clamped(x + dx, y + dy);
            out[static_cast<std::size_t>(y) * static_cast<std::size_t>(img.width()) +
                static_cast<std::size_t>(x)] = sum / area;
        }
    }
    return out;
}

/// out = clamp(img + amount * (img - blur)); amount 0 is the identity.
inline GrayImage unsharp(const GrayImage& img, double amount, int radius = 1) {
    detail::require(amount >= 0.0 && std::isfinite(amount), "unsharp: amount must be finite and >= 0");
    if (amount == 0.0) return img;
    const auto blur = box_blur(img, radius);
    GrayImage out = img;
    auto px = out.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        const double v = px[i] + amount * (px[i] - blur[i]);
        px[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
    return out;
}

struct PreprocessOptions {
    bool equalize = true;
    int denoise_radius = 1;  // 0 disables the median filter
    double unsharp_amount = 0.0;
    int unsharp_radius = 1;
};

/// equalize -> denoise -> unsharp
inline GrayImage preprocess(const GrayImage& img, const PreprocessOptions& opt = {}) {
    GrayImage out = opt.equalize ? histogram_equalize(img) : img;
    if (opt.denoise_radius > 0) out = denoise(out, opt.denoise_radius);
    if (opt.unsharp_amount > 0.0) out = unsharp(out, opt.unsharp_amount, opt.unsharp_radius);
    return out;
}

}  // namespace bccui
