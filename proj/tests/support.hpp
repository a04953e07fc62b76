#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "bccui/bccui.hpp"

namespace testing_support {

inline bccui::GrayImage random_image(int w, int h, std::mt19937_64& rng, int lo = 0, int hi = 255) {
    bccui::GrayImage img(w, h);
    std::uniform_int_distribution<int> d(lo, hi);
    for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(d(rng));
    return img;
}

inline bccui::BinaryMask disk_mask(int w, int h, double cx, double cy, double r) {
    bccui::BinaryMask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m.set(x, y);
    return m;
}

inline bccui::BinaryMask rect_mask(int w, int h, int x0, int y0, int rw, int rh) {
    bccui::BinaryMask m(w, h);
    for (int y = y0; y < y0 + rh; ++y)
        for (int x = x0; x < x0 + rw; ++x) m.set(x, y);
    return m;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("bccui_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing_support
