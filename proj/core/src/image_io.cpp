#include "voxelfeat/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>

#include "voxelfeat/errors.hpp"
#include "voxelfeat/tensor_file.hpp"

namespace voxelfeat {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.string().c_str(), mode));
    if (!f) {
        raise(mode[0] == 'r' ? ErrorCode::kMissingFile : ErrorCode::kIo, "cannot open " + path.string());
    }
    return f;
}

struct DecodedPng {
    int width = 0;
    int height = 0;
    int channels = 0;
    int bit_depth = 0;
    std::vector<std::uint8_t> bytes;  // row-major, 16-bit samples big-endian
};

enum class Want { kRgb8, kGray16, kHeaderOnly };

DecodedPng decode_png(const std::filesystem::path& path, Want want) {
    FilePtr file = open_file(path, "rb");
    png_byte signature[8];
    if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
        raise(ErrorCode::kFormat, path.string() + " is not a PNG file");
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        raise(ErrorCode::kIo, "libpng initialization failed");
    }
    DecodedPng out;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        raise(ErrorCode::kFormat, "corrupt PNG " + path.string());
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);

    bool ok = true;
    if (want == Want::kRgb8) {
        if (depth == 16) png_set_strip_16(png);
        if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
        if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
        if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
        if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
    } else if (want == Want::kGray16) {
        ok = color == PNG_COLOR_TYPE_GRAY && depth == 16;
    }
    if (want == Want::kHeaderOnly || !ok) {
        png_destroy_read_struct(&png, &info, nullptr);
        if (!ok) raise(ErrorCode::kFormat, path.string() + " is not a 16-bit grayscale PNG");
        return out;
    }
    png_read_update_info(png, info);
    out.channels = png_get_channels(png, info);
    out.bit_depth = png_get_bit_depth(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    out.bytes.resize(stride * static_cast<std::size_t>(out.height));
    rows.resize(static_cast<std::size_t>(out.height));
    for (int r = 0; r < out.height; ++r) rows[static_cast<std::size_t>(r)] = out.bytes.data() + stride * r;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

void encode_png(const std::filesystem::path& path, int width, int height, int color_type, int bit_depth,
                const std::vector<std::uint8_t>& bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    {
        FilePtr file = open_file(tmp, "wb");
        png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        png_infop info = png ? png_create_info_struct(png) : nullptr;
        if (!png || !info) {
            png_destroy_write_struct(&png, &info);
            raise(ErrorCode::kIo, "libpng initialization failed");
        }
        std::vector<png_bytep> rows(static_cast<std::size_t>(height));
        if (setjmp(png_jmpbuf(png))) {
            png_destroy_write_struct(&png, &info);
            raise(ErrorCode::kIo, "failed writing PNG " + path.string());
        }
        png_init_io(png, file.get());
        png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
                     color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        const std::size_t stride = bytes.size() / static_cast<std::size_t>(height);
        for (int r = 0; r < height; ++r) {
            rows[static_cast<std::size_t>(r)] = const_cast<png_bytep>(bytes.data() + stride * r);
        }
        png_write_image(png, rows.data());
        png_write_end(png, nullptr);
        png_destroy_write_struct(&png, &info);
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

RgbImage load_rgb_png(const std::filesystem::path& path) {
    const DecodedPng png = decode_png(path, Want::kRgb8);
    if (png.channels != 3 || png.bit_depth != 8) raise(ErrorCode::kFormat, path.string() + " did not decode to 8-bit RGB");
    RgbImage image(png.height, png.width, 3);
    for (std::size_t i = 0; i < image.data.size(); ++i) image.data[i] = png.bytes[i] / 255.0;
    return image;
}

void save_rgb_png(const std::filesystem::path& path, const RgbImage& image) {
    if (image.channels != 3) raise(ErrorCode::kShape, "save_rgb_png expects 3 channels");
    std::vector<std::uint8_t> bytes(image.data.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        bytes[i] = static_cast<std::uint8_t>(std::lround(std::clamp(image.data[i], 0.0, 1.0) * 255.0));
    }
    encode_png(path, image.width, image.height, PNG_COLOR_TYPE_RGB, 8, bytes);
}

DepthImage load_depth_png(const std::filesystem::path& path, double meters_per_unit) {
    if (!(meters_per_unit > 0.0)) raise(ErrorCode::kParameter, "depth scale must be positive");
    const DecodedPng png = decode_png(path, Want::kGray16);
    DepthImage depth(png.height, png.width);
    for (int r = 0; r < png.height; ++r) {
        for (int c = 0; c < png.width; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * png.width + c;
            const unsigned raw = (static_cast<unsigned>(png.bytes[2 * i]) << 8) | png.bytes[2 * i + 1];
            if (raw == 0) {
                depth.invalidate(r, c);
            } else {
                depth.set(r, c, raw * meters_per_unit);
            }
        }
    }
    return depth;
}

void save_depth_png(const std::filesystem::path& path, const DepthImage& depth, double meters_per_unit) {
    if (!(meters_per_unit > 0.0)) raise(ErrorCode::kParameter, "depth scale must be positive");
    std::vector<std::uint8_t> bytes(depth.pixel_count() * 2, 0);
    for (std::size_t i = 0; i < depth.pixel_count(); ++i) {
        if (!depth.valid[i]) continue;
        const double units = std::round(depth.values[i] / meters_per_unit);
        if (!(units >= 1.0 && units <= 65535.0)) continue;
        const auto raw = static_cast<unsigned>(units);
        bytes[2 * i] = static_cast<std::uint8_t>(raw >> 8);
        bytes[2 * i + 1] = static_cast<std::uint8_t>(raw & 0xFF);
    }
    encode_png(path, depth.width, depth.height, PNG_COLOR_TYPE_GRAY, 16, bytes);
}

void save_gray8_png(const std::filesystem::path& path, int height, int width, const std::vector<std::uint8_t>& pixels) {
    if (pixels.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
        raise(ErrorCode::kShape, "gray image size mismatch");
    }
    encode_png(path, width, height, PNG_COLOR_TYPE_GRAY, 8, pixels);
}

std::pair<int, int> png_extent(const std::filesystem::path& path) {
    const DecodedPng png = decode_png(path, Want::kHeaderOnly);
    return {png.width, png.height};
}

SaliencyMap load_saliency_file(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    if (bytes.size() < 12) raise(ErrorCode::kFormat, "attention file " + path.string() + " is truncated");
    auto u32 = [&](std::size_t off) {
        std::uint32_t v = 0;
        for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes[off + b]) << (8 * b);
        return v;
    };
    const std::uint32_t h = u32(0), w = u32(4), k = u32(8);
    const std::size_t count = static_cast<std::size_t>(h) * w * k;
    if (h == 0 || w == 0 || k == 0 || h > 1u << 15 || w > 1u << 15 || k > 64 || bytes.size() != 12 + count * 4) {
        raise(ErrorCode::kFormat, "attention file " + path.string() + " has an inconsistent header");
    }
    SaliencyMap map(static_cast<int>(h), static_cast<int>(w), static_cast<int>(k));
    for (std::size_t i = 0; i < count; ++i) map.data[i] = std::bit_cast<float>(u32(12 + 4 * i));
    return map;
}

void save_saliency_file(const std::filesystem::path& path, const SaliencyMap& map) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(12 + map.data.size() * 4);
    auto put = [&](std::uint32_t v) {
        for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
    };
    put(static_cast<std::uint32_t>(map.height));
    put(static_cast<std::uint32_t>(map.width));
    put(static_cast<std::uint32_t>(map.channels));
    for (double v : map.data) put(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    write_file_atomic(path, bytes);
}

}  // namespace voxelfeat
