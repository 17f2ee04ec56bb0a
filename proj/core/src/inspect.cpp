#include "voxelfeat/inspect.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "voxelfeat/errors.hpp"
#include "voxelfeat/image_io.hpp"
#include "voxelfeat/tensor_file.hpp"

namespace voxelfeat {

std::string channel_name(const ChannelLayout& layout, int channel) {
    static constexpr const char* kAxes[] = {"x", "y", "z"};
    static constexpr const char* kRgb[] = {"r", "g", "b"};
    if (channel < 0 || channel >= layout.count()) raise(ErrorCode::kParameter, "channel out of range");
    if (channel < ChannelLayout::saliency) return std::string("rgb.") + kRgb[channel];
    if (channel < layout.position()) return "saliency." + std::to_string(channel - ChannelLayout::saliency);
    if (channel < layout.grid_location()) return std::string("position.") + kAxes[channel - layout.position()];
    if (channel < layout.occupancy()) return std::string("grid.") + kAxes[channel - layout.grid_location()];
    return "occupancy";
}

InspectReport inspect_grid(const VoxelGrid& grid) {
    InspectReport report;
    report.dims = grid.dims();
    report.bounds = grid.bounds();
    report.channels = grid.channel_count();
    report.saliency_channels = grid.saliency_channels();
    report.occupied_voxels = grid.occupied_count();
    report.checksum = payload_checksum(grid);
    for (int c = 0; c < grid.channel_count(); ++c) {
        const auto values = grid.channel(c);
        ChannelSummary s;
        s.name = channel_name(grid.layout(), c);
        if (!values.empty()) {
            const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
            s.min = *lo;
            s.max = *hi;
            double sum = 0.0;
            for (float v : values) sum += v;
            s.mean = sum / static_cast<double>(values.size());
        }
        report.summaries.push_back(s);
    }
    return report;
}

InspectReport inspect_file(const std::filesystem::path& path) { return inspect_grid(load_grid(path)); }

std::string format_report(const InspectReport& r) {
    std::ostringstream os;
    os << "dims " << r.dims.nx << "x" << r.dims.ny << "x" << r.dims.nz << "\n";
    os << "bounds [" << r.bounds.min_corner.x() << ", " << r.bounds.min_corner.y() << ", " << r.bounds.min_corner.z()
       << "] .. [" << r.bounds.max_corner.x() << ", " << r.bounds.max_corner.y() << ", " << r.bounds.max_corner.z()
       << "]\n";
    os << "channels " << r.channels << " (saliency " << r.saliency_channels << ")\n";
    os << "occupied " << r.occupied_voxels << "\n";
    os << "crc32 " << std::hex << std::setw(8) << std::setfill('0') << r.checksum << std::dec << std::setfill(' ')
       << "\n";
    os << std::left << std::setw(14) << "channel" << std::right << std::setw(12) << "min" << std::setw(12) << "max"
       << std::setw(12) << "mean" << "\n";
    os << std::setprecision(5);
    for (const auto& s : r.summaries) {
        os << std::left << std::setw(14) << s.name << std::right << std::setw(12) << s.min << std::setw(12) << s.max
           << std::setw(12) << s.mean << "\n";
    }
    return os.str();
}

SliceAxis parse_slice_axis(std::string_view text) {
    if (text == "x") return SliceAxis::kX;
    if (text == "y") return SliceAxis::kY;
    if (text == "z") return SliceAxis::kZ;
    raise(ErrorCode::kParameter, "slice axis must be x, y or z, got '" + std::string(text) + "'");
}

void render_slice(const VoxelGrid& grid, int channel, SliceAxis axis, int index,
                  const std::filesystem::path& png_path) {
    if (channel < 0 || channel >= grid.channel_count()) {
        raise(ErrorCode::kParameter, "channel " + std::to_string(channel) + " out of range");
    }
    const GridDims& d = grid.dims();
    const int extent = axis == SliceAxis::kX ? d.nx : axis == SliceAxis::kY ? d.ny : d.nz;
    if (index < 0 || index >= extent) raise(ErrorCode::kParameter, "slice index " + std::to_string(index) + " out of range");
    const int rows = axis == SliceAxis::kX ? d.ny : d.nx;
    const int cols = axis == SliceAxis::kZ ? d.ny : d.nz;
    auto voxel = [&](int r, int c) -> VoxelIndex {
        switch (axis) {
            case SliceAxis::kX: return {index, r, c};
            case SliceAxis::kY: return {r, index, c};
            default: return {r, c, index};
        }
    };
    const auto values = grid.channel(channel);
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double span = static_cast<double>(*hi_it) - lo;
    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const double v = grid.feature(channel, voxel(r, c));
            const double t = span > 0.0 ? (v - lo) / span : 0.0;
            pixels[static_cast<std::size_t>(r) * cols + c] = static_cast<std::uint8_t>(std::lround(t * 255.0));
        }
    }
    save_gray8_png(png_path, rows, cols, pixels);
}

}  // namespace voxelfeat
