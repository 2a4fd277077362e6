#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace pinn {

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 255) {}
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
};

void write_ppm(const std::filesystem::path& path, const Image& img);

/// nx-by-ny field rendered with a blue-white-red diverging map symmetric
/// about zero (values row-major, y fastest). Each cell becomes a square of
/// `cell` pixels.
Image heatmap(std::span<const double> values, int nx, int ny, int cell = 12);

/// Simple polyline chart of one or two series over x; the second series (if
/// any) is drawn in a lighter color.
Image line_plot(std::span<const double> x, std::span<const double> y1,
                std::span<const double> y2 = {}, int width = 900, int height = 480);

}  // namespace pinn
