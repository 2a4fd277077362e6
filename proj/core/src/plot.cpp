#include "pinn/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "pinn/errors.hpp"

namespace pinn {

void Image::set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  if (x < 0 || y < 0 || x >= width || y >= height) return;
  std::size_t i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                   static_cast<std::size_t>(x)) * 3;
  rgb[i] = r;
  rgb[i + 1] = g;
  rgb[i + 2] = b;
}

void write_ppm(const std::filesystem::path& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.rgb.data()),
            static_cast<std::streamsize>(img.rgb.size()));
}

namespace {

void diverging_color(double t, std::uint8_t* r, std::uint8_t* g, std::uint8_t* b) {
  // t in [-1, 1]: blue -> white -> red
  t = std::clamp(t, -1.0, 1.0);
  double rr, gg, bb;
  if (t < 0.0) {
    rr = 1.0 + t;
    gg = 1.0 + t;
    bb = 1.0;
  } else {
    rr = 1.0;
    gg = 1.0 - t;
    bb = 1.0 - t;
  }
  *r = static_cast<std::uint8_t>(std::lround(255.0 * rr));
  *g = static_cast<std::uint8_t>(std::lround(255.0 * gg));
  *b = static_cast<std::uint8_t>(std::lround(255.0 * bb));
}

}  // namespace

Image heatmap(std::span<const double> values, int nx, int ny, int cell) {
  if (nx < 1 || ny < 1 || values.size() != static_cast<std::size_t>(nx) * ny)
    throw Error("heatmap: value count does not match nx*ny");
  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, std::abs(v));
  if (vmax == 0.0) vmax = 1.0;
  Image img(nx * cell, ny * cell);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      std::uint8_t r, g, b;
      diverging_color(values[static_cast<std::size_t>(i) * ny + j] / vmax, &r, &g, &b);
      for (int px = 0; px < cell; ++px)
        for (int py = 0; py < cell; ++py)
          img.set(i * cell + px, (ny - 1 - j) * cell + py, r, g, b);
    }
  }
  return img;
}

Image line_plot(std::span<const double> x, std::span<const double> y1,
                std::span<const double> y2, int width, int height) {
  if (x.size() != y1.size() || x.size() < 2) throw Error("line_plot: bad series");
  Image img(width, height);
  const int margin = 24;
  double xmin = x.front(), xmax = x.back();
  double ymin = y1[0], ymax = y1[0];
  for (double v : y1) {
    ymin = std::min(ymin, v);
    ymax = std::max(ymax, v);
  }
  for (double v : y2) {
    ymin = std::min(ymin, v);
    ymax = std::max(ymax, v);
  }
  if (ymax == ymin) {
    ymax += 1.0;
    ymin -= 1.0;
  }
  auto px = [&](double vx) {
    return margin + static_cast<int>((vx - xmin) / (xmax - xmin) * (width - 2 * margin));
  };
  auto py = [&](double vy) {
    return height - margin -
           static_cast<int>((vy - ymin) / (ymax - ymin) * (height - 2 * margin));
  };
  // axes
  for (int i = margin; i < width - margin; ++i) img.set(i, py(0.0), 180, 180, 180);
  for (int j = margin; j < height - margin; ++j) img.set(px(xmin), j, 180, 180, 180);

  auto draw_series = [&](std::span<const double> ys, std::uint8_t r, std::uint8_t g,
                         std::uint8_t b) {
    for (std::size_t k = 1; k < ys.size(); ++k) {
      int x0 = px(x[k - 1]), y0 = py(ys[k - 1]);
      int x1 = px(x[k]), y1p = py(ys[k]);
      int steps = std::max(std::abs(x1 - x0), std::abs(y1p - y0)) + 1;
      for (int s = 0; s <= steps; ++s) {
        double f = static_cast<double>(s) / steps;
        img.set(static_cast<int>(x0 + f * (x1 - x0)), static_cast<int>(y0 + f * (y1p - y0)), r, g, b);
      }
    }
  };
  if (!y2.empty() && y2.size() == x.size()) draw_series(y2, 230, 150, 60);
  draw_series(y1, 30, 60, 200);
  return img;
}

}  // namespace pinn
