#include <png.h>

#include <cstdio>
#include <memory>
#include <stdexcept>
#include <vector>

#include "mirlab/sim/render.h"

namespace mirlab::sim {

void write_png(const std::string& path, const Observation& obs) {
  const std::size_t width = kImageSize * kViews, height = kImageSize;
  std::vector<std::uint8_t> rgb(width * height * 3);
  for (std::size_t v = 0; v < kViews; ++v) {
    for (std::size_t r = 0; r < height; ++r) {
      for (std::size_t c = 0; c < kImageSize; ++c) {
        for (std::size_t ch = 0; ch < kChannels; ++ch) {
          rgb[(r * width + v * kImageSize + c) * 3 + ch] = obs.at(v, ch, r, c);
        }
      }
    }
  }

  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng failed while writing '" + path + "'");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t r = 0; r < height; ++r) png_write_row(png, rgb.data() + r * width * 3);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace mirlab::sim
