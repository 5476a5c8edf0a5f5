#include "aberrasim/io/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <vector>

#include "aberrasim/io/io_error.hpp"

namespace aberrasim {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

ImageBuffer<float> read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("read_png: cannot open " + path);

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("read_png: png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("read_png: png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("read_png: decode failed for " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  int bit_depth = png_get_bit_depth(png, info);

  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (bit_depth == 16) png_set_swap(png);  // stream is big-endian
  png_read_update_info(png, info);

  bit_depth = png_get_bit_depth(png, info);
  const int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("read_png: unsupported channel count");
  }

  const size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<png_byte> data(rowbytes * height);
  std::vector<png_bytep> rows(height);
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = data.data() + r * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  ImageBuffer<float> img(static_cast<int>(height), static_cast<int>(width),
                         channels);
  const float scale = bit_depth == 16 ? 1.0f / 65535.0f : 1.0f / 255.0f;
  for (png_uint_32 r = 0; r < height; ++r) {
    if (bit_depth == 16) {
      const png_uint_16* row = reinterpret_cast<png_uint_16*>(rows[r]);
      for (png_uint_32 c = 0; c < width; ++c)
        for (int ch = 0; ch < channels; ++ch)
          img.planes[ch](r, c) = row[c * channels + ch] * scale;
    } else {
      const png_byte* row = rows[r];
      for (png_uint_32 c = 0; c < width; ++c)
        for (int ch = 0; ch < channels; ++ch)
          img.planes[ch](r, c) = row[c * channels + ch] * scale;
    }
  }
  return img;
}

void write_png(const std::string& path, const ImageBuffer<float>& img,
               int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16)
    throw std::invalid_argument("write_png: bit depth must be 8 or 16");
  if (img.channels != 1 && img.channels != 3)
    throw std::invalid_argument("write_png: channels must be 1 or 3");

  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("write_png: cannot open " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  if (!png) throw IoError("write_png: png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("write_png: png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("write_png: encode failed for " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width, img.height, bit_depth,
               img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const int channels = img.channels;
  const double maxval = bit_depth == 16 ? 65535.0 : 255.0;
  std::vector<png_byte> row(static_cast<size_t>(img.width) * channels *
                            (bit_depth / 8));
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c)
      for (int ch = 0; ch < channels; ++ch) {
        const double v =
            std::min(std::max(double(img.planes[ch](r, c)), 0.0), 1.0);
        const unsigned q = static_cast<unsigned>(std::lround(v * maxval));
        if (bit_depth == 16) {  // PNG streams are big-endian
          row[(c * channels + ch) * 2] = static_cast<png_byte>(q >> 8);
          row[(c * channels + ch) * 2 + 1] = static_cast<png_byte>(q & 0xff);
        } else {
          row[c * channels + ch] = static_cast<png_byte>(q);
        }
      }
    png_write_row(png, row.data());
  }
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
}

}  // namespace aberrasim
