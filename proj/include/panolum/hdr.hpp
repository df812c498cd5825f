#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "panolum/common.hpp"

namespace panolum {

// Radiance picture held as linear RGB radiance (W.m-2.sr-1 per channel),
// already divided by the accumulated EXPOSURE factor.
struct RadianceImage {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;  // 3 * width * height, row-major RGB
  double exposure = 1.0;

  float& at(int x, int y, int c) { return pixels[3 * (y * width + x) + c]; }
  float at(int x, int y, int c) const {
    return pixels[3 * (y * width + x) + c];
  }
};

struct LuminanceMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major, cd/m2

  double& at(int x, int y) { return values[y * width + x]; }
  double at(int x, int y) const { return values[y * width + x]; }
};

inline RadianceImage make_image(int w, int h) {
  if (w < 1 || h < 1) throw std::invalid_argument("image dimensions must be >= 1");
  RadianceImage img;
  img.width = w;
  img.height = h;
  img.pixels.assign(static_cast<std::size_t>(3) * w * h, 0.0f);
  return img;
}

inline LuminanceMap make_map(int w, int h, double fill = 0.0) {
  if (w < 1 || h < 1) throw std::invalid_argument("map dimensions must be >= 1");
  LuminanceMap map;
  map.width = w;
  map.height = h;
  map.values.assign(static_cast<std::size_t>(w) * h, fill);
  return map;
}

namespace rgbe {

// Channel value for one RGBE byte pair: ((m + 0.5) / 256) * 2^(e - 128),
// exactly zero when the exponent byte is zero.
inline float decode_channel(uint8_t mantissa, uint8_t exponent) {
  if (exponent == 0) return 0.0f;
  return static_cast<float>((mantissa + 0.5) * std::ldexp(1.0, exponent - 136));
}

inline std::array<uint8_t, 4> encode(float r, float g, float b) {
  float maxc = std::max({r, g, b});
  if (!(maxc > 1e-38f)) return {0, 0, 0, 0};
  int e;
  std::frexp(maxc, &e);
  if (e > 127) return {255, 255, 255, 255};  // saturate far beyond any scene
  // Scale so the max channel lands in [128, 256); floor() then picks the
  // quantization bin whose midpoint the decoder returns.
  double scale = std::ldexp(1.0, 8 - e);
  auto quant = [&](float c) {
    int m = static_cast<int>(c * scale);
    return static_cast<uint8_t>(std::clamp(m, 0, 255));
  };
  return {quant(r), quant(g), quant(b), static_cast<uint8_t>(e + 128)};
}

}  // namespace rgbe

namespace detail {

inline std::string read_header_line(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw CorruptDataError("hdr: truncated header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

inline void read_exact(std::istream& in, uint8_t* buf, std::size_t n) {
  in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw CorruptDataError("hdr: truncated pixel data");
}

inline void decode_rle_scanline(std::istream& in, int width,
                                std::vector<uint8_t>& comp) {
  // comp holds 4 planes of `width` bytes: R, G, B, E.
  for (int c = 0; c < 4; ++c) {
    int pos = 0;
    while (pos < width) {
      uint8_t code;
      read_exact(in, &code, 1);
      if (code > 128) {
        int run = code - 128;
        if (pos + run > width)
          throw CorruptDataError("hdr: RLE run overflows scanline");
        uint8_t value;
        read_exact(in, &value, 1);
        std::fill_n(comp.begin() + c * width + pos, run, value);
        pos += run;
      } else {
        if (code == 0) throw CorruptDataError("hdr: zero-length RLE block");
        if (pos + code > width)
          throw CorruptDataError("hdr: RLE literal overflows scanline");
        read_exact(in, comp.data() + c * width + pos, code);
        pos += code;
      }
    }
  }
}

inline void encode_rle_component(std::ostream& out, const uint8_t* data,
                                 int width) {
  constexpr int kMinRun = 4;
  int pos = 0;
  while (pos < width) {
    // Find the next run of at least kMinRun equal bytes.
    int run_start = pos;
    int run_len = 0;
    while (run_start < width) {
      run_len = 1;
      while (run_len < 127 && run_start + run_len < width &&
             data[run_start + run_len] == data[run_start])
        ++run_len;
      if (run_len >= kMinRun) break;
      run_start += run_len;
    }
    if (run_len < kMinRun) run_start = width;
    // Emit literals up to the run.
    int lit = run_start - pos;
    while (lit > 0) {
      int n = std::min(lit, 128);
      uint8_t code = static_cast<uint8_t>(n);
      out.put(static_cast<char>(code));
      out.write(reinterpret_cast<const char*>(data + pos), n);
      pos += n;
      lit -= n;
    }
    if (run_start < width) {
      out.put(static_cast<char>(128 + run_len));
      out.put(static_cast<char>(data[run_start]));
      pos = run_start + run_len;
    }
  }
}

}  // namespace detail

inline RadianceImage read_hdr(std::istream& in) {
  std::string magic = detail::read_header_line(in);
  if (magic.rfind("#?RADIANCE", 0) != 0 && magic.rfind("#?RGBE", 0) != 0)
    throw FormatError("hdr: missing Radiance magic line");

  double exposure = 1.0;
  for (;;) {
    std::string line = detail::read_header_line(in);
    if (line.empty()) break;
    if (line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    if (key == "FORMAT") {
      if (value != "32-bit_rle_rgbe")
        throw UnsupportedFormatError("hdr: unsupported FORMAT " + value);
    } else if (key == "EXPOSURE") {
      double e = std::strtod(value.c_str(), nullptr);
      if (!(e > 0.0) || !std::isfinite(e))
        throw FormatError("hdr: invalid EXPOSURE value " + value);
      exposure *= e;
    }
  }

  std::string res = detail::read_header_line(in);
  int w = 0, h = 0;
  {
    std::istringstream rs(res);
    std::string ys, xs;
    if (!(rs >> ys >> h >> xs >> w) || ys != "-Y" || xs != "+X" || w < 1 ||
        h < 1)
      throw FormatError("hdr: unsupported resolution line '" + res + "'");
  }
  if (static_cast<long long>(w) * h > (1LL << 28))
    throw FormatError("hdr: implausible resolution");

  RadianceImage img = make_image(w, h);
  img.exposure = exposure;
  std::vector<uint8_t> comp(static_cast<std::size_t>(4) * w);
  const float inv_exposure = static_cast<float>(1.0 / exposure);

  for (int y = 0; y < h; ++y) {
    bool rle = false;
    uint8_t head[4];
    if (w >= 8 && w <= 32767) {
      detail::read_exact(in, head, 4);
      rle = head[0] == 2 && head[1] == 2 && ((head[2] << 8) | head[3]) == w;
    }
    if (rle) {
      detail::decode_rle_scanline(in, w, comp);
      for (int x = 0; x < w; ++x) {
        uint8_t e = comp[3 * w + x];
        img.at(x, y, 0) = rgbe::decode_channel(comp[x], e) * inv_exposure;
        img.at(x, y, 1) = rgbe::decode_channel(comp[w + x], e) * inv_exposure;
        img.at(x, y, 2) =
            rgbe::decode_channel(comp[2 * w + x], e) * inv_exposure;
      }
    } else {
      // Flat scanline; the peeked 4 bytes (if any) are the first pixel.
      std::vector<uint8_t> flat(static_cast<std::size_t>(4) * w);
      int have = 0;
      if (w >= 8 && w <= 32767) {
        std::copy(head, head + 4, flat.begin());
        have = 1;
      }
      detail::read_exact(in, flat.data() + 4 * have,
                         static_cast<std::size_t>(4) * (w - have));
      for (int x = 0; x < w; ++x) {
        uint8_t e = flat[4 * x + 3];
        img.at(x, y, 0) = rgbe::decode_channel(flat[4 * x], e) * inv_exposure;
        img.at(x, y, 1) =
            rgbe::decode_channel(flat[4 * x + 1], e) * inv_exposure;
        img.at(x, y, 2) =
            rgbe::decode_channel(flat[4 * x + 2], e) * inv_exposure;
      }
    }
  }
  return img;
}

inline void write_hdr(const RadianceImage& img, std::ostream& out) {
  if (img.width < 1 || img.height < 1)
    throw std::invalid_argument("write_hdr: empty image");
  if (img.pixels.size() != static_cast<std::size_t>(3) * img.width * img.height)
    throw std::invalid_argument("write_hdr: pixel array size mismatch");

  out << "#?RADIANCE\n"
      << "FORMAT=32-bit_rle_rgbe\n"
      << "\n"
      << "-Y " << img.height << " +X " << img.width << "\n";

  const int w = img.width;
  const bool rle = w >= 8 && w <= 32767;
  std::vector<uint8_t> comp(static_cast<std::size_t>(4) * w);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < w; ++x) {
      auto p = rgbe::encode(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2));
      comp[x] = p[0];
      comp[w + x] = p[1];
      comp[2 * w + x] = p[2];
      comp[3 * w + x] = p[3];
    }
    if (rle) {
      uint8_t head[4] = {2, 2, static_cast<uint8_t>(w >> 8),
                         static_cast<uint8_t>(w & 0xff)};
      out.write(reinterpret_cast<const char*>(head), 4);
      for (int c = 0; c < 4; ++c)
        detail::encode_rle_component(out, comp.data() + c * w, w);
    } else {
      for (int x = 0; x < w; ++x) {
        uint8_t px[4] = {comp[x], comp[w + x], comp[2 * w + x],
                         comp[3 * w + x]};
        out.write(reinterpret_cast<const char*>(px), 4);
      }
    }
  }
  if (!out) throw DataError("write_hdr: stream write failed");
}

inline RadianceImage read_hdr_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_hdr(in);
}

inline void write_hdr_file(const RadianceImage& img,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_hdr(img, out);
}

// Radiance photometric convention: V(lambda)-weighted sum of the RGB
// radiances times the 179 lm/W luminous efficacy.
inline double pixel_luminance(double r, double g, double b) {
  double lum = 179.0 * (0.265 * r + 0.670 * g + 0.065 * b);
  return std::clamp(lum, 0.0, kSunLuminance);
}

inline LuminanceMap luminance_map(const RadianceImage& img) {
  LuminanceMap map = make_map(img.width, img.height);
  const std::size_t n = map.values.size();
  for (std::size_t i = 0; i < n; ++i)
    map.values[i] = pixel_luminance(img.pixels[3 * i], img.pixels[3 * i + 1],
                                    img.pixels[3 * i + 2]);
  return map;
}

// Grayscale radiance image whose luminance_map() reproduces `map`.
inline RadianceImage to_gray_image(const LuminanceMap& map) {
  RadianceImage img = make_image(map.width, map.height);
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    float v = static_cast<float>(map.values[i] / 179.0);
    img.pixels[3 * i] = img.pixels[3 * i + 1] = img.pixels[3 * i + 2] = v;
  }
  return img;
}

namespace detail {

// Blue -> cyan -> green -> yellow -> red, linearly interpolated between the
// five anchors. Index 0 maps the scale floor, 255 the ceiling.
inline const std::array<std::array<uint8_t, 3>, 256>& falsecolor_ramp() {
  static const auto ramp = [] {
    constexpr double anchor_s[5] = {0.0, 0.25, 0.5, 0.75, 1.0};
    constexpr double anchor_rgb[5][3] = {{0, 0, 255},
                                         {0, 255, 255},
                                         {0, 255, 0},
                                         {255, 255, 0},
                                         {255, 0, 0}};
    std::array<std::array<uint8_t, 3>, 256> table{};
    for (int i = 0; i < 256; ++i) {
      double s = i / 255.0;
      int seg = std::min(3, static_cast<int>(s * 4.0));
      double t = (s - anchor_s[seg]) / 0.25;
      for (int c = 0; c < 3; ++c) {
        double v = anchor_rgb[seg][c] +
                   t * (anchor_rgb[seg + 1][c] - anchor_rgb[seg][c]);
        table[i][c] = static_cast<uint8_t>(std::lround(v));
      }
    }
    return table;
  }();
  return ramp;
}

}  // namespace detail

// Binary PPM (P6) of the map on a logarithmic [lo, hi] scale.
inline std::vector<uint8_t> falsecolor(const LuminanceMap& map, double lo,
                                       double hi) {
  if (!(lo > 0.0) || !(hi > lo))
    throw std::invalid_argument("falsecolor: require 0 < lo < hi");
  const auto& ramp = detail::falsecolor_ramp();
  std::string header = "P6\n" + std::to_string(map.width) + " " +
                       std::to_string(map.height) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + map.values.size() * 3);
  const double inv_span = 1.0 / std::log10(hi / lo);
  for (double lum : map.values) {
    double s = std::clamp(std::log10(lum / lo) * inv_span, 0.0, 1.0);
    int idx = static_cast<int>(std::lround(s * 255.0));
    const auto& rgb = ramp[idx];
    out.push_back(rgb[0]);
    out.push_back(rgb[1]);
    out.push_back(rgb[2]);
  }
  return out;
}

}  // namespace panolum
