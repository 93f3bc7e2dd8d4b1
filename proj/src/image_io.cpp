#include "depthopt/image_io.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace depthopt {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

// Reads the next whitespace-separated token, skipping '#' comment lines.
std::string next_token(std::istream& in, std::string* comments = nullptr) {
  std::string tok;
  while (in >> tok) {
    if (tok[0] == '#') {
      std::string rest;
      std::getline(in, rest);
      if (comments) *comments += tok + rest + "\n";
      continue;
    }
    return tok;
  }
  throw std::runtime_error("unexpected end of header");
}

}  // namespace

void save_pfm(const std::string& path, const Grid& g) {
  auto out = open_out(path);
  out << "Pf\n" << g.cols() << " " << g.rows() << "\n-1.0\n";
  // PFM stores rows bottom-up.
  for (Eigen::Index r = g.rows() - 1; r >= 0; --r) {
    for (Eigen::Index c = 0; c < g.cols(); ++c) {
      const float f = float(g(r, c));
      out.write(reinterpret_cast<const char*>(&f), sizeof(f));
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Grid load_pfm(const std::string& path) {
  auto in = open_in(path);
  const std::string magic = next_token(in);
  if (magic != "Pf") throw std::runtime_error("not a grayscale PFM: " + path);
  const int w = std::stoi(next_token(in));
  const int h = std::stoi(next_token(in));
  const double scale = std::stod(next_token(in));
  if (scale >= 0) throw std::runtime_error("big-endian PFM unsupported: " + path);
  in.get();  // single whitespace after the scale
  Grid g(h, w);
  for (int r = h - 1; r >= 0; --r) {
    for (int c = 0; c < w; ++c) {
      float f;
      in.read(reinterpret_cast<char*>(&f), sizeof(f));
      g(r, c) = f;
    }
  }
  if (!in) throw std::runtime_error("truncated PFM: " + path);
  return g;
}

void save_pgm16(const std::string& path, const Grid& g, double scale) {
  require(scale > 0.0, "save_pgm16: scale must be positive");
  auto out = open_out(path);
  out << "P5\n# scale " << scale << "\n" << g.cols() << " " << g.rows() << "\n65535\n";
  for (Eigen::Index r = 0; r < g.rows(); ++r) {
    for (Eigen::Index c = 0; c < g.cols(); ++c) {
      const long v = std::clamp<long>(std::lround(g(r, c) / scale), 0, 65535);
      out.put(char((v >> 8) & 0xff));
      out.put(char(v & 0xff));
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Grid load_pgm16(const std::string& path, double* scale) {
  auto in = open_in(path);
  std::string comments;
  if (next_token(in, &comments) != "P5") throw std::runtime_error("not a PGM: " + path);
  const int w = std::stoi(next_token(in, &comments));
  const int h = std::stoi(next_token(in, &comments));
  const int maxval = std::stoi(next_token(in, &comments));
  if (maxval != 65535) throw std::runtime_error("expected 16-bit PGM: " + path);
  double s = 1.0;
  if (auto pos = comments.find("# scale "); pos != std::string::npos)
    s = std::stod(comments.substr(pos + 8));
  if (scale) *scale = s;
  in.get();
  Grid g(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const int hi = in.get(), lo = in.get();
      g(r, c) = double((hi << 8) | lo) * s;
    }
  }
  if (!in) throw std::runtime_error("truncated PGM: " + path);
  return g;
}

void save_pgm8(const std::string& path, const Grid& g) {
  auto out = open_out(path);
  out << "P5\n" << g.cols() << " " << g.rows() << "\n255\n";
  for (Eigen::Index r = 0; r < g.rows(); ++r)
    for (Eigen::Index c = 0; c < g.cols(); ++c)
      out.put(char(std::clamp<long>(std::lround(g(r, c) * 255.0), 0, 255)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

Grid load_pgm8(const std::string& path) {
  auto in = open_in(path);
  if (next_token(in) != "P5") throw std::runtime_error("not a PGM: " + path);
  const int w = std::stoi(next_token(in));
  const int h = std::stoi(next_token(in));
  const int maxval = std::stoi(next_token(in));
  if (maxval != 255) throw std::runtime_error("expected 8-bit PGM: " + path);
  in.get();
  Grid g(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) g(r, c) = double(in.get()) / 255.0;
  if (!in) throw std::runtime_error("truncated PGM: " + path);
  return g;
}

void save_ppm8(const std::string& path, const Image& img) {
  require(img.num_channels() == 3, "save_ppm8: need a 3-channel image");
  auto out = open_out(path);
  out << "P6\n" << img.cols() << " " << img.rows() << "\n255\n";
  for (int r = 0; r < img.rows(); ++r)
    for (int c = 0; c < img.cols(); ++c)
      for (int ch = 0; ch < 3; ++ch)
        out.put(char(std::clamp<long>(std::lround(img.channels[ch](r, c) * 255.0), 0, 255)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

Image load_ppm8(const std::string& path) {
  auto in = open_in(path);
  if (next_token(in) != "P6") throw std::runtime_error("not a PPM: " + path);
  const int w = std::stoi(next_token(in));
  const int h = std::stoi(next_token(in));
  const int maxval = std::stoi(next_token(in));
  if (maxval != 255) throw std::runtime_error("expected 8-bit PPM: " + path);
  in.get();
  Image img;
  img.channels.assign(3, Grid(h, w));
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      for (int ch = 0; ch < 3; ++ch) img.channels[ch](r, c) = double(in.get()) / 255.0;
  if (!in) throw std::runtime_error("truncated PPM: " + path);
  return img;
}

void save_mask_pgm(const std::string& path, const BoolGrid& mask) {
  Grid g(mask.rows(), mask.cols());
  for (Eigen::Index r = 0; r < mask.rows(); ++r)
    for (Eigen::Index c = 0; c < mask.cols(); ++c) g(r, c) = mask(r, c) ? 1.0 : 0.0;
  save_pgm8(path, g);
}

}  // namespace depthopt
