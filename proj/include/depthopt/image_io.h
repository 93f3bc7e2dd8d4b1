#pragma once

#include <string>

#include "depthopt/types.h"

namespace depthopt {

// PFM scalar field, little-endian ("Pf", negative scale), rows bottom-up.
void save_pfm(const std::string& path, const Grid& g);
Grid load_pfm(const std::string& path);

// 16-bit binary PGM carrying value = round(g / scale); the scale factor is
// recorded in a header comment ("# scale <s>").
void save_pgm16(const std::string& path, const Grid& g, double scale);
Grid load_pgm16(const std::string& path, double* scale = nullptr);

// 8-bit binary PGM of intensities in [0,1].
void save_pgm8(const std::string& path, const Grid& g);
Grid load_pgm8(const std::string& path);

// 8-bit binary PPM of a 3-channel image in [0,1].
void save_ppm8(const std::string& path, const Image& img);
Image load_ppm8(const std::string& path);

// 0/255 mask image.
void save_mask_pgm(const std::string& path, const BoolGrid& mask);

}  // namespace depthopt
