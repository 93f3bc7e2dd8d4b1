#pragma once

#include "depthopt/types.h"

namespace depthopt {

// Bounded depth parameterization rho = alpha / (D + alpha) and its inverse.
// Invalid pixels carry rho = 1 (the D = 0 sentinel) and stay flagged.

// Clamp floor keeping decoded depth finite.
inline constexpr double kRhoMin = 1e-4;

TransformedDepth encode(const DepthMap& d, double alpha);

DepthMap decode(const TransformedDepth& t);

// Mean-consistency loss (1 - (1/N) sum (1-rho)/rho)^2 over valid pixels;
// zero exactly when alpha is the mean of the decoded depth map.
double alpha_loss(const TransformedDepth& t);

}  // namespace depthopt
