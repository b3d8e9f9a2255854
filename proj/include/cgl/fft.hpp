#pragma once

#include <complex>
#include <vector>

#include "cgl/grid.hpp"

namespace cgl::fft {

// In-place radix-2 transform of a power-of-two-length vector.
// sign = -1: forward (e^{-i k x}), sign = +1: inverse. Unnormalized.
void transform_pow2(std::complex<double>* a, int n, int sign);

// Separable d-dimensional transform over the grid's bin layout.
void transform_nd(std::vector<std::complex<double>>& data, const GridSpec& g, int sign);

}  // namespace cgl::fft
