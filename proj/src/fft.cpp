#include "cgl/fft.hpp"

#include <numbers>

namespace cgl::fft {

namespace {

// Twiddle table exp(sign * 2*pi*i * j / n), j = 0..n/2-1, freshly evaluated
// per entry so accumulation error stays at one ulp.
std::vector<std::complex<double>> twiddles(int n, int sign) {
    std::vector<std::complex<double>> tw(static_cast<std::size_t>(n / 2));
    const double base = sign * 2.0 * std::numbers::pi / n;
    for (int j = 0; j < n / 2; ++j) tw[static_cast<std::size_t>(j)] = std::polar(1.0, base * j);
    return tw;
}

}  // namespace

void transform_pow2(std::complex<double>* a, int n, int sign) {
    if (n <= 1) return;
    // bit reversal
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const auto tw = twiddles(n, sign);
    for (int len = 2; len <= n; len <<= 1) {
        const int stride = n / len;
        for (int i = 0; i < n; i += len) {
            for (int j = 0; j < len / 2; ++j) {
                const std::complex<double> w = tw[static_cast<std::size_t>(j * stride)];
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
            }
        }
    }
}

void transform_nd(std::vector<std::complex<double>>& data, const GridSpec& g, int sign) {
    const int n = g.n_per_dim;
    const std::size_t total = g.point_count();
    if (g.d == 1) {
        transform_pow2(data.data(), n, sign);
        return;
    }
    std::vector<std::complex<double>> line(static_cast<std::size_t>(n));
    // Transform along each axis; axis a has stride n^(d-1-a) in row-major layout.
    for (int axis = 0; axis < g.d; ++axis) {
        std::size_t stride = 1;
        for (int a = axis + 1; a < g.d; ++a) stride *= static_cast<std::size_t>(n);
        for (std::size_t origin = 0; origin < total; ++origin) {
            // Visit each line once: origin must be the first element of its line.
            if ((origin / stride) % static_cast<std::size_t>(n) != 0) continue;
            for (int j = 0; j < n; ++j) line[static_cast<std::size_t>(j)] = data[origin + static_cast<std::size_t>(j) * stride];
            transform_pow2(line.data(), n, sign);
            for (int j = 0; j < n; ++j) data[origin + static_cast<std::size_t>(j) * stride] = line[static_cast<std::size_t>(j)];
        }
    }
}

}  // namespace cgl::fft
