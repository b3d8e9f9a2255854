#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cgl {

// Integer lattice frequency on the d-torus.
using Wavevector = std::vector<int>;

std::int64_t norm_sq(const Wavevector& k);
bool is_zero(const Wavevector& k);

// Canonical representative of the pair {k, -k}: first nonzero component
// positive. sign = +1 if rep == k, -1 if rep == -k.
struct CanonicalRep {
    Wavevector rep;
    int sign;
};
CanonicalRep canonical_rep(const Wavevector& k);

// Uniform grid on [0, 2pi)^d with n_per_dim points per axis (power of two).
// Retained Fourier modes satisfy |k_i| <= n_per_dim/2 - 1.
struct GridSpec {
    int d = 1;
    int n_per_dim = 64;
    double dealias_fraction = 2.0 / 3.0;

    GridSpec() = default;
    GridSpec(int dim, int n, double dealias = 2.0 / 3.0);

    void validate() const;
    std::size_t point_count() const;
    int max_mode() const { return n_per_dim / 2 - 1; }
    // Modes with some |k_i| above this are zeroed after grid products.
    int dealias_cutoff() const;

    bool operator==(const GridSpec&) const = default;
};

// FFT bin of a signed frequency component, and back.
inline int bin_of_mode(int k, int n) { return k >= 0 ? k : k + n; }
inline int mode_of_bin(int bin, int n) { return bin <= n / 2 - 1 ? bin : bin - n; }

// Row-major flattening over FFT bins, axis 0 slowest.
std::size_t flat_bin_index(const GridSpec& g, const std::vector<int>& bins);

// Grid coordinates of flat sample index.
std::vector<double> grid_point(const GridSpec& g, std::size_t flat);

// Visit every retained mode in row-major signed order (each axis from
// -max_mode to +max_mode, axis 0 slowest).
template <typename F>
void for_each_retained_mode(const GridSpec& g, F&& visit) {
    const int m = g.max_mode();
    Wavevector k(static_cast<std::size_t>(g.d), -m);
    for (;;) {
        visit(static_cast<const Wavevector&>(k));
        int axis = g.d - 1;
        for (; axis >= 0; --axis) {
            if (++k[axis] <= m) break;
            k[axis] = -m;
        }
        if (axis < 0) break;
    }
}

}  // namespace cgl
