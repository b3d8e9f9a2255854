#include "cgl/grid.hpp"

#include <cmath>
#include <numbers>

#include "cgl/errors.hpp"

namespace cgl {

std::int64_t norm_sq(const Wavevector& k) {
    std::int64_t s = 0;
    for (int c : k) s += static_cast<std::int64_t>(c) * c;
    return s;
}

bool is_zero(const Wavevector& k) {
    for (int c : k)
        if (c != 0) return false;
    return true;
}

CanonicalRep canonical_rep(const Wavevector& k) {
    for (int c : k) {
        if (c > 0) return {k, +1};
        if (c < 0) {
            Wavevector flipped(k.size());
            for (std::size_t i = 0; i < k.size(); ++i) flipped[i] = -k[i];
            return {flipped, -1};
        }
    }
    return {k, +1};
}

GridSpec::GridSpec(int dim, int n, double dealias) : d(dim), n_per_dim(n), dealias_fraction(dealias) {
    validate();
}

void GridSpec::validate() const {
    if (d < 1) throw InputError("grid dimension must be >= 1");
    if (n_per_dim < 4 || (n_per_dim & (n_per_dim - 1)) != 0)
        throw InputError("n_per_dim must be a power of two >= 4");
    if (!(dealias_fraction > 0.0) || dealias_fraction > 1.0)
        throw InputError("dealias_fraction must lie in (0, 1]");
}

std::size_t GridSpec::point_count() const {
    std::size_t n = 1;
    for (int i = 0; i < d; ++i) n *= static_cast<std::size_t>(n_per_dim);
    return n;
}

int GridSpec::dealias_cutoff() const {
    int cut = static_cast<int>(std::floor(dealias_fraction * (n_per_dim / 2) + 1e-12));
    return cut < max_mode() ? cut : max_mode();
}

std::size_t flat_bin_index(const GridSpec& g, const std::vector<int>& bins) {
    std::size_t idx = 0;
    for (int a = 0; a < g.d; ++a) idx = idx * static_cast<std::size_t>(g.n_per_dim) + static_cast<std::size_t>(bins[a]);
    return idx;
}

std::vector<double> grid_point(const GridSpec& g, std::size_t flat) {
    std::vector<double> x(static_cast<std::size_t>(g.d));
    const double h = 2.0 * std::numbers::pi / g.n_per_dim;
    for (int a = g.d - 1; a >= 0; --a) {
        x[a] = h * static_cast<double>(flat % static_cast<std::size_t>(g.n_per_dim));
        flat /= static_cast<std::size_t>(g.n_per_dim);
    }
    return x;
}

}  // namespace cgl
