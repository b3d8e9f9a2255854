#pragma once

#include <complex>
#include <vector>

#include "cgl/grid.hpp"
#include "cgl/trig_poly.hpp"

namespace cgl {

using Complex = std::complex<double>;

/// Complex field on the torus stored as truncated Fourier coefficients.
/// Storage is the full FFT bin lattice in row-major order; Nyquist planes
/// (bin n/2 on any axis) are identically zero, so the live modes are exactly
/// the retained lattice |k_i| <= n/2 - 1. Normalization follows the mean-value
/// convention: coeff(0) of the constant field 1 is 1.
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(GridSpec g, bool real_valued = false);

    static SpectralField analyze(const GridSpec& g, const std::vector<Complex>& samples);
    std::vector<Complex> synthesize() const;

    const GridSpec& grid() const { return grid_; }
    bool matches(const SpectralField& o) const { return grid_ == o.grid_; }

    Complex coeff(const Wavevector& k) const;  // 0 outside the retained lattice
    void set_coeff(const Wavevector& k, Complex v);

    double sobolev_norm(int s) const;
    double l2_norm() const { return sobolev_norm(0); }
    double max_modulus() const;

    bool real_valued() const { return real_valued_; }
    void set_real_valued(bool f) { real_valued_ = f; }
    bool conjugate_symmetric(double tol) const;

    void zero_nyquist();
    void dealias();

    const std::vector<Complex>& coeffs() const { return coeffs_; }
    std::vector<Complex>& coeffs() { return coeffs_; }

    SpectralField& operator+=(const SpectralField& o);
    SpectralField& operator-=(const SpectralField& o);
    SpectralField& operator*=(Complex z);
    SpectralField& operator*=(double s);

private:
    GridSpec grid_;
    std::vector<Complex> coeffs_;
    bool real_valued_ = false;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);

double distance_hs(const SpectralField& a, const SpectralField& b, int s);

/// Grid product with dealiasing per the grid's dealias_fraction.
SpectralField pointwise_multiply(const SpectralField& f, const SpectralField& g);

/// analyze(e^{z phi(x)} * synthesize(psi)); grid-exact up to aliasing, no
/// dealiasing (so the (+z, -z) pair inverts to round-off). Throws RangeError
/// if Re(z) * phi would overflow exp.
SpectralField exp_multiplier(const TrigPolynomial& phi, Complex z, const SpectralField& psi);

/// Exact coefficient embedding of a trig polynomial (degree must fit the grid).
SpectralField to_field(const TrigPolynomial& p, const GridSpec& g);

/// Inverse of to_field for conjugate-symmetric fields, keeping |k_i| <= degree_cap.
TrigPolynomial to_trig_polynomial(const SpectralField& f, int degree_cap, double asym_tol = 1e-9);

}  // namespace cgl
