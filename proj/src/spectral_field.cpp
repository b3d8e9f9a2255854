#include "cgl/spectral_field.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "cgl/errors.hpp"
#include "cgl/fft.hpp"

namespace cgl {

namespace {

double pow_int(double base, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

// |k|^2 of the mode held in flat bin index.
std::int64_t bin_norm_sq(const GridSpec& g, std::size_t flat) {
    std::int64_t s = 0;
    for (int a = g.d - 1; a >= 0; --a) {
        const int bin = static_cast<int>(flat % static_cast<std::size_t>(g.n_per_dim));
        flat /= static_cast<std::size_t>(g.n_per_dim);
        const std::int64_t k = mode_of_bin(bin, g.n_per_dim);
        s += k * k;
    }
    return s;
}

}  // namespace

SpectralField::SpectralField(GridSpec g, bool real_valued)
    : grid_(g), coeffs_(g.point_count(), Complex(0.0, 0.0)), real_valued_(real_valued) {
    grid_.validate();
}

SpectralField SpectralField::analyze(const GridSpec& g, const std::vector<Complex>& samples) {
    if (samples.size() != g.point_count())
        throw InputError("analyze: expected " + std::to_string(g.point_count()) + " samples, got " +
                         std::to_string(samples.size()));
    SpectralField f(g);
    f.coeffs_ = samples;
    fft::transform_nd(f.coeffs_, g, -1);
    const double scale = 1.0 / static_cast<double>(g.point_count());
    for (auto& c : f.coeffs_) c *= scale;
    f.zero_nyquist();
    return f;
}

std::vector<Complex> SpectralField::synthesize() const {
    std::vector<Complex> s = coeffs_;
    fft::transform_nd(s, grid_, +1);
    return s;
}

Complex SpectralField::coeff(const Wavevector& k) const {
    if (static_cast<int>(k.size()) != grid_.d) throw InputError("wavevector dimension mismatch");
    std::vector<int> bins(k.size());
    for (std::size_t a = 0; a < k.size(); ++a) {
        if (std::abs(k[a]) > grid_.max_mode()) return Complex(0.0, 0.0);
        bins[a] = bin_of_mode(k[a], grid_.n_per_dim);
    }
    return coeffs_[flat_bin_index(grid_, bins)];
}

void SpectralField::set_coeff(const Wavevector& k, Complex v) {
    if (static_cast<int>(k.size()) != grid_.d) throw InputError("wavevector dimension mismatch");
    std::vector<int> bins(k.size());
    for (std::size_t a = 0; a < k.size(); ++a) {
        if (std::abs(k[a]) > grid_.max_mode()) throw InputError("mode outside retained lattice");
        bins[a] = bin_of_mode(k[a], grid_.n_per_dim);
    }
    coeffs_[flat_bin_index(grid_, bins)] = v;
}

double SpectralField::sobolev_norm(int s) const {
    if (s < 0) throw InputError("Sobolev index must be >= 0");
    double acc = 0.0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        const double m2 = std::norm(coeffs_[i]);
        if (m2 == 0.0) continue;
        acc += pow_int(1.0 + static_cast<double>(bin_norm_sq(grid_, i)), s) * m2;
    }
    return std::sqrt(acc);
}

double SpectralField::max_modulus() const {
    const auto s = synthesize();
    double m = 0.0;
    for (const auto& z : s) m = std::max(m, std::abs(z));
    return m;
}

bool SpectralField::conjugate_symmetric(double tol) const {
    double scale = 0.0;
    for (const auto& c : coeffs_) scale = std::max(scale, std::abs(c));
    if (scale == 0.0) return true;
    bool ok = true;
    for_each_retained_mode(grid_, [&](const Wavevector& k) {
        Wavevector mk(k.size());
        for (std::size_t a = 0; a < k.size(); ++a) mk[a] = -k[a];
        if (std::abs(coeff(k) - std::conj(coeff(mk))) > tol * scale) ok = false;
    });
    return ok;
}

void SpectralField::zero_nyquist() {
    const int n = grid_.n_per_dim;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        std::size_t rest = i;
        for (int a = grid_.d - 1; a >= 0; --a) {
            const int bin = static_cast<int>(rest % static_cast<std::size_t>(n));
            rest /= static_cast<std::size_t>(n);
            if (bin == n / 2) {
                coeffs_[i] = Complex(0.0, 0.0);
                break;
            }
        }
    }
}

void SpectralField::dealias() {
    const int n = grid_.n_per_dim;
    const int cut = grid_.dealias_cutoff();
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        std::size_t rest = i;
        for (int a = grid_.d - 1; a >= 0; --a) {
            const int bin = static_cast<int>(rest % static_cast<std::size_t>(n));
            rest /= static_cast<std::size_t>(n);
            if (std::abs(mode_of_bin(bin, n)) > cut) {
                coeffs_[i] = Complex(0.0, 0.0);
                break;
            }
        }
    }
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
    if (!matches(o)) throw InputError("grid mismatch");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    real_valued_ = real_valued_ && o.real_valued_;
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
    if (!matches(o)) throw InputError("grid mismatch");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    real_valued_ = real_valued_ && o.real_valued_;
    return *this;
}

SpectralField& SpectralField::operator*=(Complex z) {
    for (auto& c : coeffs_) c *= z;
    if (z.imag() != 0.0) real_valued_ = false;
    return *this;
}

SpectralField& SpectralField::operator*=(double s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }

double distance_hs(const SpectralField& a, const SpectralField& b, int s) {
    SpectralField d = a;
    d -= b;
    return d.sobolev_norm(s);
}

SpectralField pointwise_multiply(const SpectralField& f, const SpectralField& g) {
    if (!f.matches(g)) throw InputError("pointwise_multiply: grid mismatch");
    const auto sf = f.synthesize();
    const auto sg = g.synthesize();
    std::vector<Complex> prod(sf.size());
    for (std::size_t i = 0; i < sf.size(); ++i) prod[i] = sf[i] * sg[i];
    SpectralField out = SpectralField::analyze(f.grid(), prod);
    out.dealias();
    out.set_real_valued(f.real_valued() && g.real_valued());
    return out;
}

SpectralField exp_multiplier(const TrigPolynomial& phi, Complex z, const SpectralField& psi) {
    if (phi.dim() != psi.grid().d) throw InputError("exp_multiplier: dimension mismatch");
    if (z == Complex(0.0, 0.0) || phi.empty(0.0)) return psi;
    const auto phis = phi.sample(psi.grid());
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : phis) mx = std::max(mx, z.real() * v);
    if (mx > 700.0)
        throw RangeError("exp_multiplier: exponent " + std::to_string(mx) +
                         " would overflow (Re z = " + std::to_string(z.real()) + ")");
    auto s = psi.synthesize();
    for (std::size_t i = 0; i < s.size(); ++i) s[i] *= std::exp(z * phis[i]);
    SpectralField out = SpectralField::analyze(psi.grid(), s);
    out.set_real_valued(psi.real_valued() && z.imag() == 0.0);
    return out;
}

SpectralField to_field(const TrigPolynomial& p, const GridSpec& g) {
    if (p.dim() != g.d) throw InputError("to_field: dimension mismatch");
    if (p.degree() > g.max_mode()) throw InputError("to_field: degree exceeds retained lattice");
    SpectralField f(g, /*real_valued=*/true);
    Wavevector mk(static_cast<std::size_t>(g.d));
    for (const auto& [k, t] : p.terms()) {
        if (is_zero(k)) {
            f.set_coeff(k, f.coeff(k) + Complex(t.cos_coeff, 0.0));
            continue;
        }
        for (std::size_t a = 0; a < k.size(); ++a) mk[a] = -k[a];
        // a cos + b sin = e^{i<k,x>} (a - ib)/2 + e^{-i<k,x>} (a + ib)/2
        f.set_coeff(k, f.coeff(k) + 0.5 * Complex(t.cos_coeff, -t.sin_coeff));
        f.set_coeff(mk, f.coeff(mk) + 0.5 * Complex(t.cos_coeff, t.sin_coeff));
    }
    return f;
}

TrigPolynomial to_trig_polynomial(const SpectralField& f, int degree_cap, double asym_tol) {
    const GridSpec& g = f.grid();
    double scale = 0.0;
    for (const auto& c : f.coeffs()) scale = std::max(scale, std::abs(c));
    TrigPolynomial p(g.d);
    if (scale == 0.0) return p;
    double worst = 0.0;
    for_each_retained_mode(g, [&](const Wavevector& k) {
        bool canonical = is_zero(k) || canonical_rep(k).sign > 0;
        if (!canonical) return;
        int deg = 0;
        for (int c : k) deg = std::max(deg, std::abs(c));
        if (deg > degree_cap) return;
        const Complex ck = f.coeff(k);
        if (is_zero(k)) {
            worst = std::max(worst, std::abs(ck.imag()));
            p.add_cos(k, ck.real());
            return;
        }
        Wavevector mk(k.size());
        for (std::size_t a = 0; a < k.size(); ++a) mk[a] = -k[a];
        const Complex cmk = f.coeff(mk);
        worst = std::max(worst, std::abs(ck - std::conj(cmk)));
        p.add_cos(k, (ck + cmk).real());
        p.add_sin(k, (cmk - ck).imag());
    });
    if (worst > asym_tol * scale)
        throw InputError("to_trig_polynomial: field is not conjugate-symmetric within tolerance");
    return p;
}

}  // namespace cgl
