#include "cgl/trig_poly.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "cgl/errors.hpp"

namespace cgl {

TrigPolynomial::TrigPolynomial(int dim) : d_(dim) {
    if (dim < 1) throw InputError("TrigPolynomial dimension must be >= 1");
}

void TrigPolynomial::add_cos(const Wavevector& k, double a) {
    if (static_cast<int>(k.size()) != d_) throw InputError("wavevector dimension mismatch");
    if (a == 0.0) return;
    terms_[canonical_rep(k).rep].cos_coeff += a;
}

void TrigPolynomial::add_sin(const Wavevector& k, double b) {
    if (static_cast<int>(k.size()) != d_) throw InputError("wavevector dimension mismatch");
    if (b == 0.0 || is_zero(k)) return;  // sin<0,x> vanishes identically
    const CanonicalRep c = canonical_rep(k);
    terms_[c.rep].sin_coeff += c.sign * b;
}

TrigPolynomial::Term TrigPolynomial::term(const Wavevector& k) const {
    const CanonicalRep c = canonical_rep(k);
    auto it = terms_.find(c.rep);
    if (it == terms_.end()) return {};
    Term t = it->second;
    t.sin_coeff *= c.sign;
    return t;
}

bool TrigPolynomial::empty(double eps) const {
    for (const auto& [k, t] : terms_)
        if (std::abs(t.cos_coeff) > eps || std::abs(t.sin_coeff) > eps) return false;
    return true;
}

int TrigPolynomial::degree() const {
    int deg = 0;
    for (const auto& [k, t] : terms_) {
        if (t.cos_coeff == 0.0 && t.sin_coeff == 0.0) continue;
        for (int c : k) deg = std::max(deg, std::abs(c));
    }
    return deg;
}

TrigPolynomial& TrigPolynomial::operator+=(const TrigPolynomial& o) {
    if (o.d_ != d_) throw InputError("dimension mismatch");
    for (const auto& [k, t] : o.terms_) {
        Term& dst = terms_[k];
        dst.cos_coeff += t.cos_coeff;
        dst.sin_coeff += t.sin_coeff;
    }
    return *this;
}

TrigPolynomial& TrigPolynomial::operator-=(const TrigPolynomial& o) {
    if (o.d_ != d_) throw InputError("dimension mismatch");
    for (const auto& [k, t] : o.terms_) {
        Term& dst = terms_[k];
        dst.cos_coeff -= t.cos_coeff;
        dst.sin_coeff -= t.sin_coeff;
    }
    return *this;
}

TrigPolynomial& TrigPolynomial::operator*=(double s) {
    for (auto& [k, t] : terms_) {
        t.cos_coeff *= s;
        t.sin_coeff *= s;
    }
    return *this;
}

TrigPolynomial operator+(TrigPolynomial a, const TrigPolynomial& b) { return a += b; }
TrigPolynomial operator-(TrigPolynomial a, const TrigPolynomial& b) { return a -= b; }
TrigPolynomial operator*(double s, TrigPolynomial p) { return p *= s; }

std::vector<TrigPolynomial> TrigPolynomial::gradient() const {
    std::vector<TrigPolynomial> g(static_cast<std::size_t>(d_), TrigPolynomial(d_));
    for (const auto& [k, t] : terms_) {
        for (int a = 0; a < d_; ++a) {
            if (k[static_cast<std::size_t>(a)] == 0) continue;
            const double kj = k[static_cast<std::size_t>(a)];
            // d_a [A cos<k,x> + B sin<k,x>] = -A k_a sin<k,x> + B k_a cos<k,x>
            g[static_cast<std::size_t>(a)].add_sin(k, -t.cos_coeff * kj);
            g[static_cast<std::size_t>(a)].add_cos(k, t.sin_coeff * kj);
        }
    }
    return g;
}

double TrigPolynomial::evaluate(const std::vector<double>& x) const {
    double v = 0.0;
    for (const auto& [k, t] : terms_) {
        double phase = 0.0;
        for (int a = 0; a < d_; ++a) phase += k[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)];
        v += t.cos_coeff * std::cos(phase) + t.sin_coeff * std::sin(phase);
    }
    return v;
}

std::vector<double> TrigPolynomial::sample(const GridSpec& g) const {
    if (g.d != d_) throw InputError("grid dimension mismatch");
    const std::size_t n = g.point_count();
    std::vector<double> s(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) s[i] = evaluate(grid_point(g, i));
    return s;
}

double TrigPolynomial::min_on_grid(const GridSpec& g) const {
    const auto s = sample(g);
    double m = s[0];
    for (double v : s) m = std::min(m, v);
    return m;
}

double TrigPolynomial::max_on_grid(const GridSpec& g) const {
    const auto s = sample(g);
    double m = s[0];
    for (double v : s) m = std::max(m, v);
    return m;
}

double TrigPolynomial::max_abs_on_grid(const GridSpec& g) const {
    const auto s = sample(g);
    double m = 0.0;
    for (double v : s) m = std::max(m, std::abs(v));
    return m;
}

double TrigPolynomial::l2_norm() const { return std::sqrt(l2_inner(*this, *this)); }

void TrigPolynomial::prune(double eps) {
    for (auto it = terms_.begin(); it != terms_.end();) {
        if (std::abs(it->second.cos_coeff) <= eps && std::abs(it->second.sin_coeff) <= eps)
            it = terms_.erase(it);
        else
            ++it;
    }
}

void TrigPolynomial::write(std::ostream& os) const {
    char buf[64];
    for (const auto& [k, t] : terms_) {
        for (int c : k) os << c << ' ';
        std::snprintf(buf, sizeof buf, "%.17g", t.cos_coeff);
        os << buf << ' ';
        std::snprintf(buf, sizeof buf, "%.17g", t.sin_coeff);
        os << buf << '\n';
    }
}

TrigPolynomial TrigPolynomial::read(std::istream& is, int dim) {
    TrigPolynomial p(dim);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        Wavevector k(static_cast<std::size_t>(dim));
        for (int a = 0; a < dim; ++a)
            if (!(ls >> k[static_cast<std::size_t>(a)])) throw InputError("bad trig polynomial line: " + line);
        double c = 0.0, s = 0.0;
        if (!(ls >> c >> s)) throw InputError("bad trig polynomial line: " + line);
        p.add_cos(k, c);
        p.add_sin(k, s);
    }
    return p;
}

TrigPolynomial constant_poly(int dim, double c) {
    TrigPolynomial p(dim);
    p.add_cos(Wavevector(static_cast<std::size_t>(dim), 0), c);
    return p;
}

TrigPolynomial harmonic_cos(const Wavevector& k, double a) {
    TrigPolynomial p(static_cast<int>(k.size()));
    p.add_cos(k, a);
    return p;
}

TrigPolynomial harmonic_sin(const Wavevector& k, double b) {
    TrigPolynomial p(static_cast<int>(k.size()));
    p.add_sin(k, b);
    return p;
}

TrigPolynomial multiply(const TrigPolynomial& a, const TrigPolynomial& b) {
    if (a.dim() != b.dim()) throw InputError("dimension mismatch");
    const int d = a.dim();
    TrigPolynomial out(d);
    Wavevector kp(static_cast<std::size_t>(d)), km(static_cast<std::size_t>(d));
    for (const auto& [k, ta] : a.terms()) {
        for (const auto& [l, tb] : b.terms()) {
            for (int i = 0; i < d; ++i) {
                kp[static_cast<std::size_t>(i)] = k[static_cast<std::size_t>(i)] + l[static_cast<std::size_t>(i)];
                km[static_cast<std::size_t>(i)] = k[static_cast<std::size_t>(i)] - l[static_cast<std::size_t>(i)];
            }
            const double A1 = ta.cos_coeff, B1 = ta.sin_coeff;
            const double A2 = tb.cos_coeff, B2 = tb.sin_coeff;
            // cos cos = (cos(k-l) + cos(k+l)) / 2
            if (A1 != 0.0 && A2 != 0.0) {
                out.add_cos(km, 0.5 * A1 * A2);
                out.add_cos(kp, 0.5 * A1 * A2);
            }
            // sin sin = (cos(k-l) - cos(k+l)) / 2
            if (B1 != 0.0 && B2 != 0.0) {
                out.add_cos(km, 0.5 * B1 * B2);
                out.add_cos(kp, -0.5 * B1 * B2);
            }
            // sin cos = (sin(k+l) + sin(k-l)) / 2
            if (B1 != 0.0 && A2 != 0.0) {
                out.add_sin(kp, 0.5 * B1 * A2);
                out.add_sin(km, 0.5 * B1 * A2);
            }
            // cos sin = (sin(k+l) - sin(k-l)) / 2
            if (A1 != 0.0 && B2 != 0.0) {
                out.add_sin(kp, 0.5 * A1 * B2);
                out.add_sin(km, -0.5 * A1 * B2);
            }
        }
    }
    return out;
}

TrigPolynomial squared_gradient(const TrigPolynomial& phi) {
    const auto g = phi.gradient();
    TrigPolynomial out(phi.dim());
    for (const auto& comp : g) out += multiply(comp, comp);
    return out;
}

double l2_inner(const TrigPolynomial& a, const TrigPolynomial& b) {
    if (a.dim() != b.dim()) throw InputError("dimension mismatch");
    // Distinct canonical harmonics are orthogonal; |cos<k,.>|^2 = |sin<k,.>|^2 = 1/2
    // for k != 0 under the normalized measure, and |1|^2 = 1.
    double s = 0.0;
    const auto& small = a.terms().size() <= b.terms().size() ? a : b;
    const auto& large = a.terms().size() <= b.terms().size() ? b : a;
    for (const auto& [k, t] : small.terms()) {
        auto it = large.terms().find(k);
        if (it == large.terms().end()) continue;
        const double w = is_zero(k) ? 1.0 : 0.5;
        s += w * (t.cos_coeff * it->second.cos_coeff + t.sin_coeff * it->second.sin_coeff);
    }
    return s;
}

}  // namespace cgl
