#pragma once

#include <iosfwd>
#include <map>
#include <vector>

#include "cgl/grid.hpp"

namespace cgl {

/// Real trigonometric polynomial sum_k [a_k cos<k,x> + b_k sin<k,x>].
/// Terms are stored on canonical half-lattice representatives (first nonzero
/// component positive); the zero mode carries no sin part.
class TrigPolynomial {
public:
    struct Term {
        double cos_coeff = 0.0;
        double sin_coeff = 0.0;
    };

    explicit TrigPolynomial(int dim = 1);

    int dim() const { return d_; }

    void add_cos(const Wavevector& k, double a);
    void add_sin(const Wavevector& k, double b);
    Term term(const Wavevector& k) const;
    const std::map<Wavevector, Term>& terms() const { return terms_; }

    bool empty(double eps = 0.0) const;
    int degree() const;  // max |k_i| over terms with a nonzero coefficient

    TrigPolynomial& operator+=(const TrigPolynomial& o);
    TrigPolynomial& operator-=(const TrigPolynomial& o);
    TrigPolynomial& operator*=(double s);

    std::vector<TrigPolynomial> gradient() const;

    double evaluate(const std::vector<double>& x) const;
    std::vector<double> sample(const GridSpec& g) const;
    double min_on_grid(const GridSpec& g) const;
    double max_on_grid(const GridSpec& g) const;
    double max_abs_on_grid(const GridSpec& g) const;

    double l2_norm() const;
    void prune(double eps);

    // One line per term: "k_1 ... k_d cos_coeff sin_coeff".
    void write(std::ostream& os) const;
    static TrigPolynomial read(std::istream& is, int dim);

private:
    int d_;
    std::map<Wavevector, Term> terms_;
};

TrigPolynomial operator+(TrigPolynomial a, const TrigPolynomial& b);
TrigPolynomial operator-(TrigPolynomial a, const TrigPolynomial& b);
TrigPolynomial operator*(double s, TrigPolynomial p);

TrigPolynomial constant_poly(int dim, double c);
TrigPolynomial harmonic_cos(const Wavevector& k, double a = 1.0);
TrigPolynomial harmonic_sin(const Wavevector& k, double b = 1.0);

// Exact product via product-to-sum identities; degree adds.
TrigPolynomial multiply(const TrigPolynomial& a, const TrigPolynomial& b);

// sum_j (d_j phi)^2, expanded symbolically. Nonnegative pointwise.
TrigPolynomial squared_gradient(const TrigPolynomial& phi);

// L^2 inner product on the torus with normalized measure (|1|_{L^2} = 1).
double l2_inner(const TrigPolynomial& a, const TrigPolynomial& b);

}  // namespace cgl
