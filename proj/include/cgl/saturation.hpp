#pragma once

#include <cstdint>
#include <vector>

#include "cgl/trig_poly.hpp"

namespace cgl {

/// Finite set of nonzero integer frequencies (the sets I and K).
struct FrequencySet {
    int d = 1;
    std::vector<Wavevector> vectors;

    void validate() const;  // nonzero, no duplicates, dimensions match
};

/// The canonical d-vector set: e_1, ..., e_{d-1} and (1, ..., 1).
FrequencySet standard_frequency_set(int d);

/// True iff the integer lattice generated by I is all of Z^d, decided by exact
/// integer column reduction to Hermite form (unit lattice index).
bool is_generator(const FrequencySet& I);

struct ChainWitness {
    Wavevector l, m;
    bool ok = false;
    std::vector<Wavevector> chain;  // n_1 ... n_sigma with nonzero adjacent dots
};

struct ChainReport {
    bool ok = false;
    std::vector<ChainWitness> pairs;
};

/// For every ordered pair (l, m) in I x I, searches for n_1..n_sigma in I with
/// l.n_1 != 0, n_j.n_{j+1} != 0 and n_sigma.m != 0; exact integer arithmetic.
ChainReport chain_condition(const FrequencySet& I, int sigma);

bool is_saturating(const FrequencySet& I, int sigma);

struct SaturationVerdict {
    bool generator = false;
    ChainReport chain;
    bool saturating = false;
};
SaturationVerdict saturation_verdict(const FrequencySet& I, int sigma);

/// True iff 1 and each sin<x,k>, cos<x,k> (k in K) lie in span{Q_j}, tested by
/// least-squares residual below tol.
bool check_q_condition(const std::vector<TrigPolynomial>& Q, const FrequencySet& K,
                       double tol = 1e-10);

/// Least-squares coefficients x with sum_j x_j basis_j ~ target in L^2.
/// Throws InputError when the residual exceeds tol.
std::vector<double> solve_span_coefficients(const std::vector<TrigPolynomial>& basis,
                                            const TrigPolynomial& target, double tol = 1e-9);

/// Ordered list of linearly independent trig polynomials.
struct SubspaceBasis {
    std::vector<TrigPolynomial> basis;

    int dim() const { return static_cast<int>(basis.size()); }
    int poly_dim() const;  // torus dimension
    void validate(double sv_tol = 1e-9) const;
};

/// {1, sin<x,k>, cos<x,k> : k in I}, in that order per frequency.
SubspaceBasis harmonic_basis(const FrequencySet& I);

/// L^2 distance from theta to span(H).
double projection_residual(const TrigPolynomial& theta, const SubspaceBasis& H);
TrigPolynomial project(const TrigPolynomial& theta, const SubspaceBasis& H);

/// Growth map: basis of H + span{ grad(theta_i) . grad(theta_j) }, rank-reduced
/// with a relative singular-value threshold of 1e-9.
SubspaceBasis grow(const SubspaceBasis& H);

struct SaturationChain {
    std::vector<SubspaceBasis> levels;  // H_0 ... H_N
};

SaturationChain saturation_chain(const SubspaceBasis& H0, int N);

struct Decomposition {
    TrigPolynomial theta0;
    std::vector<TrigPolynomial> parts;  // theta_1 ... theta_n
    double residual = 0.0;              // |theta - theta0 - sum B(theta_j)|_{L^2}, from coefficients
};

struct DecomposeOptions {
    int n_max = 2;
    double tol = 1e-8;
    int restarts = 8;
    std::uint64_t seed = 0x5eedULL;
    int max_iterations = 250;
};

/// Finds theta0 in H_prev and parts theta_j in H_prev minimizing the L^2
/// residual of theta - theta0 - sum_j B(theta_j). theta0 is eliminated exactly
/// by linear projection at every iterate; the nonlinear part runs damped
/// Gauss-Newton from closed-form double-frequency seeds plus seeded random
/// restarts. Throws DecompositionError if the residual stays above tol.
Decomposition decompose(const TrigPolynomial& theta, const SubspaceBasis& H_prev,
                        const DecomposeOptions& opts = {});

}  // namespace cgl
