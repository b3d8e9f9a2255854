#include "cgl/saturation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "cgl/errors.hpp"

namespace cgl {

namespace {

// Deterministic coordinate system over canonical terms, weighted so that the
// Euclidean dot product equals the L^2 inner product.
struct TermSpace {
    int d = 1;
    std::vector<std::pair<Wavevector, int>> axes;  // (rep, 0 = cos / 1 = sin)
    std::map<std::pair<Wavevector, int>, int> index;

    static TermSpace over(const std::vector<const TrigPolynomial*>& polys) {
        TermSpace ts;
        ts.d = polys.empty() ? 1 : polys.front()->dim();
        std::set<std::pair<Wavevector, int>> keys;
        for (const auto* p : polys) {
            for (const auto& [k, t] : p->terms()) {
                keys.insert({k, 0});
                if (!is_zero(k)) keys.insert({k, 1});
            }
        }
        for (const auto& key : keys) {
            ts.index[key] = static_cast<int>(ts.axes.size());
            ts.axes.push_back(key);
        }
        return ts;
    }

    int size() const { return static_cast<int>(axes.size()); }

    double weight(const std::pair<Wavevector, int>& key) const {
        return is_zero(key.first) ? 1.0 : std::sqrt(0.5);
    }

    Eigen::VectorXd coords(const TrigPolynomial& p) const {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(size());
        for (const auto& [k, t] : p.terms()) {
            auto ic = index.find({k, 0});
            if (ic != index.end()) v[ic->second] = t.cos_coeff * weight({k, 0});
            if (!is_zero(k)) {
                auto is = index.find({k, 1});
                if (is != index.end()) v[is->second] = t.sin_coeff * weight({k, 1});
            }
        }
        return v;
    }

    TrigPolynomial poly(const Eigen::VectorXd& v) const {
        TrigPolynomial p(d);
        for (int i = 0; i < size(); ++i) {
            if (v[i] == 0.0) continue;
            const auto& key = axes[static_cast<std::size_t>(i)];
            const double c = v[i] / weight(key);
            if (key.second == 0)
                p.add_cos(key.first, c);
            else
                p.add_sin(key.first, c);
        }
        return p;
    }
};

// All bilinear products grad(theta_i) . grad(theta_j) over basis pairs.
std::vector<TrigPolynomial> gradient_products(const SubspaceBasis& H) {
    std::vector<std::vector<TrigPolynomial>> grads;
    grads.reserve(H.basis.size());
    for (const auto& b : H.basis) grads.push_back(b.gradient());
    std::vector<TrigPolynomial> out;
    for (std::size_t i = 0; i < H.basis.size(); ++i) {
        for (std::size_t j = i; j < H.basis.size(); ++j) {
            TrigPolynomial prod(H.basis[i].dim());
            for (std::size_t a = 0; a < grads[i].size(); ++a)
                prod += multiply(grads[i][a], grads[j][a]);
            if (!prod.empty(0.0)) out.push_back(std::move(prod));
        }
    }
    return out;
}

// Orthonormal L^2 coordinates of span(H) inside a TermSpace.
Eigen::MatrixXd orthonormal_span(const TermSpace& ts, const SubspaceBasis& H) {
    std::vector<Eigen::VectorXd> basis;
    for (const auto& b : H.basis) {
        Eigen::VectorXd v = ts.coords(b);
        for (const auto& e : basis) v -= e.dot(v) * e;
        for (const auto& e : basis) v -= e.dot(v) * e;  // re-orthogonalize
        const double n = v.norm();
        if (n > 1e-12) basis.push_back(v / n);
    }
    Eigen::MatrixXd U(ts.size(), static_cast<int>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i) U.col(static_cast<int>(i)) = basis[i];
    return U;
}

}  // namespace

void FrequencySet::validate() const {
    if (d < 1) throw InputError("frequency set dimension must be >= 1");
    std::set<Wavevector> seen;
    for (const auto& k : vectors) {
        if (static_cast<int>(k.size()) != d) throw InputError("frequency dimension mismatch");
        if (is_zero(k)) throw InputError("frequency set must not contain the zero vector");
        if (!seen.insert(k).second) throw InputError("duplicate frequency");
    }
}

FrequencySet standard_frequency_set(int d) {
    FrequencySet K;
    K.d = d;
    for (int i = 0; i + 1 < d; ++i) {
        Wavevector e(static_cast<std::size_t>(d), 0);
        e[static_cast<std::size_t>(i)] = 1;
        K.vectors.push_back(e);
    }
    K.vectors.push_back(Wavevector(static_cast<std::size_t>(d), 1));
    return K;
}

bool is_generator(const FrequencySet& I) {
    I.validate();
    const int d = I.d;
    const int m = static_cast<int>(I.vectors.size());
    if (m < d) return false;
    // Columns are the given vectors; integer column reduction to lower
    // triangular Hermite form. The lattice is Z^d iff the index |prod diag| is 1.
    std::vector<std::vector<long long>> A(static_cast<std::size_t>(d),
                                          std::vector<long long>(static_cast<std::size_t>(m), 0));
    for (int c = 0; c < m; ++c)
        for (int r = 0; r < d; ++r)
            A[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
                I.vectors[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)];

    auto col_axpy = [&](int dst, int src, long long q) {
        for (int r = 0; r < d; ++r)
            A[static_cast<std::size_t>(r)][static_cast<std::size_t>(dst)] -=
                q * A[static_cast<std::size_t>(r)][static_cast<std::size_t>(src)];
    };
    auto col_swap = [&](int a, int b) {
        for (int r = 0; r < d; ++r)
            std::swap(A[static_cast<std::size_t>(r)][static_cast<std::size_t>(a)],
                      A[static_cast<std::size_t>(r)][static_cast<std::size_t>(b)]);
    };
    auto at = [&](int r, int c) -> long long& {
        return A[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    };

    for (int row = 0; row < d; ++row) {
        for (;;) {
            int piv = -1;
            for (int c = row; c < m; ++c)
                if (at(row, c) != 0 && (piv < 0 || std::llabs(at(row, c)) < std::llabs(at(row, piv))))
                    piv = c;
            if (piv < 0) return false;  // rank deficient
            bool leftovers = false;
            for (int c = row; c < m; ++c) {
                if (c == piv || at(row, c) == 0) continue;
                col_axpy(c, piv, at(row, c) / at(row, piv));
                if (at(row, c) != 0) leftovers = true;
            }
            if (!leftovers) {
                if (piv != row) col_swap(piv, row);
                break;
            }
        }
        if (std::llabs(at(row, row)) != 1) return false;
    }
    return true;
}

ChainReport chain_condition(const FrequencySet& I, int sigma) {
    I.validate();
    if (sigma < 1) throw InputError("sigma must be >= 1");
    const int n = static_cast<int>(I.vectors.size());
    auto vec = [&](int i) -> const Wavevector& { return I.vectors[static_cast<std::size_t>(i)]; };
    auto dot = [](const Wavevector& a, const Wavevector& b) {
        long long s = 0;
        for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long long>(a[i]) * b[i];
        return s;
    };

    ChainReport report;
    report.ok = true;
    for (int li = 0; li < n; ++li) {
        for (int mi = 0; mi < n; ++mi) {
            // Layered reachability with predecessor tracking; -2 = unreachable,
            // -1 = reached directly from l.
            std::vector<std::vector<int>> pred(static_cast<std::size_t>(sigma),
                                               std::vector<int>(static_cast<std::size_t>(n), -2));
            for (int c = 0; c < n; ++c)
                if (dot(vec(li), vec(c)) != 0) pred[0][static_cast<std::size_t>(c)] = -1;
            for (int layer = 1; layer < sigma; ++layer)
                for (int c = 0; c < n; ++c)
                    for (int pidx = 0; pidx < n; ++pidx) {
                        if (pred[static_cast<std::size_t>(layer - 1)][static_cast<std::size_t>(pidx)] == -2)
                            continue;
                        if (dot(vec(pidx), vec(c)) != 0) {
                            pred[static_cast<std::size_t>(layer)][static_cast<std::size_t>(c)] = pidx;
                            break;
                        }
                    }

            ChainWitness w;
            w.l = vec(li);
            w.m = vec(mi);
            int endc = -1;
            for (int c = 0; c < n && endc < 0; ++c)
                if (pred[static_cast<std::size_t>(sigma - 1)][static_cast<std::size_t>(c)] != -2 &&
                    dot(vec(c), vec(mi)) != 0)
                    endc = c;
            if (endc >= 0) {
                w.ok = true;
                std::vector<int> idx(static_cast<std::size_t>(sigma));
                idx[static_cast<std::size_t>(sigma - 1)] = endc;
                for (int layer = sigma - 1; layer > 0; --layer)
                    idx[static_cast<std::size_t>(layer - 1)] =
                        pred[static_cast<std::size_t>(layer)][static_cast<std::size_t>(idx[static_cast<std::size_t>(layer)])];
                for (int layer = 0; layer < sigma; ++layer) w.chain.push_back(vec(idx[static_cast<std::size_t>(layer)]));
            } else {
                report.ok = false;
            }
            report.pairs.push_back(std::move(w));
        }
    }
    return report;
}

bool is_saturating(const FrequencySet& I, int sigma) {
    return is_generator(I) && chain_condition(I, sigma).ok;
}

SaturationVerdict saturation_verdict(const FrequencySet& I, int sigma) {
    SaturationVerdict v;
    v.generator = is_generator(I);
    v.chain = chain_condition(I, sigma);
    v.saturating = v.generator && v.chain.ok;
    return v;
}

bool check_q_condition(const std::vector<TrigPolynomial>& Q, const FrequencySet& K, double tol) {
    if (Q.empty()) return false;
    K.validate();
    std::vector<TrigPolynomial> targets;
    targets.push_back(constant_poly(K.d, 1.0));
    for (const auto& k : K.vectors) {
        targets.push_back(harmonic_sin(k));
        targets.push_back(harmonic_cos(k));
    }
    std::vector<const TrigPolynomial*> all;
    for (const auto& q : Q) all.push_back(&q);
    for (const auto& t : targets) all.push_back(&t);
    const TermSpace ts = TermSpace::over(all);
    Eigen::MatrixXd A(ts.size(), static_cast<int>(Q.size()));
    for (std::size_t j = 0; j < Q.size(); ++j) A.col(static_cast<int>(j)) = ts.coords(Q[j]);
    const auto qr = A.colPivHouseholderQr();
    for (const auto& t : targets) {
        const Eigen::VectorXd b = ts.coords(t);
        const Eigen::VectorXd x = qr.solve(b);
        if ((A * x - b).norm() > tol) return false;
    }
    return true;
}

std::vector<double> solve_span_coefficients(const std::vector<TrigPolynomial>& basis,
                                            const TrigPolynomial& target, double tol) {
    if (basis.empty()) throw InputError("solve_span_coefficients: empty basis");
    std::vector<const TrigPolynomial*> all;
    for (const auto& b : basis) all.push_back(&b);
    all.push_back(&target);
    const TermSpace ts = TermSpace::over(all);
    Eigen::MatrixXd A(ts.size(), static_cast<int>(basis.size()));
    for (std::size_t j = 0; j < basis.size(); ++j) A.col(static_cast<int>(j)) = ts.coords(basis[j]);
    const Eigen::VectorXd b = ts.coords(target);
    const Eigen::VectorXd x = A.colPivHouseholderQr().solve(b);
    if ((A * x - b).norm() > tol * std::max(1.0, b.norm()))
        throw InputError("target is not representable in the given span");
    return std::vector<double>(x.data(), x.data() + x.size());
}

int SubspaceBasis::poly_dim() const { return basis.empty() ? 1 : basis.front().dim(); }

void SubspaceBasis::validate(double sv_tol) const {
    if (basis.empty()) return;
    std::vector<const TrigPolynomial*> all;
    for (const auto& b : basis) all.push_back(&b);
    const TermSpace ts = TermSpace::over(all);
    Eigen::MatrixXd M(ts.size(), dim());
    for (int j = 0; j < dim(); ++j) M.col(j) = ts.coords(basis[static_cast<std::size_t>(j)]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > sv_tol * sv[0]) ++rank;
    if (rank != dim()) throw InputError("basis is numerically rank deficient");
}

SubspaceBasis harmonic_basis(const FrequencySet& I) {
    I.validate();
    SubspaceBasis H;
    H.basis.push_back(constant_poly(I.d, 1.0));
    for (const auto& k : I.vectors) {
        H.basis.push_back(harmonic_sin(k));
        H.basis.push_back(harmonic_cos(k));
    }
    return H;
}

TrigPolynomial project(const TrigPolynomial& theta, const SubspaceBasis& H) {
    if (H.basis.empty()) return TrigPolynomial(theta.dim());
    std::vector<const TrigPolynomial*> all;
    for (const auto& b : H.basis) all.push_back(&b);
    all.push_back(&theta);
    const TermSpace ts = TermSpace::over(all);
    const Eigen::MatrixXd U = orthonormal_span(ts, H);
    const Eigen::VectorXd v = ts.coords(theta);
    return ts.poly(U * (U.transpose() * v));
}

double projection_residual(const TrigPolynomial& theta, const SubspaceBasis& H) {
    TrigPolynomial diff = theta - project(theta, H);
    return diff.l2_norm();
}

SubspaceBasis grow(const SubspaceBasis& H) {
    if (H.basis.empty()) return H;
    std::vector<TrigPolynomial> candidates = H.basis;
    for (auto& p : gradient_products(H)) candidates.push_back(std::move(p));

    std::vector<const TrigPolynomial*> all;
    for (const auto& c : candidates) all.push_back(&c);
    const TermSpace ts = TermSpace::over(all);
    Eigen::MatrixXd M(ts.size(), static_cast<int>(candidates.size()));
    for (std::size_t j = 0; j < candidates.size(); ++j) M.col(static_cast<int>(j)) = ts.coords(candidates[j]);

    // Rank per the relative singular-value rule.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > 1e-9 * sv[0]) ++rank;

    // Greedy in-order selection keeps the input basis first, so nesting holds
    // by construction.
    double max_norm = 0.0;
    for (int j = 0; j < M.cols(); ++j) max_norm = std::max(max_norm, M.col(j).norm());
    SubspaceBasis out;
    std::vector<Eigen::VectorXd> ortho;
    double tol = 1e-9 * max_norm;
    for (int pass = 0; pass < 6 && out.dim() < rank; ++pass) {
        for (int j = 0; j < M.cols() && out.dim() < rank; ++j) {
            if (M.col(j).isZero(0.0)) continue;
            Eigen::VectorXd v = M.col(j);
            for (const auto& e : ortho) v -= e.dot(v) * e;
            for (const auto& e : ortho) v -= e.dot(v) * e;
            if (v.norm() <= tol) continue;
            ortho.push_back(v / v.norm());
            out.basis.push_back(candidates[static_cast<std::size_t>(j)]);
            M.col(j).setZero();
        }
        tol *= 0.1;  // loosen only if the SVD rank was not reached
    }
    return out;
}

SaturationChain saturation_chain(const SubspaceBasis& H0, int N) {
    if (N < 0) throw InputError("chain depth must be >= 0");
    H0.validate();
    SaturationChain chain;
    chain.levels.push_back(H0);
    for (int j = 1; j <= N; ++j) chain.levels.push_back(grow(chain.levels.back()));
    return chain;
}

namespace {

struct DecomposeWork {
    const SubspaceBasis& H;
    TermSpace ts;
    Eigen::MatrixXd U;                   // orthonormal span of H in ts
    std::vector<TrigPolynomial> hbasis;  // orthonormalized basis as polynomials
    std::vector<std::vector<TrigPolynomial>> hgrads;

    DecomposeWork(const TrigPolynomial& theta, const SubspaceBasis& H_prev) : H(H_prev) {
        std::vector<TrigPolynomial> prods = gradient_products(H_prev);
        std::vector<const TrigPolynomial*> all;
        all.push_back(&theta);
        for (const auto& b : H_prev.basis) all.push_back(&b);
        for (const auto& p : prods) all.push_back(&p);
        ts = TermSpace::over(all);
        U = orthonormal_span(ts, H_prev);
        for (int j = 0; j < U.cols(); ++j) {
            TrigPolynomial e = ts.poly(U.col(j));
            hgrads.push_back(e.gradient());
            hbasis.push_back(std::move(e));
        }
    }

    int p() const { return static_cast<int>(hbasis.size()); }

    Eigen::VectorXd perp(const Eigen::VectorXd& v) const { return v - U * (U.transpose() * v); }

    TrigPolynomial part_poly(const Eigen::VectorXd& x, int j) const {
        TrigPolynomial poly(H.poly_dim());
        for (int b = 0; b < p(); ++b) {
            const double c = x[j * p() + b];
            if (c == 0.0) continue;
            poly += c * hbasis[static_cast<std::size_t>(b)];
        }
        return poly;
    }
};

}  // namespace

Decomposition decompose(const TrigPolynomial& theta, const SubspaceBasis& H_prev,
                        const DecomposeOptions& opts) {
    if (H_prev.basis.empty()) throw InputError("decompose: empty basis");
    H_prev.validate();

    // Trivial case: theta already lies in span(H_prev).
    {
        TrigPolynomial p0 = project(theta, H_prev);
        TrigPolynomial diff = theta - p0;
        const double res = diff.l2_norm();
        if (res <= opts.tol) {
            Decomposition dec;
            dec.theta0 = std::move(p0);
            dec.residual = res;
            return dec;
        }
    }

    DecomposeWork w(theta, H_prev);
    const int p = w.p();
    const Eigen::VectorXd theta_perp = w.perp(w.ts.coords(theta));

    // Closed-form seeds: a double-frequency term at 2k is produced by
    // B(alpha sin<k,.> + beta cos<k,.>) whenever sin/cos at k lie in H_prev.
    std::vector<TrigPolynomial> seed_parts;
    {
        TrigPolynomial residual_poly = w.ts.poly(theta_perp);
        for (const auto& [k, t] : residual_poly.terms()) {
            if (is_zero(k)) continue;
            if (std::abs(t.cos_coeff) < 1e-13 && std::abs(t.sin_coeff) < 1e-13) continue;
            bool even = true;
            for (int c : k) even = even && (c % 2 == 0);
            if (!even) continue;
            Wavevector h(k.size());
            for (std::size_t i = 0; i < k.size(); ++i) h[i] = k[i] / 2;
            const double h2 = static_cast<double>(norm_sq(h));
            if (h2 == 0.0) continue;
            if (projection_residual(harmonic_sin(h), H_prev) > 1e-10) continue;
            if (projection_residual(harmonic_cos(h), H_prev) > 1e-10) continue;
            const double A = t.cos_coeff / h2;
            const double B = t.sin_coeff / h2;
            const double r2 = 2.0 * std::hypot(A, B);
            if (r2 <= 0.0) continue;
            const double half_angle = 0.5 * std::atan2(-B, A);
            TrigPolynomial part(static_cast<int>(k.size()));
            part += (std::sqrt(r2) * std::cos(half_angle)) * harmonic_sin(h);
            part += (std::sqrt(r2) * std::sin(half_angle)) * harmonic_cos(h);
            seed_parts.push_back(std::move(part));
        }
        if (static_cast<int>(seed_parts.size()) > opts.n_max)
            seed_parts.resize(static_cast<std::size_t>(opts.n_max));
    }

    double best_res = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_x;
    int best_n = 0;

    auto objective = [&](const Eigen::VectorXd& x, int n) {
        Eigen::VectorXd acc = theta_perp;
        for (int j = 0; j < n; ++j)
            acc -= w.perp(w.ts.coords(squared_gradient(w.part_poly(x, j))));
        return acc;
    };

    const int n_low = std::min(opts.n_max, std::max(1, static_cast<int>(seed_parts.size())));
    for (int n = n_low; n <= opts.n_max; ++n) {
        for (int restart = 0; restart <= opts.restarts; ++restart) {
            Eigen::VectorXd x = Eigen::VectorXd::Zero(n * p);
            if (restart == 0 && !seed_parts.empty()) {
                for (int j = 0; j < n && j < static_cast<int>(seed_parts.size()); ++j)
                    x.segment(j * p, p) = w.U.transpose() * w.ts.coords(seed_parts[static_cast<std::size_t>(j)]);
            } else {
                std::mt19937_64 rng(opts.seed +
                                    0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(restart + 31 * n));
                std::normal_distribution<double> nd(0.0, std::sqrt(std::max(1.0, theta_perp.norm())));
                for (int i = 0; i < x.size(); ++i) x[i] = nd(rng);
            }

            Eigen::VectorXd r = objective(x, n);
            double rn = r.norm();
            double lambda = 1e-10;
            for (int iter = 0; iter < opts.max_iterations && rn > opts.tol * 0.1; ++iter) {
                Eigen::MatrixXd J(w.ts.size(), n * p);
                for (int j = 0; j < n; ++j) {
                    const auto gj = w.part_poly(x, j).gradient();
                    for (int b = 0; b < p; ++b) {
                        TrigPolynomial dB(theta.dim());
                        for (std::size_t a = 0; a < gj.size(); ++a)
                            dB += 2.0 * multiply(gj[a], w.hgrads[static_cast<std::size_t>(b)][a]);
                        J.col(j * p + b) = -w.perp(w.ts.coords(dB));
                    }
                }
                const Eigen::MatrixXd JtJ = J.transpose() * J;
                const Eigen::VectorXd g = J.transpose() * r;
                bool accepted = false;
                for (int attempt = 0; attempt < 9; ++attempt) {
                    Eigen::MatrixXd M = JtJ;
                    M.diagonal().array() += lambda * (JtJ.trace() / std::max(1, n * p) + 1e-12);
                    const Eigen::VectorXd dx = M.ldlt().solve(-g);
                    const Eigen::VectorXd xt = x + dx;
                    const Eigen::VectorXd rt = objective(xt, n);
                    if (rt.norm() < rn) {
                        x = xt;
                        r = rt;
                        rn = rt.norm();
                        lambda = std::max(1e-12, lambda * 0.3);
                        accepted = true;
                        break;
                    }
                    lambda *= 10.0;
                }
                if (!accepted) break;
            }
            if (rn < best_res) {
                best_res = rn;
                best_x = x;
                best_n = n;
            }
            if (best_res <= opts.tol * 0.1) break;
        }
        if (best_res <= opts.tol * 0.1) break;
    }

    // Assemble; the reported residual is recomputed exactly from coefficients.
    Decomposition dec;
    TrigPolynomial sumB(theta.dim());
    for (int j = 0; j < best_n; ++j) {
        TrigPolynomial part = w.part_poly(best_x, j);
        part.prune(1e-14);
        sumB += squared_gradient(part);
        dec.parts.push_back(std::move(part));
    }
    dec.theta0 = project(theta - sumB, H_prev);
    TrigPolynomial diff = theta - dec.theta0 - sumB;
    dec.residual = diff.l2_norm();
    if (dec.residual > opts.tol) throw DecompositionError(dec.residual);
    return dec;
}

}  // namespace cgl
