#include "cgl/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "cgl/errors.hpp"

namespace cgl {

namespace {

double resolved_threshold(const SolverConfig& config, const SpectralField& psi0) {
    if (config.blowup_threshold > 0.0) return config.blowup_threshold;
    return 1e6 * std::max(1.0, psi0.sobolev_norm(config.s));
}

bool all_zero(const std::vector<double>& u) {
    for (double v : u)
        if (v != 0.0) return false;
    return true;
}

// Integer power of a nonnegative double.
double pow_int(double base, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

// Per-segment context: caches the sampled control potential and the substep
// size implied by the policy.
struct SegmentStepper {
    const CGLParams& p;
    const SolverConfig& config;
    double threshold;
    bool has_control = false;
    std::vector<double> control_samples;  // <u, Q>(x_j)
    double amp = 0.0;                     // |(r1,r2)| * |<u,Q>|_inf

    SegmentStepper(const std::vector<double>& u, const CGLParams& params, const SolverConfig& cfg,
                   double thr)
        : p(params), config(cfg), threshold(thr) {
        if (!u.empty() && !all_zero(u)) {
            if (static_cast<int>(u.size()) != p.q()) throw InputError("control size != q");
            const TrigPolynomial cp = p.control_poly(u);
            control_samples = cp.sample(config.grid);
            double mx = 0.0;
            for (double v : control_samples) mx = std::max(mx, std::abs(v));
            amp = std::hypot(p.r1, p.r2) * mx;
            has_control = true;
        }
    }

    double dt_for() const {
        if (config.policy == SubstepPolicy::fixed) return config.dt_max;
        return config.dt_max / (1.0 + amp);
    }

    SpectralField control_apply(const SpectralField& psi, double dt) const {
        const Complex z = Complex(p.r1, p.r2) * dt;
        double mx = -std::numeric_limits<double>::infinity();
        for (double v : control_samples) mx = std::max(mx, z.real() * v);
        if (mx > 700.0) throw RangeError("control multiplier exponent would overflow");
        auto s = psi.synthesize();
        for (std::size_t i = 0; i < s.size(); ++i) s[i] *= std::exp(z * control_samples[i]);
        SpectralField out = SpectralField::analyze(psi.grid(), s);
        out.set_real_valued(false);
        return out;
    }

    // Symmetric composition; reduces to linear-nonlinear-linear Strang when
    // the control vanishes. Each factor is the exact flow of its own term.
    SpectralField substep(const SpectralField& psi, double dt, double t_end) const {
        SpectralField v = linear_propagator(psi, 0.5 * dt, p);
        if (has_control) v = control_apply(v, 0.5 * dt);
        if (config.nonlinearity_enabled) v = nonlinear_flow(v, dt, p);
        if (has_control) v = control_apply(v, 0.5 * dt);
        v = linear_propagator(v, 0.5 * dt, p);
        const double hs = v.sobolev_norm(config.s);
        if (!(hs <= threshold)) throw BlowupError(t_end, hs);
        return v;
    }
};

}  // namespace

void CGLParams::validate() const {
    if (V < 0.0) throw InputError("V must be >= 0");
    if (sigma < 1) throw InputError("sigma must be >= 1");
    if (Q.empty()) throw InputError("Q must contain at least one direction");
    if (!std::isfinite(r1) || !std::isfinite(r2)) throw InputError("non-finite coupling");
}

TrigPolynomial CGLParams::control_poly(const std::vector<double>& u) const {
    if (u.size() != Q.size()) throw InputError("control vector size != q");
    TrigPolynomial cp(Q.empty() ? 1 : Q.front().dim());
    for (std::size_t j = 0; j < Q.size(); ++j) {
        if (u[j] == 0.0) continue;
        cp += u[j] * Q[j];
    }
    return cp;
}

int sobolev_floor(int d) { return d / 2 + 1; }

void SolverConfig::validate() const {
    grid.validate();
    if (s < sobolev_floor(grid.d)) throw InputError("Sobolev index below the algebra threshold");
    if (!(dt_max > 0.0)) throw InputError("dt_max must be positive");
}

double ControlSchedule::total_duration() const {
    double t = 0.0;
    for (const auto& seg : segments) t += seg.duration;
    return t;
}

SpectralField linear_propagator(const SpectralField& psi, double t, const CGLParams& p) {
    if (t < 0.0) throw InputError("linear_propagator: t must be >= 0");
    if (t == 0.0) return psi;
    const GridSpec& g = psi.grid();
    SpectralField out = psi;
    auto& c = out.coeffs();
    const int n = g.n_per_dim;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] == Complex(0.0, 0.0)) continue;
        std::size_t rest = i;
        double k2 = 0.0;
        for (int a = g.d - 1; a >= 0; --a) {
            const int bin = static_cast<int>(rest % static_cast<std::size_t>(n));
            rest /= static_cast<std::size_t>(n);
            const double k = mode_of_bin(bin, n);
            k2 += k * k;
        }
        c[i] *= std::exp(Complex(p.V - k2, -p.nu * k2) * t);
    }
    return out;
}

SpectralField nonlinear_flow(const SpectralField& psi, double t, const CGLParams& p) {
    if (t < 0.0) throw InputError("nonlinear_flow: t must be >= 0");
    if (t == 0.0) return psi;
    auto s = psi.synthesize();
    const double two_sigma = 2.0 * p.sigma;
    for (auto& z : s) {
        const double m2 = std::norm(z);
        if (m2 == 0.0) continue;
        const double g = 1.0 + two_sigma * pow_int(m2, p.sigma) * t;
        const double lng = std::log(g);
        // modulus factor g^{-1/(2 sigma)}, phase shift -(mu/(2 sigma)) ln g
        z *= std::polar(std::exp(-lng / two_sigma), -(p.mu / two_sigma) * lng);
    }
    SpectralField out = SpectralField::analyze(psi.grid(), s);
    out.dealias();
    out.set_real_valued(false);
    return out;
}

SpectralField control_flow(const SpectralField& psi, const std::vector<double>& u, double t,
                           const CGLParams& p) {
    if (t < 0.0) throw InputError("control_flow: t must be >= 0");
    if (u.empty() || all_zero(u) || t == 0.0) return psi;
    return exp_multiplier(p.control_poly(u), Complex(p.r1, p.r2) * t, psi);
}

SpectralField step(const SpectralField& psi, const std::vector<double>& u, double dt,
                   const CGLParams& p, const SolverConfig& config) {
    const double thr = resolved_threshold(config, psi);
    SegmentStepper ctx(u, p, config, thr);
    return ctx.substep(psi, dt, dt);
}

Trajectory resolve(const SpectralField& psi0, const ControlSchedule& schedule, double T,
                   const CGLParams& params, const SolverConfig& config, const ResolveOptions& opts) {
    config.validate();
    if (T < 0.0) throw InputError("resolve: T must be >= 0");
    CGLParams p = params;
    p.r1 = schedule.r1;
    p.r2 = schedule.r2;
    p.validate();

    const double thr = resolved_threshold(config, psi0);

    // Timeline of constant-control intervals covering [0, T].
    struct Piece {
        double t0, t1;
        const std::vector<double>* u;
    };
    static const std::vector<double> no_control;
    std::vector<Piece> pieces;
    double t = 0.0;
    for (const auto& seg : schedule.segments) {
        if (!(seg.duration > 0.0)) throw InputError("segment duration must be > 0");
        for (double v : seg.u)
            if (!std::isfinite(v)) throw InputError("segment control must be finite");
        if (t >= T) break;
        const double end = std::min(t + seg.duration, T);
        pieces.push_back({t, end, &seg.u});
        t = end;
    }
    if (t < T) pieces.push_back({t, T, &no_control});

    // Event times where rows/snapshots are recorded; integration lands on
    // them exactly.
    std::set<double> events;
    events.insert(T);
    if (opts.sample_dt > 0.0)
        for (double ts = opts.sample_dt; ts < T; ts += opts.sample_dt) events.insert(ts);
    for (double ts : opts.snapshot_times)
        if (ts > 0.0 && ts <= T) events.insert(ts);
    std::set<double> snaps(opts.snapshot_times.begin(), opts.snapshot_times.end());

    Trajectory traj;
    SpectralField psi = psi0;
    {
        const double hs0 = psi.sobolev_norm(config.s);
        if (!(hs0 <= thr)) throw BlowupError(0.0, hs0);
        traj.rows.push_back({0.0, hs0, psi.l2_norm(), psi.max_modulus()});
        if (snaps.count(0.0)) traj.snapshots.emplace_back(0.0, psi);
    }
    if (T == 0.0) {
        traj.final = psi;
        return traj;
    }

    for (const auto& piece : pieces) {
        SegmentStepper ctx(*piece.u, p, config, thr);
        const double dt_target = ctx.dt_for();
        double c = piece.t0;
        auto ev = events.upper_bound(piece.t0);
        while (c < piece.t1 - 1e-300) {
            double e = piece.t1;
            if (ev != events.end() && *ev < e) e = *ev;
            const double len = e - c;
            if (len > 0.0) {
                const long long m =
                    std::max(1LL, static_cast<long long>(std::ceil(len / dt_target * (1.0 - 1e-12))));
                if (m > 50000000LL) throw InputError("resolve: segment requires too many substeps");
                const double dt = len / static_cast<double>(m);
                for (long long i = 0; i < m; ++i) psi = ctx.substep(psi, dt, c + dt * static_cast<double>(i + 1));
            }
            c = e;
            if (events.count(c)) {
                traj.rows.push_back({c, psi.sobolev_norm(config.s), psi.l2_norm(), psi.max_modulus()});
                if (snaps.count(c)) traj.snapshots.emplace_back(c, psi);
                ev = events.upper_bound(c);
            }
        }
    }
    traj.final = psi;
    return traj;
}

SpectralField picard_reference(const SpectralField& psi0, const ControlSchedule& schedule, double T,
                               const CGLParams& params, const SolverConfig& config,
                               int max_iterations) {
    config.validate();
    if (T < 0.0) throw InputError("picard_reference: T must be >= 0");
    if (T == 0.0) return psi0;
    CGLParams p = params;
    p.r1 = schedule.r1;
    p.r2 = schedule.r2;
    p.validate();

    // Uniform time grid fine enough for every segment's control amplitude.
    double dt_target = config.dt_max;
    if (config.policy == SubstepPolicy::control_scaled) {
        for (const auto& seg : schedule.segments) {
            if (seg.u.empty() || all_zero(seg.u)) continue;
            const double mx = p.control_poly(seg.u).max_abs_on_grid(config.grid);
            dt_target = std::min(dt_target, config.dt_max / (1.0 + std::hypot(p.r1, p.r2) * mx));
        }
    }
    const int m = std::max(2, static_cast<int>(std::ceil(T / dt_target)));
    if (m > 20000) throw InputError("picard_reference: horizon too long for the quadrature grid");
    const double dt = T / m;

    auto control_at = [&](double tmid) -> const std::vector<double>* {
        double acc = 0.0;
        for (const auto& seg : schedule.segments) {
            acc += seg.duration;
            if (tmid < acc) return &seg.u;
        }
        return nullptr;
    };

    // N(t, psi) = -(1+i mu)|psi|^{2s} psi + (r1+i r2) <u(t),Q> psi, dealiased.
    const Complex rc(p.r1, p.r2);
    auto nonlinearity = [&](const SpectralField& psi, const std::vector<double>* u) {
        auto s = psi.synthesize();
        std::vector<double> ctrl;
        if (u && !u->empty() && !all_zero(*u)) ctrl = p.control_poly(*u).sample(config.grid);
        const Complex nl(1.0, p.mu);
        for (std::size_t i = 0; i < s.size(); ++i) {
            Complex v(0.0, 0.0);
            if (config.nonlinearity_enabled) {
                double m2s = 1.0;
                const double m2 = std::norm(s[i]);
                for (int e = 0; e < p.sigma; ++e) m2s *= m2;
                v -= nl * m2s * s[i];
            }
            if (!ctrl.empty()) v += rc * ctrl[i] * s[i];
            s[i] = v;
        }
        SpectralField out = SpectralField::analyze(config.grid, s);
        out.dealias();
        return out;
    };

    // Nodes psi_i at t_i = i dt, initialized with the free linear flow.
    std::vector<SpectralField> nodes(static_cast<std::size_t>(m) + 1, psi0);
    for (int i = 1; i <= m; ++i) nodes[static_cast<std::size_t>(i)] = linear_propagator(psi0, i * dt, p);

    double prev_delta = std::numeric_limits<double>::infinity();
    const double scale = std::max(1.0, psi0.sobolev_norm(config.s));
    for (int iter = 0; iter < max_iterations; ++iter) {
        // Midpoint integrand per subinterval from the current iterate.
        std::vector<SpectralField> integrand;
        integrand.reserve(static_cast<std::size_t>(m));
        for (int j = 0; j < m; ++j) {
            SpectralField mid = nodes[static_cast<std::size_t>(j)];
            mid += nodes[static_cast<std::size_t>(j) + 1];
            mid *= 0.5;
            integrand.push_back(nonlinearity(mid, control_at((j + 0.5) * dt)));
        }
        double delta = 0.0;
        std::vector<SpectralField> next(nodes.size(), psi0);
        for (int i = 1; i <= m; ++i) {
            SpectralField acc = linear_propagator(psi0, i * dt, p);
            for (int j = 0; j < i; ++j) {
                SpectralField term = linear_propagator(integrand[static_cast<std::size_t>(j)],
                                                       (i - j - 0.5) * dt, p);
                term *= dt;
                acc += term;
            }
            delta = std::max(delta, distance_hs(acc, nodes[static_cast<std::size_t>(i)], config.s));
            next[static_cast<std::size_t>(i)] = std::move(acc);
        }
        nodes = std::move(next);
        if (delta <= 1e-13 * scale) break;
        if (iter >= 2 && delta > prev_delta * (1.0 + 1e-9))
            throw NonContractionError("picard_reference: iterates stopped decreasing (delta " +
                                      std::to_string(delta) + " after " + std::to_string(iter) +
                                      " iterations)");
        prev_delta = delta;
    }
    return nodes.back();
}

double stability_probe(const SpectralField& psi0, const SpectralField& dpsi0,
                       const std::vector<double>& u, const std::vector<double>& du, double T,
                       const CGLParams& p, const SolverConfig& config) {
    if (u.size() != du.size()) throw InputError("stability_probe: control size mismatch");
    double du_norm2 = 0.0;
    for (double v : du) du_norm2 += v * v;
    const double denom = dpsi0.sobolev_norm(config.s) + std::sqrt(du_norm2) * std::sqrt(T);
    if (denom == 0.0) return 0.0;

    ResolveOptions opts;
    const int n_snap = 32;
    for (int i = 1; i <= n_snap; ++i) opts.snapshot_times.push_back(T * i / n_snap);

    ControlSchedule base{{{T, u}}, p.r1, p.r2};
    std::vector<double> up(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) up[i] = u[i] + du[i];
    ControlSchedule pert{{{T, up}}, p.r1, p.r2};

    const Trajectory a = resolve(psi0, base, T, p, config, opts);
    SpectralField psi0p = psi0;
    psi0p += dpsi0;
    const Trajectory b = resolve(psi0p, pert, T, p, config, opts);

    double sup = distance_hs(b.final, a.final, config.s);
    const std::size_t ns = std::min(a.snapshots.size(), b.snapshots.size());
    for (std::size_t i = 0; i < ns; ++i)
        sup = std::max(sup, distance_hs(b.snapshots[i].second, a.snapshots[i].second, config.s));
    return sup / denom;
}

}  // namespace cgl
