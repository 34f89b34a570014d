#include "qcl/qdyn.hpp"

#include <cmath>

#include "qcl/errors.hpp"
#include "qcl/optim.hpp"

namespace qcl {

std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 1)
        throw invalid_argument("linspace: need at least one point");
    if (!(lo <= hi))
        throw invalid_argument("linspace: lo must not exceed hi");
    std::vector<double> v(static_cast<std::size_t>(n));
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] = lo + step * i;
    v.back() = hi; // exact endpoint regardless of rounding in the sum
    return v;
}

QubitState ground_state() { return {cplx(1.0, 0.0), cplx(0.0, 0.0)}; }
QubitState excited_state() { return {cplx(0.0, 0.0), cplx(1.0, 0.0)}; }

double state_norm(const QubitState& s) {
    return std::sqrt(std::norm(s.c0) + std::norm(s.c1));
}

Unitary2 segment_propagator(double amplitude, double dt) {
    if (!std::isfinite(amplitude))
        throw invalid_argument("segment_propagator: non-finite amplitude");
    if (!std::isfinite(dt) || dt <= 0.0)
        throw invalid_argument("segment_propagator: dt must be positive");

    // H = vx sigma_x + vz sigma_z with vx = 1/2, vz = 2a. Then
    // exp(-i dt H) = cos(w dt) I - i sin(w dt) (vx sigma_x + vz sigma_z)/w
    // where w = |v|.
    const double vx = 0.5;
    const double vz = 2.0 * amplitude;
    const double w = std::sqrt(vx * vx + vz * vz);
    const double c = std::cos(w * dt);
    const double s = std::sin(w * dt);

    Unitary2 u;
    u.u00 = cplx(c, -s * vz / w);
    u.u01 = cplx(0.0, -s * vx / w);
    u.u10 = u.u01;
    u.u11 = cplx(c, s * vz / w);
    return u;
}

QubitState evolve(const QubitState& initial, const ControlPulse& pulse) {
    if (pulse.amplitudes.empty())
        throw invalid_argument("evolve: pulse has no segments");
    if (!(pulse.total_time > 0.0) || !std::isfinite(pulse.total_time))
        throw invalid_argument("evolve: total_time must be positive");

    const double dt = pulse.dt();
    QubitState s = initial;
    for (double a : pulse.amplitudes)
        s = segment_propagator(a, dt).apply(s);

    const double n = state_norm(s);
    if (n <= 0.0)
        throw invalid_argument("evolve: initial state has zero norm");
    s.c0 /= n;
    s.c1 /= n;
    return s;
}

double fidelity(const QubitState& state, const QubitState& target) {
    const cplx overlap = std::conj(target.c0) * state.c0 +
                         std::conj(target.c1) * state.c1;
    return std::norm(overlap);
}

double pulse_fidelity(const ControlPulse& pulse) {
    return fidelity(evolve(ground_state(), pulse), excited_state());
}

double rabi_excited_population(double a, double t) {
    const double vx = 0.5;
    const double vz = 2.0 * a;
    const double w = std::sqrt(vx * vx + vz * vz);
    const double s = std::sin(w * t);
    return (vx * vx) / (w * w) * s * s;
}

std::optional<double> estimate_speed_limit(double max_T, int scan_points,
                                           int segments) {
    if (!(max_T > 0.0) || !std::isfinite(max_T))
        throw invalid_argument("estimate_speed_limit: max_T must be positive");
    if (scan_points < 1)
        throw invalid_argument("estimate_speed_limit: scan_points must be >= 1");
    if (segments < 1)
        throw invalid_argument("estimate_speed_limit: segments must be >= 1");

    // Chromosomes live on the gene grid, so the search can never beat the
    // grid optimum and report a duration below the true crossing; the only
    // failure mode is missing a feasible duration, which the restarts make
    // unlikely.
    GaConfig cfg;
    cfg.target_infidelity = 1e-3;

    for (int i = 1; i <= scan_points; ++i) {
        const double T = max_T * static_cast<double>(i) /
                         static_cast<double>(scan_points);
        for (std::uint64_t restart = 0; restart < 3; ++restart) {
            cfg.seed = 0x5eedf00d + restart;
            const OptimResult r = ga_optimize(segments, T, cfg);
            if (r.best_fidelity >= 0.999)
                return T;
        }
    }
    return std::nullopt;
}

} // namespace qcl
