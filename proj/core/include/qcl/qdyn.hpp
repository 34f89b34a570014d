#pragma once

#include <complex>
#include <numbers>
#include <optional>
#include <vector>

namespace qcl {

using cplx = std::complex<double>;

// Control field is scaled so one unit of amplitude detunes the qubit by
// twice the bare tunnelling rate. With the tunnelling term fixed at 1/2,
// a pulse of total duration pi is the shortest that can move |0> to |1>,
// and all experiments run at twice that.
inline constexpr double kMinFlipTime = std::numbers::pi;
inline constexpr double kDefaultTotalTime = 2.0 * std::numbers::pi;

std::vector<double> linspace(double lo, double hi, int n);

struct QubitState {
    cplx c0; // amplitude on |0>
    cplx c1; // amplitude on |1>
};

QubitState ground_state();
QubitState excited_state();
double state_norm(const QubitState& s);

// Piecewise-constant control: `amplitudes` holds one field value per
// segment, each applied for total_time / amplitudes.size().
struct ControlPulse {
    std::vector<double> amplitudes;
    double total_time = kDefaultTotalTime;

    double dt() const {
        return total_time / static_cast<double>(amplitudes.size());
    }
};

struct Unitary2 {
    cplx u00, u01, u10, u11;

    QubitState apply(const QubitState& s) const {
        return {u00 * s.c0 + u01 * s.c1, u10 * s.c0 + u11 * s.c1};
    }
};

// Exact propagator for one constant-amplitude segment,
// exp(-i dt (sigma_x / 2 + 2 a sigma_z)).
Unitary2 segment_propagator(double amplitude, double dt);

// Applies every segment of the pulse in order, renormalising once at the
// end to shed accumulated rounding.
QubitState evolve(const QubitState& initial, const ControlPulse& pulse);

double fidelity(const QubitState& state, const QubitState& target);

// Fidelity of |0> driven by `pulse` against |1>, the objective every
// optimizer in this library maximises.
double pulse_fidelity(const ControlPulse& pulse);

// Occupation of |1> after holding a constant field `a` for time t,
// starting from |0>. Closed form used as a cross-check of evolve().
double rabi_excited_population(double a, double t);

// Scans candidate durations max_T * i / scan_points (i = 1..scan_points)
// and returns the shortest one where a small genetic search finds a pulse
// with fidelity >= 0.999. Empty when no scanned duration qualifies.
std::optional<double> estimate_speed_limit(double max_T, int scan_points,
                                           int segments);

} // namespace qcl
