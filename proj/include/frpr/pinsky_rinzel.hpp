#pragma once

#include "frpr/fde_solver.hpp"

#include <Eigen/Dense>

namespace frpr {

using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

/// State component order used throughout: (V_s, V_d, h, n, s, c, q, Ca).
namespace idx {
inline constexpr Eigen::Index v_soma = 0;
inline constexpr Eigen::Index v_dend = 1;
inline constexpr Eigen::Index h = 2;
inline constexpr Eigen::Index n = 3;
inline constexpr Eigen::Index s = 4;
inline constexpr Eigen::Index c = 5;
inline constexpr Eigen::Index q = 6;
inline constexpr Eigen::Index ca = 7;
inline constexpr Eigen::Index count = 8;
}  // namespace idx

struct NeuronState {
    double v_soma = 0.0;  // mV
    double v_dend = 0.0;  // mV
    double h = 0.0;       // Na inactivation
    double n = 0.0;       // K_DR activation
    double s = 0.0;       // Ca activation
    double c = 0.0;       // K_Ca activation
    double q = 0.0;       // K_AHP activation
    double ca = 0.0;      // calcium concentration, model units

    Vec8 to_vector() const;
    static NeuronState from_vector(const Vec8& v);

    /// Finite fields with gating variables h, n, s, c, q in [0, 1].
    bool valid_initial() const;
};

struct NeuronParams {
    // maximal conductances, mS/cm^2
    double g_leak = 0.1;
    double g_na = 30.0;
    double g_kdr = 15.0;
    double g_ca = 10.0;
    double g_kahp = 0.8;
    double g_kc = 15.0;
    // reversal potentials, mV
    double v_na = 120.0;
    double v_ca = 140.0;
    double v_k = -15.0;
    double v_leak = 0.0;
    // geometry and coupling
    double p = 0.5;    // somatic area fraction
    double g_c = 2.1;  // coupling strength
    // injections, uA/cm^2
    double i_sapp = 2.5;
    double i_dapp = 0.0;
    double i_syn = 0.0;
    // membrane constants
    double r_m = 10.0;
    double tau_m = 30.0;
    // shift applied inside the voltage-dependent rate functions
    double voltage_offset = 60.0;

    bool valid() const;
    bool operator==(const NeuronParams&) const = default;
};

/// Parameter set and initial state used for every quantitative result.
NeuronParams canonical_params();
NeuronState canonical_initial_state();

/// Alternate preset with reversal potentials quoted relative to rest
/// (V shifted by -60 mV, no offset inside the rate functions).
NeuronParams table_params();

enum class GateVariant { smooth, nonsmooth };

enum class RateKind { alpha_m, beta_m, alpha_n, beta_n, alpha_h, beta_h, alpha_s, beta_s };

/// Voltage-dependent opening/closing rate. Removable singularities of the
/// x/(exp(x/s)-1) forms evaluate to their analytic limits.
double rate(RateKind kind, double v, const NeuronParams& params);

struct GateSteady {
    double steady;  // omega_inf in [0, 1]
    double tau;     // > 0
};

/// arbitrary rate pair -> (omega_inf, tau) = (a/(a+b), 1/(a+b))
GateSteady gate_from_rates(double alpha_rate, double beta_rate);

enum class Gate { m, n, h, s };

GateSteady gate_steady_and_tau(Gate gate, double v, const NeuronParams& params);

struct SmoothCaGates {
    double c_inf;
    double tau_c;
    double q_inf;
    double tau_q;
    double chi;
};

struct NonSmoothCaGates {
    double alpha_c;
    double beta_c;
    double alpha_q;
    double beta_q;  // 0.001 always
    double chi;     // min(Ca/250, 1)
};

SmoothCaGates smooth_ca_gates(double v_dend, double ca, const NeuronParams& params);
NonSmoothCaGates nonsmooth_ca_gates(double v_dend, double ca, const NeuronParams& params);

struct CurrentBreakdown {
    double i_leak_soma;
    double i_na;
    double i_kdr;
    double i_leak_dend;
    double i_ca;
    double i_kca;
    double i_kahp;
    double i_sd;  // g_c (V_d - V_s); I_DS = -I_SD
};

CurrentBreakdown currents(const Vec8& state, const NeuronParams& params, GateVariant gates);

/// Fractional membrane capacitance tau_m^alpha / R_m.
double capacitance(FractionalOrder alpha, const NeuronParams& params);

/// Full 8-component vector field. Voltage rows are divided by the
/// fractional capacitance; gating and calcium rows are not.
Vec8 rhs(double t, const Vec8& state, const NeuronParams& params, FractionalOrder alpha,
         GateVariant gates);

/// Solver-ready closure over fixed parameters.
RhsFunction make_rhs(const NeuronParams& params, FractionalOrder alpha, GateVariant gates);

}  // namespace frpr
