#include "frpr/pinsky_rinzel.hpp"

#include <cmath>

namespace frpr {

namespace {

// coef * x / (exp(x/scale) - 1) with the limit coef*scale at x = 0
double singular_rate(double coef, double x, double scale) {
    const double u = x / scale;
    const double ratio = (u == 0.0) ? 1.0 : u / std::expm1(u);
    return coef * scale * ratio;
}

bool in_unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

Vec8 NeuronState::to_vector() const {
    Vec8 v;
    v << v_soma, v_dend, h, n, s, c, q, ca;
    return v;
}

NeuronState NeuronState::from_vector(const Vec8& v) {
    return {v[idx::v_soma], v[idx::v_dend], v[idx::h], v[idx::n],
            v[idx::s],      v[idx::c],      v[idx::q], v[idx::ca]};
}

bool NeuronState::valid_initial() const {
    return to_vector().allFinite() && in_unit_interval(h) && in_unit_interval(n) &&
           in_unit_interval(s) && in_unit_interval(c) && in_unit_interval(q);
}

bool NeuronParams::valid() const {
    const bool conductances = g_leak >= 0 && g_na >= 0 && g_kdr >= 0 && g_ca >= 0 &&
                              g_kahp >= 0 && g_kc >= 0 && g_c >= 0;
    return conductances && p > 0.0 && p < 1.0 && r_m > 0.0 && tau_m > 0.0;
}

NeuronParams canonical_params() { return NeuronParams{}; }

NeuronState canonical_initial_state() {
    return {-4.6, -4.5, 0.999, 0.001, 0.009, 0.007, 0.01, 0.2};
}

NeuronParams table_params() {
    NeuronParams p;
    p.v_na = 60.0;
    p.v_ca = 80.0;
    p.v_k = -75.0;
    p.v_leak = -60.0;
    p.voltage_offset = 0.0;
    return p;
}

double rate(RateKind kind, double v, const NeuronParams& params) {
    const double w = v - params.voltage_offset;
    switch (kind) {
        case RateKind::alpha_m: return singular_rate(0.32, -46.9 - w, 4.0);
        case RateKind::beta_m: return singular_rate(0.28, w + 19.9, 5.0);
        case RateKind::alpha_n: return singular_rate(0.016, -24.9 - w, 5.0);
        case RateKind::beta_n: return 0.25 * std::exp(-1.0 - 0.025 * w);
        case RateKind::alpha_h: return 0.128 * std::exp((-43.0 - w) / 18.0);
        case RateKind::beta_h: return 4.0 / (1.0 + std::exp((-20.0 - w) / 5.0));
        case RateKind::alpha_s: return 1.6 / (1.0 + std::exp(-0.072 * (w - 5.0)));
        case RateKind::beta_s: return singular_rate(0.02, w + 8.9, 5.0);
    }
    return 0.0;
}

GateSteady gate_from_rates(double alpha_rate, double beta_rate) {
    const double total = alpha_rate + beta_rate;
    return {alpha_rate / total, 1.0 / total};
}

GateSteady gate_steady_and_tau(Gate gate, double v, const NeuronParams& params) {
    switch (gate) {
        case Gate::m:
            return gate_from_rates(rate(RateKind::alpha_m, v, params), rate(RateKind::beta_m, v, params));
        case Gate::n:
            return gate_from_rates(rate(RateKind::alpha_n, v, params), rate(RateKind::beta_n, v, params));
        case Gate::h:
            return gate_from_rates(rate(RateKind::alpha_h, v, params), rate(RateKind::beta_h, v, params));
        case Gate::s:
            return gate_from_rates(rate(RateKind::alpha_s, v, params), rate(RateKind::beta_s, v, params));
    }
    return {0.0, 0.0};
}

SmoothCaGates smooth_ca_gates(double v_dend, double ca, const NeuronParams& params) {
    const double w = v_dend - params.voltage_offset;
    SmoothCaGates g;
    g.c_inf = std::pow(1.0 / (1.0 + std::exp((-10.1 - w) / 0.1016)), 0.00925);
    g.tau_c = 3.627 * std::exp(0.03704 * w);
    g.q_inf = 0.7894 * std::exp(0.0002726 * ca) - 0.7292 * std::exp(-0.01672 * ca);
    g.tau_q = 657.9 * std::exp(-0.02023 * ca) + 301.8 * std::exp(-0.002381 * ca);
    g.chi = 1.073 * std::sin(0.003453 * ca + 0.08095) + 0.08408 * std::sin(0.01634 * ca - 2.34) +
            0.01811 * std::sin(0.0348 * ca - 0.9918);
    return g;
}

NonSmoothCaGates nonsmooth_ca_gates(double v_dend, double ca, const NeuronParams& params) {
    const double w = v_dend - params.voltage_offset;
    NonSmoothCaGates g;
    // Heaviside at w = -10 evaluates to 1 (right-continuous)
    if (w < -10.0) {
        g.alpha_c = std::exp((w + 50.0) / 11.0 - (w + 53.5) / 27.0) / 18.975;
        g.beta_c = 2.0 * std::exp((-53.5 - w) / 27.0) - g.alpha_c;
    } else {
        g.alpha_c = 2.0 * std::exp((-53.5 - w) / 27.0);
        g.beta_c = 0.0;
    }
    g.alpha_q = std::min(0.00002 * ca, 0.01);
    g.beta_q = 0.001;
    g.chi = std::min(ca / 250.0, 1.0);
    return g;
}

CurrentBreakdown currents(const Vec8& state, const NeuronParams& params, GateVariant gates) {
    const double v_s = state[idx::v_soma];
    const double v_d = state[idx::v_dend];
    const double ca = state[idx::ca];

    const double m_inf = gate_steady_and_tau(Gate::m, v_s, params).steady;
    const double chi = (gates == GateVariant::smooth) ? smooth_ca_gates(v_d, ca, params).chi
                                                      : nonsmooth_ca_gates(v_d, ca, params).chi;

    CurrentBreakdown out;
    out.i_leak_soma = params.g_leak * (v_s - params.v_leak);
    out.i_na = params.g_na * m_inf * m_inf * state[idx::h] * (v_s - params.v_na);
    out.i_kdr = params.g_kdr * state[idx::n] * (v_s - params.v_k);
    out.i_leak_dend = params.g_leak * (v_d - params.v_leak);
    out.i_ca = params.g_ca * state[idx::s] * state[idx::s] * (v_d - params.v_ca);
    out.i_kca = params.g_kc * state[idx::c] * chi * (v_d - params.v_k);
    out.i_kahp = params.g_kahp * state[idx::q] * (v_d - params.v_k);
    out.i_sd = params.g_c * (v_d - v_s);
    return out;
}

double capacitance(FractionalOrder alpha, const NeuronParams& params) {
    return std::pow(params.tau_m, alpha.value()) / params.r_m;
}

Vec8 rhs(double /*t*/, const Vec8& state, const NeuronParams& params, FractionalOrder alpha,
         GateVariant gates) {
    const double v_s = state[idx::v_soma];
    const double v_d = state[idx::v_dend];
    const double ca = state[idx::ca];
    const double c_m = capacitance(alpha, params);
    const CurrentBreakdown cur = currents(state, params, gates);

    Vec8 f;
    f[idx::v_soma] = (-cur.i_leak_soma - cur.i_na - cur.i_kdr + cur.i_sd / params.p +
                      params.i_sapp / params.p) /
                     c_m;
    f[idx::v_dend] = (-cur.i_leak_dend - cur.i_ca - cur.i_kca - cur.i_kahp -
                      params.i_syn / (1.0 - params.p) - cur.i_sd / (1.0 - params.p) +
                      params.i_dapp / (1.0 - params.p)) /
                     c_m;

    const GateSteady gh = gate_steady_and_tau(Gate::h, v_s, params);
    const GateSteady gn = gate_steady_and_tau(Gate::n, v_s, params);
    const GateSteady gs = gate_steady_and_tau(Gate::s, v_d, params);
    f[idx::h] = (gh.steady - state[idx::h]) / gh.tau;
    f[idx::n] = (gn.steady - state[idx::n]) / gn.tau;
    f[idx::s] = (gs.steady - state[idx::s]) / gs.tau;

    if (gates == GateVariant::smooth) {
        const SmoothCaGates g = smooth_ca_gates(v_d, ca, params);
        f[idx::c] = (g.c_inf - state[idx::c]) / g.tau_c;
        f[idx::q] = (g.q_inf - state[idx::q]) / g.tau_q;
    } else {
        const NonSmoothCaGates g = nonsmooth_ca_gates(v_d, ca, params);
        f[idx::c] = g.alpha_c * (1.0 - state[idx::c]) - g.beta_c * state[idx::c];
        f[idx::q] = g.alpha_q * (1.0 - state[idx::q]) - g.beta_q * state[idx::q];
    }
    f[idx::ca] = -0.13 * cur.i_ca - 0.075 * ca;
    return f;
}

RhsFunction make_rhs(const NeuronParams& params, FractionalOrder alpha, GateVariant gates) {
    return [params, alpha, gates](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt) {
        dydt = rhs(t, y, params, alpha, gates);
    };
}

}  // namespace frpr
