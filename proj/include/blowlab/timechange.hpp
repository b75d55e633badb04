#pragma once

#include <string>
#include <vector>

#include "blowlab/ode.hpp"

namespace blowlab {

// The cascade of bounded quantities derived from a blow-up trajectory:
//   u_0 = 1/((T-t) y),  u_i = y^(i)/(y y^(i-1)),
//   v_i(s) = u_i(phi(s)) with phi(s) = T (1 - e^-(1+s)),
//   w_i(tau) = v_i(psi(tau)) with psi the inverse of s -> int_0^s dr/v_0(r).
// In w-time the dynamics are an autonomous Lotka-Volterra system.

struct UTrajectory {
    int d = 0;
    double T = 0.0;
    std::vector<double> t;
    std::vector<std::vector<double>> u;  // u[k] has d+1 entries
    double bound = 0.0;                  // run-reported sup of all u_i
    double u0_dT_sensitivity = 0.0;      // max |du0/dT| * uncertainty(T)
};

struct VTrajectory {
    int d = 0;
    double T = 0.0;
    double t0 = 0.0;  // = (1 - 1/e) T, image of s = 0
    std::vector<double> s;
    std::vector<std::vector<double>> v;
};

struct WTrajectory {
    int d = 0;
    std::vector<double> tau;
    std::vector<std::vector<double>> w;  // d entries per sample
    std::vector<double> psi;             // psi(tau[k]) = s_k
};

UTrajectory build_u(const std::vector<DerivativeJet>& traj, const BlowupEstimate& T);

// Per-equation residuals of the u-system: max over interior samples of
// |centered difference - rhs| * (T - t). Needs >= 3 samples.
std::vector<double> residual_system_u(const UTrajectory& u, double T);

// Reparameterization by s = phi^-1(t) = ln(T/(T-t)) - 1; keeps only t >= t0.
VTrajectory build_v(const UTrajectory& u, double T);

std::vector<double> residual_system_v(const VTrajectory& v);

// Defect of the integral identity v0(s) = e^s int_s^inf v1 e^-sigma dsigma.
// The tail beyond the data uses v1 -> 1/(d+1) for d <= 10 and the last
// sample value otherwise; tail truncation error is reported separately.
struct V0IdentityDefect {
    double identity = 0.0;  // max defect over samples with small tail weight
    double tail = 0.0;      // bound on the truncated-tail contribution
};
enum class TailMode { Auto, Limit, LastSample };
V0IdentityDefect v0_identity_defect(const VTrajectory& v, TailMode tail = TailMode::Auto);

// Quadrature of tau = int_0^s dr/v0 and the inverse map psi.
WTrajectory build_w(const VTrajectory& v);

std::vector<double> residual_system_w(const WTrajectory& w);

// psi(tau)/tau at the last sample; converges to 1/(d+1).
double psi_slope_at_end(const WTrajectory& w);

// Round trip against the augmented ODE state: max |tau_k - (x(phi(s_k)) - x(t0))|.
double psi_roundtrip_defect(const WTrajectory& w, const VTrajectory& v,
                            const std::vector<DerivativeJet>& traj);

void export_u_csv(const UTrajectory& u, const std::string& path);
void export_v_csv(const VTrajectory& v, const std::string& path);
void export_w_csv(const WTrajectory& w, const std::string& path);

}  // namespace blowlab
