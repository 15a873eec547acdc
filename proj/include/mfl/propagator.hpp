#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "mfl/common.hpp"
#include "mfl/params.hpp"

namespace mfl {

/// Momentum grid point j of an L-site chain with periodic boundaries.
inline double momentum(int j, int L) { return 2.0 * kPi * j / L; }

/// Bloch Hamiltonian of the ladder at momentum k:
///   [[2 t1 cos k, t12], [t12, 2 t2 cos k]].
inline Eigen::Matrix2d bloch_hamiltonian(const ModelParams& p, double k) {
    Eigen::Matrix2d h;
    h << 2.0 * p.t1 * std::cos(k), p.t12, p.t12, 2.0 * p.t2 * std::cos(k);
    return h;
}

/// One-cycle mode propagator U_k = exp(-i tau_u H_k), in closed form.
///
/// With t = t1 + t2, delta = t1 - t2 and a = sqrt(t12^2 + delta^2 cos^2 k):
///   U_k = e^{-i t tau_u cos k} [ cos(a tau_u) I
///         - i sin(a tau_u)/a (t12 sx + delta cos k sz) ].
/// At a = 0 the bracket degenerates to the identity.
inline Eigen::Matrix2cd mode_propagator(const ModelParams& p, double k) {
    const double t = p.t1 + p.t2;
    const double delta = p.t1 - p.t2;
    const double ck = std::cos(k);
    const double a = std::hypot(p.t12, delta * ck);
    const cplx phase = std::exp(cplx(0.0, -t * ck * p.tau_u));

    Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity() * std::cos(a * p.tau_u);
    const double f = a > 0.0 ? std::sin(a * p.tau_u) / a : p.tau_u;
    Eigen::Matrix2cd m;
    m << delta * ck, p.t12, p.t12, -delta * ck;
    u -= cplx(0.0, f) * m;
    return phase * u;
}

/// Single-particle propagator of one unitary cycle in real space.
struct Propagator {
    Eigen::MatrixXcd R;  // 2L x 2L, composite index 2*site + chain
    int L = 0;
    std::uint64_t params_hash = 0;
};

/// Assembles R_{(m,s),(n,s')} = (1/L) sum_k e^{-ik(m-n)} (U_k)_{ss'}.
/// R is block-circulant in the site index and unitary.
inline Propagator build_propagator(const ModelParams& p) {
    p.validate();
    const int L = p.L;

    // One 2x2 block per site offset d = (m - n) mod L.
    std::vector<Eigen::Matrix2cd> block(L, Eigen::Matrix2cd::Zero());
    for (int j = 0; j < L; ++j) {
        const double k = momentum(j, L);
        const Eigen::Matrix2cd uk = mode_propagator(p, k);
        for (int d = 0; d < L; ++d)
            block[d] += std::exp(cplx(0.0, -k * d)) * uk / static_cast<double>(L);
    }

    Propagator prop;
    prop.L = L;
    prop.params_hash = p.propagator_hash();
    prop.R.resize(2 * L, 2 * L);
    for (int m = 0; m < L; ++m)
        for (int n = 0; n < L; ++n)
            prop.R.block<2, 2>(2 * m, 2 * n) = block[((m - n) % L + L) % L];
    return prop;
}

}  // namespace mfl
