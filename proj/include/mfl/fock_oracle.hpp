#pragma once

#include <Eigen/Dense>
#include <bit>
#include <cstdint>
#include <vector>

#include "mfl/common.hpp"
#include "mfl/correlation.hpp"
#include "mfl/negativity.hpp"
#include "mfl/params.hpp"
#include "mfl/rng.hpp"

// Brute-force state-vector simulator on the full 2^(2L) Fock space.
// Test oracle only: every operation here recomputes from first principles
// (Jordan-Wigner operators, dense exponentials, Majorana expansions) with no
// shared code path with the Gaussian engine it is used to check.

namespace mfl {

/// Many-body state over the occupation basis; bit p of a basis index is the
/// occupation of composite mode p = 2*site + chain.
struct FockState {
    Eigen::VectorXcd amp;
    int L = 0;

    static FockState from_bits(const std::vector<int>& bits) {
        FockState s;
        s.L = static_cast<int>(bits.size()) / 2;
        s.amp = Eigen::VectorXcd::Zero(std::size_t{1} << bits.size());
        std::size_t idx = 0;
        for (std::size_t p = 0; p < bits.size(); ++p)
            if (bits[p]) idx |= std::size_t{1} << p;
        s.amp(idx) = 1.0;
        return s;
    }

    double norm_error() const { return std::abs(amp.norm() - 1.0); }
};

namespace fock {

inline void check_dim(int L, int cap, const char* what) {
    if (L > cap)
        throw std::invalid_argument(std::string(what) + ": L = " + std::to_string(L) +
                                    " exceeds the oracle cap of " + std::to_string(cap));
}

inline double jw_sign(std::size_t x, int p) {
    const std::uint64_t below = (std::uint64_t{1} << p) - 1;
    return std::popcount(static_cast<std::uint64_t>(x) & below) % 2 == 0 ? 1.0 : -1.0;
}

inline Eigen::VectorXcd annihilate(const Eigen::VectorXcd& psi, int p) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
    const std::size_t bit = std::size_t{1} << p;
    for (std::size_t x = 0; x < static_cast<std::size_t>(psi.size()); ++x)
        if (x & bit) out(x ^ bit) += jw_sign(x, p) * psi(x);
    return out;
}

inline Eigen::VectorXcd create(const Eigen::VectorXcd& psi, int p) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
    const std::size_t bit = std::size_t{1} << p;
    for (std::size_t x = 0; x < static_cast<std::size_t>(psi.size()); ++x)
        if (!(x & bit)) out(x | bit) += jw_sign(x, p) * psi(x);
    return out;
}

inline double occupation(const Eigen::VectorXcd& psi, int p) {
    const std::size_t bit = std::size_t{1} << p;
    double n = 0.0;
    for (std::size_t x = 0; x < static_cast<std::size_t>(psi.size()); ++x)
        if (x & bit) n += std::norm(psi(x));
    return n;
}

}  // namespace fock

/// Real-space single-particle matrix of the ladder Hamiltonian (PBC; on
/// L = 2 the two hopping terms of a chain add onto the same bond).
inline Eigen::MatrixXd single_particle_hamiltonian(const ModelParams& p) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2 * p.L, 2 * p.L);
    for (int site = 0; site < p.L; ++site) {
        const int nxt = (site + 1) % p.L;
        h(mode_index(site, 0), mode_index(nxt, 0)) += p.t1;
        h(mode_index(nxt, 0), mode_index(site, 0)) += p.t1;
        h(mode_index(site, 1), mode_index(nxt, 1)) += p.t2;
        h(mode_index(nxt, 1), mode_index(site, 1)) += p.t2;
        h(mode_index(site, 0), mode_index(site, 1)) += p.t12;
        h(mode_index(site, 1), mode_index(site, 0)) += p.t12;
    }
    return h;
}

/// Precomputed dense exponential of the many-body Hamiltonian of Eq-level
/// couplings; applies exp(-i tau_u H) to a state.
class FockEvolver {
  public:
    explicit FockEvolver(const ModelParams& p) : tau_(p.tau_u) {
        fock::check_dim(p.L, 4, "FockEvolver");
        const Eigen::MatrixXd h = single_particle_hamiltonian(p);
        const std::size_t dim = std::size_t{1} << (2 * p.L);
        Eigen::MatrixXcd hp = Eigen::MatrixXcd::Zero(dim, dim);
        for (int q = 0; q < 2 * p.L; ++q)
            for (int pp = 0; pp < 2 * p.L; ++pp) {
                if (h(pp, q) == 0.0) continue;
                const std::size_t bq = std::size_t{1} << q;
                const std::size_t bp = std::size_t{1} << pp;
                for (std::size_t x = 0; x < dim; ++x) {
                    if (!(x & bq)) continue;
                    const std::size_t y = x ^ bq;
                    if (y & bp) continue;
                    hp(y | bp, x) += h(pp, q) * fock::jw_sign(x, q) * fock::jw_sign(y, pp);
                }
            }
        solver_.compute(hp);
    }

    void step(FockState& s) const {
        const Eigen::VectorXcd phases =
            (cplx(0.0, -tau_) * solver_.eigenvalues().array()).exp();
        s.amp = solver_.eigenvectors() *
                (phases.array() * (solver_.eigenvectors().adjoint() * s.amp).array()).matrix();
    }

  private:
    double tau_;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver_;
};

inline FockState oracle_unitary(const FockState& s, const ModelParams& p) {
    FockState out = s;
    FockEvolver(p).step(out);
    return out;
}

/// Correlation matrix <c+_p c_q> extracted from the state.
inline CorrelationMatrix oracle_correlation(const FockState& s) {
    const int n = 2 * s.L;
    std::vector<Eigen::VectorXcd> cpsi(n);
    for (int p = 0; p < n; ++p) cpsi[p] = fock::annihilate(s.amp, p);
    CorrelationMatrix c;
    c.L = s.L;
    c.D.resize(n, n);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) c.D(p, q) = cpsi[p].dot(cpsi[q]);
    return c;
}

namespace fock {

// Projects mode p onto the given occupation and renormalizes; returns the
// Born probability of that outcome. Mirrors the engine's degenerate-branch
// rule: near-deterministic outcomes leave the state untouched.
inline double project(FockState& s, int p, int outcome) {
    const double n1 = occupation(s.amp, p);
    const double prob = outcome ? n1 : 1.0 - n1;
    if (prob > 1.0 - kDegenerateTol) return prob;
    const std::size_t bit = std::size_t{1} << p;
    for (std::size_t x = 0; x < static_cast<std::size_t>(s.amp.size()); ++x)
        if (((x & bit) != 0) != (outcome != 0)) s.amp(x) = 0.0;
    s.amp /= std::sqrt(prob);
    return prob;
}

}  // namespace fock

/// Measurement sweep driven by the same draw discipline as the engine:
/// one z per site in sweep order, one q per measured site.
inline MeasurementRecord oracle_measure(FockState& s, const ModelParams& p, RngStream& rng) {
    fock::check_dim(s.L, 4, "oracle_measure");
    MeasurementRecord record;
    for (int chain = 0; chain < 2; ++chain) {
        const double prob = chain == 0 ? p.p1 : p.p2;
        for (int site = 0; site < s.L; ++site) {
            const double z = rng.next();
            if (z > prob) continue;
            const int l = mode_index(site, chain);
            const double occ = std::clamp(fock::occupation(s.amp, l), 0.0, 1.0);
            const double q = rng.next();
            int outcome;
            if (occ < kDegenerateTol)
                outcome = 0;
            else if (1.0 - occ < kDegenerateTol)
                outcome = 1;
            else
                outcome = q <= occ ? 1 : 0;
            fock::project(s, l, outcome);
            record.push_back({site, chain, outcome});
        }
    }
    return record;
}

/// Replays a recorded outcome sequence; outcomes whose Born probability has
/// dropped below 1e-10 signal a disagreement between oracle and engine.
inline void oracle_measure_replay(FockState& s, const MeasurementRecord& record) {
    fock::check_dim(s.L, 4, "oracle_measure_replay");
    for (const Measurement& m : record) {
        const double prob = fock::project(s, mode_index(m.site, m.chain), m.outcome);
        if (prob < 1e-10)
            throw std::runtime_error(
                "oracle_measure_replay: recorded outcome has vanishing Born probability at site " +
                std::to_string(m.site) + " chain " + std::to_string(m.chain));
    }
}

namespace fock {

// Majorana matrices of an n-mode register, gamma_{2j} = c_j + c+_j and
// gamma_{2j+1} = i(c_j - c+_j), as dense matrices.
inline std::vector<Eigen::MatrixXcd> majorana_matrices(int n_modes) {
    const std::size_t dim = std::size_t{1} << n_modes;
    std::vector<Eigen::MatrixXcd> g(2 * n_modes, Eigen::MatrixXcd::Zero(dim, dim));
    for (int j = 0; j < n_modes; ++j) {
        const std::size_t bit = std::size_t{1} << j;
        for (std::size_t x = 0; x < dim; ++x) {
            const double sign = jw_sign(x, j);
            if (x & bit) {
                g[2 * j](x ^ bit, x) += sign;
                g[2 * j + 1](x ^ bit, x) += cplx(0.0, 1.0) * sign;
            } else {
                g[2 * j](x | bit, x) += sign;
                g[2 * j + 1](x | bit, x) += cplx(0.0, -1.0) * sign;
            }
        }
    }
    return g;
}

}  // namespace fock

/// Reduced density matrix of the system chain via the Majorana expansion:
/// rho_1 = sum_b w_b T_b with w_b = <T_b^+> / 2^L over even-weight monomials.
/// With kappa_weights, each term is also multiplied by i^{|kappa|} where
/// |kappa| counts Majorana indices of the first lA sites (the partial time
/// reversal of block A).
inline Eigen::MatrixXcd oracle_reduced_density(const FockState& s, int lA = 0,
                                               bool kappa_weights = false) {
    fock::check_dim(s.L, 3, "oracle_reduced_density");
    const int nm = 2 * s.L;  // Majorana count of the system register
    const auto gsys = fock::majorana_matrices(s.L);
    const std::size_t dim_sys = std::size_t{1} << s.L;
    const double inv = 1.0 / static_cast<double>(dim_sys);
    const std::uint64_t a_mask = (std::uint64_t{1} << (2 * lA)) - 1;

    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim_sys, dim_sys);
    const cplx iu(0.0, 1.0);
    for (std::uint64_t b = 0; b < (std::uint64_t{1} << nm); ++b) {
        if (std::popcount(b) % 2 != 0) continue;  // parity-even state
        // w_b = <psi| T_b^+ |psi> / 2^L; Majoranas are Hermitian, so T_b^+
        // applied to psi is the ascending-order product of the full-space
        // system Majoranas (system mode j lives on full mode 2j).
        Eigen::VectorXcd phi = s.amp;
        Eigen::MatrixXcd mono = Eigen::MatrixXcd::Identity(dim_sys, dim_sys);
        for (int a = 0; a < nm; ++a) {
            if (!(b >> a & 1)) continue;
            const int full_mode = 2 * (a / 2);
            if (a % 2 == 0)
                phi = fock::annihilate(phi, full_mode) + fock::create(phi, full_mode);
            else
                phi = iu * (fock::annihilate(phi, full_mode) - fock::create(phi, full_mode));
            mono = mono * gsys[a];
        }
        cplx w = s.amp.dot(phi) * inv;
        if (kappa_weights) {
            switch (std::popcount(b & a_mask) % 4) {
                case 1: w *= iu; break;
                case 2: w *= -1.0; break;
                case 3: w *= -iu; break;
                default: break;
            }
        }
        rho += w * mono;
    }
    return rho;
}

/// Negativity ln Tr sqrt(rho^R (rho^R)+) from the dense partial time
/// reversal; the authoritative slow route. Tr sqrt(M M+) is the trace norm,
/// summed over singular values rather than eigenvalue square roots so that
/// analytically-zero directions do not inject sqrt(eps) noise.
inline double oracle_negativity(const FockState& s, const Bipartition& part) {
    fock::check_dim(s.L, 3, "oracle_negativity");
    part.validate();
    const Eigen::MatrixXcd rho_r = oracle_reduced_density(s, part.lA, true);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(rho_r);
    return std::log(svd.singularValues().sum());
}

}  // namespace mfl
