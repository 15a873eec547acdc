#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

#include "mfl/common.hpp"
#include "mfl/params.hpp"
#include "mfl/propagator.hpp"
#include "mfl/rng.hpp"

namespace mfl {

/// Two-point function D_{(i,s),(j,s')} = <c+_{i,s} c_{j,s'}> of the ladder.
/// Hermitian, spectrum in [0,1]; a projector on pure trajectories.
struct CorrelationMatrix {
    Eigen::MatrixXcd D;
    int L = 0;

    static CorrelationMatrix from_bits(const std::vector<int>& bits) {
        CorrelationMatrix c;
        c.L = static_cast<int>(bits.size()) / 2;
        c.D = Eigen::MatrixXcd::Zero(bits.size(), bits.size());
        for (std::size_t i = 0; i < bits.size(); ++i) c.D(i, i) = bits[i] ? 1.0 : 0.0;
        return c;
    }

    double trace_real() const { return D.trace().real(); }
    double hermiticity_error() const { return (D - D.adjoint()).cwiseAbs().maxCoeff(); }
    double purity_error() const { return (D * D - D).cwiseAbs().maxCoeff(); }

    void rehermitize() { D = ((D + D.adjoint()) / 2.0).eval(); }
};

enum class Filling { global, per_chain };

/// Random half-filled product state: exactly L of the 2L modes occupied,
/// uniform over the (2L choose L) bitstrings (or L/2 per chain with
/// Filling::per_chain). Consumes one draw per mode, in composite-index order
/// for global filling and chain-major order for per-chain filling.
inline CorrelationMatrix init_half_filling(int L, RngStream& rng,
                                           Filling filling = Filling::global) {
    std::vector<int> bits(2 * L, 0);
    auto select = [&rng](std::vector<int*> slots, int want) {
        int n = static_cast<int>(slots.size());
        for (int i = 0; i < n; ++i) {
            // selection sampling: keep item i with probability want/remaining
            const double u = rng.next();
            if (u <= static_cast<double>(want) / static_cast<double>(n - i)) {
                *slots[i] = 1;
                --want;
            }
        }
    };
    if (filling == Filling::global) {
        std::vector<int*> slots;
        for (int idx = 0; idx < 2 * L; ++idx) slots.push_back(&bits[idx]);
        select(slots, L);
    } else {
        for (int chain = 0; chain < 2; ++chain) {
            std::vector<int*> slots;
            for (int site = 0; site < L; ++site) slots.push_back(&bits[mode_index(site, chain)]);
            select(slots, L / 2);
        }
    }
    return CorrelationMatrix::from_bits(bits);
}

/// One unitary cycle, D <- R+ D R (dense route).
inline void unitary_step(CorrelationMatrix& c, const Propagator& prop) {
    if (c.D.rows() != prop.R.rows())
        throw std::invalid_argument("unitary_step: dimension mismatch between state and propagator");
    c.D = (prop.R.adjoint() * c.D * prop.R).eval();
}

struct Measurement {
    int site;
    int chain;    // 0 = system, 1 = ancilla
    int outcome;  // measured occupation, 0 or 1

    bool operator==(const Measurement&) const = default;
};
using MeasurementRecord = std::vector<Measurement>;

// Occupations this close to 0 or 1 make the Born outcome deterministic and
// the rank-1 update a 0/0; the update is skipped there.
inline constexpr double kDegenerateTol = 1e-12;

/// Stochastic measurement sweep in fixed order: chain 1 sites 0..L-1, then
/// chain 2. Per site one draw z decides whether to measure (z <= p_sigma);
/// if so a second draw q picks the outcome (q <= <n> gives 1) and the rank-1
/// projector update is applied. Measured diagonal entries are set to the
/// outcome exactly; D is re-Hermitized at the end of the sweep.
inline MeasurementRecord measure_sweep(CorrelationMatrix& c, const ModelParams& p,
                                       RngStream& rng) {
    MeasurementRecord record;
    const int n = 2 * c.L;
    Eigen::VectorXcd v(n);
    for (int chain = 0; chain < 2; ++chain) {
        const double prob = chain == 0 ? p.p1 : p.p2;
        for (int site = 0; site < c.L; ++site) {
            const double z = rng.next();
            if (z > prob) continue;
            const int l = mode_index(site, chain);
            const double occ = std::clamp(c.D(l, l).real(), 0.0, 1.0);
            const double q = rng.next();
            int outcome;
            if (occ < kDegenerateTol) {
                outcome = 0;
            } else if (1.0 - occ < kDegenerateTol) {
                outcome = 1;
            } else if (q <= occ) {
                outcome = 1;
                v = c.D.col(l);
                c.D.noalias() -= v * (v.adjoint() / occ);
                c.D(l, l) += 1.0;
            } else {
                outcome = 0;
                v = -c.D.col(l);
                v(l) += 1.0;
                c.D.noalias() += v * (v.adjoint() / (1.0 - occ));
                c.D(l, l) -= 1.0;
            }
            c.D(l, l) = static_cast<double>(outcome);
            record.push_back({site, chain, outcome});
        }
    }
    c.rehermitize();
    return record;
}

}  // namespace mfl
