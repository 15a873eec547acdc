#pragma once

#include <Eigen/Dense>
#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

#include "mfl/correlation.hpp"
#include "mfl/params.hpp"
#include "mfl/propagator.hpp"

namespace mfl {
namespace detail {

struct FftPlans {
    fftw_plan col_fwd, col_bwd, row_fwd, row_bwd;
};

// One immortal plan set per chain length; creation is serialized, execution
// via fftw_execute_dft is thread-safe.
inline const FftPlans& fft_plans(int L) {
    static std::mutex mu;
    static std::map<int, FftPlans> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(L);
    if (it != cache.end()) return it->second;

    const std::ptrdiff_t n2 = 2 * static_cast<std::ptrdiff_t>(L);
    std::vector<cplx> tmp(static_cast<std::size_t>(n2) * n2);
    auto* buf = reinterpret_cast<fftw_complex*>(tmp.data());

    // Column-major 2L x 2L matrix with composite index 2*site + chain on
    // both axes. "col" plans transform the site part of the row index for
    // every (chain, column); "row" plans the site part of the column index.
    auto make = [&](bool over_columns, int sign) {
        fftw_iodim64 dim;
        fftw_iodim64 loops[2];
        if (!over_columns) {
            dim = {L, 2, 2};
            loops[0] = {2, 1, 1};
            loops[1] = {n2, n2, n2};
        } else {
            dim = {L, 2 * n2, 2 * n2};
            loops[0] = {2, n2, n2};
            loops[1] = {n2, 1, 1};
        }
        return fftw_plan_guru64_dft(1, &dim, 2, loops, buf, buf, sign,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
    };
    FftPlans p;
    p.col_fwd = make(false, FFTW_FORWARD);
    p.col_bwd = make(false, FFTW_BACKWARD);
    p.row_fwd = make(true, FFTW_FORWARD);
    p.row_bwd = make(true, FFTW_BACKWARD);
    return cache.emplace(L, p).first->second;
}

}  // namespace detail

/// Applies the one-cycle map D <- R+ D R in momentum space.
///
/// R is block-circulant, so conjugating by the per-chain Fourier transform
/// turns it into a 2x2 block per momentum: the step costs O(L^2 log L)
/// instead of the O(L^3) dense products. Equal to unitary_step with the
/// dense Propagator up to roundoff.
class MomentumPropagator {
  public:
    explicit MomentumPropagator(const ModelParams& p)
        : L_(p.L), params_hash_(p.propagator_hash()), plans_(&detail::fft_plans(p.L)) {
        p.validate();
        uk_.reserve(L_);
        uk_adj_.reserve(L_);
        for (int j = 0; j < L_; ++j) {
            uk_.push_back(mode_propagator(p, momentum(j, L_)));
            uk_adj_.push_back(uk_.back().adjoint());
        }
    }

    int L() const { return L_; }
    std::uint64_t params_hash() const { return params_hash_; }

    void apply(CorrelationMatrix& c) const {
        if (c.L != L_)
            throw std::invalid_argument("MomentumPropagator: dimension mismatch");
        auto* buf = reinterpret_cast<fftw_complex*>(c.D.data());
        fftw_execute_dft(plans_->col_fwd, buf, buf);
        fftw_execute_dft(plans_->row_bwd, buf, buf);
        for (int b = 0; b < L_; ++b)
            for (int a = 0; a < L_; ++a) {
                const Eigen::Matrix2cd blk = c.D.block<2, 2>(2 * a, 2 * b);
                c.D.block<2, 2>(2 * a, 2 * b) = uk_adj_[a] * blk * uk_[b];
            }
        fftw_execute_dft(plans_->col_bwd, buf, buf);
        fftw_execute_dft(plans_->row_fwd, buf, buf);
        c.D *= 1.0 / (static_cast<double>(L_) * static_cast<double>(L_));
    }

  private:
    int L_;
    std::uint64_t params_hash_;
    const detail::FftPlans* plans_;
    std::vector<Eigen::Matrix2cd> uk_, uk_adj_;
};

}  // namespace mfl
