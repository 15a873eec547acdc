#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "mfl/correlation.hpp"
#include "mfl/momentum.hpp"
#include "mfl/negativity.hpp"
#include "mfl/parallel.hpp"
#include "mfl/params.hpp"
#include "mfl/rng.hpp"

namespace mfl {

enum class RecordPolicy {
    last_m,     // negativity evaluated only on the n_average post-steady cycles
    all_cycles  // debug: evaluated after every cycle
};

struct RunOptions {
    RecordPolicy record = RecordPolicy::last_m;
    Filling filling = Filling::global;
};

/// One quantum trajectory: the recorded negativity series (nats) and its
/// steady-state average over the last n_average recorded cycles.
struct TrajectoryResult {
    std::vector<double> negativity_series;
    double steady_mean = 0.0;
    std::uint64_t seed = 0;
    RecordPolicy record = RecordPolicy::last_m;
};

/// A numerical failure inside a trajectory, with enough context to replay it.
class TrajectoryError : public std::runtime_error {
  public:
    TrajectoryError(std::uint64_t seed, int cycle, const std::string& what)
        : std::runtime_error("trajectory seed=" + std::to_string(seed) + " cycle=" +
                             std::to_string(cycle) + ": " + what),
          seed_(seed),
          cycle_(cycle) {}
    std::uint64_t seed() const { return seed_; }
    int cycle() const { return cycle_; }

  private:
    std::uint64_t seed_;
    int cycle_;
};

/// Runs the full protocol for one trajectory: random half-filled product
/// state, then n_steady + n_average cycles of unitary evolution followed by
/// a measurement sweep. The negativity is evaluated at the end of each
/// recorded cycle (after the sweep).
inline TrajectoryResult run_trajectory(const ModelParams& p, const Bipartition& part,
                                       std::uint64_t seed,
                                       const MomentumPropagator* prop = nullptr,
                                       const RunOptions& opt = {}) {
    p.validate();
    part.validate();
    std::optional<MomentumPropagator> own;
    if (!prop || prop->params_hash() != p.propagator_hash())
        prop = &own.emplace(p);

    RngStream rng(seed);
    CorrelationMatrix state = init_half_filling(p.L, rng, opt.filling);

    TrajectoryResult result;
    result.seed = seed;
    result.record = opt.record;
    const int total = p.n_steady + p.n_average;
    for (int cycle = 1; cycle <= total; ++cycle) {
        prop->apply(state);
        measure_sweep(state, p, rng);
        if (opt.record == RecordPolicy::all_cycles || cycle > p.n_steady) {
            try {
                result.negativity_series.push_back(fermionic_negativity(state, part));
            } catch (const NumericalError& e) {
                throw TrajectoryError(seed, cycle, e.what());
            } catch (const ConditioningError& e) {
                throw TrajectoryError(seed, cycle, e.what());
            }
        }
    }
    const auto last = result.negativity_series.end();
    result.steady_mean =
        std::accumulate(last - p.n_average, last, 0.0) / static_cast<double>(p.n_average);
    return result;
}

/// Trajectory-averaged steady-state negativity with its standard error.
struct EnsembleResult {
    double mean = 0.0;
    double sem = 0.0;
    int n_traj = 0;
    int n_failed = 0;
    ModelParams params;
    int lA = 0;
    std::uint64_t master_seed = 0;
    std::vector<double> steady_means;  // per successful trajectory, index order
};

/// Runs n_traj independent trajectories with seeds derived from
/// (master_seed, index) and averages their steady means. The reduction is
/// done in index order after all workers join, so the result is a pure
/// function of the inputs regardless of thread count. Fails if more than 1%
/// of trajectories error.
inline EnsembleResult run_ensemble(const ModelParams& p, const Bipartition& part, int n_traj,
                                   std::uint64_t master_seed, int threads = 1,
                                   const RunOptions& opt = {}) {
    if (n_traj < 1) throw std::invalid_argument("run_ensemble: n_traj must be >= 1");
    p.validate();
    part.validate();
    const MomentumPropagator prop(p);

    std::vector<std::optional<double>> means(n_traj);
    std::vector<std::string> failures(n_traj);
    parallel_for(n_traj, threads, [&](int i) {
        try {
            means[i] = run_trajectory(p, part, derive_seed(master_seed, i), &prop, opt).steady_mean;
        } catch (const TrajectoryError& e) {
            failures[i] = e.what();
        }
    });

    EnsembleResult r;
    r.n_traj = n_traj;
    r.params = p;
    r.lA = part.lA;
    r.master_seed = master_seed;
    std::string first_failure;
    for (int i = 0; i < n_traj; ++i) {
        if (means[i])
            r.steady_means.push_back(*means[i]);
        else {
            ++r.n_failed;
            if (first_failure.empty()) first_failure = failures[i];
        }
    }
    if (r.n_failed * 100 > n_traj)
        throw std::runtime_error("run_ensemble: " + std::to_string(r.n_failed) + "/" +
                                 std::to_string(n_traj) +
                                 " trajectories failed; first: " + first_failure);

    const auto& xs = r.steady_means;
    const int n = static_cast<int>(xs.size());
    r.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    if (n > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - r.mean) * (x - r.mean);
        r.sem = std::sqrt(ss / (static_cast<double>(n) * (n - 1)));
    }
    return r;
}

}  // namespace mfl
