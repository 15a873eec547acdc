#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "mfl/common.hpp"

namespace mfl {

/// Trajectory-averaged negativity vs system size at fixed (p1, p2, t2).
struct ScalingPoint {
    int L;
    double mean;
    double sem;
};

struct ScalingSeries {
    std::vector<ScalingPoint> points;

    void validate() const {
        for (std::size_t i = 0; i + 1 < points.size(); ++i)
            if (points[i].L >= points[i + 1].L)
                throw std::invalid_argument("ScalingSeries: L values must be strictly increasing");
    }
};

struct SusceptibilityPoint {
    double p2;
    double chi;
    double err;
};

/// chi_2 = dE/dp2 on a uniform p2 grid: central differences inside,
/// second-order one-sided stencils at the ends, errors propagated from the
/// standard errors of the means.
inline std::vector<SusceptibilityPoint> susceptibility(const std::vector<double>& p2,
                                                       const std::vector<double>& mean,
                                                       const std::vector<double>& sem) {
    const std::size_t n = p2.size();
    if (n < 3 || mean.size() != n || sem.size() != n)
        throw std::invalid_argument("susceptibility: need >= 3 equally sized grid arrays");
    const double h = p2[1] - p2[0];
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (std::abs((p2[i + 1] - p2[i]) - h) > 1e-9 * std::max(1.0, std::abs(h)))
            throw std::invalid_argument("susceptibility: p2 grid must be uniform");

    std::vector<SusceptibilityPoint> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double chi, var;
        if (i == 0) {
            chi = (-3.0 * mean[0] + 4.0 * mean[1] - mean[2]) / (2.0 * h);
            var = (9.0 * sem[0] * sem[0] + 16.0 * sem[1] * sem[1] + sem[2] * sem[2]) /
                  (4.0 * h * h);
        } else if (i == n - 1) {
            chi = (3.0 * mean[n - 1] - 4.0 * mean[n - 2] + mean[n - 3]) / (2.0 * h);
            var = (9.0 * sem[n - 1] * sem[n - 1] + 16.0 * sem[n - 2] * sem[n - 2] +
                   sem[n - 3] * sem[n - 3]) /
                  (4.0 * h * h);
        } else {
            chi = (mean[i + 1] - mean[i - 1]) / (2.0 * h);
            var = (sem[i + 1] * sem[i + 1] + sem[i - 1] * sem[i - 1]) / (4.0 * h * h);
        }
        out[i] = {p2[i], chi, std::sqrt(var)};
    }
    return out;
}

/// Logarithmic fit E = (c_eff/4) ln L + a0 over one window of sizes.
struct FitResult {
    double c_eff = 0.0;
    double a0 = 0.0;
    double c_err = 0.0;
    double a_err = 0.0;
    std::vector<int> window;
};

/// The five moving fit windows of the full-scale analysis, labeled by their
/// largest size.
inline const std::vector<std::vector<int>> kFitWindows = {
    {8, 16, 24, 32, 48, 64, 80, 96},
    {16, 24, 32, 48, 64, 80, 96, 128},
    {24, 32, 48, 64, 80, 96, 128, 160},
    {32, 48, 64, 80, 96, 128, 160, 192},
    {48, 64, 80, 96, 128, 160, 192, 256},
};

/// Moving windows of `len` consecutive sizes for desk-scale size lists.
inline std::vector<std::vector<int>> sliding_windows(const std::vector<int>& sizes, int len) {
    std::vector<std::vector<int>> out;
    if (len < 3 || static_cast<int>(sizes.size()) < len) return out;
    for (std::size_t i = 0; i + len <= sizes.size(); ++i)
        out.emplace_back(sizes.begin() + i, sizes.begin() + i + len);
    return out;
}

namespace detail {

// Weighted linear least squares y = a + b x. Weights are 1/sem^2 when every
// sem is positive; otherwise the fit is unweighted and parameter errors are
// scaled from the residual variance.
struct LineFit {
    double a, b, a_err, b_err;
};

inline LineFit weighted_line_fit(const std::vector<double>& x, const std::vector<double>& y,
                                 const std::vector<double>& sem) {
    const std::size_t n = x.size();
    const bool weighted =
        std::all_of(sem.begin(), sem.end(), [](double s) { return s > 0.0; });
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = weighted ? 1.0 / (sem[i] * sem[i]) : 1.0;
        sw += w;
        sx += w * x[i];
        sy += w * y[i];
        sxx += w * x[i] * x[i];
        sxy += w * x[i] * y[i];
    }
    const double delta = sw * sxx - sx * sx;
    if (delta <= 0.0 || !std::isfinite(delta))
        throw std::invalid_argument("line fit: singular design (all abscissae equal?)");
    LineFit f;
    f.b = (sw * sxy - sx * sy) / delta;
    f.a = (sxx * sy - sx * sxy) / delta;
    double a_var = sxx / delta;
    double b_var = sw / delta;
    if (!weighted) {
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - f.a - f.b * x[i];
            ss += r * r;
        }
        const double s2 = n > 2 ? ss / (n - 2) : 0.0;
        a_var *= s2;
        b_var *= s2;
    }
    f.a_err = std::sqrt(std::max(a_var, 0.0));
    f.b_err = std::sqrt(std::max(b_var, 0.0));
    return f;
}

}  // namespace detail

/// Weighted least squares of the series means against ln L over the sizes of
/// `window` present in the series; c_eff is 4x the slope.
inline FitResult fit_ceff(const ScalingSeries& series, const std::vector<int>& window) {
    series.validate();
    std::vector<double> x, y, s;
    for (const ScalingPoint& p : series.points)
        if (std::find(window.begin(), window.end(), p.L) != window.end()) {
            x.push_back(std::log(static_cast<double>(p.L)));
            y.push_back(p.mean);
            s.push_back(p.sem);
        }
    if (x.size() < 3)
        throw std::invalid_argument("fit_ceff: window must cover >= 3 sizes present in the series");
    const detail::LineFit f = detail::weighted_line_fit(x, y, s);
    FitResult r;
    r.c_eff = 4.0 * f.b;
    r.c_err = 4.0 * f.b_err;
    r.a0 = f.a;
    r.a_err = f.a_err;
    r.window = window;
    return r;
}

/// Quadratic thermodynamic extrapolation c_eff = c0 + c1/L + c2/L^2.
struct ExtrapolationResult {
    std::array<double, 3> c{};      // c0, c1, c2
    std::array<double, 3> c_err{};  // standard errors
};

struct CeffPoint {
    int L;  // window label (largest size in the fit window)
    double c_eff;
    double err;
};

inline ExtrapolationResult extrapolate_ceff(const std::vector<CeffPoint>& pts) {
    if (pts.size() < 3)
        throw std::invalid_argument("extrapolate_ceff: need >= 3 points");
    const bool weighted =
        std::all_of(pts.begin(), pts.end(), [](const CeffPoint& p) { return p.err > 0.0; });
    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Eigen::Vector3d atb = Eigen::Vector3d::Zero();
    for (const CeffPoint& p : pts) {
        const double x = 1.0 / p.L;
        const double w = weighted ? 1.0 / (p.err * p.err) : 1.0;
        const Eigen::Vector3d row(1.0, x, x * x);
        ata += w * row * row.transpose();
        atb += w * row * p.c_eff;
    }
    const Eigen::Matrix3d cov = ata.inverse();
    const Eigen::Vector3d sol = cov * atb;
    ExtrapolationResult r;
    double scale = 1.0;
    if (!weighted) {
        double ss = 0.0;
        for (const CeffPoint& p : pts) {
            const double x = 1.0 / p.L;
            const double res = p.c_eff - (sol(0) + sol(1) * x + sol(2) * x * x);
            ss += res * res;
        }
        scale = pts.size() > 3 ? ss / (pts.size() - 3) : 0.0;
    }
    for (int i = 0; i < 3; ++i) {
        r.c[i] = sol(i);
        r.c_err[i] = std::sqrt(std::max(cov(i, i) * scale, 0.0));
    }
    return r;
}

/// One input curve for the collapse: c_eff(p2) at a fixed size label.
struct CeffCurve {
    int L;
    std::vector<double> p2;
    std::vector<double> c_eff;
    std::vector<double> err;
};

struct CollapseResult {
    double p2c = 0.0, nu = 0.0, zeta = 0.0;
    double p2c_err = 0.0, nu_err = 0.0, zeta_err = 0.0;
    double quality = 0.0;  // residual collapse cost per contributing point
};

struct CollapseOptions {
    bool fix_zeta = false;
    double p2c_min = 0.0, p2c_max = 1.0;
    double nu_min = 0.5, nu_max = 10.0;
    double zeta_min = -1.0, zeta_max = 1.0;
};

namespace detail {

// Error-weighted master-curve residual: each rescaled point is compared with
// the piecewise-linear interpolation through the rescaled points of the
// other sizes. Returns the summed chi-square and the number of points that
// had an interpolation bracket.
inline std::pair<double, int> collapse_chi2(const std::vector<CeffCurve>& curves, double p2c,
                                            double nu, double zeta) {
    struct RPoint {
        double x, y, var;
        int curve;
    };
    std::vector<RPoint> all;
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const CeffCurve& cv = curves[c];
        const double lpow = std::pow(static_cast<double>(cv.L), 1.0 / nu);
        const double yscale = std::pow(static_cast<double>(cv.L), -zeta / nu);
        for (std::size_t i = 0; i < cv.p2.size(); ++i) {
            const double e = cv.err[i] > 0.0 ? cv.err[i] : 1.0;
            all.push_back({lpow * (cv.p2[i] - p2c), cv.c_eff[i] * yscale,
                           e * yscale * e * yscale, static_cast<int>(c)});
        }
    }
    std::sort(all.begin(), all.end(), [](const RPoint& a, const RPoint& b) {
        return a.x < b.x || (a.x == b.x && a.curve < b.curve);
    });

    double chi2 = 0.0;
    int used = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
        // bracket of nearest other-curve neighbours
        const RPoint* lo = nullptr;
        const RPoint* hi = nullptr;
        for (std::size_t j = i; j-- > 0;)
            if (all[j].curve != all[i].curve) {
                lo = &all[j];
                break;
            }
        for (std::size_t j = i + 1; j < all.size(); ++j)
            if (all[j].curve != all[i].curve) {
                hi = &all[j];
                break;
            }
        if (!lo || !hi) continue;
        const double dx = hi->x - lo->x;
        const double t = dx > 0.0 ? (all[i].x - lo->x) / dx : 0.5;
        const double yhat = lo->y + t * (hi->y - lo->y);
        const double var_hat = (1.0 - t) * (1.0 - t) * lo->var + t * t * hi->var;
        const double r = all[i].y - yhat;
        chi2 += r * r / (all[i].var + var_hat);
        ++used;
    }
    return {chi2, used};
}

// Deterministic Nelder-Mead on [0,1]^d-free parameters with an additive
// out-of-box penalty.
inline std::vector<double> nelder_mead(std::function<double(const std::vector<double>&)> f,
                                       std::vector<double> start, double step, int max_iter) {
    const std::size_t d = start.size();
    std::vector<std::vector<double>> pts(d + 1, start);
    std::vector<double> val(d + 1);
    for (std::size_t i = 0; i < d; ++i) pts[i + 1][i] += step;
    for (std::size_t i = 0; i <= d; ++i) val[i] = f(pts[i]);

    for (int it = 0; it < max_iter; ++it) {
        std::vector<std::size_t> order(d + 1);
        for (std::size_t i = 0; i <= d; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
        const std::size_t best = order[0], worst = order[d], second = order[d - 1];
        if (std::abs(val[worst] - val[best]) <
            1e-12 * (std::abs(val[best]) + std::abs(val[worst])) + 1e-15)
            break;

        std::vector<double> centroid(d, 0.0);
        for (std::size_t i = 0; i <= d; ++i)
            if (i != worst)
                for (std::size_t k = 0; k < d; ++k) centroid[k] += pts[i][k] / d;

        auto blend = [&](double alpha) {
            std::vector<double> p(d);
            for (std::size_t k = 0; k < d; ++k)
                p[k] = centroid[k] + alpha * (pts[worst][k] - centroid[k]);
            return p;
        };
        const std::vector<double> refl = blend(-1.0);
        const double fr = f(refl);
        if (fr < val[best]) {
            const std::vector<double> exp_p = blend(-2.0);
            const double fe = f(exp_p);
            if (fe < fr) {
                pts[worst] = exp_p;
                val[worst] = fe;
            } else {
                pts[worst] = refl;
                val[worst] = fr;
            }
        } else if (fr < val[second]) {
            pts[worst] = refl;
            val[worst] = fr;
        } else {
            const std::vector<double> con = blend(0.5);
            const double fc = f(con);
            if (fc < val[worst]) {
                pts[worst] = con;
                val[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= d; ++i) {
                    if (i == best) continue;
                    for (std::size_t k = 0; k < d; ++k)
                        pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
                    val[i] = f(pts[i]);
                }
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i <= d; ++i)
        if (val[i] < val[best]) best = i;
    return pts[best];
}

}  // namespace detail

/// Finite-size-scaling collapse of c_eff(p2, L) onto
/// L^{zeta/nu} f(L^{1/nu}(p2 - p2c)).
///
/// Minimizes the error-weighted master-curve interpolation residual over a
/// declared box with 16 deterministic multi-starts on a lattice; parameter
/// errors come from the curvature of the chi-square at the minimum
/// (delta-chi2 = 1 convention).
inline CollapseResult fss_collapse(const std::vector<CeffCurve>& curves,
                                   const CollapseOptions& opt = {}) {
    if (curves.size() < 3)
        throw std::invalid_argument("fss_collapse: need >= 3 distinct sizes");
    for (const CeffCurve& c : curves)
        if (c.p2.size() < 5 || c.p2.size() != c.c_eff.size() || c.p2.size() != c.err.size())
            throw std::invalid_argument("fss_collapse: each curve needs >= 5 consistent points");

    const int dim = opt.fix_zeta ? 2 : 3;
    auto boxed = [&](const std::vector<double>& th) {
        double penalty = 0.0;
        auto pen = [&](double v, double lo, double hi) {
            if (v < lo) penalty += 1e6 * (lo - v) * (lo - v) + 1.0;
            if (v > hi) penalty += 1e6 * (v - hi) * (v - hi) + 1.0;
            return std::clamp(v, lo, hi);
        };
        const double p2c = pen(th[0], opt.p2c_min, opt.p2c_max);
        const double nu = pen(th[1], opt.nu_min, opt.nu_max);
        const double zeta = opt.fix_zeta ? 0.0 : pen(th[2], opt.zeta_min, opt.zeta_max);
        const auto [chi2, used] = detail::collapse_chi2(curves, p2c, nu, zeta);
        if (used == 0) return 1e30;
        return chi2 / used + penalty;
    };

    // 4x4 deterministic lattice of starts over (p2c, nu), zeta from 0.
    std::vector<double> best;
    double best_val = std::numeric_limits<double>::infinity();
    for (int ip = 0; ip < 4; ++ip)
        for (int in = 0; in < 4; ++in) {
            const double p2c0 =
                opt.p2c_min + (opt.p2c_max - opt.p2c_min) * (2.0 * ip + 1.0) / 8.0;
            const double nu0 = opt.nu_min + (opt.nu_max - opt.nu_min) * (2.0 * in + 1.0) / 8.0;
            std::vector<double> start = {p2c0, nu0};
            if (!opt.fix_zeta) start.push_back(0.0);
            std::vector<double> sol = detail::nelder_mead(boxed, start, 0.05, 400);
            sol = detail::nelder_mead(boxed, sol, 0.005, 400);  // polish
            const double v = boxed(sol);
            if (v < best_val) {
                best_val = v;
                best = sol;
            }
        }

    CollapseResult r;
    r.p2c = std::clamp(best[0], opt.p2c_min, opt.p2c_max);
    r.nu = std::clamp(best[1], opt.nu_min, opt.nu_max);
    r.zeta = opt.fix_zeta ? 0.0 : std::clamp(best[2], opt.zeta_min, opt.zeta_max);
    r.quality = best_val;

    // Errors from the curvature of the unnormalized chi-square.
    auto chi2_at = [&](double p2c, double nu, double zeta) {
        return detail::collapse_chi2(curves, p2c, nu, zeta).first;
    };
    const std::array<double, 3> theta = {r.p2c, r.nu, r.zeta};
    const std::array<double, 3> h = {1e-4, 1e-3, 1e-4};
    Eigen::Matrix3d hess = Eigen::Matrix3d::Zero();
    auto eval = [&](const std::array<double, 3>& t) { return chi2_at(t[0], t[1], t[2]); };
    const double f0 = eval(theta);
    const int nerr = opt.fix_zeta ? 2 : 3;
    for (int i = 0; i < nerr; ++i)
        for (int j = i; j < nerr; ++j) {
            auto shift = [&](int k, double s) {
                std::array<double, 3> t = theta;
                t[k] += s;
                return t;
            };
            double d2;
            if (i == j) {
                d2 = (eval(shift(i, h[i])) - 2.0 * f0 + eval(shift(i, -h[i]))) / (h[i] * h[i]);
            } else {
                std::array<double, 3> tpp = theta, tpm = theta, tmp = theta, tmm = theta;
                tpp[i] += h[i]; tpp[j] += h[j];
                tpm[i] += h[i]; tpm[j] -= h[j];
                tmp[i] -= h[i]; tmp[j] += h[j];
                tmm[i] -= h[i]; tmm[j] -= h[j];
                d2 = (eval(tpp) - eval(tpm) - eval(tmp) + eval(tmm)) / (4.0 * h[i] * h[j]);
            }
            hess(i, j) = hess(j, i) = d2;
        }
    std::array<double, 3> errs{};
    if (nerr == 2) {
        const Eigen::Matrix2d h2 = hess.topLeftCorner<2, 2>();
        if (h2.determinant() > 0.0 && h2(0, 0) > 0.0) {
            const Eigen::Matrix2d inv = h2.inverse();
            for (int i = 0; i < 2; ++i) errs[i] = std::sqrt(std::max(2.0 * inv(i, i), 0.0));
        }
    } else {
        Eigen::FullPivLU<Eigen::Matrix3d> lu(hess);
        if (lu.isInvertible()) {
            const Eigen::Matrix3d inv = lu.inverse();
            for (int i = 0; i < 3; ++i) errs[i] = std::sqrt(std::max(2.0 * inv(i, i), 0.0));
        }
    }
    r.p2c_err = errs[0];
    r.nu_err = errs[1];
    r.zeta_err = errs[2];
    return r;
}

/// p2 where the largest and smallest fit windows exchange order, located by
/// linear interpolation of their difference on the grid; NaN when the
/// difference never changes sign. The trend dc_eff/dL is positive below the
/// crossing and negative above it.
inline double detect_crossing(const std::vector<double>& p2,
                              const std::vector<double>& ceff_small_window,
                              const std::vector<double>& ceff_large_window) {
    const std::size_t n = p2.size();
    if (n < 2 || ceff_small_window.size() != n || ceff_large_window.size() != n)
        throw std::invalid_argument("detect_crossing: inconsistent grids");
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = ceff_large_window[i] - ceff_small_window[i];
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (diff[i] == 0.0) return p2[i];
        if (diff[i] > 0.0 && diff[i + 1] < 0.0) {
            const double t = diff[i] / (diff[i] - diff[i + 1]);
            return p2[i] + t * (p2[i + 1] - p2[i]);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace mfl
