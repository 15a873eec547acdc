#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "mfl/common.hpp"
#include "mfl/correlation.hpp"

namespace mfl {

/// Contiguous bipartition of the system chain: block A holds sites
/// 0..lA-1, block B the remaining L-lA sites.
struct Bipartition {
    int lA;
    int L;

    void validate() const {
        if (lA < 1 || lA > L - 1)
            throw std::invalid_argument("Bipartition: need 1 <= lA <= L-1");
    }
};

/// System-reduced correlation matrix: the chain-1 block of D.
inline Eigen::MatrixXcd reduce_to_system(const CorrelationMatrix& c) {
    Eigen::MatrixXcd d1(c.L, c.L);
    for (int i = 0; i < c.L; ++i)
        for (int j = 0; j < c.L; ++j) d1(i, j) = c.D(mode_index(i, 0), mode_index(j, 0));
    return d1;
}

/// Spectra entering the negativity formula: lambda from the system-reduced
/// matrix D1, mu from the product correlation matrix Gamma_x.
struct NegativitySpectra {
    Eigen::VectorXd lambda;
    Eigen::VectorXd mu;
    double clamp_report = 0.0;  // worst out-of-range magnitude seen
};

namespace detail {

inline constexpr double kSpectrumTol = 1e-6;

// The negativity is a sqrt-type function of the spectra, so eigenvalue noise
// eps near the edges of [0,1] surfaces as sqrt(eps) in the result. The
// spectra are therefore computed in extended precision, which keeps the
// engine within 1e-9 of the dense Fock-space route even at pure-state edges.
using ld = long double;
using MatrixXld = Eigen::Matrix<std::complex<ld>, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXld = Eigen::Matrix<ld, Eigen::Dynamic, 1>;

// Clamp a real spectrum to [0,1], tracking the worst excursion; excursions
// beyond tol are a numerical-degradation error.
inline VectorXld clamp_unit_spectrum(const VectorXld& ev, double& report, const char* what) {
    VectorXld out(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        const ld re = ev(i);
        const ld excess = std::max({-re, re - ld(1), ld(0)});
        report = std::max(report, static_cast<double>(excess));
        if (excess > kSpectrumTol)
            throw NumericalError(std::string(what) + ": eigenvalue " +
                                     std::to_string(static_cast<double>(re)) +
                                     " outside [0,1] beyond tolerance",
                                 static_cast<double>(excess));
        out(i) = std::clamp(re, ld(0), ld(1));
    }
    return out;
}

struct RawSpectra {
    VectorXld lambda, mu;
    double clamp_report = 0.0;
};

inline RawSpectra negativity_spectra_impl(const Eigen::MatrixXcd& d1, const Bipartition& part) {
    part.validate();
    const int n = static_cast<int>(d1.rows());
    if (n != part.L || d1.cols() != n)
        throw std::invalid_argument("negativity_spectra: matrix size does not match bipartition");
    const int a = part.lA;
    const int b = n - a;

    const MatrixXld dext = d1.cast<std::complex<ld>>();
    const MatrixXld herm = (dext + dext.adjoint()) / ld(2);
    const MatrixXld gamma = ld(2) * herm - MatrixXld::Identity(n, n);

    // G+- = [[G_AA, +-i G_AB], [+-i G_BA, -G_BB]]; G- = G+^dagger, so
    // (1 + G+G-)^{-1}(G+ + G-) is similar to the Hermitian
    // (1+H)^{-1/2} K (1+H)^{-1/2} with H = G+G+^+ and K = G+ + G+^+,
    // and the crossed spectrum comes out of a self-adjoint solve.
    const std::complex<ld> iu(0, 1);
    MatrixXld gp(n, n);
    gp.topLeftCorner(a, a) = gamma.topLeftCorner(a, a);
    gp.bottomRightCorner(b, b) = -gamma.bottomRightCorner(b, b);
    gp.topRightCorner(a, b) = iu * gamma.topRightCorner(a, b);
    gp.bottomLeftCorner(b, a) = iu * gamma.bottomLeftCorner(b, a);

    const MatrixXld k_mat = gp + gp.adjoint();
    const MatrixXld lhs = MatrixXld::Identity(n, n) + gp * gp.adjoint();

    Eigen::SelfAdjointEigenSolver<MatrixXld> lhs_solve(lhs);
    const ld smin = lhs_solve.eigenvalues().minCoeff();
    if (smin < ld(1e-14))
        throw ConditioningError("negativity_spectra: 1 + G+G- is numerically singular");
    const MatrixXld isqrt = lhs_solve.eigenvectors() *
                            lhs_solve.eigenvalues().array().rsqrt().matrix().asDiagonal() *
                            lhs_solve.eigenvectors().adjoint();
    MatrixXld w = isqrt * k_mat * isqrt;
    w = ((w + w.adjoint()) / ld(2)).eval();

    RawSpectra s;
    Eigen::SelfAdjointEigenSolver<MatrixXld> wsolve(w, Eigen::EigenvaluesOnly);
    VectorXld mu_raw = (VectorXld::Ones(n) - wsolve.eigenvalues()) / ld(2);
    s.mu = clamp_unit_spectrum(mu_raw, s.clamp_report, "crossed spectrum");

    Eigen::SelfAdjointEigenSolver<MatrixXld> dsolve(herm, Eigen::EigenvaluesOnly);
    s.lambda = clamp_unit_spectrum(dsolve.eigenvalues(), s.clamp_report, "system spectrum");
    return s;
}

}  // namespace detail

/// Spectra of D1 and of Gamma_x = (1 - (1 + G+ G-)^{-1} (G+ + G-)) / 2,
/// where G+- are the correlation matrices of the partially time-reversed
/// density matrix and its adjoint, built from Gamma = 2 D1 - 1.
inline NegativitySpectra negativity_spectra(const Eigen::MatrixXcd& d1, const Bipartition& part) {
    const detail::RawSpectra raw = detail::negativity_spectra_impl(d1, part);
    NegativitySpectra s;
    s.clamp_report = raw.clamp_report;
    s.lambda = raw.lambda.cast<double>();
    s.mu = raw.mu.cast<double>();
    return s;
}

/// Fermionic logarithmic negativity of block A within the system chain,
/// in nats:
///   E = sum_j [ ln(sqrt(mu_j) + sqrt(1-mu_j)) + ln((1-lambda_j)^2 + lambda_j^2)/2 ].
inline double fermionic_negativity(const Eigen::MatrixXcd& d1, const Bipartition& part) {
    const detail::RawSpectra s = detail::negativity_spectra_impl(d1, part);
    detail::ld e = 0;
    for (Eigen::Index j = 0; j < s.mu.size(); ++j)
        e += std::log(std::sqrt(s.mu(j)) + std::sqrt(detail::ld(1) - s.mu(j)));
    for (Eigen::Index j = 0; j < s.lambda.size(); ++j) {
        const detail::ld l = s.lambda(j);
        e += std::log((detail::ld(1) - l) * (detail::ld(1) - l) + l * l) / detail::ld(2);
    }
    const double out = static_cast<double>(e);
    if (out < -1e-8)
        throw NumericalError("fermionic_negativity: negative result " + std::to_string(out), -out);
    return std::max(out, 0.0);
}

inline double fermionic_negativity(const CorrelationMatrix& c, const Bipartition& part) {
    return fermionic_negativity(reduce_to_system(c), part);
}

/// Renyi-1/2 entropy 2 sum_a ln(sqrt(l_a) + sqrt(1-l_a)) of a reduced block;
/// equals the negativity across the cut whenever the system state is pure.
inline double renyi_half_entropy(const Eigen::MatrixXcd& dA) {
    const detail::MatrixXld ext = dA.cast<std::complex<detail::ld>>();
    const detail::MatrixXld herm = (ext + ext.adjoint()) / detail::ld(2);
    Eigen::SelfAdjointEigenSolver<detail::MatrixXld> solve(herm, Eigen::EigenvaluesOnly);
    double report = 0.0;
    const detail::VectorXld lam =
        detail::clamp_unit_spectrum(solve.eigenvalues(), report, "block spectrum");
    detail::ld s = 0;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        s += detail::ld(2) * std::log(std::sqrt(lam(i)) + std::sqrt(detail::ld(1) - lam(i)));
    return std::max(static_cast<double>(s), 0.0);
}

}  // namespace mfl
