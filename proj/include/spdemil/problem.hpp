#pragma once

#include "spdemil/exact.hpp"
#include "spdemil/spectral.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace spdemil {

/// Regularity exponents of an SPDE instance. Values are the eps -> 0 limits
/// of the admissible intervals, so the half-open upper bounds are accepted
/// with equality.
struct RegularityParams {
    Rational beta;
    Rational gamma;
    Rational delta;
    Rational alpha;
    Rational vartheta;
    Rational rho_A;
    Rational rho_Q;

    /// Temporal order of DFM and MIL: min(2(gamma - beta), gamma).
    Rational q_dfm() const;
    /// Temporal order of EES and LIE: min(1/2, 2(gamma - beta), gamma).
    Rational q_ees() const;

    /// Throws std::invalid_argument when an exponent leaves its admissible range.
    void validate() const;
};

enum class DriftKind {
    affine,  ///< F(y) = 1 - y
    sine,    ///< <F(v), e_i> = i^{-s} sin(i^r <v, e_i>)
};

enum class InitialKind {
    zero,   ///< xi = 0
    power,  ///< <xi, e_i> = i^{-exponent}
};

/// Parameter description of a problem from the sine-basis family used by the
/// shipped examples: mu_ij(y) = <y, e_j> / (i^p + j^4), eta_j = j^{-rho_Q}.
struct ProblemConfig {
    std::string name = "custom";
    double diffusivity = 0.01;
    Rational p = make_rational(4, 3);
    DriftKind drift = DriftKind::affine;
    double drift_s = 3.5;
    double drift_r = 3.5;
    InitialKind initial = InitialKind::zero;
    double initial_exponent = 2.0;
    RegularityParams params;
    double T = 1.0;
};

/// Full SPDE instance dX = (AX + F(X)) dt + B(X) dW in spectral coordinates.
/// All callbacks take 1-based noise indices j and write N coefficients into
/// `out`, where N = y.size(). H and U share the sine basis, so e_j = e~_j.
struct ProblemSpec {
    using DriftFn = std::function<void(std::span<const double> y, std::span<double> out)>;
    using ColumnFn =
        std::function<void(std::span<const double> y, std::size_t j, std::span<double> out)>;
    /// B'(y)(v, e~_j).
    using DerivativeFn = std::function<void(std::span<const double> y, std::span<const double> v,
                                            std::size_t j, std::span<double> out)>;
    using InitialFn = std::function<SpectralField(std::size_t n)>;

    std::string name;
    EigenLaw a_law;
    EigenLaw q_law;
    DriftFn drift;
    ColumnFn diffusion_column;
    DerivativeFn diffusion_derivative;  ///< may be empty
    InitialFn initial_value;
    RegularityParams params;
    double T = 1.0;
    bool linear_diffusion = false;

    bool has_derivative() const { return static_cast<bool>(diffusion_derivative); }
};

ProblemSpec make_problem(const ProblemConfig& config);
ProblemConfig example_config(int id);
ProblemSpec make_example(int id);

/// P_N F(y).
SpectralField eval_drift(const ProblemSpec& problem, const SpectralField& y);
/// P_N B(y) e~_j, 1 <= j <= N.
SpectralField eval_diffusion_column(const ProblemSpec& problem, const SpectralField& y,
                                    std::size_t j);
/// B'(y)(v, e~_j); throws std::logic_error if the problem has no derivative.
SpectralField eval_diffusion_derivative(const ProblemSpec& problem, const SpectralField& y,
                                        const SpectralField& v, std::size_t j);

/// max_{m,n<=K} ||B'(y)(P_N B(y)e~_m, e~_n) - B'(y)(P_N B(y)e~_n, e~_m)||_H.
double commutativity_defect(const ProblemSpec& problem, const SpectralField& y, std::size_t n,
                            std::size_t k);

struct GrowthReport {
    std::vector<double> operator_norms;  ///< ||P_N B(y)|_{U_K}||_{L(U, H_delta)}
    std::vector<double> ratios;          ///< operator norm / (1 + ||y||_{H_delta})
    double max_ratio = 0.0;
};

/// Finite-truncation check of the linear growth bound on B in H_delta.
GrowthReport check_growth_bounds(const ProblemSpec& problem,
                                 std::span<const SpectralField> sample_fields, std::size_t n,
                                 std::size_t k);

}  // namespace spdemil
