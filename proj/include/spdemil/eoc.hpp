#pragma once

#include "spdemil/cost.hpp"
#include "spdemil/exact.hpp"
#include "spdemil/problem.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace spdemil {

enum class Truncation { alg1, alg2 };

/// Exponents entering err <= C (N^{-gamma rho_A} + K^{-alpha rho_Q} + M^{-q}).
struct PlanInput {
    Rational gamma;
    Rational beta;
    Rational alpha;
    Rational rho_A;
    Rational rho_Q;
    bool finite_dim_noise = false;
    std::size_t noise_dimension = 1;  ///< K when finite_dim_noise is set
    SchemeKind scheme = SchemeKind::DFM;
    Truncation truncation = Truncation::alg1;

    static PlanInput from_params(const RegularityParams& params, SchemeKind scheme);

    /// min(2(gamma - beta), gamma), the DFM/MIL order.
    Rational q_dfm() const;
    /// q of `scheme`: q_dfm, capped at 1/2 for EES and LIE.
    Rational q() const;
    Rational g() const { return gamma * rho_A; }
    Rational a() const { return alpha * rho_Q; }

    /// Throws std::invalid_argument outside the admissible ranges.
    void validate() const;
};

/// Rows of the planning table, checked in this order.
enum class PlanCase {
    low_order = 1,     ///< q <= 1/2
    weak_coupling = 2, ///< g(2q-1) <= q and q > 1/2
    moderate = 3,      ///< q <= g(2q-1) <= 2q
    strong = 4,        ///< 2q <= g(2q-1)
};

struct Classification {
    PlanCase id = PlanCase::low_order;
    std::string label;
    std::vector<SchemeKind> optimal;  ///< schemes attaining the largest EOC
};

Classification classify(const PlanInput& input);

/// Exact effective order of `input.scheme` (LIE is planned like EES).
Rational eoc_exponent(const PlanInput& input);

struct Resolution {
    std::uint64_t N = 0;
    std::uint64_t M = 0;
    std::uint64_t K = 0;
    std::uint64_t D = 0;   ///< 0 for EES and LIE
    Rational exponent_M;   ///< M = ceil(N^{exponent_M})
    Rational exponent_K;   ///< K = ceil(N^{exponent_K}); 0 for finite-dimensional noise
};

/// Resolution tied to the anchor N: M = ceil(N^{g/q}), K = ceil(N^{g/a}),
/// D from choose_D1 (or choose_D2 when requested).
Resolution optimal_resolution(const PlanInput& input, std::uint64_t anchor_N);

}  // namespace spdemil
