#pragma once

#include "spdemil/exact.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace spdemil {

enum class SchemeKind { DFM, MIL, EES, LIE };

std::string_view scheme_name(SchemeKind kind);
/// Accepts "DFM", "DFMA", "MIL", "MILA", "EES", "LIE" (case-insensitive).
SchemeKind parse_scheme(std::string_view text);
bool uses_iterated(SchemeKind kind);

/// Counts of real-valued functional evaluations and random numbers.
struct CostLedger {
    std::uint64_t functional_evals_F = 0;
    std::uint64_t functional_evals_B = 0;
    std::uint64_t functional_evals_Bprime = 0;
    std::uint64_t normal_draws = 0;
    std::uint64_t unit_ops = 0;  ///< time steps taken

    CostLedger& operator+=(const CostLedger& other);
    bool operator==(const CostLedger&) const = default;

    /// c * (functional evaluations) + normal draws.
    double total(double c = 1.0) const;
};

CostLedger operator*(std::uint64_t factor, const CostLedger& ledger);

/// Closed-form run cost with c = 1, real M^{2q-1} and one final ceiling:
///   DFM: MN + 2MNK + MK(1 + 2 M^{2q-1})
///   MIL: MN + MNK + MN^2K + MK(1 + 2 M^{2q-1})
///   EES, LIE: MN + MNK + MK
std::uint64_t cost_formula(SchemeKind kind, std::uint64_t N, std::uint64_t K, std::uint64_t M,
                           const Rational& q);

/// Per-step counts.
CostLedger ledger_expected(SchemeKind kind, std::uint64_t N, std::uint64_t K, std::uint64_t D);
/// M times the per-step counts.
CostLedger ledger_expected(SchemeKind kind, std::uint64_t N, std::uint64_t K, std::uint64_t M,
                           std::uint64_t D);

}  // namespace spdemil
