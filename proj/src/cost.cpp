#include "spdemil/cost.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace spdemil {

std::string_view scheme_name(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::DFM:
            return "DFM";
        case SchemeKind::MIL:
            return "MIL";
        case SchemeKind::EES:
            return "EES";
        case SchemeKind::LIE:
            return "LIE";
    }
    throw std::invalid_argument("scheme_name: unknown scheme kind");
}

SchemeKind parse_scheme(std::string_view text) {
    std::string up(text);
    std::transform(up.begin(), up.end(), up.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (up == "DFM" || up == "DFMA") {
        return SchemeKind::DFM;
    }
    if (up == "MIL" || up == "MILA") {
        return SchemeKind::MIL;
    }
    if (up == "EES") {
        return SchemeKind::EES;
    }
    if (up == "LIE") {
        return SchemeKind::LIE;
    }
    throw std::invalid_argument("unknown scheme '" + std::string(text) +
                                "' (expected DFM, MIL, EES or LIE)");
}

bool uses_iterated(SchemeKind kind) {
    return kind == SchemeKind::DFM || kind == SchemeKind::MIL;
}

CostLedger& CostLedger::operator+=(const CostLedger& other) {
    functional_evals_F += other.functional_evals_F;
    functional_evals_B += other.functional_evals_B;
    functional_evals_Bprime += other.functional_evals_Bprime;
    normal_draws += other.normal_draws;
    unit_ops += other.unit_ops;
    return *this;
}

double CostLedger::total(double c) const {
    const auto evals = functional_evals_F + functional_evals_B + functional_evals_Bprime;
    return c * static_cast<double>(evals) + static_cast<double>(normal_draws);
}

CostLedger operator*(std::uint64_t factor, const CostLedger& ledger) {
    return CostLedger{
        .functional_evals_F = factor * ledger.functional_evals_F,
        .functional_evals_B = factor * ledger.functional_evals_B,
        .functional_evals_Bprime = factor * ledger.functional_evals_Bprime,
        .normal_draws = factor * ledger.normal_draws,
        .unit_ops = factor * ledger.unit_ops,
    };
}

std::uint64_t cost_formula(SchemeKind kind, std::uint64_t N, std::uint64_t K, std::uint64_t M,
                           const Rational& q) {
    if (N == 0 || K == 0 || M == 0) {
        throw std::invalid_argument("cost_formula: N, K and M must be positive");
    }
    const double n = static_cast<double>(N);
    const double k = static_cast<double>(K);
    const double m = static_cast<double>(M);
    const double series = std::pow(m, to_double(2 * q - 1));
    double total = 0.0;
    switch (kind) {
        case SchemeKind::DFM:
            total = m * n + 2.0 * m * n * k + m * k * (1.0 + 2.0 * series);
            break;
        case SchemeKind::MIL:
            total = m * n + m * n * k + m * n * n * k + m * k * (1.0 + 2.0 * series);
            break;
        case SchemeKind::EES:
        case SchemeKind::LIE:
            total = m * n + m * n * k + m * k;
            break;
    }
    // Integer-valued totals can land a few ulps above the integer.
    const double rounded = std::round(total);
    if (std::abs(total - rounded) <= 1e-9 * std::max(1.0, rounded)) {
        return static_cast<std::uint64_t>(rounded);
    }
    return static_cast<std::uint64_t>(std::ceil(total));
}

CostLedger ledger_expected(SchemeKind kind, std::uint64_t N, std::uint64_t K, std::uint64_t D) {
    CostLedger l;
    l.functional_evals_F = N;
    l.unit_ops = 1;
    switch (kind) {
        case SchemeKind::EES:
        case SchemeKind::LIE:
            l.functional_evals_B = K * N;
            l.normal_draws = K;
            break;
        case SchemeKind::DFM:
            l.functional_evals_B = 2 * K * N;
            l.normal_draws = K * (1 + 2 * D);
            break;
        case SchemeKind::MIL:
            l.functional_evals_B = K * N;
            l.functional_evals_Bprime = K * N * N;
            l.normal_draws = K * (1 + 2 * D);
            break;
    }
    return l;
}

CostLedger ledger_expected(SchemeKind kind, std::uint64_t N, std::uint64_t K, std::uint64_t M,
                           std::uint64_t D) {
    return M * ledger_expected(kind, N, K, D);
}

}  // namespace spdemil
