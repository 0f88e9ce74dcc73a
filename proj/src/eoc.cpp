#include "spdemil/eoc.hpp"

#include "spdemil/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spdemil {

namespace {

const Rational kHalf(1, 2);

Rational reciprocal_sum(const std::vector<Rational>& terms) {
    Rational s = 0;
    for (const Rational& t : terms) {
        s += 1 / t;
    }
    return 1 / s;
}

Rational eoc_for(const PlanInput& input, SchemeKind scheme) {
    PlanInput in = input;
    in.scheme = scheme;
    return eoc_exponent(in);
}

}  // namespace

PlanInput PlanInput::from_params(const RegularityParams& params, SchemeKind scheme) {
    PlanInput in;
    in.gamma = params.gamma;
    in.beta = params.beta;
    in.alpha = params.alpha;
    in.rho_A = params.rho_A;
    in.rho_Q = params.rho_Q;
    in.scheme = scheme;
    return in;
}

Rational PlanInput::q_dfm() const {
    return std::min(Rational(2 * (gamma - beta)), gamma);
}

Rational PlanInput::q() const {
    return uses_iterated(scheme) ? q_dfm() : std::min(kHalf, q_dfm());
}

void PlanInput::validate() const {
    if (!(q_dfm() > 0)) {
        throw std::invalid_argument("PlanInput: need gamma > beta and gamma > 0");
    }
    if (!(rho_A > 0) || !(rho_Q > 1)) {
        throw std::invalid_argument("PlanInput: need rho_A > 0 and rho_Q > 1");
    }
    if (!finite_dim_noise && !(alpha > 0)) {
        throw std::invalid_argument("PlanInput: alpha must be positive");
    }
    if (finite_dim_noise && noise_dimension == 0) {
        throw std::invalid_argument("PlanInput: noise dimension must be positive");
    }
}

Classification classify(const PlanInput& input) {
    input.validate();
    const Rational q = input.q_dfm();
    const Rational coupling = input.g() * (2 * q - 1);

    Classification c;
    if (q <= kHalf) {
        c.id = PlanCase::low_order;
        c.label = "q <= 1/2";
    } else if (coupling <= q) {
        c.id = PlanCase::weak_coupling;
        c.label = "gamma*rho_A*(2q-1) <= q, q > 1/2";
    } else if (coupling <= 2 * q) {
        c.id = PlanCase::moderate;
        c.label = "q <= gamma*rho_A*(2q-1) <= 2q";
    } else {
        c.id = PlanCase::strong;
        c.label = "2q <= gamma*rho_A*(2q-1)";
    }

    const SchemeKind all[] = {SchemeKind::DFM, SchemeKind::MIL, SchemeKind::EES};
    Rational best = 0;
    for (SchemeKind s : all) {
        best = std::max(best, eoc_for(input, s));
    }
    for (SchemeKind s : all) {
        if (eoc_for(input, s) == best) {
            c.optimal.push_back(s);
        }
    }
    return c;
}

Rational eoc_exponent(const PlanInput& input) {
    input.validate();
    const Rational g = input.g();
    const Rational q = input.q_dfm();
    const Rational coupling = g * (2 * q - 1);

    if (input.finite_dim_noise) {
        switch (input.scheme) {
            case SchemeKind::DFM:
                return coupling <= q ? Rational(g * q / (g + q)) : kHalf;
            case SchemeKind::MIL:
                return coupling <= 2 * q ? Rational(g * q / (g + 2 * q)) : kHalf;
            case SchemeKind::EES:
            case SchemeKind::LIE: {
                const Rational qe = input.q();
                return g * qe / (g + qe);
            }
        }
    }

    const Rational a = input.a();
    const Rational saturated = a / (2 * a + 1);
    switch (input.scheme) {
        case SchemeKind::DFM:
            if (q <= kHalf || coupling <= q) {
                return reciprocal_sum({g, a, q});
            }
            return saturated;
        case SchemeKind::MIL:
            if (coupling <= 2 * q) {
                return reciprocal_sum({g / 2, a, q});
            }
            return saturated;
        case SchemeKind::EES:
        case SchemeKind::LIE:
            return reciprocal_sum({g, a, input.q()});
    }
    throw std::invalid_argument("eoc_exponent: unknown scheme");
}

Resolution optimal_resolution(const PlanInput& input, std::uint64_t anchor_N) {
    input.validate();
    if (anchor_N == 0) {
        throw std::invalid_argument("optimal_resolution: anchor N must be positive");
    }
    Resolution r;
    r.N = anchor_N;
    const Rational q = input.q();
    r.exponent_M = input.g() / q;
    r.M = ceil_power(anchor_N, r.exponent_M);
    if (input.finite_dim_noise) {
        r.exponent_K = 0;
        r.K = input.noise_dimension;
    } else {
        r.exponent_K = input.g() / input.a();
        r.K = std::min<std::uint64_t>(anchor_N, ceil_power(anchor_N, r.exponent_K));
    }
    if (uses_iterated(input.scheme)) {
        if (input.truncation == Truncation::alg1) {
            r.D = choose_D1(r.M, q);
        } else {
            std::vector<double> eta(r.K);
            const double rho = to_double(input.rho_Q);
            for (std::size_t j = 0; j < r.K; ++j) {
                eta[j] = std::pow(static_cast<double>(j + 1), -rho);
            }
            r.D = choose_D2(r.M, r.K, eta, q);
        }
    }
    return r;
}

}  // namespace spdemil
