#include "spdemil/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spdemil {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void check_eta(std::span<const double> eta, std::size_t K, const char* who) {
    if (eta.size() != K) {
        throw std::invalid_argument(std::string(who) + ": eta must hold one value per increment");
    }
}

}  // namespace

double NoisePacket::antisymmetry_defect() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < K(); ++i) {
        for (std::size_t j = 0; j < K(); ++j) {
            const double rhs = std::sqrt(eta[i] * eta[j]) * delta_beta[i] * delta_beta[j] -
                               (i == j ? eta[i] * h : 0.0);
            const double lhs = iterated(idx(i), idx(j)) + iterated(idx(j), idx(i));
            worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
        }
    }
    return worst;
}

double NoisePacket::diagonal_defect() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < K(); ++i) {
        const double rhs = eta[i] * (delta_beta[i] * delta_beta[i] - h) / 2.0;
        worst = std::max(worst, std::abs(iterated(idx(i), idx(i)) - rhs) /
                                    std::max(1.0, std::abs(rhs)));
    }
    return worst;
}

std::vector<double> sample_increments(RandomStream& rng, std::size_t K, double h) {
    if (!(h > 0.0)) {
        throw std::invalid_argument("sample_increments: step length must be positive");
    }
    const double scale = std::sqrt(h);
    std::vector<double> out(K);
    for (double& x : out) {
        x = scale * rng.normal();
    }
    return out;
}

Eigen::MatrixXd alg1_iterated(RandomStream& rng, std::span<const double> delta_beta, double h,
                              std::size_t D, std::span<const double> eta) {
    if (D == 0) {
        throw std::invalid_argument("alg1_iterated: truncation count D must be at least 1");
    }
    if (!(h > 0.0)) {
        throw std::invalid_argument("alg1_iterated: step length must be positive");
    }
    const std::size_t K = delta_beta.size();
    check_eta(eta, K, "alg1_iterated");

    const Eigen::Map<const Eigen::VectorXd> db(delta_beta.data(), idx(K));
    const Eigen::VectorXd shift = std::sqrt(2.0 / h) * db;

    // S = sum_r (1/r) X_r (Y_r + shift)^T, so that A = h/(2 pi) (S - S^T).
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(idx(K), idx(K));
    Eigen::VectorXd x(idx(K));
    Eigen::VectorXd y(idx(K));
    for (std::size_t r = 1; r <= D; ++r) {
        for (std::size_t i = 0; i < K; ++i) {
            x(idx(i)) = rng.normal();
        }
        for (std::size_t i = 0; i < K; ++i) {
            y(idx(i)) = rng.normal();
        }
        S.noalias() += (1.0 / static_cast<double>(r)) * x * (y + shift).transpose();
    }

    Eigen::MatrixXd I = (h / (2.0 * std::numbers::pi)) * (S - S.transpose());
    I.noalias() += 0.5 * db * db.transpose();
    for (std::size_t i = 0; i < K; ++i) {
        I(idx(i), idx(i)) = (delta_beta[i] * delta_beta[i] - h) / 2.0;
    }
    for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = 0; j < K; ++j) {
            I(idx(i), idx(j)) *= std::sqrt(eta[i] * eta[j]);
        }
    }
    return I;
}

NoisePacket sample_packet(RandomStream& increment_rng, RandomStream& area_rng, double h,
                          std::size_t D, std::span<const double> eta) {
    NoisePacket p;
    p.h = h;
    p.D = D;
    p.eta.assign(eta.begin(), eta.end());
    p.delta_beta = sample_increments(increment_rng, eta.size(), h);
    p.iterated = alg1_iterated(area_rng, p.delta_beta, h, D, eta);
    return p;
}

NoisePacket chain_iterated(std::span<const NoisePacket> fine) {
    if (fine.empty()) {
        throw std::invalid_argument("chain_iterated: empty packet list");
    }
    NoisePacket out = fine.front();
    const std::size_t K = out.K();
    for (std::size_t n = 1; n < fine.size(); ++n) {
        const NoisePacket& next = fine[n];
        if (next.K() != K || next.eta != out.eta) {
            throw std::invalid_argument("chain_iterated: packets disagree on K or eta");
        }
        if (next.has_iterated() != out.has_iterated()) {
            throw std::invalid_argument("chain_iterated: packets disagree on iterated integrals");
        }
        if (out.has_iterated()) {
            for (std::size_t i = 0; i < K; ++i) {
                for (std::size_t j = 0; j < K; ++j) {
                    out.iterated(idx(i), idx(j)) += next.iterated(idx(i), idx(j)) +
                                                    std::sqrt(out.eta[i] * out.eta[j]) *
                                                        out.delta_beta[i] * next.delta_beta[j];
                }
            }
        }
        for (std::size_t i = 0; i < K; ++i) {
            out.delta_beta[i] += next.delta_beta[i];
        }
        out.h += next.h;
        out.D = std::min(out.D, next.D);
    }
    return out;
}

NoisePacket leading_block(const NoisePacket& packet, std::size_t K) {
    if (K > packet.K()) {
        throw std::invalid_argument("leading_block: requested K exceeds packet K");
    }
    NoisePacket out;
    out.h = packet.h;
    out.D = packet.D;
    out.delta_beta.assign(packet.delta_beta.begin(), packet.delta_beta.begin() + idx(K));
    out.eta.assign(packet.eta.begin(), packet.eta.begin() + idx(K));
    if (packet.has_iterated()) {
        out.iterated = packet.iterated.topLeftCorner(idx(K), idx(K));
    }
    return out;
}

std::size_t choose_D1(std::uint64_t M, const Rational& q) {
    return static_cast<std::size_t>(std::max<std::uint64_t>(1, ceil_power(M, 2 * q - 1)));
}

std::size_t choose_D2(std::uint64_t M, std::size_t K, std::span<const double> eta,
                      const Rational& q) {
    if (eta.empty()) {
        throw std::invalid_argument("choose_D2: eta must not be empty");
    }
    const double min_eta = *std::min_element(eta.begin(), eta.end());
    const double k = static_cast<double>(K);
    const double factor = std::min(k * std::sqrt(std::max(0.0, k - 1.0)), 1.0 / min_eta);
    const double value = factor * std::pow(static_cast<double>(M), to_double(q) - 0.5);
    // values that are integers in exact arithmetic must not round up
    const double rounded = std::round(value);
    const double ceiled =
        std::abs(value - rounded) <= 1e-9 * std::max(1.0, rounded) ? rounded : std::ceil(value);
    return static_cast<std::size_t>(std::max(1.0, ceiled));
}

double exact_cross_moment(std::size_t i1, std::size_t j1, std::size_t i2, std::size_t j2,
                          double h, std::span<const double> eta) {
    if (i1 != i2 || j1 != j2) {
        return 0.0;
    }
    return exact_second_moment(i1, j1, h, eta);
}

double exact_second_moment(std::size_t i, std::size_t j, double h, std::span<const double> eta) {
    if (i == 0 || j == 0 || i > eta.size() || j > eta.size()) {
        throw std::out_of_range("exact_second_moment: index outside 1..K");
    }
    return 0.5 * eta[i - 1] * eta[j - 1] * h * h;
}

double alg1_second_moment(std::size_t i, std::size_t j, double h, std::size_t D,
                          std::span<const double> eta) {
    const double exact = exact_second_moment(i, j, h, eta);
    if (i == j) {
        return exact;
    }
    // E[(dB_i dB_j / 2)^2] = h^2 / 4 and each series term contributes
    // (h / 2 pi)^2 * 6 / r^2, so the full series recovers the missing h^2 / 4.
    double partial = 0.0;
    for (std::size_t r = 1; r <= D; ++r) {
        partial += 1.0 / (static_cast<double>(r) * static_cast<double>(r));
    }
    return eta[i - 1] * eta[j - 1] * h * h *
           (0.25 + 1.5 * partial / (std::numbers::pi * std::numbers::pi));
}

}  // namespace spdemil
