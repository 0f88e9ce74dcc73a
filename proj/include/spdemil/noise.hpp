#pragma once

#include "spdemil/exact.hpp"
#include "spdemil/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace spdemil {

/// Noise for one time step: standard Brownian increments of the first K
/// coordinates plus the Q-scaled iterated Ito integrals I^Q_(i,j).
struct NoisePacket {
    std::vector<double> delta_beta;  ///< K increments, each ~ N(0, h)
    double h = 0.0;
    Eigen::MatrixXd iterated;        ///< K x K, entry (i,j) is I^Q_(i+1,j+1); empty for Euler-type use
    std::size_t D = 0;               ///< truncation count of the series, 0 when absent
    std::vector<double> eta;         ///< the K eigenvalues of Q used for scaling

    std::size_t K() const noexcept { return delta_beta.size(); }
    bool has_iterated() const noexcept { return iterated.size() > 0; }

    /// Largest absolute violation of
    ///   I_ij + I_ji = sqrt(eta_i eta_j) dB_i dB_j - delta_ij eta_i h,
    /// relative to max(1, |rhs|) scale of the packet.
    double antisymmetry_defect() const;
    /// Largest absolute violation of I_ii = eta_i ((dB_i)^2 - h) / 2.
    double diagonal_defect() const;
};

/// K independent N(0, h) draws; consumes exactly K normals from `rng`.
std::vector<double> sample_increments(RandomStream& rng, std::size_t K, double h);

/// Truncated Fourier-series approximation of the iterated integrals.
///
/// Normalized form (standard Brownian motions):
///   I_ij = dB_i dB_j / 2 - delta_ij h / 2 + A_ij,
///   A_ij = h/(2 pi) sum_{r=1}^{D} (1/r) [X_ri (Y_rj + sqrt(2/h) dB_j) - X_rj (Y_ri + sqrt(2/h) dB_i)]
/// with X, Y i.i.d. standard normal, then scaled by sqrt(eta_i eta_j).
/// Consumes exactly 2 D K normals from `rng`.
Eigen::MatrixXd alg1_iterated(RandomStream& rng, std::span<const double> delta_beta, double h,
                              std::size_t D, std::span<const double> eta);

/// Increments plus iterated integrals drawn from two independent substreams;
/// K (1 + 2D) normals in total.
NoisePacket sample_packet(RandomStream& increment_rng, RandomStream& area_rng, double h,
                          std::size_t D, std::span<const double> eta);

/// Combines time-contiguous packets into the packet of their union using
///   I_[a,c] = I_[a,b] + I_[b,c] + sqrt(eta_i eta_j) dB^i_[a,b] dB^j_[b,c].
NoisePacket chain_iterated(std::span<const NoisePacket> fine);

/// Leading K x K block of a packet (first K noise coordinates).
NoisePacket leading_block(const NoisePacket& packet, std::size_t K);

/// ceil(M^{2q - 1}), at least 1. Exact for rational q.
std::size_t choose_D1(std::uint64_t M, const Rational& q);
/// ceil(min(K sqrt(K-1), 1 / min_j eta_j) M^{q - 1/2}), at least 1.
std::size_t choose_D2(std::uint64_t M, std::size_t K, std::span<const double> eta,
                      const Rational& q);

/// E[I^Q_(i1,j1) I^Q_(i2,j2)] for the exact integrals over a step of length h:
/// eta_i1 eta_i2 h^2 / 2 when (i1,j1) = (i2,j2), else 0. Indices are 1-based.
double exact_cross_moment(std::size_t i1, std::size_t j1, std::size_t i2, std::size_t j2,
                          double h, std::span<const double> eta);
/// E[(I^Q_(i,j))^2] = eta_i eta_j h^2 / 2.
double exact_second_moment(std::size_t i, std::size_t j, double h, std::span<const double> eta);
/// E[(I^Q_(i,j))^2] of the D-term truncated series; the off-diagonal
/// deficit is eta_i eta_j h^2 (3 / (2 pi^2)) sum_{r > D} r^{-2}.
double alg1_second_moment(std::size_t i, std::size_t j, double h, std::size_t D,
                          std::span<const double> eta);

}  // namespace spdemil
