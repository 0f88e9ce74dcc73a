#pragma once

#include "spdemil/cost.hpp"
#include "spdemil/noise.hpp"
#include "spdemil/problem.hpp"
#include "spdemil/spectral.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace spdemil {

struct SchemeConfig {
    SchemeKind kind = SchemeKind::DFM;
    std::size_t N = 1;
    std::size_t K = 1;
    std::size_t M = 1;
    std::size_t D = 0;  ///< required for DFM and MIL, must be 0 otherwise
    double T = 1.0;

    double h() const { return T / static_cast<double>(M); }
    /// Throws std::invalid_argument on inconsistent counts.
    void validate() const;
};

/// One-step map of a fixed scheme with preallocated workspaces. Not
/// thread-safe; use one per path or per thread.
class Stepper {
public:
    Stepper(const ProblemSpec& problem, SchemeKind kind, std::size_t N, std::size_t K, double h);

    /// Advances y (length N) in place. `delta_w` holds the K coordinates
    /// <Delta W, e~_j> = sqrt(eta_j) Delta beta_j; `iterated` is the K x K
    /// matrix I^Q and is required for DFM and MIL only. Adds the functional
    /// evaluations of this step to `ledger` when given.
    void advance(std::span<double> y, std::span<const double> delta_w,
                 const Eigen::MatrixXd* iterated, CostLedger* ledger = nullptr);

    /// Same, reading Delta beta and I^Q from a packet.
    void advance(std::span<double> y, const NoisePacket& packet, CostLedger* ledger = nullptr);

    SchemeKind kind() const noexcept { return kind_; }
    std::size_t N() const noexcept { return N_; }
    std::size_t K() const noexcept { return K_; }
    double h() const noexcept { return h_; }

private:
    const ProblemSpec* problem_;
    SchemeKind kind_;
    std::size_t N_;
    std::size_t K_;
    double h_;
    std::vector<double> sqrt_eta_;
    std::vector<double> decay_;  ///< exp(-lambda_i h), or 1/(1 + lambda_i h) for LIE
    std::vector<double> u_;
    std::vector<double> drift_;
    std::vector<double> stage_;
    std::vector<double> work_;
    std::vector<double> scaled_;
    Eigen::MatrixXd columns_;  ///< N x K, column j is P_N B(y) e~_j
    Eigen::MatrixXd tensor_;   ///< N x N, column k is B'(y)(e_k, e~_j) for the current j
};

SpectralField step_dfm(const ProblemSpec& problem, const SpectralField& y,
                       const NoisePacket& packet);
SpectralField step_mil(const ProblemSpec& problem, const SpectralField& y,
                       const NoisePacket& packet);
/// `delta_w` holds <Delta W, e~_j>_U = sqrt(eta_j) Delta beta_j for j <= K.
SpectralField step_ees(const ProblemSpec& problem, const SpectralField& y,
                       std::span<const double> delta_w, double h);
SpectralField step_lie(const ProblemSpec& problem, const SpectralField& y,
                       std::span<const double> delta_w, double h);

/// Supplies the noise of step m = 0..M-1 in order.
class NoiseSource {
public:
    virtual ~NoiseSource() = default;
    /// Packet for step m; carries iterated integrals when `with_iterated`.
    virtual NoisePacket next(std::size_t m, bool with_iterated) = 0;
    /// Normal variates consumed so far.
    virtual std::uint64_t normals_used() const = 0;
};

/// Fresh draws per step from substreams (seed, path, step, purpose).
class SampledNoise final : public NoiseSource {
public:
    SampledNoise(std::uint64_t seed, std::uint64_t path, std::span<const double> eta, double h,
                 std::size_t D);

    NoisePacket next(std::size_t m, bool with_iterated) override;
    std::uint64_t normals_used() const override { return normals_; }

private:
    std::uint64_t seed_;
    std::uint64_t path_;
    std::vector<double> eta_;
    double h_;
    std::size_t D_;
    std::uint64_t normals_ = 0;
};

/// Replays a fixed packet list.
class ReplayNoise final : public NoiseSource {
public:
    explicit ReplayNoise(std::vector<NoisePacket> packets);

    NoisePacket next(std::size_t m, bool with_iterated) override;
    std::uint64_t normals_used() const override { return 0; }

private:
    std::vector<NoisePacket> packets_;
};

struct IntegrateOptions {
    bool store_trajectory = true;
    /// Called with (m, Y_m) for m = 0..M.
    std::function<void(std::size_t, std::span<const double>)> observer;
};

struct Trajectory {
    std::vector<SpectralField> states;  ///< Y_0..Y_M, or only Y_M when not stored
    SpectralField final_state{1};
};

/// Iterates the configured scheme from P_N xi. The ledger receives the
/// functional evaluations and the normals drawn by the noise source.
Trajectory integrate(const SchemeConfig& config, const ProblemSpec& problem, NoiseSource& noise,
                     CostLedger* ledger = nullptr, const IntegrateOptions& options = {});

}  // namespace spdemil
