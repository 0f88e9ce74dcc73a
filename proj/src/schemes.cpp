#include "spdemil/schemes.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spdemil {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void require(bool ok, const std::string& what) {
    if (!ok) {
        throw std::invalid_argument(what);
    }
}

}  // namespace

void SchemeConfig::validate() const {
    require(N >= 1, "SchemeConfig: N must be at least 1");
    require(K >= 1 && K <= N, "SchemeConfig: K must lie in 1..N");
    require(M >= 1, "SchemeConfig: M must be at least 1");
    require(T > 0.0, "SchemeConfig: T must be positive");
    if (uses_iterated(kind)) {
        require(D >= 1, "SchemeConfig: DFM and MIL need a truncation count D >= 1");
    } else {
        require(D == 0, "SchemeConfig: D applies to DFM and MIL only");
    }
}

Stepper::Stepper(const ProblemSpec& problem, SchemeKind kind, std::size_t N, std::size_t K,
                 double h)
    : problem_(&problem),
      kind_(kind),
      N_(N),
      K_(K),
      h_(h),
      sqrt_eta_(K),
      decay_(N),
      u_(N),
      drift_(N),
      stage_(N),
      work_(N),
      scaled_(K),
      columns_(idx(N), idx(K)) {
    require(N >= 1 && K >= 1 && K <= N, "Stepper: need 1 <= K <= N");
    require(h > 0.0, "Stepper: step length must be positive");
    if (kind == SchemeKind::MIL) {
        require(problem.has_derivative(), "Stepper: MIL needs the derivative of B");
        tensor_.resize(idx(N), idx(N));
    }
    for (std::size_t j = 0; j < K; ++j) {
        sqrt_eta_[j] = std::sqrt(problem.q_law(j + 1));
    }
    for (std::size_t i = 0; i < N; ++i) {
        const double lambda = problem.a_law(i + 1);
        decay_[i] = kind == SchemeKind::LIE ? 1.0 / (1.0 + lambda * h) : std::exp(-lambda * h);
    }
}

void Stepper::advance(std::span<double> y, std::span<const double> delta_w,
                      const Eigen::MatrixXd* iterated, CostLedger* ledger) {
    require(y.size() == N_, "Stepper: state dimension mismatch");
    require(delta_w.size() >= K_, "Stepper: too few noise coordinates");
    const bool milstein = uses_iterated(kind_);
    if (milstein) {
        require(iterated != nullptr && iterated->rows() >= idx(K_) && iterated->cols() >= idx(K_),
                "Stepper: DFM and MIL need a K x K iterated-integral matrix");
    }
    const ProblemSpec& p = *problem_;

    p.drift(y, drift_);
    for (std::size_t i = 0; i < N_; ++i) {
        u_[i] = y[i] + h_ * drift_[i];
    }
    for (std::size_t j = 0; j < K_; ++j) {
        double* col = columns_.col(idx(j)).data();
        p.diffusion_column(y, j + 1, std::span<double>(col, N_));
        const double w = delta_w[j];
        for (std::size_t i = 0; i < N_; ++i) {
            u_[i] += col[i] * w;
        }
    }
    std::uint64_t b_groups = K_;
    std::uint64_t bprime_groups = 0;

    if (kind_ == SchemeKind::DFM) {
        const Eigen::MatrixXd& I = *iterated;
        for (std::size_t j = 0; j < K_; ++j) {
            for (std::size_t i = 0; i < N_; ++i) {
                stage_[i] = y[i];
            }
            for (std::size_t m = 0; m < K_; ++m) {
                const double c = I(idx(m), idx(j));
                const double* col = columns_.col(idx(m)).data();
                for (std::size_t i = 0; i < N_; ++i) {
                    stage_[i] += col[i] * c;
                }
            }
            p.diffusion_column(stage_, j + 1, work_);
            const double* base = columns_.col(idx(j)).data();
            for (std::size_t i = 0; i < N_; ++i) {
                u_[i] += work_[i] - base[i];
            }
        }
        b_groups += K_;
    } else if (kind_ == SchemeKind::MIL) {
        const Eigen::MatrixXd& I = *iterated;
        std::fill(work_.begin(), work_.end(), 0.0);
        for (std::size_t j = 0; j < K_; ++j) {
            // Derivative tensor B'(y)(e_k, e~_j), k = 1..N.
            for (std::size_t k = 0; k < N_; ++k) {
                work_[k] = 1.0;
                p.diffusion_derivative(y, work_, j + 1,
                                       std::span<double>(tensor_.col(idx(k)).data(), N_));
                work_[k] = 0.0;
            }
            // v = sum_i P_N B(y) e~_i I^Q_(i,j)
            for (std::size_t i = 0; i < N_; ++i) {
                stage_[i] = 0.0;
            }
            for (std::size_t m = 0; m < K_; ++m) {
                const double c = I(idx(m), idx(j));
                const double* col = columns_.col(idx(m)).data();
                for (std::size_t i = 0; i < N_; ++i) {
                    stage_[i] += col[i] * c;
                }
            }
            const Eigen::Map<const Eigen::VectorXd> v(stage_.data(), idx(N_));
            Eigen::Map<Eigen::VectorXd> u(u_.data(), idx(N_));
            u.noalias() += tensor_ * v;
        }
        bprime_groups = K_ * N_;
    }

    for (std::size_t i = 0; i < N_; ++i) {
        y[i] = decay_[i] * u_[i];
    }

    if (ledger != nullptr) {
        ledger->functional_evals_F += N_;
        ledger->functional_evals_B += b_groups * N_;
        ledger->functional_evals_Bprime += bprime_groups * N_;
        ledger->unit_ops += 1;
    }
}

void Stepper::advance(std::span<double> y, const NoisePacket& packet, CostLedger* ledger) {
    require(packet.K() >= K_, "Stepper: packet carries fewer than K increments");
    for (std::size_t j = 0; j < K_; ++j) {
        scaled_[j] = sqrt_eta_[j] * packet.delta_beta[j];
    }
    advance(y, scaled_, packet.has_iterated() ? &packet.iterated : nullptr, ledger);
}

namespace {

SpectralField single_step(const ProblemSpec& problem, SchemeKind kind, const SpectralField& y,
                          const NoisePacket& packet) {
    require(packet.K() <= y.size(), "step: K must not exceed N");
    Stepper stepper(problem, kind, y.size(), packet.K(), packet.h);
    std::vector<double> state(y.coeffs().begin(), y.coeffs().end());
    stepper.advance(state, packet);
    return SpectralField(std::move(state));
}

SpectralField single_step(const ProblemSpec& problem, SchemeKind kind, const SpectralField& y,
                          std::span<const double> delta_w, double h) {
    require(delta_w.size() >= 1 && delta_w.size() <= y.size(), "step: K must lie in 1..N");
    Stepper stepper(problem, kind, y.size(), delta_w.size(), h);
    std::vector<double> state(y.coeffs().begin(), y.coeffs().end());
    stepper.advance(state, delta_w, nullptr);
    return SpectralField(std::move(state));
}

}  // namespace

SpectralField step_dfm(const ProblemSpec& problem, const SpectralField& y,
                       const NoisePacket& packet) {
    return single_step(problem, SchemeKind::DFM, y, packet);
}

SpectralField step_mil(const ProblemSpec& problem, const SpectralField& y,
                       const NoisePacket& packet) {
    return single_step(problem, SchemeKind::MIL, y, packet);
}

SpectralField step_ees(const ProblemSpec& problem, const SpectralField& y,
                       std::span<const double> delta_w, double h) {
    return single_step(problem, SchemeKind::EES, y, delta_w, h);
}

SpectralField step_lie(const ProblemSpec& problem, const SpectralField& y,
                       std::span<const double> delta_w, double h) {
    return single_step(problem, SchemeKind::LIE, y, delta_w, h);
}

SampledNoise::SampledNoise(std::uint64_t seed, std::uint64_t path, std::span<const double> eta,
                           double h, std::size_t D)
    : seed_(seed), path_(path), eta_(eta.begin(), eta.end()), h_(h), D_(D) {
    require(h > 0.0, "SampledNoise: step length must be positive");
}

NoisePacket SampledNoise::next(std::size_t m, bool with_iterated) {
    RandomStream inc(seed_, {path_, m, StreamPurpose::increments});
    NoisePacket p;
    p.h = h_;
    p.eta = eta_;
    p.delta_beta = sample_increments(inc, eta_.size(), h_);
    normals_ += inc.normals_drawn();
    if (with_iterated) {
        RandomStream area(seed_, {path_, m, StreamPurpose::levy_area});
        p.D = D_;
        p.iterated = alg1_iterated(area, p.delta_beta, h_, D_, eta_);
        normals_ += area.normals_drawn();
    }
    return p;
}

ReplayNoise::ReplayNoise(std::vector<NoisePacket> packets) : packets_(std::move(packets)) {}

NoisePacket ReplayNoise::next(std::size_t m, bool with_iterated) {
    if (m >= packets_.size()) {
        throw std::out_of_range("ReplayNoise: no packet for step " + std::to_string(m));
    }
    if (with_iterated && !packets_[m].has_iterated()) {
        throw std::invalid_argument("ReplayNoise: packet lacks iterated integrals");
    }
    return packets_[m];
}

Trajectory integrate(const SchemeConfig& config, const ProblemSpec& problem, NoiseSource& noise,
                     CostLedger* ledger, const IntegrateOptions& options) {
    config.validate();
    const double h = config.h();
    const bool milstein = uses_iterated(config.kind);
    Stepper stepper(problem, config.kind, config.N, config.K, h);

    const SpectralField xi = problem.initial_value(config.N);
    std::vector<double> y(xi.coeffs().begin(), xi.coeffs().end());

    Trajectory out;
    if (options.store_trajectory) {
        out.states.reserve(config.M + 1);
        out.states.emplace_back(y);
    }
    if (options.observer) {
        options.observer(0, y);
    }
    const std::uint64_t normals_before = noise.normals_used();
    for (std::size_t m = 0; m < config.M; ++m) {
        const NoisePacket packet = noise.next(m, milstein);
        if (std::abs(packet.h - h) > 1e-12 * h) {
            throw std::invalid_argument("integrate: packet step length differs from T/M");
        }
        stepper.advance(y, packet, ledger);
        if (options.store_trajectory) {
            out.states.emplace_back(y);
        }
        if (options.observer) {
            options.observer(m + 1, y);
        }
    }
    if (ledger != nullptr) {
        ledger->normal_draws += noise.normals_used() - normals_before;
    }
    out.final_state = SpectralField(std::move(y));
    return out;
}

}  // namespace spdemil
