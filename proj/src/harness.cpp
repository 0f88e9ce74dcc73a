#include "spdemil/harness.hpp"

#include "spdemil/eoc.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace spdemil {

namespace {

void check(bool ok, const std::string& what) {
    if (!ok) {
        throw InvariantViolation(what);
    }
}

Rational scheme_order(const RegularityParams& params, SchemeKind kind) {
    return uses_iterated(kind) ? params.q_dfm() : params.q_ees();
}

/// Runs `work(path)` for every path on `threads` workers. Each path writes
/// only its own slot, so results do not depend on scheduling.
void for_each_path(std::size_t paths, unsigned threads,
                   const std::function<void(std::size_t)>& work) {
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(paths)));
    if (workers == 1) {
        for (std::size_t p = 0; p < paths; ++p) {
            work(p);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t p = next.fetch_add(1);
                if (p >= paths) {
                    return;
                }
                try {
                    work(p);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                    next.store(paths);
                    return;
                }
            }
        });
    }
    for (std::thread& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

/// Streams the reference lattice of one path and reports the increments of
/// every level as their steps complete. Off-lattice level boundaries are
/// filled by sequential Brownian-bridge sampling inside the fine step.
class LatticeWalker {
public:
    LatticeWalker(std::uint64_t seed, std::uint64_t path, std::size_t M_ref, double T,
                  std::size_t K, std::vector<std::size_t> levels)
        : seed_(seed),
          path_(path),
          M_ref_(M_ref),
          h_(T / static_cast<double>(M_ref)),
          K_(K),
          levels_(std::move(levels)),
          next_(levels_.size(), 0),
          acc_(levels_.size(), std::vector<double>(K, 0.0)),
          dB_(K),
          out_(K) {
        for (std::size_t M : levels_) {
            if (M == 0 || M > M_ref) {
                throw InvariantViolation("level M must lie in 1..M_ref");
            }
        }
    }

    /// on_emit(level, n, increments, on_lattice) is called in level order for
    /// each fine step, once per completed step n of that level.
    template <class Emit>
    void run(Emit&& on_emit) {
        const double sqrt_h = std::sqrt(h_);
        std::vector<Point> points;
        std::vector<double> values;
        std::vector<std::ptrdiff_t> point_of(levels_.size());
        for (std::size_t s = 0; s < M_ref_; ++s) {
            RandomStream inc(seed_, {path_, s, StreamPurpose::increments});
            for (double& x : dB_) {
                x = sqrt_h * inc.normal();
            }

            points.clear();
            std::fill(point_of.begin(), point_of.end(), -1);
            for (std::size_t l = 0; l < levels_.size(); ++l) {
                const std::uint64_t M = levels_[l];
                const std::uint64_t n = next_[l] + 1;
                if (M == M_ref_ || n >= M) {
                    continue;
                }
                const std::uint64_t num = n * M_ref_;
                if (num % M != 0 && num / M == s) {
                    points.push_back({num % M, M, l});
                }
            }
            if (!points.empty()) {
                sample_bridge(s, points, values, point_of);
            }

            for (std::size_t l = 0; l < levels_.size(); ++l) {
                const std::size_t M = levels_[l];
                if (M == M_ref_) {
                    on_emit(l, s, std::span<const double>(dB_), true);
                    continue;
                }
                std::vector<double>& acc = acc_[l];
                if (point_of[l] >= 0) {
                    const double* w = values.data() + point_of[l] * static_cast<std::ptrdiff_t>(K_);
                    for (std::size_t k = 0; k < K_; ++k) {
                        out_[k] = acc[k] + w[k];
                        acc[k] = dB_[k] - w[k];
                    }
                    on_emit(l, next_[l]++, std::span<const double>(out_), false);
                } else {
                    for (std::size_t k = 0; k < K_; ++k) {
                        acc[k] += dB_[k];
                    }
                    if (((s + 1) * M) % M_ref_ == 0) {
                        on_emit(l, next_[l]++, std::span<const double>(acc), true);
                        std::fill(acc.begin(), acc.end(), 0.0);
                    }
                }
            }
        }
    }

private:
    struct Point {
        std::uint64_t rem;  ///< position rem / M inside the fine step
        std::uint64_t M;
        std::size_t level;
    };

    void sample_bridge(std::size_t s, std::vector<Point>& points, std::vector<double>& values,
                       std::vector<std::ptrdiff_t>& point_of) {
        std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
            const auto lhs = static_cast<unsigned __int128>(a.rem) * b.M;
            const auto rhs = static_cast<unsigned __int128>(b.rem) * a.M;
            return lhs != rhs ? lhs < rhs : a.level < b.level;
        });
        RandomStream bridge(seed_, {path_, s, StreamPurpose::bridge});
        values.clear();
        std::vector<double> prev(K_, 0.0);
        double prev_u = 0.0;
        std::ptrdiff_t count = -1;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const Point& pt = points[i];
            const bool same = i > 0 && static_cast<unsigned __int128>(pt.rem) * points[i - 1].M ==
                                           static_cast<unsigned __int128>(points[i - 1].rem) * pt.M;
            if (!same) {
                const double u = static_cast<double>(pt.rem) / static_cast<double>(pt.M);
                const double frac = (u - prev_u) / (1.0 - prev_u);
                const double sd = std::sqrt(h_ * (u - prev_u) * (1.0 - u) / (1.0 - prev_u));
                for (std::size_t k = 0; k < K_; ++k) {
                    prev[k] += frac * (dB_[k] - prev[k]) + sd * bridge.normal();
                    values.push_back(prev[k]);
                }
                prev_u = u;
                ++count;
            }
            point_of[pt.level] = count;
        }
    }

    std::uint64_t seed_;
    std::uint64_t path_;
    std::size_t M_ref_;
    double h_;
    std::size_t K_;
    std::vector<std::size_t> levels_;
    std::vector<std::size_t> next_;
    std::vector<std::vector<double>> acc_;
    std::vector<double> dB_;
    std::vector<double> out_;
};

/// Static layout of a coupled study: which level drives which scheme.
struct Layout {
    std::vector<std::size_t> levels;           ///< level 0 is the reference lattice
    std::vector<Resolved> consumers;           ///< consumer 0 is the reference
    std::vector<std::size_t> level_of;         ///< per consumer
    std::vector<std::size_t> chain_of;         ///< per consumer, index into chain_M (DFM/MIL only)
    std::vector<std::size_t> chain_M;
    std::ptrdiff_t packet_level = -1;
    std::size_t M_pkt = 0;
    std::size_t K_pkt = 0;
    std::size_t D_pkt = 0;
};

Layout make_layout(const StudyConfig& config) {
    Layout L;
    L.consumers.push_back(config.reference);
    for (const Resolved& e : config.entries) {
        L.consumers.push_back(e);
    }
    L.levels.push_back(config.reference.M);
    auto level_index = [&](std::size_t M) {
        const auto it = std::find(L.levels.begin(), L.levels.end(), M);
        if (it != L.levels.end()) {
            return static_cast<std::size_t>(it - L.levels.begin());
        }
        L.levels.push_back(M);
        return L.levels.size() - 1;
    };
    std::size_t finest_ladder = 0;
    for (std::size_t c = 0; c < L.consumers.size(); ++c) {
        const Resolved& r = L.consumers[c];
        if (uses_iterated(r.scheme)) {
            L.M_pkt = std::max(L.M_pkt, r.M);
            L.K_pkt = std::max(L.K_pkt, r.K);
            if (c > 0) {
                finest_ladder = std::max(finest_ladder, r.M);
            }
        }
    }
    L.level_of.resize(L.consumers.size());
    L.chain_of.assign(L.consumers.size(), 0);
    for (std::size_t c = 0; c < L.consumers.size(); ++c) {
        const Resolved& r = L.consumers[c];
        if (uses_iterated(r.scheme)) {
            const auto it = std::find(L.chain_M.begin(), L.chain_M.end(), r.M);
            L.chain_of[c] = static_cast<std::size_t>(it - L.chain_M.begin());
            if (it == L.chain_M.end()) {
                L.chain_M.push_back(r.M);
            }
            L.level_of[c] = level_index(L.M_pkt);
        } else {
            L.level_of[c] = level_index(r.M);
        }
    }
    if (L.M_pkt > 0) {
        L.packet_level = static_cast<std::ptrdiff_t>(level_index(L.M_pkt));
        if (config.packet_D > 0) {
            L.D_pkt = config.packet_D;
        } else {
            const std::size_t basis = finest_ladder > 0 ? finest_ladder : L.M_pkt;
            L.D_pkt = choose_D1(basis, config.params().q_dfm());
        }
    }
    return L;
}

struct PathResult {
    std::vector<std::vector<double>> sq_errors;  ///< per entry, per observed grid point
    std::vector<CostLedger> ledgers;             ///< per entry
};

double squared_gap(std::span<const double> ref, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double d = ref[i] - (i < y.size() ? y[i] : 0.0);
        s += d * d;
    }
    return s;
}

PathResult run_path(const StudyConfig& config, const ProblemSpec& problem, const Layout& L,
                    std::size_t path) {
    const double T = config.horizon();
    const std::size_t M_ref = config.reference.M;
    const std::size_t nc = L.consumers.size();

    std::vector<Stepper> steppers;
    std::vector<std::vector<double>> state(nc);
    steppers.reserve(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        const Resolved& r = L.consumers[c];
        steppers.emplace_back(problem, r.scheme, r.N, r.K, T / static_cast<double>(r.M));
        const SpectralField xi = problem.initial_value(r.N);
        state[c].assign(xi.coeffs().begin(), xi.coeffs().end());
    }
    std::vector<std::size_t> steps_done(nc, 0);

    PathResult result;
    result.sq_errors.resize(nc - 1);
    result.ledgers.resize(nc - 1);

    const std::vector<double> eta_all = problem.q_law.values(L.consumers[0].K);
    std::vector<double> scaled(eta_all.size());
    std::vector<double> sqrt_eta(eta_all.size());
    for (std::size_t k = 0; k < eta_all.size(); ++k) {
        sqrt_eta[k] = std::sqrt(eta_all[k]);
    }

    auto record = [&](std::size_t c) {
        const Resolved& r = L.consumers[c];
        const std::size_t n = steps_done[c];
        const bool on_lattice = (n * M_ref) % r.M == 0;
        const bool wanted =
            config.error_at == ErrorPolicy::final_time ? n == r.M : (on_lattice && n > 0);
        if (wanted) {
            result.sq_errors[c - 1].push_back(squared_gap(state[0], state[c]));
        }
    };

    auto step_increment = [&](std::size_t c, std::span<const double> dB) {
        const std::size_t K = L.consumers[c].K;
        for (std::size_t k = 0; k < K; ++k) {
            scaled[k] = sqrt_eta[k] * dB[k];
        }
        steppers[c].advance(state[c], std::span<const double>(scaled.data(), K), nullptr,
                            c > 0 ? &result.ledgers[c - 1] : nullptr);
        ++steps_done[c];
        if (c > 0) {
            record(c);
        }
    };

    auto step_packet = [&](std::size_t c, const NoisePacket& packet) {
        steppers[c].advance(state[c], packet, c > 0 ? &result.ledgers[c - 1] : nullptr);
        ++steps_done[c];
        if (c > 0) {
            record(c);
        }
    };

    // Chained packets per DFM/MIL level.
    const std::vector<double> eta_pkt = problem.q_law.values(std::max<std::size_t>(L.K_pkt, 1));
    std::vector<NoisePacket> chain_acc(L.chain_M.size());
    std::vector<std::size_t> chain_count(L.chain_M.size(), 0);
    NoisePacket packet;
    packet.eta = eta_pkt;
    packet.h = T / static_cast<double>(std::max<std::size_t>(L.M_pkt, 1));
    packet.D = L.D_pkt;
    packet.delta_beta.resize(L.K_pkt);

    auto dispatch_chain = [&](std::size_t chain, const NoisePacket& p, bool reference_only) {
        for (std::size_t c = 0; c < nc; ++c) {
            if (uses_iterated(L.consumers[c].scheme) && L.chain_of[c] == chain &&
                (c == 0) == reference_only) {
                step_packet(c, p);
            }
        }
    };

    auto fold = [](NoisePacket& acc, const NoisePacket& next) {
        const std::size_t K = acc.K();
        for (std::size_t j = 0; j < K; ++j) {
            for (std::size_t i = 0; i < K; ++i) {
                acc.iterated(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
                    next.iterated(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +
                    std::sqrt(acc.eta[i] * acc.eta[j]) * acc.delta_beta[i] * next.delta_beta[j];
            }
        }
        for (std::size_t k = 0; k < K; ++k) {
            acc.delta_beta[k] += next.delta_beta[k];
        }
        acc.h += next.h;
    };

    auto on_emit = [&](std::size_t level, std::size_t n, std::span<const double> dB, bool) {
        const bool is_packet_level = static_cast<std::ptrdiff_t>(level) == L.packet_level;
        if (is_packet_level) {
            std::copy(dB.begin(), dB.begin() + static_cast<std::ptrdiff_t>(L.K_pkt),
                      packet.delta_beta.begin());
            RandomStream area(config.seed, {path, n, StreamPurpose::levy_area});
            packet.iterated = alg1_iterated(area, packet.delta_beta, packet.h, L.D_pkt, eta_pkt);
        }
        // The reference advances first so that entries compare against a current state.
        if (L.level_of[0] == level) {
            if (uses_iterated(L.consumers[0].scheme)) {
                dispatch_chain(L.chain_of[0], packet, true);
            } else {
                step_increment(0, dB);
            }
        }
        for (std::size_t c = 1; c < nc; ++c) {
            if (L.level_of[c] == level && !uses_iterated(L.consumers[c].scheme)) {
                step_increment(c, dB);
            }
        }
        if (!is_packet_level) {
            return;
        }
        for (std::size_t chain = 0; chain < L.chain_M.size(); ++chain) {
            const std::size_t ratio = L.M_pkt / L.chain_M[chain];
            if (ratio == 1) {
                dispatch_chain(chain, packet, false);
                continue;
            }
            if (chain_count[chain] == 0) {
                chain_acc[chain] = packet;
            } else {
                fold(chain_acc[chain], packet);
            }
            if (++chain_count[chain] == ratio) {
                dispatch_chain(chain, chain_acc[chain], false);
                chain_count[chain] = 0;
            }
        }
    };

    LatticeWalker walker(config.seed, path, M_ref, T, L.consumers[0].K, L.levels);
    walker.run(on_emit);

    for (std::size_t c = 0; c < nc; ++c) {
        check(steps_done[c] == L.consumers[c].M, "consumer did not complete its time grid");
    }
    for (std::size_t e = 0; e + 1 < nc; ++e) {
        const Resolved& r = L.consumers[e + 1];
        result.ledgers[e].normal_draws =
            r.M * r.K * (uses_iterated(r.scheme) ? 1 + 2 * r.D : 1);
    }
    return result;
}

void require_positive_errors(std::span<const double> x, std::span<const double> error) {
    if (x.size() != error.size()) {
        throw std::invalid_argument("fit_loglog: size mismatch");
    }
    if (x.size() < 3) {
        throw std::invalid_argument("fit_loglog: need at least 3 resolutions");
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(error[i] > 0.0)) {
            throw std::invalid_argument("fit_loglog: values must be positive");
        }
    }
}

Rational rational_from_json(const nlohmann::json& j) {
    if (j.is_string()) {
        return parse_rational(j.get<std::string>());
    }
    if (j.is_number_integer()) {
        return Rational(j.get<std::int64_t>());
    }
    if (j.is_number()) {
        return parse_rational(j.dump());
    }
    throw std::invalid_argument("expected a number or a fraction string, got " + j.dump());
}

nlohmann::json resolved_to_json(const Resolved& r) {
    return {{"scheme", scheme_name(r.scheme)}, {"N", r.N}, {"K", r.K}, {"M", r.M}, {"D", r.D}};
}

Resolved resolved_from_json(const nlohmann::json& j, const ProblemConfig& problem) {
    Resolved r;
    r.scheme = parse_scheme(j.at("scheme").get<std::string>());
    r.N = j.at("N").get<std::size_t>();
    r.K = j.value("K", r.N);
    r.M = j.at("M").get<std::size_t>();
    r.D = j.value("D", std::size_t{0});
    if (uses_iterated(r.scheme) && r.D == 0) {
        r.D = choose_D1(r.M, problem.params.q_dfm());
    }
    return r;
}

}  // namespace

void StudyConfig::validate() const {
    params().validate();
    check(paths >= 2, "a study needs at least 2 paths");
    check(!entries.empty(), "a study needs at least one ladder entry");
    check(threads >= 1, "thread count must be at least 1");
    const Resolved& ref = reference;
    check(ref.K >= 1 && ref.K <= ref.N && ref.M >= 1, "reference needs 1 <= K <= N and M >= 1");
    check(uses_iterated(ref.scheme) == (ref.D > 0), "reference D must be set exactly for DFM/MIL");

    std::size_t M_pkt = uses_iterated(ref.scheme) ? ref.M : 0;
    for (const Resolved& e : entries) {
        check(e.K >= 1 && e.K <= e.N && e.M >= 1, "ladder entry needs 1 <= K <= N and M >= 1");
        check(uses_iterated(e.scheme) == (e.D > 0), "ladder D must be set exactly for DFM/MIL");
        check(e.N <= ref.N, "N_ref must be at least every ladder N");
        check(e.K <= ref.K, "K_ref must be at least every ladder K");
        check(e.M <= ref.M, "M_ref must be at least every ladder M");
        if (uses_iterated(e.scheme)) {
            M_pkt = std::max(M_pkt, e.M);
        }
    }
    auto divides_packet = [&](const Resolved& r) {
        return !uses_iterated(r.scheme) || M_pkt % r.M == 0;
    };
    check(divides_packet(ref), "reference M must be a multiple of every DFM/MIL ladder M");
    for (const Resolved& e : entries) {
        check(divides_packet(e), "every DFM/MIL M must divide the finest DFM/MIL M (" +
                                     std::to_string(M_pkt) + ")");
    }
    const double work = static_cast<double>(paths) * static_cast<double>(ref.M) *
                        static_cast<double>(ref.N);
    check(allow_large || work <= work_limit,
          "study exceeds the work guardrail (paths * M_ref * N_ref = " + std::to_string(work) +
              "); pass the override to run it anyway");
}

std::vector<Resolved> planned_ladder(const ProblemConfig& problem,
                                     std::span<const SchemeKind> schemes,
                                     std::span<const std::size_t> Ns) {
    std::vector<Resolved> out;
    for (SchemeKind s : schemes) {
        for (std::size_t N : Ns) {
            const Resolution r = optimal_resolution(PlanInput::from_params(problem.params, s), N);
            out.push_back({s, static_cast<std::size_t>(r.N), static_cast<std::size_t>(r.K),
                           static_cast<std::size_t>(r.M), static_cast<std::size_t>(r.D)});
        }
    }
    return out;
}

Resolved paper_reference(int example_id) {
    switch (example_id) {
        case 1:
            return {SchemeKind::LIE, 64, static_cast<std::size_t>(ceil_power(2, make_rational(14, 9))),
                    static_cast<std::size_t>(ceil_power(2, make_rational(35, 2))), 0};
        case 2:
            return {SchemeKind::LIE, 64,
                    static_cast<std::size_t>(ceil_power(2, make_rational(102, 77))),
                    static_cast<std::size_t>(ceil_power(2, make_rational(85, 6))), 0};
        default:
            return {SchemeKind::LIE, 64, 3, 1 << 14, 0};
    }
}

Resolved scaled_reference(std::span<const Resolved> entries) {
    Resolved r{SchemeKind::LIE, 64, 3, 1 << 14, 0};
    for (const Resolved& e : entries) {
        r.K = std::max(r.K, e.K);
        r.N = std::max(r.N, e.N);
    }
    return r;
}

std::string StudyReport::to_csv() const {
    std::ostringstream out;
    out << "scheme,N,M,K,D,cost_formula,cost_ledger,error,std,paths\n";
    char buf[64];
    for (const StudyRow& r : rows) {
        out << scheme_name(r.scheme) << ',' << r.N << ',' << r.M << ',' << r.K << ',' << r.D
            << ',' << r.cost_formula << ',' << r.cost_ledger << ',';
        std::snprintf(buf, sizeof buf, "%.9e", r.error);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.9e", r.std);
        out << buf << ',' << r.paths << '\n';
    }
    return out.str();
}

StudyReport run_study(const StudyConfig& config) {
    config.validate();
    const ProblemSpec problem = config.spec ? *config.spec : make_problem(config.problem);
    const Layout layout = make_layout(config);

    std::vector<PathResult> results(config.paths);
    for_each_path(config.paths, config.threads, [&](std::size_t p) {
        results[p] = run_path(config, problem, layout, p);
    });

    StudyReport report;
    report.packet_D = layout.D_pkt;
    report.packet_M = layout.M_pkt;
    for (std::size_t e = 0; e < config.entries.size(); ++e) {
        const Resolved& r = config.entries[e];
        const CostLedger expected = ledger_expected(r.scheme, r.N, r.K, r.M, r.D);
        for (const PathResult& pr : results) {
            check(pr.ledgers[e] == expected,
                  "ledger of " + std::string(scheme_name(r.scheme)) + " N=" + std::to_string(r.N) +
                      " differs from M x ledger_expected");
        }

        const std::size_t points = results[0].sq_errors[e].size();
        check(points > 0, "no common grid point with the reference");
        std::size_t worst = 0;
        double worst_mean = -1.0;
        for (std::size_t k = 0; k < points; ++k) {
            double sum = 0.0;
            for (const PathResult& pr : results) {
                sum += pr.sq_errors[e][k];
            }
            if (sum > worst_mean) {
                worst_mean = sum;
                worst = k;
            }
        }
        std::vector<double> sample(config.paths);
        for (std::size_t p = 0; p < config.paths; ++p) {
            sample[p] = results[p].sq_errors[e][worst];
        }
        const ErrorEstimate est = estimate_ms_error(sample);

        StudyRow row;
        row.scheme = r.scheme;
        row.N = r.N;
        row.M = r.M;
        row.K = r.K;
        row.D = r.D;
        row.cost_formula =
            cost_formula(r.scheme, r.N, r.K, r.M, scheme_order(config.params(), r.scheme));
        row.cost_ledger = static_cast<std::uint64_t>(std::llround(expected.total(config.cost_c)));
        row.error = est.error;
        row.std = est.std;
        row.paths = config.paths;
        report.rows.push_back(row);
    }
    return report;
}

ErrorEstimate estimate_ms_error(std::span<const double> per_path_sq_errors) {
    const std::size_t P = per_path_sq_errors.size();
    if (P == 0) {
        throw std::invalid_argument("estimate_ms_error: empty sample");
    }
    const double mean =
        std::accumulate(per_path_sq_errors.begin(), per_path_sq_errors.end(), 0.0) /
        static_cast<double>(P);
    ErrorEstimate est;
    est.error = std::sqrt(mean);
    if (P < 2 || est.error == 0.0) {
        return est;
    }
    double ss = 0.0;
    for (double v : per_path_sq_errors) {
        ss += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(ss / static_cast<double>(P - 1));
    est.std = sd / (2.0 * est.error * std::sqrt(static_cast<double>(P)));
    return est;
}

OrderFit fit_loglog(std::span<const double> x, std::span<const double> error) {
    require_positive_errors(x, error);
    const std::size_t n = x.size();
    std::vector<double> lx(n);
    std::vector<double> ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        lx[i] = std::log(x[i]);
        ly[i] = std::log(error[i]);
    }
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) {
        throw std::invalid_argument("fit_loglog: degenerate ladder (all x equal)");
    }
    OrderFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
        ssr += r * r;
    }
    const double dof = static_cast<double>(n - 2);
    fit.std_error = std::sqrt(ssr / dof / sxx);
    const boost::math::students_t dist(dof);
    const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
    fit.ci_low = fit.slope - t * fit.std_error;
    fit.ci_high = fit.slope + t * fit.std_error;
    return fit;
}

OrderFit measure_order(const StudyReport& report, OrderAxis axis,
                       std::optional<SchemeKind> scheme) {
    std::vector<double> x;
    std::vector<double> err;
    for (const StudyRow& r : report.rows) {
        if (scheme && r.scheme != *scheme) {
            continue;
        }
        x.push_back(axis == OrderAxis::M ? static_cast<double>(r.M)
                                         : static_cast<double>(r.cost_formula));
        err.push_back(r.error);
    }
    return fit_loglog(x, err);
}

double max_sobolev_moment(const ProblemSpec& problem, SchemeKind scheme, std::size_t N,
                          std::size_t K, std::size_t M, double r, std::size_t paths,
                          std::uint64_t seed, unsigned threads) {
    SchemeConfig cfg;
    cfg.kind = scheme;
    cfg.N = N;
    cfg.K = K;
    cfg.M = M;
    cfg.T = problem.T;
    cfg.D = uses_iterated(scheme) ? choose_D1(M, problem.params.q_dfm()) : 0;
    cfg.validate();
    if (paths == 0) {
        throw std::invalid_argument("max_sobolev_moment: need at least one path");
    }

    std::vector<double> weight(N);
    for (std::size_t i = 0; i < N; ++i) {
        weight[i] = std::pow(problem.a_law(i + 1), 2.0 * r);
    }
    const std::vector<double> eta = problem.q_law.values(K);
    std::vector<std::vector<double>> norms(paths);
    for_each_path(paths, threads, [&](std::size_t p) {
        SampledNoise noise(seed, p, eta, cfg.h(), cfg.D);
        std::vector<double>& out = norms[p];
        out.resize(M + 1);
        IntegrateOptions opts;
        opts.store_trajectory = false;
        opts.observer = [&](std::size_t m, std::span<const double> y) {
            double s = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i) {
                s += weight[i] * y[i] * y[i];
            }
            out[m] = s;
        };
        integrate(cfg, problem, noise, nullptr, opts);
    });
    double best = 0.0;
    for (std::size_t m = 0; m <= M; ++m) {
        double sum = 0.0;
        for (std::size_t p = 0; p < paths; ++p) {
            sum += norms[p][m];
        }
        best = std::max(best, sum / static_cast<double>(paths));
    }
    return best;
}

std::vector<std::vector<std::vector<double>>> lattice_increments(
    std::uint64_t seed, std::uint64_t path, std::size_t M_ref, double T, std::size_t K,
    std::span<const std::size_t> levels) {
    std::vector<std::vector<std::vector<double>>> out(levels.size());
    LatticeWalker walker(seed, path, M_ref, T, K, {levels.begin(), levels.end()});
    walker.run([&](std::size_t level, std::size_t, std::span<const double> dB, bool) {
        out[level].emplace_back(dB.begin(), dB.end());
    });
    return out;
}

nlohmann::json problem_config_to_json(const ProblemConfig& c) {
    const RegularityParams& p = c.params;
    return {
        {"name", c.name},
        {"diffusivity", c.diffusivity},
        {"p", to_string(c.p)},
        {"drift", c.drift == DriftKind::affine ? "affine" : "sine"},
        {"s", c.drift_s},
        {"r", c.drift_r},
        {"initial", c.initial == InitialKind::zero ? "zero" : "power"},
        {"initial_exponent", c.initial_exponent},
        {"T", c.T},
        {"params",
         {{"beta", to_string(p.beta)},
          {"gamma", to_string(p.gamma)},
          {"delta", to_string(p.delta)},
          {"alpha", to_string(p.alpha)},
          {"vartheta", to_string(p.vartheta)},
          {"rho_A", to_string(p.rho_A)},
          {"rho_Q", to_string(p.rho_Q)}}},
    };
}

ProblemConfig problem_config_from_json(const nlohmann::json& j) {
    ProblemConfig c = j.contains("base_example") ? example_config(j.at("base_example").get<int>())
                                                 : ProblemConfig{};
    if (!j.contains("base_example") && !j.contains("params")) {
        throw std::invalid_argument("problem config needs 'base_example' or 'params'");
    }
    c.name = j.value("name", c.name);
    c.diffusivity = j.value("diffusivity", c.diffusivity);
    if (j.contains("p")) {
        c.p = rational_from_json(j.at("p"));
    }
    if (j.contains("drift")) {
        const std::string d = j.at("drift").get<std::string>();
        if (d == "affine") {
            c.drift = DriftKind::affine;
        } else if (d == "sine") {
            c.drift = DriftKind::sine;
        } else {
            throw std::invalid_argument("drift must be 'affine' or 'sine'");
        }
    }
    c.drift_s = j.value("s", c.drift_s);
    c.drift_r = j.value("r", c.drift_r);
    if (j.contains("initial")) {
        const std::string d = j.at("initial").get<std::string>();
        if (d == "zero") {
            c.initial = InitialKind::zero;
        } else if (d == "power") {
            c.initial = InitialKind::power;
        } else {
            throw std::invalid_argument("initial must be 'zero' or 'power'");
        }
    }
    c.initial_exponent = j.value("initial_exponent", c.initial_exponent);
    c.T = j.value("T", c.T);
    if (j.contains("params")) {
        const nlohmann::json& p = j.at("params");
        auto set = [&](const char* key, Rational& field) {
            if (p.contains(key)) {
                field = rational_from_json(p.at(key));
            }
        };
        set("beta", c.params.beta);
        set("gamma", c.params.gamma);
        set("delta", c.params.delta);
        set("alpha", c.params.alpha);
        set("vartheta", c.params.vartheta);
        set("rho_A", c.params.rho_A);
        set("rho_Q", c.params.rho_Q);
    }
    c.params.validate();
    return c;
}

StudyConfig study_config_from_json(const nlohmann::json& j) {
    StudyConfig c;
    int example = 0;
    if (j.contains("example")) {
        example = j.at("example").get<int>();
        c.problem = example_config(example);
    } else if (j.contains("problem")) {
        c.problem = problem_config_from_json(j.at("problem"));
    } else {
        throw std::invalid_argument("study config needs 'example' or 'problem'");
    }

    if (j.contains("entries")) {
        for (const nlohmann::json& e : j.at("entries")) {
            c.entries.push_back(resolved_from_json(e, c.problem));
        }
    }
    if (j.contains("ladder")) {
        std::vector<SchemeKind> schemes;
        for (const nlohmann::json& s : j.value("schemes", nlohmann::json::array({"DFM", "MIL", "EES"}))) {
            schemes.push_back(parse_scheme(s.get<std::string>()));
        }
        const auto Ns = j.at("ladder").get<std::vector<std::size_t>>();
        const auto planned = planned_ladder(c.problem, schemes, Ns);
        c.entries.insert(c.entries.end(), planned.begin(), planned.end());
    }

    const nlohmann::json ref = j.value("reference", nlohmann::json("scaled"));
    if (ref.is_string()) {
        const std::string kind = ref.get<std::string>();
        if (kind == "paper") {
            if (example != 1 && example != 2) {
                throw std::invalid_argument("the stated reference exists for examples 1 and 2 only");
            }
            c.reference = paper_reference(example);
        } else if (kind == "scaled") {
            c.reference = scaled_reference(c.entries);
        } else {
            throw std::invalid_argument("reference must be 'paper', 'scaled' or an object");
        }
    } else {
        c.reference = resolved_from_json(ref, c.problem);
    }

    c.paths = j.value("paths", c.paths);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    const std::string at = j.value("error_at", std::string("final"));
    if (at == "final") {
        c.error_at = ErrorPolicy::final_time;
    } else if (at == "all-grid") {
        c.error_at = ErrorPolicy::all_grid;
    } else {
        throw std::invalid_argument("error_at must be 'final' or 'all-grid'");
    }
    c.packet_D = j.value("packet_D", c.packet_D);
    c.cost_c = j.value("cost_c", c.cost_c);
    c.work_limit = j.value("work_limit", c.work_limit);
    c.allow_large = j.value("allow_large", c.allow_large);
    return c;
}

nlohmann::json report_json(const StudyConfig& config, const StudyReport& report) {
    nlohmann::json entries = nlohmann::json::array();
    for (const Resolved& e : config.entries) {
        entries.push_back(resolved_to_json(e));
    }
    nlohmann::json rows = nlohmann::json::array();
    for (const StudyRow& r : report.rows) {
        rows.push_back({{"scheme", scheme_name(r.scheme)},
                        {"N", r.N},
                        {"M", r.M},
                        {"K", r.K},
                        {"D", r.D},
                        {"cost_formula", r.cost_formula},
                        {"cost_ledger", r.cost_ledger},
                        {"error", r.error},
                        {"std", r.std},
                        {"paths", r.paths}});
    }
    return {
        {"config",
         {{"problem", problem_config_to_json(config.problem)},
          {"entries", entries},
          {"reference", resolved_to_json(config.reference)},
          {"paths", config.paths},
          {"seed", config.seed},
          {"threads", config.threads},
          {"error_at", config.error_at == ErrorPolicy::final_time ? "final" : "all-grid"},
          {"packet_D", report.packet_D},
          {"packet_M", report.packet_M},
          {"cost_c", config.cost_c}}},
        {"rows", rows},
    };
}

}  // namespace spdemil
