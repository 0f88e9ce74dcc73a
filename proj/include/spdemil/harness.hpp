#pragma once

#include "spdemil/cost.hpp"
#include "spdemil/noise.hpp"
#include "spdemil/problem.hpp"
#include "spdemil/schemes.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spdemil {

/// Raised when a study configuration or a run breaks a declared invariant.
class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One scheme at one resolution.
struct Resolved {
    SchemeKind scheme = SchemeKind::DFM;
    std::size_t N = 1;
    std::size_t K = 1;
    std::size_t M = 1;
    std::size_t D = 0;
};

enum class ErrorPolicy { final_time, all_grid };

struct StudyConfig {
    ProblemConfig problem;
    /// Replaces the instance built from `problem` when set; its params drive costs.
    std::optional<ProblemSpec> spec;
    std::vector<Resolved> entries;
    Resolved reference{SchemeKind::LIE, 64, 3, 1 << 14, 0};
    std::size_t paths = 100;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    ErrorPolicy error_at = ErrorPolicy::final_time;
    /// Truncation count of the finest iterated-integral packets; 0 picks
    /// choose_D1 of the finest DFM/MIL ladder level.
    std::size_t packet_D = 0;
    double cost_c = 1.0;
    /// Upper bound on paths * M_ref * N_ref unless allow_large is set.
    double work_limit = 2e10;
    bool allow_large = false;

    const RegularityParams& params() const { return spec ? spec->params : problem.params; }
    double horizon() const { return spec ? spec->T : problem.T; }

    /// Throws InvariantViolation when the coupling requirements fail.
    void validate() const;
};

/// Entries for each (scheme, N) at the planner's resolution, D from choose_D1.
std::vector<Resolved> planned_ladder(const ProblemConfig& problem,
                                     std::span<const SchemeKind> schemes,
                                     std::span<const std::size_t> Ns);

/// The reference stated for Examples 1 and 2 (LIE, N = 64, K = 3,
/// M = ceil(2^{35/2}) resp. ceil(2^{85/6})). Other problems get the scaled preset.
Resolved paper_reference(int example_id);
/// LIE with N = 64, M = 2^14 and K = max(3, largest ladder K).
Resolved scaled_reference(std::span<const Resolved> entries);

struct StudyRow {
    SchemeKind scheme = SchemeKind::DFM;
    std::size_t N = 0;
    std::size_t M = 0;
    std::size_t K = 0;
    std::size_t D = 0;
    std::uint64_t cost_formula = 0;
    std::uint64_t cost_ledger = 0;
    double error = 0.0;
    double std = 0.0;
    std::size_t paths = 0;
};

struct StudyReport {
    std::vector<StudyRow> rows;
    std::size_t packet_D = 0;
    std::size_t packet_M = 0;

    std::string to_csv() const;
};

StudyReport run_study(const StudyConfig& config);

struct ErrorEstimate {
    double error = 0.0;
    double std = 0.0;
};

/// error = sqrt(mean), std = sd(sample) / (2 error sqrt(P)).
ErrorEstimate estimate_ms_error(std::span<const double> per_path_sq_errors);

enum class OrderAxis { M, cost };

struct OrderFit {
    double slope = 0.0;
    double intercept = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0;   ///< 95% two-sided Student-t interval
    double ci_high = 0.0;
};

/// Least-squares fit of log(error) against log(x).
OrderFit fit_loglog(std::span<const double> x, std::span<const double> error);
/// Fit over the rows of one scheme (all rows when `scheme` is empty).
OrderFit measure_order(const StudyReport& report, OrderAxis axis,
                       std::optional<SchemeKind> scheme = std::nullopt);

/// Monte Carlo estimate of max_m E||Y_m||^2_{H_r} for one scheme run with
/// fresh noise; D from choose_D1 for DFM and MIL.
double max_sobolev_moment(const ProblemSpec& problem, SchemeKind scheme, std::size_t N,
                          std::size_t K, std::size_t M, double r, std::size_t paths,
                          std::uint64_t seed, unsigned threads);

/// Increments of each requested level on one path, built from the reference
/// lattice of M_ref steps and Brownian-bridge values at off-lattice times.
/// Every level must satisfy M <= M_ref. Result[l][n] holds the K increments
/// of step n of level l.
std::vector<std::vector<std::vector<double>>> lattice_increments(
    std::uint64_t seed, std::uint64_t path, std::size_t M_ref, double T, std::size_t K,
    std::span<const std::size_t> levels);

nlohmann::json report_json(const StudyConfig& config, const StudyReport& report);
StudyConfig study_config_from_json(const nlohmann::json& j);
ProblemConfig problem_config_from_json(const nlohmann::json& j);
nlohmann::json problem_config_to_json(const ProblemConfig& c);

}  // namespace spdemil
