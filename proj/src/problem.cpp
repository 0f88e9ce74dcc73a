#include "spdemil/problem.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>

namespace spdemil {

namespace {

constexpr std::size_t kTableSize = 4096;

/// Cached i^exponent for i = 1..kTableSize, falling back to std::pow.
class PowerTable {
public:
    explicit PowerTable(double exponent) : exponent_(exponent), values_(kTableSize) {
        for (std::size_t i = 1; i <= kTableSize; ++i) {
            values_[i - 1] = std::pow(static_cast<double>(i), exponent);
        }
    }

    double at(std::size_t i) const {
        return i <= values_.size() ? values_[i - 1] : std::pow(static_cast<double>(i), exponent_);
    }

private:
    double exponent_;
    std::vector<double> values_;
};

/// <1, e_i>_H for e_i = sqrt(2) sin(i pi x).
double constant_one_coefficient(std::size_t i) {
    if (i % 2 == 0) {
        return 0.0;
    }
    return 2.0 * std::numbers::sqrt2 / (static_cast<double>(i) * std::numbers::pi);
}

void require_range(bool ok, const std::string& what) {
    if (!ok) {
        throw std::invalid_argument("RegularityParams: " + what);
    }
}

}  // namespace

Rational RegularityParams::q_dfm() const {
    return std::min(Rational(2 * (gamma - beta)), gamma);
}

Rational RegularityParams::q_ees() const {
    return std::min(Rational(1, 2), q_dfm());
}

void RegularityParams::validate() const {
    const Rational half(1, 2);
    require_range(beta >= 0 && beta < 1, "beta must lie in [0, 1)");
    require_range(delta > 0 && delta <= half, "delta must lie in (0, 1/2]");
    require_range(vartheta > 0 && vartheta <= half, "vartheta must lie in (0, 1/2]");
    require_range(gamma >= std::max(beta, delta) && gamma <= delta + half,
                  "gamma must lie in [max(beta, delta), delta + 1/2]");
    require_range(alpha > 0, "alpha must be positive");
    require_range(rho_Q > 1, "rho_Q must exceed 1");
    require_range(rho_A > 0, "rho_A must be positive");
    require_range(q_dfm() > 0, "temporal order must be positive (gamma > beta)");
}

ProblemSpec make_problem(const ProblemConfig& config) {
    config.params.validate();
    if (!(config.T > 0.0)) {
        throw std::invalid_argument("make_problem: horizon T must be positive");
    }
    const double p = to_double(config.p);
    if (!(p > 1.0)) {
        throw std::invalid_argument("make_problem: p must exceed 1");
    }

    auto ip = std::make_shared<PowerTable>(p);
    auto j4 = std::make_shared<PowerTable>(4.0);

    ProblemSpec spec{
        .name = config.name,
        .a_law = EigenLaw::dirichlet_laplacian(config.diffusivity),
        .q_law = EigenLaw::power_decay(to_double(config.params.rho_Q)),
        .drift = {},
        .diffusion_column = {},
        .diffusion_derivative = {},
        .initial_value = {},
        .params = config.params,
        .T = config.T,
        .linear_diffusion = true,
    };

    switch (config.drift) {
        case DriftKind::affine:
            spec.drift = [](std::span<const double> y, std::span<double> out) {
                for (std::size_t k = 0; k < y.size(); ++k) {
                    out[k] = constant_one_coefficient(k + 1) - y[k];
                }
            };
            break;
        case DriftKind::sine: {
            auto decay = std::make_shared<PowerTable>(-config.drift_s);
            auto freq = std::make_shared<PowerTable>(config.drift_r);
            spec.drift = [decay, freq](std::span<const double> y, std::span<double> out) {
                for (std::size_t k = 0; k < y.size(); ++k) {
                    out[k] = decay->at(k + 1) * std::sin(freq->at(k + 1) * y[k]);
                }
            };
            break;
        }
    }

    // mu_ij(y) = y_j / (i^p + j^4)
    spec.diffusion_column = [ip, j4](std::span<const double> y, std::size_t j,
                                     std::span<double> out) {
        const double yj = y[j - 1];
        const double jj = j4->at(j);
        for (std::size_t k = 0; k < y.size(); ++k) {
            out[k] = yj / (ip->at(k + 1) + jj);
        }
    };
    // phi_ij^k = delta_kj / (i^p + j^4), so B'(y)(v, e_j) has coefficient i = v_j / (i^p + j^4).
    spec.diffusion_derivative = [ip, j4](std::span<const double>, std::span<const double> v,
                                         std::size_t j, std::span<double> out) {
        const double vj = v[j - 1];
        const double jj = j4->at(j);
        for (std::size_t k = 0; k < v.size(); ++k) {
            out[k] = vj / (ip->at(k + 1) + jj);
        }
    };

    switch (config.initial) {
        case InitialKind::zero:
            spec.initial_value = [](std::size_t n) { return SpectralField(n); };
            break;
        case InitialKind::power: {
            const double e = config.initial_exponent;
            spec.initial_value = [e](std::size_t n) {
                std::vector<double> c(n);
                for (std::size_t i = 1; i <= n; ++i) {
                    c[i - 1] = std::pow(static_cast<double>(i), -e);
                }
                return SpectralField(std::move(c));
            };
            break;
        }
    }
    return spec;
}

ProblemConfig example_config(int id) {
    ProblemConfig c;
    c.diffusivity = 0.01;
    c.T = 1.0;
    c.params.rho_A = 2;
    c.params.rho_Q = 3;
    switch (id) {
        case 1:
            c.name = "example1";
            c.p = make_rational(4, 3);
            c.drift = DriftKind::affine;
            c.initial = InitialKind::zero;
            c.params.beta = 0;
            c.params.delta = make_rational(3, 8);
            c.params.gamma = make_rational(7, 8);
            c.params.alpha = make_rational(9, 4);
            c.params.vartheta = make_rational(1, 4);
            break;
        case 2:
            c.name = "example2";
            c.p = make_rational(44, 41);
            c.drift = DriftKind::affine;
            c.initial = InitialKind::zero;
            c.params.beta = 0;
            c.params.delta = make_rational(5, 24);
            c.params.gamma = make_rational(17, 24);
            c.params.alpha = make_rational(77, 36);
            c.params.vartheta = make_rational(1, 4);
            break;
        case 3:
            c.name = "example3";
            c.p = 4;
            c.drift = DriftKind::sine;
            c.drift_s = 3.5;
            c.drift_r = 3.5;
            c.initial = InitialKind::power;
            c.initial_exponent = 2.0;
            c.params.beta = make_rational(7, 8);
            c.params.delta = make_rational(1, 2);
            c.params.gamma = 1;
            c.params.alpha = make_rational(7, 3);
            c.params.vartheta = make_rational(1, 2);
            break;
        default:
            throw std::invalid_argument("unknown example id " + std::to_string(id) +
                                        " (expected 1, 2 or 3)");
    }
    return c;
}

ProblemSpec make_example(int id) {
    return make_problem(example_config(id));
}

SpectralField eval_drift(const ProblemSpec& problem, const SpectralField& y) {
    std::vector<double> out(y.size());
    problem.drift(y.coeffs(), out);
    return SpectralField(std::move(out));
}

SpectralField eval_diffusion_column(const ProblemSpec& problem, const SpectralField& y,
                                    std::size_t j) {
    if (j == 0 || j > y.size()) {
        throw std::out_of_range("eval_diffusion_column: column index " + std::to_string(j) +
                                " outside 1.." + std::to_string(y.size()));
    }
    std::vector<double> out(y.size());
    problem.diffusion_column(y.coeffs(), j, out);
    return SpectralField(std::move(out));
}

SpectralField eval_diffusion_derivative(const ProblemSpec& problem, const SpectralField& y,
                                        const SpectralField& v, std::size_t j) {
    if (!problem.has_derivative()) {
        throw std::logic_error("eval_diffusion_derivative: problem '" + problem.name +
                               "' has no derivative of B");
    }
    if (v.size() != y.size()) {
        throw std::invalid_argument("eval_diffusion_derivative: dimension mismatch");
    }
    if (j == 0 || j > y.size()) {
        throw std::out_of_range("eval_diffusion_derivative: column index out of range");
    }
    std::vector<double> out(y.size());
    problem.diffusion_derivative(y.coeffs(), v.coeffs(), j, out);
    return SpectralField(std::move(out));
}

double commutativity_defect(const ProblemSpec& problem, const SpectralField& y, std::size_t n,
                            std::size_t k) {
    if (k > n) {
        throw std::invalid_argument("commutativity_defect: K must not exceed N");
    }
    const SpectralField yn = project(y.coeffs(), n);
    std::vector<SpectralField> columns;
    columns.reserve(k);
    for (std::size_t m = 1; m <= k; ++m) {
        columns.push_back(eval_diffusion_column(problem, yn, m));
    }
    double worst = 0.0;
    for (std::size_t m = 1; m <= k; ++m) {
        for (std::size_t l = m + 1; l <= k; ++l) {
            const SpectralField a = eval_diffusion_derivative(problem, yn, columns[m - 1], l);
            const SpectralField b = eval_diffusion_derivative(problem, yn, columns[l - 1], m);
            worst = std::max(worst, sobolev_norm(a - b, problem.a_law, 0.0));
        }
    }
    return worst;
}

GrowthReport check_growth_bounds(const ProblemSpec& problem,
                                 std::span<const SpectralField> sample_fields, std::size_t n,
                                 std::size_t k) {
    if (k > n) {
        throw std::invalid_argument("check_growth_bounds: K must not exceed N");
    }
    const double delta = to_double(problem.params.delta);
    std::vector<double> weight(n);
    for (std::size_t i = 1; i <= n; ++i) {
        weight[i - 1] = std::pow(problem.a_law(i), delta);
    }

    GrowthReport report;
    std::vector<double> column(n);
    for (const SpectralField& sample : sample_fields) {
        const SpectralField yn = project(sample.coeffs(), n);
        Eigen::MatrixXd mat(n, k);
        for (std::size_t j = 1; j <= k; ++j) {
            problem.diffusion_column(yn.coeffs(), j, column);
            for (std::size_t i = 0; i < n; ++i) {
                mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j - 1)) =
                    weight[i] * column[i];
            }
        }
        const double op_norm = Eigen::JacobiSVD<Eigen::MatrixXd>(mat).singularValues()(0);
        const double ratio = op_norm / (1.0 + sobolev_norm(yn, problem.a_law, delta));
        report.operator_norms.push_back(op_norm);
        report.ratios.push_back(ratio);
        report.max_ratio = std::max(report.max_ratio, ratio);
    }
    return report;
}

}  // namespace spdemil
