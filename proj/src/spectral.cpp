#include "spdemil/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace spdemil {

namespace {

void require_finite(std::span<const double> coeffs) {
    for (const double c : coeffs) {
        if (!std::isfinite(c)) {
            throw std::invalid_argument("SpectralField: non-finite coefficient");
        }
    }
}

void require_same_size(const SpectralField& a, const SpectralField& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("SpectralField: dimension mismatch (" + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()) + ")");
    }
}

}  // namespace

SpectralField::SpectralField(std::size_t n) : coeffs_(n, 0.0) {
    if (n == 0) {
        throw std::invalid_argument("SpectralField: dimension must be >= 1");
    }
}

SpectralField::SpectralField(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) {
        throw std::invalid_argument("SpectralField: dimension must be >= 1");
    }
    require_finite(coeffs_);
}

SpectralField::SpectralField(std::initializer_list<double> coeffs)
    : SpectralField(std::vector<double>(coeffs)) {}

SpectralField SpectralField::unit(std::size_t n, std::size_t i) {
    if (i == 0 || i > n) {
        throw std::out_of_range("SpectralField::unit: index out of range");
    }
    std::vector<double> c(n, 0.0);
    c[i - 1] = 1.0;
    return SpectralField(std::move(c));
}

SpectralField operator+(const SpectralField& a, const SpectralField& b) {
    require_same_size(a, b);
    std::vector<double> out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        out[k] = a[k] + b[k];
    }
    return SpectralField(std::move(out));
}

SpectralField operator-(const SpectralField& a, const SpectralField& b) {
    require_same_size(a, b);
    std::vector<double> out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        out[k] = a[k] - b[k];
    }
    return SpectralField(std::move(out));
}

SpectralField operator*(double s, const SpectralField& a) {
    std::vector<double> out(a.coeffs().begin(), a.coeffs().end());
    for (double& c : out) {
        c *= s;
    }
    return SpectralField(std::move(out));
}

EigenLaw EigenLaw::dirichlet_laplacian(double diffusivity) {
    if (!(diffusivity > 0.0) || !std::isfinite(diffusivity)) {
        throw std::invalid_argument("EigenLaw: diffusivity must be positive");
    }
    return EigenLaw(Kind::dirichlet_laplacian, diffusivity);
}

EigenLaw EigenLaw::power_decay(double rho) {
    if (!(rho > 0.0) || !std::isfinite(rho)) {
        throw std::invalid_argument("EigenLaw: decay exponent must be positive");
    }
    return EigenLaw(Kind::power_decay, rho);
}

double EigenLaw::operator()(std::size_t i) const {
    if (i == 0) {
        throw std::out_of_range("EigenLaw: indices start at 1");
    }
    const double x = static_cast<double>(i);
    switch (kind_) {
        case Kind::dirichlet_laplacian:
            return parameter_ * std::numbers::pi * std::numbers::pi * x * x;
        case Kind::power_decay:
            return std::pow(x, -parameter_);
    }
    return 0.0;
}

std::vector<double> EigenLaw::values(std::size_t n) const {
    std::vector<double> out(n);
    for (std::size_t i = 1; i <= n; ++i) {
        out[i - 1] = (*this)(i);
    }
    return out;
}

SpectralField project(std::span<const double> coeffs, std::size_t n) {
    if (n == 0) {
        throw std::invalid_argument("project: N must be >= 1");
    }
    std::vector<double> out(n, 0.0);
    std::copy_n(coeffs.begin(), std::min(n, coeffs.size()), out.begin());
    return SpectralField(std::move(out));
}

SpectralField semigroup_apply(const SpectralField& field, const EigenLaw& law, double h) {
    if (!(h >= 0.0)) {
        throw std::invalid_argument("semigroup_apply: h must be >= 0");
    }
    std::vector<double> out(field.size());
    for (std::size_t k = 0; k < field.size(); ++k) {
        out[k] = std::exp(-law(k + 1) * h) * field[k];
    }
    return SpectralField(std::move(out));
}

double sobolev_norm(const SpectralField& field, const EigenLaw& law, double r) {
    if (!(r >= 0.0)) {
        throw std::invalid_argument("sobolev_norm: r must be >= 0");
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < field.size(); ++k) {
        const double w = r == 0.0 ? 1.0 : std::pow(law(k + 1), r);
        sum += w * w * field[k] * field[k];
    }
    return std::sqrt(sum);
}

}  // namespace spdemil
