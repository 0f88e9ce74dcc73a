#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace spdemil {

/// Element of H_N stored by its coefficients in the eigenbasis {e_i}.
/// Coefficient index 0 holds <x, e_1>.
class SpectralField {
public:
    /// Zero field of dimension n (n >= 1).
    explicit SpectralField(std::size_t n);
    explicit SpectralField(std::vector<double> coeffs);
    SpectralField(std::initializer_list<double> coeffs);

    /// Basis vector e_i with 1-based index i <= n.
    static SpectralField unit(std::size_t n, std::size_t i);

    std::size_t size() const noexcept { return coeffs_.size(); }
    double operator[](std::size_t k) const { return coeffs_[k]; }
    std::span<const double> coeffs() const noexcept { return coeffs_; }

    bool operator==(const SpectralField&) const = default;

private:
    std::vector<double> coeffs_;
};

SpectralField operator+(const SpectralField& a, const SpectralField& b);
SpectralField operator-(const SpectralField& a, const SpectralField& b);
SpectralField operator*(double s, const SpectralField& a);

/// Eigenvalue law of a diagonal operator on the sine basis of L^2(0,1).
class EigenLaw {
public:
    enum class Kind { dirichlet_laplacian, power_decay };

    /// lambda_i = diffusivity * pi^2 * i^2, the spectrum of -diffusivity * Laplacian.
    static EigenLaw dirichlet_laplacian(double diffusivity);
    /// eta_j = j^(-rho).
    static EigenLaw power_decay(double rho);

    /// Eigenvalue for 1-based index i.
    double operator()(std::size_t i) const;
    std::vector<double> values(std::size_t n) const;

    Kind kind() const noexcept { return kind_; }
    double parameter() const noexcept { return parameter_; }

private:
    EigenLaw(Kind kind, double parameter) : kind_(kind), parameter_(parameter) {}

    Kind kind_;
    double parameter_;
};

/// P_N: keeps the leading n coefficients, zero-extending shorter inputs.
SpectralField project(std::span<const double> coeffs, std::size_t n);

/// e^{Ah} applied diagonally: coefficient i scaled by exp(-lambda_i h).
SpectralField semigroup_apply(const SpectralField& field, const EigenLaw& law, double h);

/// ||(-A)^r x||_H.
double sobolev_norm(const SpectralField& field, const EigenLaw& law, double r);

}  // namespace spdemil
