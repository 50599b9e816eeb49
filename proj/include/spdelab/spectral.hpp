#pragma once

#include <memory>
#include <span>
#include <vector>

namespace spdelab {

// Dirichlet sine modes on (0, length): e_n(x) = sqrt(2/length) sin(n pi x / length),
// eigenvalues lambda_n = -(n pi / length)^2, together with a uniform interior
// collocation grid of grid_size points and the trapezoidal quadrature weight
// h = length/(grid_size+1). For n, m <= grid_size the discrete sine transform is
// orthogonal, so to_grid/from_grid round-trip exactly and quadrature Parseval holds.
class GalerkinSpace {
public:
    GalerkinSpace(double length, int n_modes, int grid_size, double gamma);

    double length() const { return length_; }
    int modes() const { return n_modes_; }
    int grid_size() const { return grid_size_; }
    double gamma() const { return gamma_; }

    // 1-based mode index.
    double eigenvalue(int n) const;
    double abs_eigenvalue(int n) const { return -eigenvalue(n); }
    std::span<const double> eigenvalues() const { return lambdas_; }

    // Spectral gap constant of the linear part: omega = (pi/length)^2 = |lambda_1|.
    double omega() const { return -lambdas_[0]; }
    // |lambda_1|^(1-2*gamma); relates the gamma-norm to the energy dissipated
    // by the semigroup (gamma < 1/2 makes the exponent positive).
    double c_omega() const;

    double grid_point(int j) const;  // x_j = j*length/(grid_size+1), 1-based
    double quad_weight() const { return length_ / (grid_size_ + 1); }

    // Largest polynomial degree whose pointwise image stays alias-free on this
    // grid: grid_size >= 2*(degree+1)*modes.
    bool supports_degree(int degree) const {
        return grid_size_ >= 2 * (degree + 1) * n_modes_;
    }

    // coeffs (n_modes) -> pointwise values at the interior grid (grid_size).
    void to_grid(std::span<const double> coeffs, std::span<double> values) const;
    // pointwise values -> quadrature coefficients <v, e_n>_h (n_modes).
    void from_grid(std::span<const double> values, std::span<double> coeffs) const;

    // |lambda_n|^(2*gamma) cache for the space's own gamma.
    std::span<const double> gamma_weights() const { return gamma_weights_; }

private:
    double length_;
    int n_modes_;
    int grid_size_;
    double gamma_;
    std::vector<double> lambdas_;        // n_modes
    std::vector<double> gamma_weights_;  // n_modes
    std::vector<double> basis_;          // row-major [n_modes][grid_size], e_n(x_j)
};

using SpacePtr = std::shared_ptr<const GalerkinSpace>;

SpacePtr make_space(double length, int n_modes, int grid_size, double gamma);

// A truncated field u = sum_n coeff_n e_n, tied to its space.
class SpectralField {
public:
    explicit SpectralField(SpacePtr space);
    SpectralField(SpacePtr space, std::vector<double> coeffs);

    const SpacePtr& space() const { return space_; }
    std::vector<double>& coeffs() { return coeffs_; }
    const std::vector<double>& coeffs() const { return coeffs_; }
    int modes() const { return static_cast<int>(coeffs_.size()); }

    double value_at(double x) const;  // pointwise evaluation, x in [0, length]

    // Fractional norm: sqrt(sum_n |lambda_n|^(2g) coeff_n^2). g = 0 is the
    // base L2 norm; g = space gamma uses the cached weights.
    double norm(double g) const;
    double norm0() const;

    bool all_finite() const;

    SpectralField& operator+=(const SpectralField& other);
    SpectralField& operator-=(const SpectralField& other);
    SpectralField& operator*=(double s);

private:
    SpacePtr space_;
    std::vector<double> coeffs_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

// e^{tA} u: damps mode n by exp(lambda_n t). t >= 0.
SpectralField semigroup_apply(const SpectralField& u, double t);

std::vector<double> to_grid(const SpectralField& u);
SpectralField from_grid(std::span<const double> values, SpacePtr space);

}  // namespace spdelab
