#include "spdelab/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace spdelab {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

GalerkinSpace::GalerkinSpace(double length, int n_modes, int grid_size, double gamma)
    : length_(length), n_modes_(n_modes), grid_size_(grid_size), gamma_(gamma) {
    if (!(length > 0.0))
        throw std::invalid_argument("GalerkinSpace: length must be positive");
    if (n_modes < 1)
        throw std::invalid_argument("GalerkinSpace: need at least one mode");
    if (grid_size < n_modes)
        throw std::invalid_argument("GalerkinSpace: grid must have at least as many points as modes");
    if (!(gamma > 0.25 && gamma < 0.5))
        throw std::invalid_argument("GalerkinSpace: gamma must lie in (1/4, 1/2)");

    lambdas_.resize(n_modes_);
    gamma_weights_.resize(n_modes_);
    for (int n = 1; n <= n_modes_; ++n) {
        const double k = n * kPi / length_;
        lambdas_[n - 1] = -k * k;
        gamma_weights_[n - 1] = std::pow(k * k, 2.0 * gamma_);
    }

    const double amp = std::sqrt(2.0 / length_);
    basis_.resize(static_cast<std::size_t>(n_modes_) * grid_size_);
    for (int n = 1; n <= n_modes_; ++n)
        for (int j = 1; j <= grid_size_; ++j)
            basis_[static_cast<std::size_t>(n - 1) * grid_size_ + (j - 1)] =
                amp * std::sin(n * kPi * j / (grid_size_ + 1.0));
}

double GalerkinSpace::eigenvalue(int n) const {
    if (n < 1 || n > n_modes_)
        throw std::out_of_range("GalerkinSpace::eigenvalue: mode index out of range");
    return lambdas_[n - 1];
}

double GalerkinSpace::c_omega() const {
    return std::pow(omega(), 1.0 - 2.0 * gamma_);
}

double GalerkinSpace::grid_point(int j) const {
    if (j < 1 || j > grid_size_)
        throw std::out_of_range("GalerkinSpace::grid_point: index out of range");
    return j * length_ / (grid_size_ + 1.0);
}

void GalerkinSpace::to_grid(std::span<const double> coeffs, std::span<double> values) const {
    if (coeffs.size() != static_cast<std::size_t>(n_modes_) ||
        values.size() != static_cast<std::size_t>(grid_size_))
        throw std::invalid_argument("GalerkinSpace::to_grid: size mismatch");
    for (int j = 0; j < grid_size_; ++j) values[j] = 0.0;
    for (int n = 0; n < n_modes_; ++n) {
        const double c = coeffs[n];
        if (c == 0.0) continue;
        const double* row = basis_.data() + static_cast<std::size_t>(n) * grid_size_;
        for (int j = 0; j < grid_size_; ++j) values[j] += c * row[j];
    }
}

void GalerkinSpace::from_grid(std::span<const double> values, std::span<double> coeffs) const {
    if (values.size() != static_cast<std::size_t>(grid_size_) ||
        coeffs.size() != static_cast<std::size_t>(n_modes_))
        throw std::invalid_argument("GalerkinSpace::from_grid: size mismatch");
    const double h = quad_weight();
    for (int n = 0; n < n_modes_; ++n) {
        const double* row = basis_.data() + static_cast<std::size_t>(n) * grid_size_;
        double acc = 0.0;
        for (int j = 0; j < grid_size_; ++j) acc += values[j] * row[j];
        coeffs[n] = h * acc;
    }
}

SpacePtr make_space(double length, int n_modes, int grid_size, double gamma) {
    return std::make_shared<const GalerkinSpace>(length, n_modes, grid_size, gamma);
}

SpectralField::SpectralField(SpacePtr space)
    : space_(std::move(space)) {
    if (!space_) throw std::invalid_argument("SpectralField: null space");
    coeffs_.assign(space_->modes(), 0.0);
}

SpectralField::SpectralField(SpacePtr space, std::vector<double> coeffs)
    : space_(std::move(space)), coeffs_(std::move(coeffs)) {
    if (!space_) throw std::invalid_argument("SpectralField: null space");
    if (coeffs_.size() != static_cast<std::size_t>(space_->modes()))
        throw std::invalid_argument("SpectralField: coefficient count does not match space");
}

double SpectralField::value_at(double x) const {
    const double L = space_->length();
    if (x < 0.0 || x > L)
        throw std::domain_error("SpectralField::value_at: point outside [0, length]");
    const double amp = std::sqrt(2.0 / L);
    double acc = 0.0;
    for (int n = 1; n <= modes(); ++n)
        acc += coeffs_[n - 1] * amp * std::sin(n * kPi * x / L);
    return acc;
}

double SpectralField::norm(double g) const {
    if (g < 0.0) throw std::domain_error("SpectralField::norm: negative exponent");
    double acc = 0.0;
    if (g == 0.0) {
        for (double c : coeffs_) acc += c * c;
    } else if (g == space_->gamma()) {
        const auto w = space_->gamma_weights();
        for (int n = 0; n < modes(); ++n) acc += w[n] * coeffs_[n] * coeffs_[n];
    } else {
        for (int n = 0; n < modes(); ++n) {
            const double weight = std::pow(space_->abs_eigenvalue(n + 1), 2.0 * g);
            acc += weight * coeffs_[n] * coeffs_[n];
        }
    }
    return std::sqrt(acc);
}

double SpectralField::norm0() const {
    double acc = 0.0;
    for (double c : coeffs_) acc += c * c;
    return std::sqrt(acc);
}

bool SpectralField::all_finite() const {
    for (double c : coeffs_)
        if (!std::isfinite(c)) return false;
    return true;
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
    if (other.modes() != modes())
        throw std::invalid_argument("SpectralField: mode count mismatch");
    for (int n = 0; n < modes(); ++n) coeffs_[n] += other.coeffs_[n];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
    if (other.modes() != modes())
        throw std::invalid_argument("SpectralField: mode count mismatch");
    for (int n = 0; n < modes(); ++n) coeffs_[n] -= other.coeffs_[n];
    return *this;
}

SpectralField& SpectralField::operator*=(double s) {
    for (double& c : coeffs_) c *= s;
    return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

SpectralField semigroup_apply(const SpectralField& u, double t) {
    if (t < 0.0) throw std::domain_error("semigroup_apply: negative time");
    SpectralField out = u;
    const auto& space = *u.space();
    for (int n = 1; n <= u.modes(); ++n)
        out.coeffs()[n - 1] *= std::exp(space.eigenvalue(n) * t);
    return out;
}

std::vector<double> to_grid(const SpectralField& u) {
    std::vector<double> values(u.space()->grid_size());
    u.space()->to_grid(u.coeffs(), values);
    return values;
}

SpectralField from_grid(std::span<const double> values, SpacePtr space) {
    std::vector<double> coeffs(space->modes());
    space->from_grid(values, coeffs);
    return SpectralField(std::move(space), std::move(coeffs));
}

}  // namespace spdelab
