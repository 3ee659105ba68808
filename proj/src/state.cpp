#include "rydfac/state.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "rydfac/errors.hpp"

namespace rydfac {
namespace {

void check_ceiling(std::size_t n_sites, Representation rep) {
    const std::size_t limit = rep == Representation::density ? max_density_sites : max_pure_sites;
    if (n_sites > limit)
        throw ResourceRefusal("exact solver refuses " + std::to_string(n_sites) + " sites (" +
                              (rep == Representation::density ? "density" : "pure") + " limit " +
                              std::to_string(limit) + "); use a mean-field solver");
}

}  // namespace

void validate_bitstring(std::string_view bits) {
    if (bits.empty()) throw InvalidConfig("initial", "empty bitstring");
    if (bits.find_first_not_of("01") != std::string_view::npos)
        throw InvalidConfig("initial", "bitstring may only contain '0' and '1'");
}

std::uint64_t parse_bitstring(std::string_view bits) {
    validate_bitstring(bits);
    if (bits.size() > 63) throw InvalidConfig("initial", "bitstring longer than 63 sites");
    std::uint64_t index = 0;
    for (std::size_t j = 0; j < bits.size(); ++j)
        if (bits[j] == '1') index |= std::uint64_t{1} << j;
    return index;
}

ManyBodyState::ManyBodyState(std::size_t n_sites, Representation rep, std::vector<cplx> data)
    : n_sites_(n_sites), representation_(rep), data_(std::move(data)) {}

ManyBodyState ManyBodyState::product_pure(std::string_view bits) {
    const std::uint64_t index = parse_bitstring(bits);
    check_ceiling(bits.size(), Representation::pure);
    std::vector<cplx> psi(std::size_t{1} << bits.size());
    psi[index] = 1.0;
    return {bits.size(), Representation::pure, std::move(psi)};
}

ManyBodyState ManyBodyState::product_density(std::string_view bits) {
    const std::uint64_t index = parse_bitstring(bits);
    check_ceiling(bits.size(), Representation::density);
    const std::size_t dim = std::size_t{1} << bits.size();
    std::vector<cplx> rho(dim * dim);
    rho[index * dim + index] = 1.0;
    return {bits.size(), Representation::density, std::move(rho)};
}

ManyBodyState ManyBodyState::from_amplitudes(std::size_t n_sites, std::vector<cplx> amplitudes) {
    check_ceiling(n_sites, Representation::pure);
    if (amplitudes.size() != (std::size_t{1} << n_sites))
        throw std::invalid_argument("from_amplitudes: length must be 2^n_sites");
    return {n_sites, Representation::pure, std::move(amplitudes)};
}

ManyBodyState ManyBodyState::from_density(std::size_t n_sites, std::vector<cplx> rho) {
    check_ceiling(n_sites, Representation::density);
    const std::size_t dim = std::size_t{1} << n_sites;
    if (rho.size() != dim * dim) throw std::invalid_argument("from_density: size must be 4^n_sites");
    return {n_sites, Representation::density, std::move(rho)};
}

ManyBodyState ManyBodyState::to_density() const {
    if (representation_ == Representation::density) return *this;
    check_ceiling(n_sites_, Representation::density);
    const std::size_t d = dim();
    std::vector<cplx> rho(d * d);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) rho[a * d + b] = data_[a] * std::conj(data_[b]);
    return {n_sites_, Representation::density, std::move(rho)};
}

std::vector<double> ManyBodyState::basis_probabilities() const {
    const std::size_t d = dim();
    std::vector<double> p(d);
    for (std::size_t a = 0; a < d; ++a)
        p[a] = representation_ == Representation::pure ? std::norm(data_[a]) : data_[a * d + a].real();
    return p;
}

std::vector<double> ManyBodyState::populations() const {
    const std::vector<double> p = basis_probabilities();
    std::vector<double> n(n_sites_, 0.0);
    for (std::size_t a = 0; a < p.size(); ++a) {
        if (p[a] == 0.0) continue;
        for (std::uint64_t bits = a; bits != 0; bits &= bits - 1) n[std::countr_zero(bits)] += p[a];
    }
    return n;
}

double ManyBodyState::trace() const {
    const std::vector<double> p = basis_probabilities();
    double s = 0.0;
    for (double x : p) s += x;
    return s;
}

double ManyBodyState::purity() const {
    if (representation_ == Representation::pure) {
        const double t = trace();
        return t * t;
    }
    double s = 0.0;
    for (const cplx& z : data_) s += std::norm(z);  // tr(rho^2) = sum |rho_ab|^2 for Hermitian rho
    return s;
}

double ManyBodyState::hermiticity_residual() const {
    if (representation_ == Representation::pure) return 0.0;
    const std::size_t d = dim();
    double worst = 0.0;
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b)
            worst = std::max(worst, std::abs(data_[a * d + b] - std::conj(data_[b * d + a])));
    return worst;
}

double ManyBodyState::min_eigenvalue() const {
    if (representation_ == Representation::pure) return 0.0;
    const auto d = static_cast<Eigen::Index>(dim());
    Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> rho(data_.data(), d, d);
    Eigen::MatrixXcd herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

}  // namespace rydfac
