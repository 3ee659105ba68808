#include <doctest.h>

#include <cmath>

#include "rydfac/errors.hpp"
#include "rydfac/state.hpp"

using namespace rydfac;

TEST_CASE("bitstrings map character j to bit j") {
    CHECK(parse_bitstring("0") == 0);
    CHECK(parse_bitstring("1") == 1);
    CHECK(parse_bitstring("10") == 1);
    CHECK(parse_bitstring("01") == 2);
    CHECK(parse_bitstring("000010000") == 16);
    CHECK_THROWS_AS(parse_bitstring(""), InvalidConfig);
    CHECK_THROWS_AS(parse_bitstring("012"), InvalidConfig);
    CHECK_THROWS_AS(parse_bitstring(std::string(64, '0')), InvalidConfig);
    CHECK_NOTHROW(validate_bitstring(std::string(225, '1')));
    CHECK_THROWS_AS(validate_bitstring("10 1"), InvalidConfig);
}

TEST_CASE("product states") {
    const auto psi = ManyBodyState::product_pure("0100");
    CHECK(psi.n_sites() == 4);
    CHECK(psi.dim() == 16);
    CHECK(psi.representation() == Representation::pure);
    CHECK(psi.data()[2] == cplx(1.0, 0.0));
    CHECK(psi.populations() == std::vector<double>{0, 1, 0, 0});
    CHECK(psi.trace() == 1.0);
    CHECK(psi.purity() == 1.0);
    CHECK(psi.hermiticity_residual() == 0.0);

    const auto rho = ManyBodyState::product_density("101");
    CHECK(rho.representation() == Representation::density);
    CHECK(rho.data().size() == 64);
    CHECK(rho.populations() == std::vector<double>{1, 0, 1});
    CHECK(rho.trace() == 1.0);
    CHECK(rho.purity() == doctest::Approx(1.0));
    CHECK(rho.min_eigenvalue() == doctest::Approx(0.0).epsilon(1e-12));

    const auto conv = psi.to_density();
    CHECK(conv.representation() == Representation::density);
    CHECK(conv.populations() == psi.populations());
}

TEST_CASE("mixed state invariants") {
    // equal mixture of |0> and |1> on one site
    std::vector<cplx> rho{0.5, 0.0, 0.0, 0.5};
    const auto m = ManyBodyState::from_density(1, rho);
    CHECK(m.trace() == doctest::Approx(1.0));
    CHECK(m.purity() == doctest::Approx(0.5));
    CHECK(m.min_eigenvalue() == doctest::Approx(0.5));
    CHECK(m.basis_probabilities() == std::vector<double>{0.5, 0.5});

    // superposition amplitudes
    const double h = 1.0 / std::sqrt(2.0);
    const auto s = ManyBodyState::from_amplitudes(1, {h, cplx(0.0, h)});
    CHECK(s.populations()[0] == doctest::Approx(0.5));
    const auto sd = s.to_density();
    CHECK(sd.purity() == doctest::Approx(1.0));
    CHECK(sd.hermiticity_residual() < 1e-15);
    CHECK(std::abs(sd.data()[1] - cplx(0.0, -0.5)) < 1e-15);  // rho_01 = c0 c1*

    CHECK_THROWS(ManyBodyState::from_amplitudes(2, {1.0, 0.0}));
}

TEST_CASE("size ceilings") {
    CHECK_NOTHROW(ManyBodyState::product_density(std::string(max_density_sites, '0')));
    CHECK_THROWS_AS(ManyBodyState::product_density(std::string(max_density_sites + 1, '0')), ResourceRefusal);
    CHECK_THROWS_AS(ManyBodyState::product_pure(std::string(max_pure_sites + 1, '0')), ResourceRefusal);
    CHECK(max_density_sites == 12);
    CHECK(max_pure_sites == 24);
}
