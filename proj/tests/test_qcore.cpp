#include "qtomo/qcore.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace qtomo;

namespace {

std::mt19937_64 rng(42);

CoefficientVector random_coeffs(int dim) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CoefficientVector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = u(rng);
    return v;
}

}  // namespace

TEST_CASE("pauli matrices") {
    REQUIRE(pauli(0).isApprox(ComplexMatrix::Identity(2, 2)));
    CHECK(pauli(3)(0, 0) == Complex(1.0, 0.0));
    CHECK(pauli(3)(1, 1) == Complex(-1.0, 0.0));
    CHECK(pauli(1)(0, 1) == Complex(1.0, 0.0));
    CHECK(pauli(2)(1, 0) == Complex(0.0, 1.0));
    CHECK_THROWS_AS(pauli(4), std::out_of_range);
    CHECK_THROWS_AS(pauli(-1), std::out_of_range);

    SECTION("orthogonality Tr(s_j s_k) = 2 d_jk") {
        for (int j = 0; j < 4; ++j) {
            for (int k = 0; k < 4; ++k) {
                const Complex tr = (pauli(j) * pauli(k)).trace();
                CHECK(std::abs(tr - (j == k ? 2.0 : 0.0)) < 1e-15);
            }
        }
    }
}

TEST_CASE("kron") {
    CHECK(kron(pauli(0), pauli(0)).isApprox(ComplexMatrix::Identity(4, 4)));

    const ComplexMatrix zz = kron(pauli(3), pauli(3));
    CHECK(zz(0, 0) == Complex(1.0, 0.0));
    CHECK(zz(1, 1) == Complex(-1.0, 0.0));
    CHECK(zz(2, 2) == Complex(-1.0, 0.0));
    CHECK(zz(3, 3) == Complex(1.0, 0.0));

    SECTION("sigma_1 x I swaps block rows") {
        ComplexMatrix m = ComplexMatrix::Random(4, 4);
        const ComplexMatrix swapped = kron(pauli(1), pauli(0)) * m;
        CHECK(swapped.topRows(2).isApprox(m.bottomRows(2), 1e-14));
        CHECK(swapped.bottomRows(2).isApprox(m.topRows(2), 1e-14));
    }

    SECTION("two-qubit orthogonality") {
        for (int a = 0; a < 16; ++a) {
            for (int b = 0; b < 16; ++b) {
                const Complex tr = (pauli2(a / 4, a % 4) * pauli2(b / 4, b % 4)).trace();
                CHECK(std::abs(tr - (a == b ? 4.0 : 0.0)) < 1e-14);
            }
        }
    }
}

TEST_CASE("coefficient/density conversions") {
    SECTION("basis states") {
        CoefficientVector v(4);
        v << 1, 0, 0, 1;
        ComplexMatrix rho = coeffs_to_density(v);
        CHECK(std::abs(rho(0, 0) - 1.0) < 1e-15);
        CHECK(std::abs(rho(1, 1)) < 1e-15);

        v << 1, 1, 0, 0;  // |+><+|
        rho = coeffs_to_density(v);
        CHECK(std::abs(rho(0, 1) - 0.5) < 1e-15);
        CHECK(std::abs(rho(0, 0) - 0.5) < 1e-15);
    }

    SECTION("known coefficient extractions") {
        CHECK(density_to_coeffs(0.5 * ComplexMatrix::Identity(2, 2))
                  .isApprox((CoefficientVector(4) << 1, 0, 0, 0).finished(), 1e-14));

        ComplexMatrix one = ComplexMatrix::Zero(2, 2);
        one(1, 1) = 1.0;
        CHECK(density_to_coeffs(one).isApprox((CoefficientVector(4) << 1, 0, 0, -1).finished(),
                                              1e-14));
    }

    SECTION("two-qubit entangled state coefficients") {
        ComplexVector psi(4);
        psi << 0.5, 0.5, 0.5, -0.5;
        const CoefficientVector c = density_to_coeffs(psi * psi.adjoint());
        CHECK(std::abs(c(0) - 1.0) < 1e-14);          // c_00 = Tr(rho)
        CHECK(std::abs(c(4 * 1 + 3) - 1.0) < 1e-14);  // c_13
        CHECK(std::abs(c(4 * 3 + 1) - 1.0) < 1e-14);  // c_31
        CHECK(std::abs(c(4 * 2 + 2) - 1.0) < 1e-14);  // c_22
        // every other coefficient vanishes
        double rest = 0.0;
        for (int i = 0; i < 16; ++i) {
            if (i == 0 || i == 7 || i == 13 || i == 10) continue;
            rest = std::max(rest, std::abs(c(i)));
        }
        CHECK(rest < 1e-14);
    }

    SECTION("round trip is the identity") {
        for (int trial = 0; trial < 100; ++trial) {
            const int dim = trial % 2 == 0 ? 4 : 16;
            const CoefficientVector v = random_coeffs(dim);
            const CoefficientVector back = density_to_coeffs(coeffs_to_density(v));
            CHECK((back - v).cwiseAbs().maxCoeff() < 1e-13);
        }
    }

    SECTION("errors") {
        CHECK_THROWS_AS(coeffs_to_density(CoefficientVector::Zero(5)), std::invalid_argument);
        ComplexMatrix bad(2, 2);
        bad << 0, 1, 0, 0;  // not hermitian
        CHECK_THROWS_AS(density_to_coeffs(bad), std::invalid_argument);
        CHECK_THROWS_AS(density_to_coeffs(ComplexMatrix::Identity(3, 3)), std::invalid_argument);
    }
}

TEST_CASE("fidelity") {
    PureState zero(2), plus(2), minus(2);
    zero << 1, 0;
    plus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
    minus << 1 / std::sqrt(2.0), -1 / std::sqrt(2.0);

    CHECK(fidelity(zero, zero * zero.adjoint()) == Catch::Approx(1.0).margin(1e-14));
    CHECK(fidelity(zero, 0.5 * ComplexMatrix::Identity(2, 2)) ==
          Catch::Approx(0.5).margin(1e-14));
    CHECK(fidelity(plus, minus * minus.adjoint()) == Catch::Approx(0.0).margin(1e-14));

    SECTION("invariant under global phase, linear in rho") {
        const PureState phased = std::exp(Complex(0.0, 1.234)) * plus;
        const ComplexMatrix rho_a = zero * zero.adjoint();
        const ComplexMatrix rho_b = 0.5 * ComplexMatrix::Identity(2, 2);
        CHECK(fidelity(phased, rho_a) == Catch::Approx(fidelity(plus, rho_a)).margin(1e-13));
        CHECK(fidelity(plus, 0.3 * rho_a + 0.7 * rho_b) ==
              Catch::Approx(0.3 * fidelity(plus, rho_a) + 0.7 * fidelity(plus, rho_b))
                  .margin(1e-13));
    }

    SECTION("errors") {
        CHECK_THROWS_AS(fidelity(zero, ComplexMatrix::Identity(4, 4)), std::invalid_argument);
        PureState unnormalised(2);
        unnormalised << 1, 1;
        CHECK_THROWS_AS(fidelity(unnormalised, zero * zero.adjoint()), std::invalid_argument);
    }
}

TEST_CASE("hermitian check") {
    CHECK(is_hermitian(ComplexMatrix::Identity(3, 3)));
    ComplexMatrix m(2, 2);
    m << 1.0, Complex(0, 1), Complex(0, -1), 2.0;
    CHECK(is_hermitian(m));
    m(0, 1) = Complex(0, 1.0 + 1e-9);
    CHECK_FALSE(is_hermitian(m, 1e-12));
}
