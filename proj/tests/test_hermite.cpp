#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "mkvlab/hermite.hpp"
#include "mkvlab/measure.hpp"
#include "mkvlab/rng.hpp"
#include "mkvlab/test_functions.hpp"

using namespace mkvlab;
using namespace mkvlab::hermite;

namespace {

// Oracle basis evaluation: explicit probabilists' polynomial plus lgamma
// normalization, an arithmetic path disjoint from eval_axis.
double oracle_h(int k, double x) {
    double he0 = 1.0, he1 = x;
    double he = (k == 0) ? he0 : he1;
    for (int j = 1; j < k; ++j) {
        const double next = x * he1 - j * he0;
        he0 = he1;
        he1 = next;
        he = next;
    }
    const double lognorm = -0.5 * std::lgamma(k + 1.0);
    return he * std::exp(lognorm - 0.25 * x * x) * std::pow(2 * std::numbers::pi, -0.25);
}

// Independent quadrature oracle: composite trapezoid at high resolution.
double oracle_coeff_1d(const std::function<double(double)>& f, int k, double L, int n) {
    const double h = 2 * L / (n - 1);
    double s = 0;
    for (int i = 0; i < n; ++i) {
        const double x = -L + i * h;
        const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        s += w * f(x) * oracle_h(k, x);
    }
    return s * h;
}

constexpr double kH0AtZero = 0.63161877774606470;  // (2pi)^{-1/4}

}  // namespace

TEST_SUITE("hermite") {

TEST_CASE("eval: lowest basis function at 0 equals (2pi)^{-1/4}") {
    const double x = 0.0;
    CHECK(eval(MultiIndex{0}, std::span<const double>(&x, 1)) == doctest::Approx(kH0AtZero).epsilon(1e-12));
}

TEST_CASE("eval: second basis function vanishes at 0") {
    const double x = 0.0;
    CHECK(eval(MultiIndex{1}, std::span<const double>(&x, 1)) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("eval: agrees with the polynomial oracle across degrees") {
    for (int k : {0, 1, 2, 5, 17, 40, 60}) {
        for (double x : {-7.5, -1.0, 0.3, 2.0, 6.0}) {
            const double got = eval(MultiIndex{k}, std::span<const double>(&x, 1));
            CHECK(got == doctest::Approx(oracle_h(k, x)).epsilon(1e-9));
        }
    }
}

TEST_CASE("eval: d=2 tensor product identity") {
    rng::UniformStream u(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int j = static_cast<int>(u.bits() % 15);
        const int l = static_cast<int>(u.bits() % 15);
        const double x1 = u.in(-4, 4), x2 = u.in(-4, 4);
        const double xy[2] = {x1, x2};
        const double lhs = eval(MultiIndex{j, l}, xy);
        const double rhs = eval(MultiIndex{j}, std::span<const double>(&x1, 1)) *
                           eval(MultiIndex{l}, std::span<const double>(&x2, 1));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-14));
    }
}

TEST_CASE("eval: explicit range errors outside the stable region") {
    std::vector<double> out(3001);
    CHECK_THROWS_AS(eval_axis(60.0, out), std::domain_error);
    std::vector<double> big(static_cast<std::size_t>(kMaxDegree) + 10);
    CHECK_THROWS_AS(eval_axis(0.0, big), std::domain_error);
    // far outside the classically allowed region the value underflows to 0
    std::vector<double> small(4);
    eval_axis(80.0, small);
    for (double v : small) CHECK(v == 0.0);
}

TEST_CASE("orthonormality up to degree 12 within 1e-8") {
    HermiteBasis basis(1, 12);
    CHECK(basis.orthonormality_error(Quadrature{}, 12) < 1e-8);
}

TEST_CASE("uniform bound (2pi)^{d/4} on sampled evaluations") {
    HermiteBasis basis(1, 60);
    const double bound = basis.sup_bound() * (1 + 1e-10);
    double worst = 0;
    std::vector<double> vals(61);
    for (int i = 0; i <= 600; ++i) {
        const double x = -15.0 + i * 0.05;
        eval_axis(x, vals);
        for (double v : vals) worst = std::max(worst, std::abs(v));
    }
    CHECK(worst <= bound);
    HermiteBasis basis2(2, 10);
    CHECK(basis2.sup_bound() == doctest::Approx(std::pow(2 * std::numbers::pi, 0.5)));
}

TEST_CASE("coeffs_of_function: basis function maps to an indicator vector") {
    HermiteBasis basis(1, 20);
    auto f = [](std::span<const double> x) {
        return eval(MultiIndex{7}, x);
    };
    const CoeffVector v = coeffs_of_function(f, basis, Quadrature{});
    for (int k = 0; k <= 20; ++k)
        CHECK(v.at(MultiIndex{k}) == doctest::Approx(k == 7 ? 1.0 : 0.0).epsilon(1e-10));
}

TEST_CASE("coeffs_of_function: zero function maps to the zero vector") {
    HermiteBasis basis(1, 10);
    const CoeffVector v = coeffs_of_function([](std::span<const double>) { return 0.0; }, basis, Quadrature{});
    for (double c : v.c) CHECK(c == 0.0);
}

TEST_CASE("coeffs_of_function: standard normal density matches the trapezoid oracle to 1e-8") {
    HermiteBasis basis(1, 24);
    auto dens = [](std::span<const double> x) {
        return std::exp(-0.5 * x[0] * x[0]) / std::sqrt(2 * std::numbers::pi);
    };
    const CoeffVector v = coeffs_of_function(dens, basis, Quadrature{});
    for (int k = 0; k <= 24; ++k) {
        const double want = oracle_coeff_1d(
            [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi); }, k, 12.0,
            240001);
        CHECK(v.at(MultiIndex{k}) == doctest::Approx(want).epsilon(0).scale(1).epsilon(1e-8));
    }
}

TEST_CASE("coeffs_of_function: warns when the domain truncates the integrand") {
    HermiteBasis basis(1, 4);
    std::string warn;
    coeffs_of_function([](std::span<const double>) { return 1.0; }, basis, Quadrature{}, &warn);
    CHECK(!warn.empty());
    warn.clear();
    coeffs_of_function([](std::span<const double> x) { return std::exp(-x[0] * x[0]); }, basis,
                       Quadrature{}, &warn);
    CHECK(warn.empty());
}

TEST_CASE("coeffs_of_measure: point mass at the origin") {
    const double zero = 0.0;
    const auto mu = WeightedSampleMeasure::dirac(std::span<const double>(&zero, 1));
    const CoeffVector v = coeffs_of_measure(mu.view(), 1, 8);
    CHECK(v.at(MultiIndex{0}) == doctest::Approx(kH0AtZero).epsilon(1e-12));
    CHECK(v.at(MultiIndex{1}) == doctest::Approx(0.0));
}

TEST_CASE("coeffs_of_measure: symmetric pair kills odd coefficients") {
    WeightedSampleMeasure mu;
    mu.dim = 1;
    mu.points = {-1.3, 1.3};
    const CoeffVector v = coeffs_of_measure(mu.view(), 1, 15);
    for (int k = 1; k <= 15; k += 2) CHECK(std::abs(v.at(MultiIndex{k})) < 1e-15);
}

TEST_CASE("coeffs_of_measure: linear in the measure") {
    rng::UniformStream u(5);
    std::vector<double> pts(10);
    for (double& p : pts) p = u.in(-3, 3);
    const auto emp = WeightedSampleMeasure::equal(1, pts);
    const CoeffVector whole = coeffs_of_measure(emp.view(), 1, 12);
    CoeffVector acc = CoeffVector::zeros(1, 12);
    for (double p : pts) {
        const auto d = WeightedSampleMeasure::dirac(std::span<const double>(&p, 1));
        const CoeffVector one = coeffs_of_measure(d.view(), 1, 12);
        for (std::size_t i = 0; i < acc.c.size(); ++i) acc.c[i] += one.c[i] / 10.0;
    }
    for (std::size_t i = 0; i < acc.c.size(); ++i)
        CHECK(whole.c[i] == doctest::Approx(acc.c[i]).epsilon(1e-13));
}

TEST_CASE("hp_norm: zero vector and single-coefficient values") {
    CoeffVector v = CoeffVector::zeros(1, 10);
    for (double p : {-2.0, 0.0, 1.5}) CHECK(hp_norm(v, p) == 0.0);
    v.at(MultiIndex{3}) = 1.0;
    const double br = std::sqrt(1.0 + 9.0);
    CHECK(hp_norm(v, 2.0) == doctest::Approx(std::pow(br, 2.0)).epsilon(1e-14));
    CoeffVector w = CoeffVector::zeros(2, 5);
    w.at(MultiIndex{3, 4}) = 1.0;
    CHECK(hp_norm(w, 2.0) == doctest::Approx(std::pow(std::sqrt(26.0), 1.0)).epsilon(1e-14));
}

TEST_CASE("hp_norm: delta_0 partial sums converge for p=1 and diverge for p=0") {
    std::vector<double> h0(4097);
    eval_axis(0.0, h0);
    auto window = [&](double p, std::size_t K) {
        double s = 0;
        for (std::size_t k = K; k < 2 * K; ++k) {
            const double br = std::sqrt(1.0 + static_cast<double>(k) * k);
            s += std::pow(br, -2 * p) * h0[k] * h0[k];
        }
        return s;
    };
    for (std::size_t K : {128u, 256u, 512u, 1024u}) {
        CHECK(window(1.0, 2 * K) / window(1.0, K) < 0.6);   // tail increments shrink
        CHECK(window(0.0, 2 * K) / window(0.0, K) > 1.2);   // tail increments grow
    }
}

TEST_CASE("hp_norm: monotone nondecreasing in p") {
    rng::UniformStream u(42);
    for (int trial = 0; trial < 25; ++trial) {
        CoeffVector v = CoeffVector::zeros(1, 20);
        for (double& c : v.c) c = u.in(-1, 1);
        double p1 = u.in(-3, 3), p2 = u.in(-3, 3);
        if (p1 > p2) std::swap(p1, p2);
        CHECK(hp_norm(v, p1) <= hp_norm(v, p2) * (1 + 1e-12));
    }
}

TEST_CASE("seminorm_m_star: gaussian bump") {
    const auto phi = testfn::gaussian_bump(1);
    const auto probe = UniformGrid::line(-12, 12, 4801);
    CHECK(seminorm_m_star(phi, 0, probe) == doctest::Approx(1.0).epsilon(1e-6));

    // dense-grid maximization oracle for m=1
    double want = 0;
    for (int i = 0; i <= 400000; ++i) {
        const double x = -12.0 + i * 24.0 / 400000.0;
        const double w = std::sqrt(1 + x * x);
        const double f = std::exp(-0.5 * x * x);
        want = std::max({want, w * f, w * std::abs(-x * f)});
    }
    CHECK(seminorm_m_star(phi, 1, probe) == doctest::Approx(want).epsilon(1e-4));
}

TEST_CASE("seminorm_m_star: m=3 uses finite differences on top of exact derivatives") {
    const auto phi = testfn::gaussian_bump(1);
    const auto probe = UniformGrid::line(-10, 10, 2001);
    const double got = seminorm_m_star(phi, 3, probe);
    // dense-grid oracle with the analytic derivatives of exp(-x^2/2)
    double want = 0;
    for (int i = 0; i <= 200000; ++i) {
        const double x = -10.0 + i * 20.0 / 200000.0;
        const double e = std::exp(-0.5 * x * x);
        const double w = std::pow(1 + x * x, 1.5);
        const double d1 = -x * e;
        const double d2 = (x * x - 1) * e;
        const double d3 = x * (3 - x * x) * e;
        want = std::max({want, w * e, w * std::abs(d1), w * std::abs(d2), w * std::abs(d3)});
    }
    CHECK(got == doctest::Approx(want).epsilon(2e-3));
}

TEST_CASE("seminorm_m_star: m=0 is dilation invariant") {
    for (double c : {2.0, 5.0}) {
        const auto phi = testfn::gaussian_bump(1, c);
        const auto probe = UniformGrid::line(-30, 30, 6001);
        CHECK(seminorm_m_star(phi, 0, probe) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("pairing: delta_0 against a gaussian bump recovers phi(0) at Kmax=60") {
    HermiteBasis basis(1, 60);
    const auto phi_coeffs = coeffs_of_function(
        [](std::span<const double> x) { return std::exp(-0.5 * x[0] * x[0]); }, basis, Quadrature{});
    const double zero = 0.0;
    const auto delta = WeightedSampleMeasure::dirac(std::span<const double>(&zero, 1));
    const auto delta_coeffs = coeffs_of_measure(delta.view(), 1, 60);
    CHECK(std::abs(pairing(delta_coeffs, phi_coeffs) - 1.0) < 1e-4);
}

TEST_CASE("pairing: zero argument and p=0 self-pairing") {
    CoeffVector z = CoeffVector::zeros(1, 8);
    CoeffVector v = CoeffVector::zeros(1, 8);
    rng::UniformStream u(3);
    for (double& c : v.c) c = u.in(-2, 2);
    CHECK(pairing(z, v) == 0.0);
    CHECK(pairing(v, z) == 0.0);
    const double n0 = hp_norm(v, 0.0);
    CHECK(pairing(v, v) == doctest::Approx(n0 * n0).epsilon(1e-13));
}

TEST_CASE("pairing: truncation mismatch is an error") {
    const CoeffVector a = CoeffVector::zeros(1, 8);
    const CoeffVector b = CoeffVector::zeros(1, 9);
    const CoeffVector c2 = CoeffVector::zeros(2, 8);
    CHECK_THROWS_AS(pairing(a, b), std::invalid_argument);
    CHECK_THROWS_AS(pairing(a, c2), std::invalid_argument);
}

TEST_CASE("duality: |pairing| bounded by dual norms for p in {0,1,2}") {
    rng::UniformStream u(77);
    for (int trial = 0; trial < 30; ++trial) {
        CoeffVector a = CoeffVector::zeros(1, 16), b = CoeffVector::zeros(1, 16);
        for (double& c : a.c) c = u.in(-1, 1);
        for (double& c : b.c) c = u.in(-1, 1);
        const double pr = std::abs(pairing(a, b));
        for (double p : {0.0, 1.0, 2.0})
            CHECK(pr <= hp_norm(a, -p) * hp_norm(b, p) * (1 + 1e-12));
    }
}

TEST_CASE("coeff vector json round trip") {
    CoeffVector v = CoeffVector::zeros(2, 3);
    rng::UniformStream u(9);
    for (double& c : v.c) c = u.in(-5, 5);
    const CoeffVector w = CoeffVector::from_json(v.to_json());
    CHECK(w.dim == v.dim);
    CHECK(w.kmax == v.kmax);
    for (std::size_t i = 0; i < v.c.size(); ++i) CHECK(w.c[i] == v.c[i]);
}

TEST_CASE("test functions: supplied derivatives match finite differences") {
    for (const auto& phi : {testfn::gaussian_bump(1), testfn::x_gaussian(), testfn::sine_gaussian(2.0),
                            testfn::compact_bump(1, 2.0)}) {
        CHECK(phi.derivative_gap(1.6, 21, 1e-5) < 2e-6);
    }
    const auto phi2 = testfn::gaussian_bump(2, 1.3);
    CHECK(phi2.derivative_gap(1.5, 15, 1e-5) < 2e-6);
}

}  // TEST_SUITE
