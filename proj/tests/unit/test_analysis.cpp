#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "sr1d/analysis.hpp"
#include "sr1d/exact.hpp"

using namespace sr1d;
using namespace sr1d::analysis;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> grid(double hi, int n) {
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) t[i] = hi * i / (n - 1);
    return t;
}

// A e^{-gamma tau / 2 + i nu tau} plus a complex noise floor of rms `floor`
std::vector<cplx> damped(const std::vector<double>& tau, double gamma, double nu, cplx a, double floor,
                         std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, floor / std::sqrt(2.0));
    std::vector<cplx> out;
    for (double t : tau) out.push_back(a * std::exp(cplx(-0.5 * gamma, nu) * t) + cplx(g(rng), g(rng)));
    return out;
}

std::vector<double> ramp(int n, double kd) {
    std::vector<double> z(n);
    for (int i = 0; i < n; ++i) z[i] = kd * (i + 1);
    return z;
}

}  // namespace

TEST_CASE("linewidth of a noisy damped exponential") {
    const auto tau = grid(6.0, 121);
    const auto g1 = damped(tau, 2.0, 0.7, 1.0, 1e-3, 4);
    const auto est = fit_linewidth(tau, g1);
    REQUIRE(est.ok);
    CHECK(est.linewidth == doctest::Approx(2.0).epsilon(0.03));
    CHECK(est.noise_floor < 5e-3);
}

TEST_CASE("linewidth ignores global phase and scale") {
    const auto tau = grid(4.0, 81);
    const auto g1 = damped(tau, 3.0, -1.2, 0.4, 1e-4, 9);
    const double base = fit_linewidth(tau, g1).linewidth;
    auto rotated = g1;
    for (auto& x : rotated) x *= std::polar(25.0, 1.1);
    CHECK(fit_linewidth(tau, rotated).linewidth == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("linewidth fit rejects pure noise") {
    const auto tau = grid(4.0, 81);
    CHECK_FALSE(fit_linewidth(tau, damped(tau, 1.0, 0.0, 0.0, 1e-3, 2)).ok);
}

TEST_CASE("single atom linewidth from the exact correlator") {
    const auto m = build_model(ModelKind::RingCavity, 1, 1.0, {1.0, 2.0, 1.0});
    const auto tau = grid(3.0, 61);
    const auto g1 = exact::two_time_correlator(m, exact::steady_state(m), far_field(m, FieldDirection::Right).weights(), tau);
    LinewidthOptions noise_free;
    noise_free.subtract_floor = false;
    const auto est = fit_linewidth(tau, g1, noise_free);
    REQUIRE(est.ok);
    CHECK(est.linewidth == doctest::Approx(4.0).epsilon(1e-6));
    // with only a short tail the floor estimate eats into the signal itself
    CHECK(fit_linewidth(tau, g1).linewidth == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("spectrum of an exponential against its transform") {
    const double gamma = 1.5, t_max = 12.0;
    const auto tau = grid(t_max, 4001);
    const auto g1 = damped(tau, 2.0 * gamma, 0.0, 1.0, 0.0, 1);
    const std::vector<double> nu{-3.0, -1.0, 0.0, 0.5, 2.0};
    const auto s = spectrum_from_correlator(tau, g1, nu);
    for (std::size_t i = 0; i < nu.size(); ++i) {
        const cplx z(-gamma, nu[i]);
        const double ref = 2.0 * ((std::exp(z * t_max) - 1.0) / z).real();
        CHECK(s[i] == doctest::Approx(ref).epsilon(1e-5));
    }
}

TEST_CASE("minimum of a linewidth scan") {
    std::vector<std::pair<double, double>> pts;
    for (double w : {1.0, 2.0, 3.0, 4.0, 5.0, 6.0}) pts.push_back({w, 2.0 * (w - 3.5) * (w - 3.5) + 1.0});
    const auto fit = min_linewidth_scan(pts);
    REQUIRE(fit.fit_ok);
    CHECK(fit.w_min == doctest::Approx(3.5));
    CHECK(fit.dnu_min == doctest::Approx(1.0));
    CHECK(fit.curvature == doctest::Approx(2.0));

    CHECK_FALSE(min_linewidth_scan({pts.begin(), pts.begin() + 4}).fit_ok);
    auto concave = pts;
    for (auto& p : concave) p.second = -p.second;
    CHECK_FALSE(min_linewidth_scan(concave).fit_ok);
    auto monotone = pts;
    for (auto& p : monotone) p.second = p.first;
    CHECK_FALSE(min_linewidth_scan(monotone).fit_ok);
}

TEST_CASE("ansatz probability") {
    CHECK(ansatz_probability(1, 20, 3.0, 1.0) == doctest::Approx(1.0));
    CHECK(ansatz_probability(20, 20, 3.0, 1.0) == doctest::Approx(0.0));
    CHECK(ansatz_probability(7, 20, 3.0, 0.0) == doctest::Approx(0.5));
    // odd N puts the middle atom at 1/2
    CHECK(ansatz_probability(11, 21, 3.0, 0.8) == doctest::Approx(0.5));
}

TEST_CASE("ansatz correlations") {
    const double kd = 2.0 * kPi / 3.0;
    const auto z = ramp(30, kd);
    SUBCASE("no domains: a standing-wave cosine") {
        const auto c = ansatz_correlations(2.0, 0.0, 1.0, 1.0, z);
        for (int n = 0; n < 30; ++n)
            for (int m = 0; m < 30; ++m) {
                CHECK(std::abs(c(n, m).imag()) < 1e-12);
                CHECK(c(n, m).real() == doctest::Approx(0.5 * std::cos(z[n] - z[m])));
            }
    }
    SUBCASE("left domain at the left edge") {
        const auto c = ansatz_correlations(6.0, 1.0, 1.0, 1.0, z);
        for (int n = 0; n < 3; ++n)
            for (int m = 0; m < 3; ++m)
                if (n != m) CHECK(std::abs(std::arg(c(n, m) * std::polar(1.0, -(z[n] - z[m])))) < 0.05);
        CHECK(std::arg(c(1, 0)) == doctest::Approx(kd).epsilon(0.05));
    }
    SUBCASE("Hermitian and translation invariant") {
        const auto c = ansatz_correlations(2.5, 0.7, 1.3, 0.4, z);
        CHECK((c - c.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
        auto shifted = z;
        for (auto& x : shifted) x += 17.3;
        CHECK((ansatz_correlations(2.5, 0.7, 1.3, 0.4, shifted) - c).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("ansatz fit round trip") {
    const auto z = ramp(40, 2.0 * kPi / 3.0);
    const auto c = ansatz_correlations(2.5, 0.7, 1.0, 0.3, z);
    const auto fit = fit_ansatz(c, z);
    REQUIRE_FALSE(fit.degenerate);
    CHECK(fit.alpha == doctest::Approx(2.5).epsilon(0.02));
    CHECK(fit.beta == doctest::Approx(0.7).epsilon(0.02));
    CHECK(fit.gamma_w * fit.amplitude == doctest::Approx(0.3).epsilon(0.02));
}

TEST_CASE("collapse of a left-ordered array") {
    const double kd = 0.3;
    const int n = 12;
    const auto z = ramp(n, kd);
    ComplexMatrix c(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) c(a, b) = 0.2 * std::polar(1.0, z[a] - z[b]);
    const auto pts = correlation_collapse(c);
    CHECK(pts.size() == static_cast<std::size_t>(n * n));
    for (const auto& p : pts) {
        if (std::abs(p.d) <= 3) CHECK(p.arg == doctest::Approx(kd * p.d));
        CHECK(p.n_prime == doctest::Approx((2.0 * (p.n - 1) + p.d) / (2.0 * (n - 1))));
        CHECK(p.magnitude == doctest::Approx(0.2));
    }
}

TEST_CASE("phases from nearest-neighbour correlations") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int n = 9;
    std::vector<double> phi(n);
    Eigen::VectorXcd coh(n);
    for (int a = 0; a < n; ++a) {
        phi[a] = (a ? phi[a - 1] : 0.0) + u(rng);
        coh(a) = std::polar(0.3, -phi[a]);
    }
    const ComplexMatrix c = coh.conjugate() * coh.transpose();
    const auto rec = phases_from_correlations(c);
    for (int a = 0; a < n; ++a) CHECK(rec[a] == doctest::Approx(phi[a] - phi[0]));
}

TEST_CASE("threshold knees of a triangular scan") {
    std::vector<double> w, r;
    for (double x = 0.0; x <= 60.0; x += 2.0) {
        w.push_back(x);
        r.push_back(std::max(0.0, std::min(3.0 * (x - 4.0), 1.5 * (50.0 - x))));
    }
    const auto est = estimate_thresholds(w, r);
    REQUIRE(est.lower_found);
    REQUIRE(est.upper_found);
    CHECK(est.w_lower == doctest::Approx(4.0));
    CHECK(est.w_upper == doctest::Approx(50.0));
    CHECK(est.w_peak == doctest::Approx(20.0));
    const auto flat = estimate_thresholds({1.0, 2.0}, {0.0, 0.0});
    CHECK_FALSE(flat.lower_found);
}

TEST_CASE("TWA steady average of a single atom") {
    const auto m = build_model(ModelKind::RingCavity, 1, 1.0, {1.0, 1.0, 2.0});
    SteadyAverageOptions opts;
    opts.n_traj = 4000;
    opts.seed = 8;
    const auto sa = twa_steady_average(m, opts);
    CHECK(std::abs(sa.excited_fraction - 0.5) < 4.0 * sa.excited_fraction_err + 2e-3);
    CHECK(std::abs(sa.emission_rate - 0.5) < 4.0 * sa.emission_rate_err + 2e-3);
}
