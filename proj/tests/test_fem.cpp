#include <catch2/catch_amalgamated.hpp>

#include <Eigen/SparseCholesky>
#include <cmath>

#include "wgmconv/em_solver.hpp"
#include "wgmconv/fem.hpp"
#include "wgmconv/lanczos.hpp"
#include "wgmconv/mesh.hpp"

using namespace wgmconv;

namespace {

// Closed-form PEC cylindrical cavity oracles (radius a, height d).
// J0 and J1' zeros from standard tables.
constexpr double kChiTM01 = 2.404825557695773;
constexpr double kChiTE11 = 1.841183781340659;

double tm010_omega(double a) { return kChiTM01 / a * constants::speed_of_light; }

double te111_omega(double a, double d) {
    const double kc = kChiTE11 / a;
    const double kz = constants::pi / d;
    return std::sqrt(kc * kc + kz * kz) * constants::speed_of_light;
}

// Solve near the oracle frequency and return the relative error of the
// closest computed mode.
double cavity_mode_error(double a, double d, int L, double omega_exact, double edge) {
    Mesh mesh = structured_rectangle_mesh(0.0, a, 0.0, d, edge);
    RegionIndices vac;
    SolveOptions opts;
    opts.mode_count = 6;
    auto modes = solve_modes(mesh, vac, L, Frequency::from_rad_s(omega_exact * 0.98), opts);
    REQUIRE_FALSE(modes.empty());
    double best = 1e300;
    for (const auto& m : modes)
        best = std::min(best, std::abs(m.omega.rad_s() - omega_exact) / omega_exact);
    return best;
}

}  // namespace

TEST_CASE("mass matrix is positive definite on a vacuum-only window") {
    Mesh mesh = structured_rectangle_mesh(0.0, 0.01, 0.0, 0.008, 2e-3);
    RegionIndices vac;
    const FemOperators ops = assemble(mesh, vac, 3);
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
    llt.compute(ops.M);
    CHECK(llt.info() == Eigen::Success);
}

TEST_CASE("operator dimensions are 3 x node count before reduction") {
    Mesh mesh = structured_rectangle_mesh(0.0, 0.01, 0.0, 0.008, 2e-3);
    RegionIndices vac;
    const FemOperators ops = assemble(mesh, vac, 13);
    CHECK(ops.full_dim() == 3 * mesh.node_count());
    CHECK(ops.reduced_dim() < ops.full_dim());
    CHECK(ops.reduced_dim() > 0);
}

TEST_CASE("zero divergence penalty admits spurious near-zero eigenvalues") {
    Mesh mesh = structured_rectangle_mesh(0.0, 0.01, 0.0, 0.008, 1.5e-3);
    RegionIndices vac;
    // Lowest physical L=1 eigenvalue of the pencil: TM110, chi_11 = 3.8317...
    const double lam_tm110 = std::pow(3.831705970207512 / 0.01, 2);
    const double sigma = 0.02 * lam_tm110;

    AssemblyOptions no_penalty;
    no_penalty.penalty_weight = 0.0;
    const FemOperators bad = assemble(mesh, vac, 1, no_penalty);
    const auto bad_pairs = shift_invert_eigs(bad.K, bad.M, sigma, 8);
    int spurious = 0;
    for (const auto& p : bad_pairs)
        if (std::abs(p.lambda) < 0.2 * lam_tm110) ++spurious;
    CHECK(spurious > 0);

    const FemOperators good = assemble(mesh, vac, 1);
    const auto good_pairs = shift_invert_eigs(good.K, good.M, sigma, 8);
    for (const auto& p : good_pairs) CHECK(p.lambda > 0.9 * lam_tm110);
}

TEST_CASE("pencil eigenvalues are real and non-negative to solver tolerance") {
    Mesh mesh = structured_rectangle_mesh(0.0, 0.01, 0.0, 0.008, 1.5e-3);
    RegionIndices vac;
    const FemOperators ops = assemble(mesh, vac, 2);
    const double sigma = std::pow(tm010_omega(0.01) / constants::speed_of_light, 2);
    for (const auto& p : shift_invert_eigs(ops.K, ops.M, sigma, 8)) {
        CHECK(p.lambda > -1e-6 * sigma);
        CHECK(p.residual <= 1e-8);
    }
}

TEST_CASE("PEC cavity TM010 matches the closed form at lambda/15") {
    const double a = 0.010, d = 0.008;
    const double w = tm010_omega(a);
    const double lambda = 2 * constants::pi * constants::speed_of_light / w;
    const double err1 = cavity_mode_error(a, d, 0, w, lambda / 15);
    CHECK(err1 < 0.005);
    const double err2 = cavity_mode_error(a, d, 0, w, lambda / 30);
    CHECK(err2 < err1 / 3.0);
}

TEST_CASE("PEC cavity TE111 matches the closed form at lambda/15") {
    const double a = 0.010, d = 0.008;
    const double w = te111_omega(a, d);
    const double lambda = 2 * constants::pi * constants::speed_of_light / w;
    const double err1 = cavity_mode_error(a, d, 1, w, lambda / 15);
    CHECK(err1 < 0.005);
    const double err2 = cavity_mode_error(a, d, 1, w, lambda / 30);
    CHECK(err2 < err1 / 3.0);
}
