#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "micro_reynolds/reynolds_solver.hpp"

namespace mr = micro_reynolds;

namespace {

const double kPi = std::acos(-1.0);
const mr::FluidParams kUnit(0.5, 0.75);

mr::FilmGeometry bump() {
    return mr::FilmGeometry({1.0, 1.0}, mr::height::sinusoidal(1.0, 0.3, 2 * kPi, 2 * kPi), 0.7, 1.3);
}

mr::BodyForces manufactured_forces() {
    mr::BodyForces b;
    b.f = [](double x, double y) {
        return mr::Vec2{-kPi * std::sin(kPi * x) * std::cos(kPi * y), -kPi * std::cos(kPi * x) * std::sin(kPi * y)};
    };
    return b;
}

double q(double x, double y) { return std::cos(kPi * x) * std::cos(kPi * y); }

struct Run {
    mr::MobilityField mobility;
    mr::ReynoldsSystem system;
    mr::PressureField pressure;
};

Run solve(const mr::Mesh2D& mesh, const mr::SlipRegime& r, const mr::BodyForces& f,
          mr::CoefficientSource src = mr::CoefficientSource::Probe, const mr::FilmGeometry& g = bump()) {
    auto mob = mr::build_mobility_field(g, kUnit, r, f, src, mesh);
    auto sys = mr::assemble(mesh, mob);
    auto p = mr::solve_pressure(sys);
    return {std::move(mob), std::move(sys), std::move(p)};
}

double manufactured_error(const mr::Mesh2D& mesh, const mr::PressureField& p, const mr::FilmGeometry& g) {
    const double ih = mr::integrate(mesh, [&](double x, double y) { return g.height(x, y); });
    const double ihq = mr::integrate(mesh, [&](double x, double y) { return g.height(x, y) * q(x, y); });
    return mr::l2_error(mesh, p, [&](double x, double y) { return q(x, y) - ihq / ih; });
}

} // namespace

TEST(Mesh2D, StructureAndValidation) {
    const mr::Mesh2D m({2.0, 1.0}, 4, 5);
    EXPECT_EQ(m.node_count(), 30u);
    EXPECT_EQ(m.cell_count(), 20u);
    EXPECT_EQ(m.node(4, 5).x, 2.0);
    EXPECT_EQ(m.node(4, 5).y, 1.0);
    EXPECT_TRUE(m.on_boundary(m.node_index(0, 3)));
    EXPECT_FALSE(m.on_boundary(m.node_index(2, 2)));
    const auto c = m.cell_nodes(1, 1);
    EXPECT_EQ(c[0], m.node_index(1, 1));
    EXPECT_EQ(c[2], m.node_index(2, 2));
    EXPECT_THROW(mr::Mesh2D({1.0, 1.0}, 3, 8), mr::DomainError);
    EXPECT_THROW(mr::Mesh2D({0.0, 1.0}, 4, 4), mr::DomainError);
}

TEST(MobilityField, NoSlipPrintedDropsMicrorotationSource) {
    const mr::Mesh2D mesh({1.0, 1.0}, 6, 6);
    mr::BodyForces f = manufactured_forces();
    f.g = [](double x, double y) { return mr::Vec2{1.0 + x, y - 2.0}; };
    const auto m = mr::build_mobility_field(bump(), kUnit, mr::NoSlip{}, f, mr::CoefficientSource::Printed, mesh);
    for (std::size_t i = 0; i < m.node_M.size(); ++i) {
        const double h = m.node_h[i];
        EXPECT_NEAR(m.node_M[i], h * h * h * mr::mobility_phi(h, kUnit) / kUnit.one_minus_N2(), 1e-15);
        const auto x = mesh.node(i);
        const auto S = m.node_M[i] * f.f(x.x, x.y);
        EXPECT_EQ(m.node_S[i].x, S.x);
        EXPECT_EQ(m.node_S[i].y, S.y);
    }
}

TEST(MobilityField, ClassicalLimit) {
    const mr::Mesh2D mesh({1.0, 1.0}, 4, 4);
    const mr::FluidParams p(1e-4, 1.0);
    const auto m = mr::build_mobility_field(bump(), p, mr::NoSlip{}, {}, mr::CoefficientSource::Probe, mesh);
    for (std::size_t i = 0; i < m.node_M.size(); ++i) {
        const double h = m.node_h[i];
        EXPECT_NEAR(m.node_M[i] / (h * h * h / 12.0), 1.0, 1e-4);
    }
}

TEST(MobilityField, ProbeAndPrintedAgreeForNoSlip) {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> un(0.05, 0.95), ulog(-2.0, 2.0), uh(0.2, 3.0);
    double worst = 0;
    for (int i = 0; i < 10; ++i) {
        const mr::FluidParams p(un(rng), std::pow(10.0, ulog(rng)));
        const double h = uh(rng);
        const auto a = mr::mobility_at(mr::NoSlip{}, h, p, mr::CoefficientSource::Probe);
        const auto b = mr::mobility_at(mr::NoSlip{}, h, p, mr::CoefficientSource::Printed);
        worst = std::max(worst, std::abs(a.M - b.M) / b.M);
    }
    EXPECT_LE(worst, 1e-8);
}

TEST(MobilityField, NonPositiveMobilityIsReported) {
    // the printed partial-slip mobility is negative at lambda = 1, h = 1
    const mr::Mesh2D mesh({1.0, 1.0}, 4, 4);
    const mr::FilmGeometry flat({1.0, 1.0}, mr::height::constant(1.0), 0.5, 2.0);
    try {
        (void)mr::build_mobility_field(flat, kUnit, mr::PartialSlip{1.0}, {}, mr::CoefficientSource::Printed, mesh);
        FAIL() << "expected NonPositiveMobility";
    } catch (const mr::NonPositiveMobility& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("lambda = 1"), std::string::npos) << what;
        EXPECT_NE(what.find("at (0, 0)"), std::string::npos) << what;
    }
}

TEST(Assemble, ConstantsSpanTheNullspace) {
    const mr::Mesh2D mesh({1.0, 1.0}, 7, 5);
    const auto r = solve(mesh, mr::PerfectSlip{}, manufactured_forces());
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(r.system.K.rows());
    EXPECT_LE((r.system.K * ones).lpNorm<Eigen::Infinity>(), 1e-13);
    const Eigen::SparseMatrix<double> kt = r.system.K.transpose();
    EXPECT_LE((r.system.K - kt).norm(), 1e-15 * r.system.K.norm());
    // c sums to int h
    const double ih = mr::integrate(mesh, [](double x, double y) { return bump().height(x, y); });
    EXPECT_NEAR(r.system.c.sum(), ih, 1e-3);
}

TEST(Assemble, ConstantSourceGivesBalancedLoad) {
    const mr::Mesh2D mesh({1.0, 1.0}, 5, 5);
    const mr::FilmGeometry flat({1.0, 1.0}, mr::height::constant(1.0), 0.5, 2.0);
    mr::BodyForces f;
    f.f = [](double, double) { return mr::Vec2{0.8, -0.3}; };
    const auto mob = mr::build_mobility_field(flat, kUnit, mr::NoSlip{}, f, mr::CoefficientSource::Probe, mesh);
    const auto sys = mr::assemble(mesh, mob);
    EXPECT_LE(std::abs(sys.b.sum()), 1e-15);
    // only boundary nodes see the constant source
    for (std::size_t n = 0; n < mesh.node_count(); ++n) {
        if (!mesh.on_boundary(n)) { EXPECT_NEAR(sys.b[static_cast<Eigen::Index>(n)], 0.0, 1e-16); }
    }
}

TEST(Assemble, UnitMobilityGivesBilinearLaplacian) {
    // the bilinear stiffness on a square cell: 2/3 diagonal, -1/6 edge, -1/3 diagonal neighbour
    const mr::Mesh2D mesh({1.0, 1.0}, 5, 5);
    mr::MobilityField mob{mr::NoSlip{}, mr::CoefficientSource::Probe, {}, {}, {}, {}, {}, {}, {}, {}};
    mob.node_M.assign(mesh.node_count(), 1.0);
    mob.quad_M.assign(mesh.cell_count() * 4, 1.0);
    mob.quad_h.assign(mesh.cell_count() * 4, 1.0);
    mob.quad_S.assign(mesh.cell_count() * 4, mr::Vec2{});
    const auto sys = mr::assemble(mesh, mob);
    const double ref[4][4] = {{2.0 / 3, -1.0 / 6, -1.0 / 3, -1.0 / 6},
                              {-1.0 / 6, 2.0 / 3, -1.0 / 6, -1.0 / 3},
                              {-1.0 / 3, -1.0 / 6, 2.0 / 3, -1.0 / 6},
                              {-1.0 / 6, -1.0 / 3, -1.0 / 6, 2.0 / 3}};
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(36, 36);
    for (std::size_t cj = 0; cj < 5; ++cj)
        for (std::size_t ci = 0; ci < 5; ++ci) {
            const auto c = mesh.cell_nodes(ci, cj);
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) K(static_cast<Eigen::Index>(c[a]), static_cast<Eigen::Index>(c[b])) += ref[a][b];
        }
    EXPECT_LE((Eigen::MatrixXd(sys.K) - K).lpNorm<Eigen::Infinity>(), 1e-14);
    const auto inner = static_cast<Eigen::Index>(mesh.node_index(2, 2));
    EXPECT_NEAR(sys.K.coeff(inner, inner), 8.0 / 3.0, 1e-14);
}

TEST(SolvePressure, ZeroLoadGivesZeroPressure) {
    const mr::Mesh2D mesh({1.0, 1.0}, 6, 6);
    const auto r = solve(mesh, mr::NoSlip{}, {});
    for (double v : r.pressure.p) EXPECT_EQ(v, 0.0);
}

TEST(SolvePressure, ManufacturedSecondOrderAllRegimes) {
    for (const mr::SlipRegime& reg : {mr::SlipRegime{mr::NoSlip{}}, mr::SlipRegime{mr::PerfectSlip{}},
                                      mr::SlipRegime{mr::PartialSlip{1.0}}}) {
        std::vector<double> e;
        for (std::size_t n : {16, 32, 64}) {
            const mr::Mesh2D mesh({1.0, 1.0}, n, n);
            const auto r = solve(mesh, reg, manufactured_forces());
            EXPECT_LE(r.pressure.relative_residual, 1e-10);
            e.push_back(manufactured_error(mesh, r.pressure, bump()));
        }
        for (int i = 0; i < 2; ++i) {
            EXPECT_GE(e[i] / e[i + 1], 3.6) << mr::regime_name(reg);
            EXPECT_LE(e[i] / e[i + 1], 4.4) << mr::regime_name(reg);
        }
        EXPECT_LE(e[2], 5e-4);
    }
}

TEST(SolvePressure, WeightedMeanVanishes) {
    const mr::Mesh2D mesh({1.0, 1.0}, 20, 14);
    const auto r = solve(mesh, mr::PartialSlip{3.0}, manufactured_forces());
    double pn = 0;
    for (double v : r.pressure.p) pn += v * v;
    EXPECT_LE(std::abs(r.pressure.constraint_value), 1e-10 * std::sqrt(pn));
    double wsum = 0;
    for (std::size_t i = 0; i < r.pressure.p.size(); ++i) wsum += r.system.c[static_cast<Eigen::Index>(i)] * r.pressure.p[i];
    EXPECT_NEAR(wsum, r.pressure.constraint_value, 1e-15);
}

TEST(SolvePressure, UnweightedMeanOption) {
    const mr::Mesh2D mesh({1.0, 1.0}, 12, 12);
    const auto mob = mr::build_mobility_field(bump(), kUnit, mr::NoSlip{}, manufactured_forces(),
                                              mr::CoefficientSource::Probe, mesh);
    const auto sys = mr::assemble(mesh, mob, false);
    const auto p = mr::solve_pressure(sys);
    EXPECT_NEAR(mr::integrate(mesh, [&](double x, double y) {
                    const double dx = mesh.dx(), dy = mesh.dy();
                    const auto i = std::min<std::size_t>(static_cast<std::size_t>(x / dx), mesh.nx() - 1);
                    const auto j = std::min<std::size_t>(static_cast<std::size_t>(y / dy), mesh.ny() - 1);
                    const double tx = x / dx - i, ty = y / dy - j;
                    const auto c = mesh.cell_nodes(i, j);
                    return (1 - tx) * (1 - ty) * p.p[c[0]] + tx * (1 - ty) * p.p[c[1]] + tx * ty * p.p[c[2]] +
                           (1 - tx) * ty * p.p[c[3]];
                }),
                0.0, 1e-14);
}

TEST(SolvePressure, NoSlipIgnoresMicrorotationSource) {
    const mr::Mesh2D mesh({1.0, 1.0}, 24, 24);
    mr::BodyForces with_g = manufactured_forces();
    with_g.g = [](double x, double y) { return mr::Vec2{std::exp(x) * y, 3.0 - x * x}; };
    const auto a = solve(mesh, mr::NoSlip{}, manufactured_forces());
    const auto b = solve(mesh, mr::NoSlip{}, with_g);
    double d = 0, n = 0;
    for (std::size_t i = 0; i < a.pressure.p.size(); ++i) {
        d = std::max(d, std::abs(a.pressure.p[i] - b.pressure.p[i]));
        n = std::max(n, std::abs(a.pressure.p[i]));
    }
    EXPECT_LE(d, 1e-10 * n);
}

TEST(SolvePressure, ScalingCovariance) {
    const mr::Mesh2D mesh({1.0, 1.0}, 16, 16);
    mr::BodyForces f = manufactured_forces();
    f.g = [](double x, double y) { return mr::Vec2{x - y, 0.5 + x * y}; };
    const double s = -3.7;
    mr::BodyForces fs;
    fs.f = [&](double x, double y) { return s * f.f(x, y); };
    fs.g = [&](double x, double y) { return s * f.g(x, y); };
    const auto a = solve(mesh, mr::PerfectSlip{}, f);
    const auto b = solve(mesh, mr::PerfectSlip{}, fs);
    double n = 0;
    for (double v : a.pressure.p) n = std::max(n, std::abs(v));
    for (std::size_t i = 0; i < a.pressure.p.size(); ++i) EXPECT_NEAR(b.pressure.p[i], s * a.pressure.p[i], 1e-12 * std::abs(s) * n);
}

TEST(SolvePressure, GalerkinOrthogonality) {
    const mr::Mesh2D mesh({1.0, 1.0}, 10, 10);
    mr::BodyForces f;
    f.f = [](double x, double y) { return mr::Vec2{std::sin(3 * x) + y, x * x}; };
    f.g = [](double x, double) { return mr::Vec2{0.0, x}; };
    const auto r = solve(mesh, mr::PartialSlip{0.5}, f);
    const auto flux = mr::flux_field(mesh, r.pressure, r.mobility);
    EXPECT_LE(flux.divergence_residual, 1e-10 * r.system.b.lpNorm<Eigen::Infinity>());
}

TEST(SolvePressure, DivergenceReportedWhenToleranceUnreachable) {
    const mr::Mesh2D mesh({1.0, 1.0}, 8, 8);
    const auto mob = mr::build_mobility_field(bump(), kUnit, mr::NoSlip{}, manufactured_forces(),
                                              mr::CoefficientSource::Probe, mesh);
    mr::SolverOptions o;
    o.tolerance = 1e-300;
    EXPECT_THROW(mr::solve_pressure(mr::assemble(mesh, mob), o), mr::SolverDivergence);
}

TEST(FluxField, ZeroInputsGiveZeroFlux) {
    const mr::Mesh2D mesh({1.0, 1.0}, 5, 5);
    const auto r = solve(mesh, mr::NoSlip{}, {});
    const auto f = mr::flux_field(mesh, r.pressure, r.mobility);
    for (const auto& u : f.cell_flux) EXPECT_EQ(mr::norm(u), 0.0);
    EXPECT_EQ(f.flux_norm, 0.0);
    EXPECT_EQ(f.relative_boundary_flux(), 0.0);
}

TEST(FluxField, BalancedSourceMeasuredAgainstSourceNorm) {
    // h depending on x only with f = (1, 0): the exact flux vanishes, so the
    // discrete flux is round-off and the source sets the scale
    const mr::Mesh2D mesh({1.0, 1.0}, 8, 8);
    const mr::FilmGeometry geo({1.0, 1.0}, [](double x, double) { return 1.0 + 0.2 * x; }, 0.5, 2.0);
    mr::BodyForces f;
    f.f = [](double, double) { return mr::Vec2{1.0, 0.0}; };
    const auto mob = mr::build_mobility_field(geo, kUnit, mr::NoSlip{}, f, mr::CoefficientSource::Probe, mesh);
    const auto p = mr::solve_pressure(mr::assemble(mesh, mob));
    const auto fl = mr::flux_field(mesh, p, mob);
    EXPECT_LT(fl.flux_norm, 1e-12 * fl.source_norm);
    EXPECT_LE(fl.relative_boundary_flux(), 1e-12);
}

TEST(FluxField, ManufacturedFluxVanishesWithRefinement) {
    std::vector<double> max_flux;
    for (std::size_t n : {16, 32, 64}) {
        const mr::Mesh2D mesh({1.0, 1.0}, n, n);
        const auto r = solve(mesh, mr::NoSlip{}, manufactured_forces());
        const auto f = mr::flux_field(mesh, r.pressure, r.mobility);
        double m = 0;
        for (const auto& u : f.cell_flux) m = std::max(m, mr::norm(u));
        max_flux.push_back(m);
    }
    // cell-center flux is superconvergent on the uniform grid
    EXPECT_GE(max_flux[0] / max_flux[1], 3.0);
    EXPECT_GE(max_flux[1] / max_flux[2], 3.0);
}

TEST(FluxField, GlobalConservation) {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 5; ++i) {
        const double a = u(rng), b = u(rng), c = u(rng);
        mr::BodyForces f;
        f.f = [=](double x, double y) { return mr::Vec2{a + b * y, c * x * x}; };
        f.g = [=](double x, double y) { return mr::Vec2{b * x, a - y}; };
        const mr::Mesh2D mesh({1.5, 1.0}, 18, 12);
        const mr::FilmGeometry g({1.5, 1.0}, mr::height::affine(0.8, 0.3, -0.2), 0.5, 1.5);
        for (const mr::SlipRegime& reg : {mr::SlipRegime{mr::NoSlip{}}, mr::SlipRegime{mr::PerfectSlip{}},
                                          mr::SlipRegime{mr::PartialSlip{2.0}}}) {
            const auto r = solve(mesh, reg, f, mr::CoefficientSource::Probe, g);
            const auto fl = mr::flux_field(mesh, r.pressure, r.mobility);
            EXPECT_LE(std::abs(fl.boundary_flux), 1e-8 * fl.flux_norm);
        }
    }
}
