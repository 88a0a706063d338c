#include "tpump/floquet.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace tp;

namespace {

FloquetSpec small(int M, DriveKind kind = DriveKind::BulkPump) {
    FloquetSpec f;
    f.m_range = M;
    f.spec = LatticeSpec::uniform(4, 0.0, 3, Boundary::Open, 1);
    f.drive.kind = kind;
    f.drive.j_hop = mhz(8);
    f.drive.delta0 = mhz(8);
    f.drive.capdelta0 = mhz(20);
    f.drive.period = 0.2;
    f.drive.phase0 = 0.3;
    f.drive.offset_r = 0.2;
    return f;
}

CMat h_of_t(const FloquetSpec& f, double t) {
    InstParams p = instantaneous_params(f.drive, t, f.spec.n_sites);
    return build_single_particle_hamiltonian(f.spec, p.capdelta, p.smalldelta, f.drive.j_hop).to_dense();
}

double circ(double a, double b, double w) {
    double d = std::fmod(std::abs(a - b), w);
    return std::min(d, w - d);
}

}  // namespace

TEST(Fold, RangeAndIdempotence) {
    const double w = 3.0;
    for (double e : {-7.4, -1.5, -1.4999, 0.0, 1.5, 1.50001, 9.9}) {
        double f = fold_quasienergy(e, w);
        EXPECT_GT(f, -w / 2 - 1e-12);
        EXPECT_LE(f, w / 2 + 1e-12);
        EXPECT_NEAR(fold_quasienergy(f, w), f, 1e-12);
        EXPECT_NEAR(std::remainder(f - e, w), 0.0, 1e-9);
    }
}

TEST(FourierBlocks, MatchNumericalFourierIntegral) {
    for (DriveKind k : {DriveKind::BulkPump, DriveKind::EdgePump}) {
        FloquetSpec f = small(2, k);
        FourierBlocks fb = drive_fourier_blocks(f);
        const int n = 400;
        const double T = f.drive.period, w = f.drive.omega();
        CMat h0 = CMat::Zero(4, 4), hp = CMat::Zero(4, 4);
        for (int q = 0; q < n; ++q) {
            double t = T * q / n;
            CMat H = h_of_t(f, t);
            h0 += H / double(n);
            hp += H * std::polar(1.0, -w * t) / double(n);
        }
        EXPECT_LT((fb.h0 - h0).norm(), 1e-9);
        EXPECT_LT((fb.hp - hp).norm(), 1e-9);
    }
}

TEST(Floquet, HermitianWithBlockStructure) {
    FloquetSpec f = small(3);
    HamiltonianMatrix h = build_floquet_hamiltonian(f);
    EXPECT_EQ(h.dim(), f.dim());
    EXPECT_TRUE(is_hermitian(h));
    EXPECT_NEAR(h.dense(0, 0).real() - h.dense(4, 4).real(), -f.drive.omega(), 1e-9);
}

TEST(Floquet, QuasienergiesMatchOnePeriodPropagator) {
    FloquetSpec f = small(24);
    FloquetSpectrum fs = floquet_spectrum(f);
    ASSERT_EQ(fs.quasienergies.size(), 4u);
    // time-ordered product over one period
    const int n = 4000;
    const double T = f.drive.period, dt = T / n;
    CMat U = CMat::Identity(4, 4);
    for (int q = 0; q < n; ++q) {
        Eigen::SelfAdjointEigenSolver<CMat> es(h_of_t(f, (q + 0.5) * dt));
        CVec ph = (es.eigenvalues() * -dt).unaryExpr([](double x) { return std::polar(1.0, x); });
        U = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint() * U;
    }
    Eigen::ComplexEigenSolver<CMat> ces(U);
    const double w = fs.omega;
    for (int i = 0; i < 4; ++i) {
        double eps = -std::arg(ces.eigenvalues()[i]) / T;
        double best = 1e9;
        for (double q : fs.quasienergies) best = std::min(best, circ(q, eps, w));
        EXPECT_LT(best, 1e-3 * w) << eps;
    }
}

TEST(Floquet, StaticDriveGivesFoldedEigenvalues) {
    FloquetSpec f = small(2, DriveKind::Static);
    FloquetSpectrum fs = floquet_spectrum(f);
    Eigen::VectorXd e = Eigen::SelfAdjointEigenSolver<CMat>(h_of_t(f, 0.0), Eigen::EigenvaluesOnly).eigenvalues();
    std::vector<double> ref;
    for (int i = 0; i < 4; ++i) ref.push_back(fold_quasienergy(e[i], fs.omega));
    std::sort(ref.begin(), ref.end());
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(fs.quasienergies[i], ref[i], 1e-9);
}

TEST(Floquet, RejectsZeroCutoff) {
    FloquetSpec f = small(0);
    EXPECT_THROW(build_floquet_hamiltonian(f), Error);
}

TEST(Equivalence, KxKyFormHasSameSpectrum) {
    DriveProtocol d;
    d.j_hop = mhz(8);
    d.delta0 = mhz(8);
    d.capdelta0 = mhz(80);
    d.period = 0.4;
    EquivalenceReport r = verify_bloch_equivalence(d, {64, 64, d.period});
    EXPECT_EQ(r.n_points, 64 * 64);
    EXPECT_LT(r.max_deviation, 1e-10);
    d.offset_r = 0.7;
    EXPECT_LT(verify_bloch_equivalence(d, {16, 16, d.period}, Stagger::EvenPositive).max_deviation, 1e-10);
}

TEST(Equivalence, KxKyFormAtKnownPoint) {
    DriveProtocol d;
    d.j_hop = 1.0;
    d.delta0 = 0.5;
    d.capdelta0 = 2.0;
    d.period = 1.0;
    CMat h = kxky_bloch_hamiltonian(0.0, 0.0, d);
    EXPECT_NEAR(h(0, 0).real(), -2.0, 1e-14);
    EXPECT_NEAR(h(0, 1).real(), 2.0, 1e-14);
    EXPECT_NEAR(h(0, 1).imag(), 0.0, 1e-14);
}
