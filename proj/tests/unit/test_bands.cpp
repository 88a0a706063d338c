#include "tpump/bands.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace tp;

namespace {

DriveProtocol fig1() {
    DriveProtocol d;
    d.j_hop = mhz(8);
    d.delta0 = mhz(8);
    d.capdelta0 = mhz(80);
    d.period = 0.4;
    return d;
}

MatrixField field(const DriveProtocol& d, Stagger s = Stagger::OddPositive) {
    return [d, s](double k, double t) { return bloch_hamiltonian_single(k, t, d, s); };
}

}  // namespace

TEST(Bloch, SpectrumMatchesAnalyticDispersion) {
    DriveProtocol d = fig1();
    for (double k : {-3.0, -1.0, 0.0, 0.5, 2.9})
        for (double t : {0.0, 0.05, 0.17, 0.3}) {
            InstParams p = instantaneous_params(d, t, 2);
            double D = p.capdelta[0], dl = p.smalldelta, J = d.j_hop;
            double f2 = 2 * J * J + 2 * dl * dl + 2 * (J * J - dl * dl) * std::cos(k);
            double e = std::sqrt(D * D + f2);
            Eigen::Vector2d ev =
                Eigen::SelfAdjointEigenSolver<CMat>(bloch_hamiltonian_single(k, t, d), Eigen::EigenvaluesOnly).eigenvalues();
            EXPECT_NEAR(ev[0], -e, 1e-9);
            EXPECT_NEAR(ev[1], e, 1e-9);
        }
}

TEST(Bloch, MatchesRingSpectrumOfSingleParticle) {
    // a ring of L cells has single-particle energies at k = 2 pi m / L
    DriveProtocol d = fig1();
    const int L = 5;
    LatticeSpec s = LatticeSpec::uniform(2 * L, 0.0, 3, Boundary::Periodic);
    InstParams p = instantaneous_params(d, 0.07, 2 * L);
    Eigen::VectorXd ring = Eigen::SelfAdjointEigenSolver<CMat>(
                               build_single_particle_hamiltonian(s, p.capdelta, p.smalldelta, d.j_hop).to_dense(),
                               Eigen::EigenvaluesOnly)
                               .eigenvalues();
    std::vector<double> bl;
    for (int m = 0; m < L; ++m) {
        Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<CMat>(bloch_hamiltonian_single(kTwoPi * m / L, 0.07, d),
                                                                 Eigen::EigenvaluesOnly)
                                 .eigenvalues();
        bl.push_back(ev[0]);
        bl.push_back(ev[1]);
    }
    std::sort(bl.begin(), bl.end());
    for (int i = 0; i < 2 * L; ++i) EXPECT_NEAR(ring[i], bl[i], 1e-9);
}

TEST(Chern, Fig1BandsUnderBothStaggerConventions) {
    DriveProtocol d = fig1();
    BandResult odd = compute_bands({64, 64, d.period}, field(d));
    BandResult even = compute_bands({64, 64, d.period}, field(d, Stagger::EvenPositive));
    EXPECT_EQ(odd.chern, (std::vector<int>{-1, 1}));
    EXPECT_EQ(even.chern, (std::vector<int>{1, -1}));
}

TEST(Chern, SumOfBandsIsZeroAndCurvatureSumsToChern) {
    DriveProtocol d = fig1();
    BandResult r = compute_bands({32, 40, d.period}, field(d));
    EXPECT_EQ(r.chern[0] + r.chern[1], 0);
    double s = 0.0;
    for (int i = 0; i < r.n_k; ++i)
        for (int j = 0; j < r.n_t; ++j) s += r.curv(i, j, 0);
    EXPECT_NEAR(s / kTwoPi, r.chern[0], 1e-9);
}

TEST(Chern, GridRefinementInvariant) {
    DriveProtocol d = fig1();
    int c = chern_number({64, 64, d.period}, field(d), 0);
    for (int n : {24, 48, 128}) EXPECT_EQ(chern_number({n, n, d.period}, field(d), 0), c) << n;
}

TEST(Chern, LargeOffsetIsTrivial) {
    DriveProtocol d = fig1();
    d.offset_r = 2.0;
    EXPECT_EQ(chern_number({48, 48, d.period}, field(d), 0), 0);
}

TEST(Chern, GaugeInvariant) {
    DriveProtocol d = fig1();
    VectorField f;
    f.n_k = 40;
    f.n_t = 40;
    BlochGrid g{40, 40, d.period};
    std::srand(3);
    for (int i = 0; i < f.n_k; ++i)
        for (int j = 0; j < f.n_t; ++j) {
            Eigen::SelfAdjointEigenSolver<CMat> es(bloch_hamiltonian_single(g.k(i), g.t(j), d));
            f.vecs.push_back(es.eigenvectors().col(0) * std::polar(1.0, 6.28 * std::rand() / RAND_MAX));
        }
    EXPECT_NEAR(plaquette_chern(f), -1.0, 1e-9);
}

TEST(Chern, GapClosureIsReported) {
    DriveProtocol d = fig1();
    d.delta0 = 0.0;  // Delta(t) and delta vanish together at k = pi
    try {
        compute_bands({64, 64, d.period}, field(d));
        FAIL() << "expected gap closure";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), Error::Kind::GapClosure);
    }
}

TEST(Chern, GapMinMatchesAnalyticMinimum) {
    // minimum over (k, t) is at k = pi: 2 sqrt(Delta^2 + 4 delta^2), smallest where Delta = 0
    DriveProtocol d = fig1();
    BandResult r = compute_bands({64, 64, d.period}, field(d));
    EXPECT_NEAR(to_mhz(r.gap_min), 2 * 2 * 8.0, 1e-6);
}

TEST(Grid, Validation) {
    EXPECT_THROW((BlochGrid{2, 64, 1.0}).validate(), Error);
    EXPECT_THROW((BlochGrid{64, 64, -1.0}).validate(), Error);
}

TEST(Effective, StructureAndHermiticity) {
    LatticeSpec s = LatticeSpec::uniform(6, mhz(-190), 3, Boundary::Open, 19);
    HamiltonianMatrix h = effective_subspace_hamiltonian(s, std::vector<double>(6, 0.3), 0.2, 1.0);
    EXPECT_EQ(h.dim(), 11);
    EXPECT_TRUE(is_hermitian(h));
    // site 19 is odd: +2 Delta + U
    EXPECT_NEAR(h.dense(0, 0).real(), 0.6 + mhz(-190), 1e-12);
    EXPECT_NEAR(h.dense(2, 2).real(), -0.6 + mhz(-190), 1e-12);
    EXPECT_NEAR(h.dense(1, 1).real(), 0.0, 1e-12);
    EXPECT_NEAR(h.dense(0, 1).real(), std::sqrt(2.0) * (-1.0 - 0.2), 1e-12);
}

TEST(Effective, LowSpectrumTracksFullModel) {
    DriveProtocol d;
    d.kind = DriveKind::EdgePump;
    d.j_hop = mhz(12);
    d.delta0 = mhz(12);
    d.capdelta0 = mhz(0.5);
    d.period = 4.0;
    LatticeSpec s = LatticeSpec::uniform(6, mhz(-190), 3, Boundary::Open, 19);
    auto basis = std::make_shared<const FockBasis>(build_fock_basis(s, 2));
    ManyBodyOperator op(s, basis);
    for (double t : {0.0, 0.7, 1.9, 3.3}) {
        InstParams p = instantaneous_params(d, t, 6);
        Eigen::VectorXd full =
            Eigen::SelfAdjointEigenSolver<CMat>(op.assemble(p, d.j_hop).to_dense(), Eigen::EigenvaluesOnly).eigenvalues();
        Eigen::VectorXd eff = Eigen::SelfAdjointEigenSolver<CMat>(
                                  effective_subspace_hamiltonian(s, p.capdelta, p.smalldelta, d.j_hop).dense,
                                  Eigen::EigenvaluesOnly)
                                  .eigenvalues();
        for (int m = 0; m < 6; ++m) EXPECT_LT(std::abs(full[m] - eff[m]), mhz(0.5));
    }
}

TEST(Ring, SpectrumPeriodicInTwist) {
    DriveProtocol d = fig1();
    d.capdelta0 = mhz(8);
    d.j_hop = mhz(12);
    d.delta0 = mhz(12);
    LatticeSpec s = LatticeSpec::uniform(2, mhz(-190));
    Eigen::VectorXd a = ring_spectrum(s, d, 3, 0.0, 0.11);
    Eigen::VectorXd b = ring_spectrum(s, d, 3, kTwoPi, 0.11);
    Eigen::VectorXd c = ring_spectrum(s, d, 3, 1.0, 0.11);
    EXPECT_EQ(a.size(), 21);
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_GT((a - c).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Com, RejectsDisorder) {
    DriveProtocol d = fig1();
    d.disorder_w = 1.0;
    EXPECT_THROW(com_band_structure(LatticeSpec::uniform(2, mhz(-190)), d, 2, 3, {8, 8, d.period}), Error);
}
