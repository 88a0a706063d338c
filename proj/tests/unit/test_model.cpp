#include "tpump/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace tp;

namespace {

DriveProtocol bulk(double j = 8, double d0 = 8, double D0 = 80, double T = 0.4) {
    DriveProtocol d;
    d.j_hop = mhz(j);
    d.delta0 = mhz(d0);
    d.capdelta0 = mhz(D0);
    d.period = T;
    return d;
}

// bosonic states of n particles on N sites with at most m per site, counted by brute force
int count_states(int N, int n, int m) {
    int total = 0;
    std::vector<int> occ(N, 0);
    std::function<void(int, int)> rec = [&](int site, int left) {
        if (site == N) {
            total += left == 0;
            return;
        }
        for (int k = 0; k <= std::min(m, left); ++k) rec(site + 1, left - k);
    };
    rec(0, n);
    return total;
}

}  // namespace

TEST(FockBasis, DimensionMatchesBruteForceCount) {
    for (int N : {2, 5, 9}) {
        for (int np : {0, 1, 2, 3}) {
            for (int dloc : {2, 3}) {
                if (np > (dloc - 1) * N) continue;
                LatticeSpec s = LatticeSpec::uniform(N, 0.0, dloc);
                EXPECT_EQ(build_fock_basis(s, np).dim(), count_states(N, np, dloc - 1)) << N << ' ' << np << ' ' << dloc;
            }
        }
    }
}

TEST(FockBasis, FindIsInverseOfStates) {
    FockBasis b = build_fock_basis(LatticeSpec::uniform(6, 0.0), 2);
    for (int i = 0; i < b.dim(); ++i) EXPECT_EQ(b.find(b.states[i]), i);
    EXPECT_EQ(b.find({3, 0, 0, 0, 0, 0}), -1);
}

TEST(FockBasis, RejectsTooManyParticles) {
    EXPECT_THROW(build_fock_basis(LatticeSpec::uniform(2, 0.0, 2), 3), Error);
}

TEST(SingleParticle, MatchesHandWrittenMatrix) {
    // sites 1..4: diagonal +D, -D, +D, -D; bonds (1,2): -J-d, (2,3): -J+d, (3,4): -J-d
    LatticeSpec s = LatticeSpec::uniform(4, 0.0);
    const double D = 3.0, d = 0.7, J = 2.0;
    CMat h = build_single_particle_hamiltonian(s, D, d, J).to_dense();
    CMat ref = CMat::Zero(4, 4);
    ref.diagonal() << D, -D, D, -D;
    double bond[3] = {-J - d, -J + d, -J - d};
    for (int a = 0; a < 3; ++a) ref(a, a + 1) = ref(a + 1, a) = bond[a];
    EXPECT_LT((h - ref).norm(), 1e-14);
}

TEST(SingleParticle, SubsetUsesOriginalParity) {
    LatticeSpec full = LatticeSpec::uniform(10, 0.0);
    LatticeSpec sub = LatticeSpec::uniform(4, 0.0, 3, Boundary::Open, 5);
    CMat hf = build_single_particle_hamiltonian(full, 1.3, 0.4, 2.0).to_dense();
    CMat hs = build_single_particle_hamiltonian(sub, 1.3, 0.4, 2.0).to_dense();
    EXPECT_LT((hf.block(4, 4, 4, 4) - hs).norm(), 1e-14);
}

TEST(SingleParticle, EvenPositiveFlipsStagger) {
    LatticeSpec a = LatticeSpec::uniform(4, 0.0);
    LatticeSpec b = a;
    b.stagger = Stagger::EvenPositive;
    CMat ha = build_single_particle_hamiltonian(a, 1.0, 0.0, 0.0).to_dense();
    CMat hb = build_single_particle_hamiltonian(b, 1.0, 0.0, 0.0).to_dense();
    EXPECT_LT((ha + hb).norm(), 1e-14);
}

TEST(ManyBody, OneParticleSectorEqualsSingleParticleMatrix) {
    LatticeSpec s = LatticeSpec::uniform(7, mhz(-190), 3, Boundary::Open, 18);
    auto basis = std::make_shared<const FockBasis>(build_fock_basis(s, 1));
    ManyBodyOperator op(s, basis);
    std::vector<double> D{0.3, 0.5, -0.2, 1.0, 0.0, 0.7, 0.1};
    CMat hm = op.assemble(D, 0.4, 1.1).to_dense();
    CMat h1 = build_single_particle_hamiltonian(s, D, 0.4, 1.1).to_dense();
    // basis order may differ: compare via the particle position
    for (int i = 0; i < basis->dim(); ++i)
        for (int k = 0; k < basis->dim(); ++k) {
            int a = std::find(basis->states[i].begin(), basis->states[i].end(), 1) - basis->states[i].begin();
            int b = std::find(basis->states[k].begin(), basis->states[k].end(), 1) - basis->states[k].begin();
            EXPECT_NEAR(std::abs(hm(i, k) - h1(a, b)), 0.0, 1e-14);
        }
}

TEST(ManyBody, DoublonMatrixElements) {
    const double U = mhz(-190), D = 2.0, d = 0.5, J = 1.5;
    LatticeSpec s = LatticeSpec::uniform(3, U);
    auto basis = std::make_shared<const FockBasis>(build_fock_basis(s, 2));
    ManyBodyOperator op(s, basis);
    CMat h = op.assemble({D, D, D}, d, J).to_dense();
    int d0 = basis->find({2, 0, 0}), d1 = basis->find({0, 2, 0}), p01 = basis->find({1, 1, 0});
    EXPECT_NEAR(h(d0, d0).real(), 2 * D + U, 1e-12);
    EXPECT_NEAR(h(d1, d1).real(), -2 * D + U, 1e-12);
    EXPECT_NEAR(h(p01, p01).real(), 0.0, 1e-12);
    EXPECT_NEAR(h(d0, p01).real(), std::sqrt(2.0) * (-J - d), 1e-12);
    EXPECT_NEAR(h(d1, p01).real(), std::sqrt(2.0) * (-J - d), 1e-12);
}

TEST(ManyBody, HermitianAndSparseMatchesDense) {
    LatticeSpec s = LatticeSpec::uniform(36, mhz(-190));
    auto basis = std::make_shared<const FockBasis>(build_fock_basis(s, 2));
    ASSERT_GT(basis->dim(), kSparseThreshold);
    ManyBodyOperator op(s, basis);
    HamiltonianMatrix h = op.assemble(instantaneous_params(bulk(), 0.13, 36), mhz(8));
    EXPECT_TRUE(h.sparse);
    EXPECT_TRUE(is_hermitian(h));
    CMat dense = h.to_dense();
    EXPECT_LT((dense - dense.adjoint()).norm(), 1e-12);
    CVec v = CVec::Random(basis->dim());
    EXPECT_LT((h.apply(v) - dense * v).norm(), 1e-9);
    EXPECT_GE(h.row_sum_norm() * 1.0000001,
              Eigen::SelfAdjointEigenSolver<CMat>(dense, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().maxCoeff());
}

TEST(ManyBody, TwistOnlyOnWrapBond) {
    LatticeSpec s = LatticeSpec::uniform(4, 0.0, 3, Boundary::Periodic);
    s.twist = 0.9;
    CMat h = build_single_particle_hamiltonian(s, 0.0, 0.0, 1.0).to_dense();
    EXPECT_NEAR(std::abs(h(3, 0) - std::polar(-1.0, 0.9)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(h(0, 1) - cplx(-1.0)), 0.0, 1e-14);
}

TEST(Drive, BulkLawAtKnownTimes) {
    DriveProtocol d = bulk();
    d.offset_r = 0.25;
    InstParams p = instantaneous_params(d, 0.0, 3);
    for (double x : p.capdelta) EXPECT_NEAR(x, mhz(80) * 1.25, 1e-9);
    EXPECT_NEAR(p.smalldelta, 0.0, 1e-12);
    p = instantaneous_params(d, 0.1, 3);
    EXPECT_NEAR(p.capdelta[0], mhz(80) * 0.25, 1e-9);
    EXPECT_NEAR(p.smalldelta, mhz(8), 1e-9);
}

TEST(Drive, EdgeLaw) {
    DriveProtocol d = bulk(12, 12, 0.5, 4.0);
    d.kind = DriveKind::EdgePump;
    InstParams p = instantaneous_params(d, 1.0, 2);
    EXPECT_NEAR(p.capdelta[0], mhz(0.5), 1e-9);
    EXPECT_NEAR(p.smalldelta, 0.0, 1e-9);
    p = instantaneous_params(d, 0.0, 2);
    EXPECT_NEAR(p.smalldelta, -mhz(12), 1e-9);
}

TEST(Drive, RejectsBadPeriod) {
    DriveProtocol d = bulk();
    d.period = 0.0;
    EXPECT_THROW(d.validate(), Error);
    d.period = std::nan("");
    EXPECT_THROW(d.validate(), Error);
}

TEST(Disorder, DeterministicBoundedAndSeedDependent) {
    auto a = disorder_xi(42, 1000), b = disorder_xi(42, 1000), c = disorder_xi(43, 1000);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    double mean = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
    EXPECT_NEAR(mean, 0.0, 0.05);
    for (double x : a) {
        EXPECT_GE(x, -0.5);
        EXPECT_LT(x, 0.5);
    }
}

TEST(Disorder, AddsWxiToBulkDelta) {
    DriveProtocol d = bulk();
    d.disorder_w = 2.0;
    d.disorder_seed = 7;
    auto xi = disorder_xi(7, 5);
    InstParams p = instantaneous_params(d, 0.0, 5);
    for (int l = 0; l < 5; ++l) EXPECT_NEAR(p.capdelta[l], mhz(80) * (1.0 + 2.0 * xi[l]), 1e-9);
}

TEST(Lattice, Validation) {
    LatticeSpec s = LatticeSpec::uniform(1, 0.0);
    EXPECT_THROW(s.validate(), Error);
    s = LatticeSpec::uniform(4, 0.0, 4);
    EXPECT_THROW(s.validate(), Error);
}
