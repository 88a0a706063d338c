#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace tp {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using SpMat = Eigen::SparseMatrix<cplx>;

constexpr double kTwoPi = 6.283185307179586476925286766559;

// MHz -> rad/us
inline double mhz(double f) { return kTwoPi * f; }
inline double to_mhz(double w) { return w / kTwoPi; }

class Error : public std::runtime_error {
public:
    enum class Kind { InvalidArgument, Config, GapClosure, Continuity, StepTooLarge, Io, Internal };
    Error(Kind k, const std::string& msg) : std::runtime_error(msg), kind_(k) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

[[noreturn]] inline void fail(Error::Kind k, const std::string& msg) { throw Error(k, msg); }

enum class Boundary { Open, Periodic };

// OddPositive: +Delta on odd original sites (the explicit N x N matrix form).
// EvenPositive: (-1)^j Delta, i.e. -Delta on odd sites.
enum class Stagger { OddPositive, EvenPositive };

struct LatticeSpec {
    int n_sites = 2;
    int local_dim = 3;
    double lattice_constant_d = 1.0;
    std::vector<double> interaction_u;  // per site, rad/us
    Boundary boundary = Boundary::Open;
    int first_site = 1;  // original index of local site 0
    Stagger stagger = Stagger::OddPositive;
    double twist = 0.0;  // phase on the wrap bond (N -> 1) for Periodic

    static LatticeSpec uniform(int n, double u, int local_dim = 3, Boundary b = Boundary::Open,
                               int first_site = 1);
    void validate() const;
    int original_index(int a) const { return first_site + a; }
    // sign multiplying Delta on local site a
    double stagger_sign(int a) const;
    // (-1)^j for the bond starting at local site a
    double bond_sign(int a) const { return (original_index(a) % 2 == 0) ? 1.0 : -1.0; }
    int n_bonds() const { return boundary == Boundary::Periodic ? n_sites : n_sites - 1; }
};

enum class DriveKind { BulkPump, EdgePump, Static };

struct DriveProtocol {
    DriveKind kind = DriveKind::BulkPump;
    double j_hop = 0.0;
    double delta0 = 0.0;
    double capdelta0 = 0.0;
    double period = 1.0;
    double phase0 = 0.0;
    double offset_r = 0.0;
    double disorder_w = 0.0;
    std::uint64_t disorder_seed = 0;

    void validate() const;
    double omega() const { return kTwoPi / period; }
};

struct InstParams {
    std::vector<double> capdelta;  // Delta_l(t) per site (before stagger sign)
    double smalldelta = 0.0;
};

// uniform on [-0.5, 0.5], mt19937_64 with an explicit 53-bit mantissa draw
std::vector<double> disorder_xi(std::uint64_t seed, int n);

InstParams instantaneous_params(const DriveProtocol& drive, double t, int site_count);
// same, with xi already drawn
InstParams instantaneous_params(const DriveProtocol& drive, double t, const std::vector<double>& xi);

struct FockBasis {
    int n_sites = 0;
    int local_dim = 3;
    int n_particles = 0;
    std::vector<std::vector<std::uint8_t>> states;
    std::map<std::vector<std::uint8_t>, int> index_of;

    int dim() const { return static_cast<int>(states.size()); }
    int find(const std::vector<std::uint8_t>& s) const;
};

FockBasis build_fock_basis(const LatticeSpec& spec, int n_particles);

struct HamiltonianMatrix {
    bool sparse = false;
    CMat dense;
    SpMat sp;

    int dim() const { return sparse ? static_cast<int>(sp.rows()) : static_cast<int>(dense.rows()); }
    CVec apply(const CVec& v) const { return sparse ? CVec(sp * v) : CVec(dense * v); }
    CMat to_dense() const { return sparse ? CMat(sp) : dense; }
    double row_sum_norm() const;
};

constexpr int kSparseThreshold = 512;

HamiltonianMatrix build_single_particle_hamiltonian(const LatticeSpec& spec, double delta, double smalldelta,
                                                    double j_hop);
HamiltonianMatrix build_single_particle_hamiltonian(const LatticeSpec& spec, const std::vector<double>& delta,
                                                    double smalldelta, double j_hop);

// Pieces of H that do not depend on time; assemble() combines them with drive values.
class ManyBodyOperator {
public:
    ManyBodyOperator(const LatticeSpec& spec, std::shared_ptr<const FockBasis> basis);

    HamiltonianMatrix assemble(const std::vector<double>& delta, double smalldelta, double j_hop) const;
    HamiltonianMatrix assemble(const InstParams& p, double j_hop) const { return assemble(p.capdelta, p.smalldelta, j_hop); }

    const LatticeSpec& spec() const { return spec_; }
    const FockBasis& basis() const { return *basis_; }
    std::shared_ptr<const FockBasis> basis_ptr() const { return basis_; }

private:
    struct Hop {
        int row, col;
        double amp;   // bosonic factor
        double sign;  // (-1)^j of the bond
        cplx phase;
    };
    LatticeSpec spec_;
    std::shared_ptr<const FockBasis> basis_;
    std::vector<Hop> hops_;
    Eigen::MatrixXd occ_;       // dim x n_sites
    Eigen::VectorXd interact_;  // sum_j U_j/2 n_j(n_j-1)
};

HamiltonianMatrix build_many_body_hamiltonian(const LatticeSpec& spec, const FockBasis& basis,
                                              const std::vector<double>& delta, double smalldelta, double j_hop);

bool is_hermitian(const HamiltonianMatrix& h, double rel_tol = 1e-12);

}  // namespace tp
