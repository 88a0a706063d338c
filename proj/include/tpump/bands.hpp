#pragma once

#include "tpump/model.hpp"

#include <functional>

namespace tp {

struct BlochGrid {
    int n_k = 64;
    int n_t = 64;
    double period = 1.0;

    void validate() const;
    double k(int i) const { return -kTwoPi / 2 + kTwoPi * i / n_k; }
    double t(int j) const { return period * j / n_t; }
};

struct BandResult {
    int n_bands = 0;
    int n_k = 0, n_t = 0;
    std::vector<double> energies;   // [(i*n_t + j)*n_bands + m]
    std::vector<double> curvature;  // same layout, plaquette Berry phase
    std::vector<int> chern;
    double gap_min = 0.0;

    double energy(int i, int j, int m) const { return energies[(i * n_t + j) * n_bands + m]; }
    double curv(int i, int j, int m) const { return curvature[(i * n_t + j) * n_bands + m]; }
};

using MatrixField = std::function<CMat(double k, double t)>;

// two-site cell (odd, even), cell momentum k in [-pi, pi)
CMat bloch_hamiltonian_single(double k, double t, const DriveProtocol& drive,
                              Stagger stagger = Stagger::OddPositive);

struct ChernOptions {
    double gap_tol_rel = 1e-6;  // relative to max |E|
};

// Eigenvectors on the grid: vecs[i*n_t + j] has one column per band (or per multiplet member).
struct VectorField {
    int n_k = 0, n_t = 0;
    std::vector<CMat> vecs;
    const CMat& at(int i, int j) const { return vecs[i * n_t + j]; }
};

// plaquette Berry phase sum / 2pi for the columns given (determinant link for a multiplet)
double plaquette_chern(const VectorField& f, std::vector<double>* curvature = nullptr);

BandResult compute_bands(const BlochGrid& grid, const MatrixField& field, const ChernOptions& opt = {});
int chern_number(const BlochGrid& grid, const MatrixField& field, int band_index, const ChernOptions& opt = {});

enum class ComBandLabel { BoundState, Scattering, ResonantIsolated };
const char* label_name(ComBandLabel l);

struct ComBand {
    std::string seed;  // "odd_doublon" / "even_doublon"
    ComBandLabel label = ComBandLabel::Scattering;
    int chern = 0;
    double chern_raw = 0.0;
    double min_overlap = 1.0;
    double min_gap = 0.0;                   // to the nearest other level within its sector
    std::vector<double> energies;           // [i*n_t + j], averaged over the multiplet
    std::vector<double> double_occupancy;   // same layout
    std::vector<double> curvature;          // same layout, multiplet plaquette phase
};

struct ComBandResult {
    int n_cells = 0;
    int n_theta = 0, n_t = 0;
    std::vector<ComBand> bands;
    double gap_min = 0.0;
};

struct ComOptions {
    int substeps = 6;           // tracking substeps between t columns
    double min_overlap = 0.5;   // ContinuityFailure below this
    double gap_tol = 1e-6;      // rad/us
};

// Ring of L cells (2L sites) with a twist on the wrap bond, two particles.
ComBandResult com_band_structure(const LatticeSpec& spec_template, const DriveProtocol& drive, int n_particles,
                                 int n_cells_ring, const BlochGrid& grid, const ComOptions& opt = {});

// Two-particle spectrum of the ring, all eigenvalues, at given twist and time.
Eigen::VectorXd ring_spectrum(const LatticeSpec& spec_template, const DriveProtocol& drive, int n_cells_ring,
                              double theta, double t);

// Interleaved basis |2_1>, |1_1 1_2>, |2_2>, ... , |2_N>
HamiltonianMatrix effective_subspace_hamiltonian(const LatticeSpec& spec, const std::vector<double>& delta,
                                                 double smalldelta, double j_hop);

}  // namespace tp
