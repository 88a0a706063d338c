#pragma once

#include "tpump/model.hpp"

#include <array>
#include <functional>
#include <optional>

namespace tp {

struct QuantumState {
    std::shared_ptr<const FockBasis> basis;
    CVec amp;
};

// Direct sum of particle-number sectors 0..n_max over one lattice.
struct SectorSpace {
    LatticeSpec spec;
    std::vector<std::shared_ptr<const FockBasis>> sectors;
    std::vector<int> offset;
    int dim = 0;

    SectorSpace() = default;
    SectorSpace(const LatticeSpec& spec, int n_max);
    int n_max() const { return static_cast<int>(sectors.size()) - 1; }
    const std::vector<std::uint8_t>& state(int i) const;
    int particles(int i) const;
};

struct DensityMatrix {
    std::shared_ptr<const SectorSpace> space;
    CMat rho;
};

struct NoiseModel {
    double t1_eff = 25.0;
    double tphi_eff = 1.0;
    bool relaxation = true;
    bool dephasing = true;

    void validate() const;
};

// Diagonal-in-Fock observables of one frame.
struct Frame {
    double time = 0.0;
    Eigen::MatrixXd populations;  // n_sites x 3 : P(n_j = 0,1,2)
    double com = 0.0;
    Eigen::MatrixXd gamma;        // n_sites x n_sites
    double loschmidt = 1.0;
    double norm = 1.0;            // norm or trace
};

struct ObservableTrace {
    int n_sites = 0;
    int first_site = 1;
    std::vector<Frame> frames;
    double max_norm_drift = 0.0;
    double max_step_drift = 0.0;
    int n_steps = 0;
    double step = 0.0;
    double min_eigenvalue = 0.0;  // Lindblad only
    bool positivity_warning = false;

    std::vector<double> times() const;
    std::vector<double> com() const;
    std::vector<double> loschmidt() const;
    double delta_x() const { return frames.back().com - frames.front().com; }
};

using HBuilder = std::function<HamiltonianMatrix(double t)>;

struct StepOptions {
    int n_frames = 101;
    double max_phase = 0.1;      // max|E| * h
    int n_steps = 0;             // 0: choose from max_phase
    double drift_tol = 1e-10;    // per step
    bool record_gamma = true;
};

QuantumState prepare_site_excitation(std::shared_ptr<const FockBasis> basis, int site_local, int occupancy);
QuantumState prepare_fock_state(std::shared_ptr<const FockBasis> basis, const std::vector<std::uint8_t>& occ);

// v <- exp(-i H h) v by Taylor series of the action
CVec expm_action(const HamiltonianMatrix& h, double dt, const CVec& v, double tol = 1e-16);

struct UnitaryResult {
    ObservableTrace trace;
    QuantumState final_state;
};

UnitaryResult evolve_unitary(const HBuilder& h, const QuantumState& psi0, double t_final, const LatticeSpec& spec,
                             const StepOptions& opt = {});

DensityMatrix density_from_state(std::shared_ptr<const SectorSpace> space, const QuantumState& psi);

struct LindbladResult {
    ObservableTrace trace;
    DensityMatrix final_rho;
};

// h(n, t): Hamiltonian of the n-particle sector
using SectorHBuilder = std::function<HamiltonianMatrix(int n, double t)>;

LindbladResult evolve_lindblad(const SectorHBuilder& h, const DensityMatrix& rho0, const NoiseModel& noise,
                               double t_final, const StepOptions& opt = {});

Eigen::MatrixXd measure_populations(const QuantumState& psi);
Eigen::MatrixXd measure_populations(const DensityMatrix& rho);
double measure_com(const QuantumState& psi, const LatticeSpec& spec);
double measure_com(const DensityMatrix& rho);
Eigen::MatrixXd measure_correlations(const QuantumState& psi);
Eigen::MatrixXd measure_correlations(const DensityMatrix& rho);
Eigen::MatrixXd normalized_correlations(const Eigen::MatrixXd& gamma);
double offdiagonal_gamma_fraction(const Eigen::MatrixXd& gamma);
double loschmidt_echo(const QuantumState& psi, const QuantumState& psi0);

}  // namespace tp
