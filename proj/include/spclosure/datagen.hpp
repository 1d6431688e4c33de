#pragma once

#include <string>
#include <vector>

#include "spclosure/container.hpp"
#include "spclosure/pde.hpp"
#include "spclosure/random.hpp"

namespace spclosure {

/// Random simulation condition: xi(y) = a1 + (a2/sqrt(M)) *
/// sum_{i=2}^{M} C_{i1} sin(i 2 pi y / a3) + C_{i2} cos(i 2 pi y / a3),
/// with M ~ U{2..8} and |C_ij| ~ U[1/2, 1] with random sign.
struct FourierCondition {
    double a1 = 0.0, a2 = 0.0, a3 = 1.0;
    int M = 2;
    std::vector<double> C;  // M x 2 row-major; rows with index i >= 2 are used

    double coeff(int i, int j) const { return C[static_cast<size_t>(i - 1) * 2 + j]; }
};

FourierCondition sample_condition(double a1, double a2, double a3, Rng& rng);
double eval_condition(const FourierCondition& fc, double y);

/// Reference (DNS) run configuration. Defaults follow the two test cases:
/// Burgers nu=0.01 on [0,2pi], N=1000, dt=2.5e-3; KdV eps=6, mu=1 on [0,32],
/// N=600, dt=1e-4; both to T=10 with states saved every 5e-3.
struct DnsSpec {
    Equation eq = Equation::Burgers;
    double nu = 0.01, epsilon = 6.0, mu = 1.0;
    int N = 1000;
    double domain_start = 0.0, domain_end = 6.283185307179586476925286766559;
    double dt = 2.5e-3, T = 10.0, save_every = 5e-3;

    static DnsSpec burgers_defaults();
    static DnsSpec kdv_defaults();
    double h() const { return (domain_end - domain_start) / N; }
};

enum class BCKind { Periodic, InflowOutflow };

/// One reference simulation plus everything needed to reproduce or continue
/// it: the sampled conditions, the realized forcing, and the trajectory.
struct TrajectoryRecord {
    DnsSpec spec;
    BCKind bc = BCKind::Periodic;
    FourierCondition ic;       // periodic initial condition
    FourierCondition inflow;   // I/O inflow condition xi(t; 2, 1, 2pi)
    FourierCondition forcing;  // I/O steady forcing condition xi(x; 0, 1/2, |O|)
    std::vector<double> forcing_values;  // realized F on the fine grid (I/O)
    Trajectory traj;

    BCSpec bc_spec() const;
    double inflow_at(double t) const;
};

/// Sample conditions for one run and integrate it. With integrate=false the
/// trajectory holds only the initial state (for coarse-only runs that share
/// the sampled conditions with a DNS counterpart).
TrajectoryRecord run_reference(const DnsSpec& spec, BCKind bc, Rng& rng, bool integrate = true);

void write_trajectory(const std::string& path, const TrajectoryRecord& rec);
TrajectoryRecord read_trajectory(const std::string& path);

/// On-disk dataset: traj_NNNN.spnc files plus a manifest with the subsampled
/// snapshot index and the train/validation split.
struct DatasetManifest {
    DnsSpec spec;
    int n_traj = 0;
    std::vector<int> snap_traj;   // trajectory index per snapshot
    std::vector<int> snap_frame;  // saved-frame index per snapshot
    std::vector<char> split;      // 0 train, 1 validation
    uint64_t seed = 0;

    size_t size() const { return snap_traj.size(); }
    static std::string traj_file(const std::string& dir, int idx);
};

/// Run n_periodic + n_io reference simulations, subsample `subsample` of all
/// saved frames uniformly without replacement, split 70/30, and persist
/// everything under `dir`. Returns the manifest. Diverged references abort.
DatasetManifest build_dataset(const std::string& dir, const DnsSpec& spec, int n_periodic,
                              int n_io, double subsample, uint64_t seed);

void write_manifest(const std::string& dir, const DatasetManifest& m);
DatasetManifest read_manifest(const std::string& dir);

/// Materialize the snapshot vectors of one split (0 train, 1 val) by
/// streaming the trajectory files. Optional regrid to n_target cells.
std::vector<std::vector<double>> load_split_snapshots(const std::string& dir,
                                                      const DatasetManifest& m, int split,
                                                      int n_target = 0);

}  // namespace spclosure
