#pragma once

#include <string>
#include <vector>

#include "spclosure/closures.hpp"
#include "spclosure/datagen.hpp"
#include "spclosure/training.hpp"

namespace spclosure {

/// Coarse model geometry for a requested I against a DNS resolution N:
/// J = round(N/I) (at least 1), model fine grid N' = I*J. Snapshots are
/// projected from N to N' when they differ.
GridPair resolve_model_grid(const DnsSpec& spec, int I);

CoarseSetup setup_from(const DnsSpec& spec, const GridPair& grid);

/// Filter (with regrid when needed) every saved DNS state onto the coarse
/// grid, keeping every `stride`-th frame.
std::vector<std::vector<double>> filtered_series(const TrajectoryRecord& rec,
                                                 const FilterPair& fp, int stride = 1);

/// Per-run context from a trajectory record's conditions. Pass the
/// compression for SP models (rho + SGS forcing half); null for I-dof models.
CoarseContext context_from(const TrajectoryRecord& rec, const FilterPair& fp,
                           const CompressionOperator* comp);

/// Fit the SGS compression on the training split of a dataset, streaming
/// trajectory files and regridding to the transform grid.
CompressionOperator fit_compression_from_dataset(const std::string& dir,
                                                 const DatasetManifest& m, const FilterPair& fp);

/// Compression loss over one split of a dataset.
double dataset_compression_loss(const std::string& dir, const DatasetManifest& m, int split,
                                const CompressionOperator& comp, const FilterPair& fp);

/// Initial coarse state from a record's t=0 fine state: W u0, or [W u0; s0]
/// with s0 from the transform (s_init=true) or zero (SP0 variant).
std::vector<double> initial_state(const TrajectoryRecord& rec, const FilterPair& fp,
                                  const CompressionOperator* comp, bool s_init_true);

/// March one closure model from a record's conditions.
Trajectory run_closure(const AnyClosure& model, const TrajectoryRecord& rec, double dt, double T,
                       double save_every, bool s_init_true = true);

/// NRMSE series of a coarse run against the filtered DNS at matching times
/// (the run's resolved half is its first I entries).
std::vector<double> nrmse_series(const Trajectory& run, const TrajectoryRecord& dns,
                                 const FilterPair& fp);

}  // namespace spclosure
