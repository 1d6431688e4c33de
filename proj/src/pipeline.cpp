#include "spclosure/pipeline.hpp"

#include <cmath>

#include "spclosure/metrics.hpp"

namespace spclosure {

GridPair resolve_model_grid(const DnsSpec& spec, int I) {
    require(I >= 1, "resolve_model_grid: I must be >= 1");
    int J = static_cast<int>(std::llround(static_cast<double>(spec.N) / I));
    if (J < 1) J = 1;
    return make_grid_pair(spec.domain_start, spec.domain_end, I, J);
}

CoarseSetup setup_from(const DnsSpec& spec, const GridPair& grid) {
    CoarseSetup s;
    s.eq = spec.eq;
    s.nu = spec.eq == Equation::Burgers ? spec.nu : 0.0;
    s.epsilon = spec.epsilon;
    s.mu = spec.mu;
    s.grid = grid;
    return s;
}

std::vector<std::vector<double>> filtered_series(const TrajectoryRecord& rec,
                                                 const FilterPair& fp, int stride) {
    std::vector<std::vector<double>> out;
    for (size_t f = 0; f < rec.traj.states.size(); f += stride)
        out.push_back(apply_filter(fp, regrid(rec.traj.states[f], fp.grid.N)));
    return out;
}

CoarseContext context_from(const TrajectoryRecord& rec, const FilterPair& fp,
                           const CompressionOperator* comp) {
    CoarseContext ctx;
    ctx.periodic = rec.bc == BCKind::Periodic;
    if (comp) ctx.rho = reflection_scalar(comp->t, comp->J);
    if (!ctx.periodic) {
        FourierCondition fc = rec.inflow;
        ctx.inflow = [fc](double t) { return eval_condition(fc, t); };
        auto f_model = regrid(rec.forcing_values, fp.grid.N);
        if (comp) {
            StateTransform st{fp, *comp};
            auto tf = to_state(st, f_model);
            ctx.forcing_u.assign(tf.begin(), tf.begin() + fp.grid.I);
            ctx.forcing_s.assign(tf.begin() + fp.grid.I, tf.end());
        } else {
            ctx.forcing_u = apply_filter(fp, f_model);
        }
    }
    return ctx;
}

CompressionOperator fit_compression_from_dataset(const std::string& dir,
                                                 const DatasetManifest& m, const FilterPair& fp) {
    auto snaps = load_split_snapshots(dir, m, 0, fp.grid.N);
    return fit_compression(snaps, fp);
}

double dataset_compression_loss(const std::string& dir, const DatasetManifest& m, int split,
                                const CompressionOperator& comp, const FilterPair& fp) {
    auto snaps = load_split_snapshots(dir, m, split, fp.grid.N);
    return compression_loss(comp, snaps, fp);
}

std::vector<double> initial_state(const TrajectoryRecord& rec, const FilterPair& fp,
                                  const CompressionOperator* comp, bool s_init_true) {
    require(!rec.traj.states.empty(), "initial_state: record has no states");
    auto u0 = regrid(rec.traj.states.front(), fp.grid.N);
    if (!comp) return apply_filter(fp, u0);
    StateTransform st{fp, *comp};
    auto a0 = to_state(st, u0);
    if (!s_init_true)
        for (int i = fp.grid.I; i < 2 * fp.grid.I; ++i) a0[i] = 0.0;
    return a0;
}

Trajectory run_closure(const AnyClosure& model, const TrajectoryRecord& rec, double dt, double T,
                       double save_every, bool s_init_true) {
    const CoarseSetup& setup = closure_setup(model);
    FilterPair fp = make_filter_pair(setup.grid);
    const CompressionOperator* comp = nullptr;
    if (const auto* sp = std::get_if<SPClosure>(&model)) comp = &sp->comp;
    CoarseContext ctx = context_from(rec, fp, comp);
    auto state0 = initial_state(rec, fp, comp, s_init_true);
    return simulate_closure(model, ctx, state0, dt, T, save_every);
}

std::vector<double> nrmse_series(const Trajectory& run, const TrajectoryRecord& dns,
                                 const FilterPair& fp) {
    std::vector<double> out;
    const GridPair& g = fp.grid;
    for (size_t f = 0; f < run.states.size(); ++f) {
        const double t = run.times[f];
        const auto frame = static_cast<size_t>(std::llround(t / dns.spec.save_every));
        require(frame < dns.traj.states.size(), "nrmse_series: run extends past the DNS");
        auto ref = apply_filter(fp, regrid(dns.traj.states[frame], g.N));
        std::vector<double> ubar(run.states[f].begin(), run.states[f].begin() + g.I);
        out.push_back(nrmse(ubar, ref, g.Omega, g.length()));
    }
    return out;
}

}  // namespace spclosure
