#pragma once

#include <string>
#include <vector>

#include "spclosure/closures.hpp"
#include "spclosure/datagen.hpp"

namespace spclosure {

/// Hyperparameters; defaults follow the trained-closure table (Adam with
/// lr 1e-3, betas 0.9/0.999, eps 1e-8, mini-batch 20, 100 derivative epochs
/// then 20 trajectory epochs; 5 steps of dt=0.01 for Burgers, 20 steps of
/// dt=5e-3 for KdV).
struct TrainConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_adam = 1e-8;
    int batch = 20;
    int epochs_derivative = 100;
    int epochs_trajectory = 20;
    int traj_steps = 5;
    double dt_coarse = 0.01;
    uint64_t seed = 0;
};

struct AdamState {
    std::vector<double> m, v;
    long step = 0;
};

/// Bias-corrected Adam update, in place.
void adam_step(std::vector<double>& theta, const std::vector<double>& grad, AdamState& st,
               const TrainConfig& cfg);

/// One transformed snapshot: the model-side state, the transformed true RHS,
/// and the transformed future DNS states for trajectory fitting.
struct TrainSample {
    std::vector<double> a0;
    std::vector<double> d_target;
    std::vector<std::vector<double>> traj_targets;
    double t0 = 0.0;
    int cond = 0;  // index into TrainingSet::contexts
};

struct TrainingSet {
    std::vector<TrainSample> train, val;
    std::vector<CoarseContext> contexts;
};

int trainable_rhs_taped(Tape& t, const SPClosure& m, int var, const CoarseContext& ctx,
                        double time);
int trainable_rhs_taped(Tape& t, const VanillaCNNClosure& m, int var, const CoarseContext& ctx,
                        double time);

/// One taped RK4 step of the closure model.
template <class Model>
int rk4_taped(Tape& t, const Model& m, const CoarseContext& ctx, int a, double t0, double dt) {
    int k1 = trainable_rhs_taped(t, m, a, ctx, t0);
    int k2 = trainable_rhs_taped(t, m, t.add(a, t.scale(k1, 0.5 * dt)), ctx, t0 + 0.5 * dt);
    int k3 = trainable_rhs_taped(t, m, t.add(a, t.scale(k2, 0.5 * dt)), ctx, t0 + 0.5 * dt);
    int k4 = trainable_rhs_taped(t, m, t.add(a, t.scale(k3, dt)), ctx, t0 + dt);
    int s = t.add(t.add(k1, k4), t.scale(t.add(k2, k3), 2.0));
    return t.add(a, t.scale(s, dt / 6.0));
}

/// (1/p) sum_batch ||G(a0) - d_target||_2^2; accumulates the gradient when
/// grad is non-null.
template <class Model>
double derivative_loss(const Model& m, const std::vector<const TrainSample*>& batch,
                       const std::vector<CoarseContext>& ctxs, std::vector<double>* grad) {
    require(!batch.empty(), "derivative_loss: empty batch");
    if (grad) grad->assign(m.params.size(), 0.0);
    std::vector<double> g;
    double acc = 0.0;
    for (const TrainSample* s : batch) {
        Tape tape(&m.params);
        int a = tape.leaf(s->a0);
        int rhs = trainable_rhs_taped(tape, m, a, ctxs[s->cond], s->t0);
        int loss = tape.sumsq(tape.sub(rhs, tape.leaf(s->d_target)));
        acc += tape.val(loss).v[0];
        if (grad) {
            tape.backward(loss, g);
            for (size_t i = 0; i < g.size(); ++i) (*grad)[i] += g[i];
        }
    }
    const double inv_p = 1.0 / static_cast<double>(batch.size());
    if (grad)
        for (double& v : *grad) v *= inv_p;
    return acc * inv_p;
}

/// (1/(p n)) sum_batch sum_{i<=n} || Sbar^i(a0) - T S^(i ratio)(u) ||_2^2.
/// Samples without n future targets must be filtered out by the caller.
template <class Model>
double trajectory_loss(const Model& m, const std::vector<const TrainSample*>& batch,
                       const std::vector<CoarseContext>& ctxs, int n_steps, double dt,
                       std::vector<double>* grad) {
    require(!batch.empty(), "trajectory_loss: empty batch");
    require(n_steps >= 1, "trajectory_loss: need at least one step");
    if (grad) grad->assign(m.params.size(), 0.0);
    std::vector<double> g;
    double acc = 0.0;
    for (const TrainSample* s : batch) {
        require(static_cast<int>(s->traj_targets.size()) >= n_steps,
                "trajectory_loss: sample lacks future DNS states");
        Tape tape(&m.params);
        int a = tape.leaf(s->a0);
        int loss = -1;
        for (int i = 0; i < n_steps; ++i) {
            a = rk4_taped(tape, m, ctxs[s->cond], a, s->t0 + i * dt, dt);
            int term = tape.sumsq(tape.sub(a, tape.leaf(s->traj_targets[i])));
            loss = (loss < 0) ? term : tape.add(loss, term);
        }
        acc += tape.val(loss).v[0];
        if (grad) {
            tape.backward(loss, g);
            for (size_t i = 0; i < g.size(); ++i) (*grad)[i] += g[i];
        }
    }
    const double inv = 1.0 / (static_cast<double>(batch.size()) * n_steps);
    if (grad)
        for (double& v : *grad) v *= inv;
    return acc * inv;
}

struct LossRow {
    int epoch = 0;
    std::string phase;  // "derivative" | "trajectory"
    double train = 0.0;
    double val = 0.0;
};

struct TrainResult {
    std::vector<LossRow> curve;
    bool diverged = false;
};

/// Two-phase training: derivative fitting then trajectory fitting, with
/// mini-batches shuffled from the seed and validation-best parameters
/// restored at the end of each phase. Non-finite losses abort with the
/// partial curve and diverged=true.
template <class Model>
TrainResult train_model(Model& model, const TrainingSet& set, const TrainConfig& cfg);

extern template TrainResult train_model<SPClosure>(SPClosure&, const TrainingSet&,
                                                   const TrainConfig&);
extern template TrainResult train_model<VanillaCNNClosure>(VanillaCNNClosure&, const TrainingSet&,
                                                           const TrainConfig&);

/// Stream a dataset from disk into model-side samples. The snapshots are
/// regridded to the transform's fine grid when the resolutions differ; RHS
/// targets are the DNS-grid RHS projected the same way.
TrainingSet prepare_training_set(const std::string& dir, const DatasetManifest& m,
                                 const StateTransform& st, const TrainConfig& cfg);

/// Same for I-sized models (no SGS half): a0 = W u, targets W f_h(u).
TrainingSet prepare_training_set_coarse(const std::string& dir, const DatasetManifest& m,
                                        const FilterPair& fp, const TrainConfig& cfg);

/// RHS-reproduction NRMSE over the validation split:
/// mean_val sqrt( (1/|Omega|) ||G(a0) - d_target||^2_mass ).
double validation_rhs_nrmse(const SPClosure& m, const TrainingSet& set);
double validation_rhs_nrmse(const VanillaCNNClosure& m, const TrainingSet& set);

/// Scalar grid search for the Smagorinsky constant over [0, 2] step 0.01,
/// minimizing the derivative-fitting loss on the training split.
double fit_smagorinsky(const CoarseSetup& setup, const TrainingSet& set);

struct SweepRow {
    int hidden_layers = 0;
    int channels = 0;
    double val_nrmse = 0.0;
};

/// Derivative-fitting-only sweep over {0,1,2} hidden layers x {10,20,30}
/// channels; reports the validation RHS NRMSE per configuration.
std::vector<SweepRow> hyperparameter_sweep(const CoarseSetup& setup, int kernel, int B,
                                           bool dissipative, const CompressionOperator& comp,
                                           const TrainingSet& set, const TrainConfig& cfg,
                                           bool vanilla = false);

}  // namespace spclosure
