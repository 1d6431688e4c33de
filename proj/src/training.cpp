#include "spclosure/training.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

#include "spclosure/metrics.hpp"

namespace spclosure {

void adam_step(std::vector<double>& theta, const std::vector<double>& grad, AdamState& st,
               const TrainConfig& cfg) {
    require(theta.size() == grad.size(), "adam_step: gradient length mismatch");
    if (st.m.empty()) {
        st.m.assign(theta.size(), 0.0);
        st.v.assign(theta.size(), 0.0);
    }
    require(st.m.size() == theta.size(), "adam_step: moment length mismatch");
    st.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));
    for (size_t i = 0; i < theta.size(); ++i) {
        st.m[i] = cfg.beta1 * st.m[i] + (1.0 - cfg.beta1) * grad[i];
        st.v[i] = cfg.beta2 * st.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        const double mhat = st.m[i] / bc1;
        const double vhat = st.v[i] / bc2;
        theta[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps_adam);
    }
}

int trainable_rhs_taped(Tape& t, const SPClosure& m, int var, const CoarseContext& ctx,
                        double time) {
    return sp_rhs_taped(t, m, var, ctx, time);
}

int trainable_rhs_taped(Tape& t, const VanillaCNNClosure& m, int var, const CoarseContext& ctx,
                        double time) {
    return vanilla_rhs_taped(t, m, var, ctx, time);
}

namespace {

std::vector<const TrainSample*> pointers(const std::vector<TrainSample>& xs) {
    std::vector<const TrainSample*> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(&x);
    return out;
}

std::vector<const TrainSample*> eligible_for_trajectory(const std::vector<TrainSample>& xs,
                                                        int n_steps) {
    std::vector<const TrainSample*> out;
    for (const auto& x : xs)
        if (static_cast<int>(x.traj_targets.size()) >= n_steps) out.push_back(&x);
    return out;
}

}  // namespace

template <class Model>
TrainResult train_model(Model& model, const TrainingSet& set, const TrainConfig& cfg) {
    TrainResult res;
    require(!set.train.empty(), "train_model: empty training split");
    Rng shuffle_rng(cfg.seed ^ 0x5bd1e995u);

    auto train_ptrs = pointers(set.train);
    auto val_ptrs = pointers(set.val);

    std::vector<double>& theta = model.params.values();
    std::vector<double> grad;

    auto run_phase = [&](const char* phase, int epochs, bool trajectory) {
        std::vector<const TrainSample*> phase_train =
            trajectory ? eligible_for_trajectory(set.train, cfg.traj_steps) : train_ptrs;
        std::vector<const TrainSample*> phase_val =
            trajectory ? eligible_for_trajectory(set.val, cfg.traj_steps) : val_ptrs;
        if (epochs <= 0) return true;
        require(!phase_train.empty(), std::string("train_model: no usable samples for ") + phase);
        if (trajectory) {
            size_t skipped = (set.train.size() - phase_train.size()) +
                             (set.val.size() - phase_val.size());
            if (skipped > 0)
                std::cerr << "train: " << skipped
                          << " snapshots lack " << cfg.traj_steps
                          << " future DNS states and are skipped in trajectory fitting\n";
        }

        AdamState adam;
        double best_val = std::numeric_limits<double>::infinity();
        std::vector<double> best_theta = theta;
        auto eval_loss = [&](const std::vector<const TrainSample*>& xs) {
            if (xs.empty()) return 0.0;
            return trajectory ? trajectory_loss(model, xs, set.contexts, cfg.traj_steps,
                                                cfg.dt_coarse, nullptr)
                              : derivative_loss(model, xs, set.contexts, nullptr);
        };

        for (int epoch = 0; epoch < epochs; ++epoch) {
            std::vector<size_t> order(phase_train.size());
            std::iota(order.begin(), order.end(), 0);
            shuffle_rng.shuffle(order);

            double train_acc = 0.0;
            int n_batches = 0;
            for (size_t start = 0; start < order.size(); start += cfg.batch) {
                std::vector<const TrainSample*> batch;
                for (size_t i = start; i < std::min(order.size(), start + cfg.batch); ++i)
                    batch.push_back(phase_train[order[i]]);
                double loss =
                    trajectory
                        ? trajectory_loss(model, batch, set.contexts, cfg.traj_steps,
                                          cfg.dt_coarse, &grad)
                        : derivative_loss(model, batch, set.contexts, &grad);
                if (!std::isfinite(loss)) return false;
                adam_step(theta, grad, adam, cfg);
                train_acc += loss;
                ++n_batches;
            }
            double val_loss = eval_loss(phase_val);
            if (!std::isfinite(val_loss)) return false;
            res.curve.push_back({epoch, phase, train_acc / std::max(1, n_batches), val_loss});
            if (phase_val.empty() || val_loss < best_val) {
                best_val = val_loss;
                best_theta = theta;
            }
        }
        theta = best_theta;
        return true;
    };

    try {
        if (!run_phase("derivative", cfg.epochs_derivative, false)) {
            res.diverged = true;
            return res;
        }
        if (!run_phase("trajectory", cfg.epochs_trajectory, true)) {
            res.diverged = true;
            return res;
        }
    } catch (const std::runtime_error& e) {
        // Non-finite intermediates inside the tape surface here.
        if (std::string(e.what()).find("non-finite") != std::string::npos) {
            res.diverged = true;
            return res;
        }
        throw;
    }
    return res;
}

template TrainResult train_model<SPClosure>(SPClosure&, const TrainingSet&, const TrainConfig&);
template TrainResult train_model<VanillaCNNClosure>(VanillaCNNClosure&, const TrainingSet&,
                                                    const TrainConfig&);

namespace {

// Shared streaming over the manifest: regrid the snapshot and the DNS-grid
// RHS to the model's fine grid, transform, and collect future targets.
template <class TransformFn>
TrainingSet prepare_common(const std::string& dir, const DatasetManifest& m, int n_model,
                           const TrainConfig& cfg, double rho, const FilterPair& fp,
                           TransformFn&& transform) {
    TrainingSet set;
    const DnsSpec& spec = m.spec;

    const double ratio = cfg.dt_coarse / spec.dt;
    require(std::abs(ratio - std::llround(ratio)) < 1e-9 * std::max(1.0, ratio),
            "prepare_training_set: dt_coarse / dt must be an integer");
    const double fsteps = cfg.dt_coarse / spec.save_every;
    require(std::abs(fsteps - std::llround(fsteps)) < 1e-9 * std::max(1.0, fsteps),
            "prepare_training_set: dt_coarse must be a multiple of save_every");
    const int frames_per_step = static_cast<int>(std::llround(fsteps));

    set.contexts.resize(m.n_traj);
    for (int t = 0; t < m.n_traj; ++t) {
        bool used = false;
        for (size_t i = 0; i < m.size(); ++i)
            if (m.snap_traj[i] == t) {
                used = true;
                break;
            }
        if (!used) continue;
        TrajectoryRecord rec = read_trajectory(DatasetManifest::traj_file(dir, t));

        CoarseContext ctx;
        ctx.periodic = rec.bc == BCKind::Periodic;
        ctx.rho = rho;
        if (!ctx.periodic) {
            FourierCondition fc = rec.inflow;
            ctx.inflow = [fc](double time) { return eval_condition(fc, time); };
            auto f_model = regrid(rec.forcing_values, n_model);
            auto tf = transform(f_model);
            ctx.forcing_u.assign(tf.begin(), tf.begin() + fp.grid.I);
            if (static_cast<int>(tf.size()) == 2 * fp.grid.I)
                ctx.forcing_s.assign(tf.begin() + fp.grid.I, tf.end());
            else
                ctx.forcing_s.assign(fp.grid.I, 0.0);
        }
        set.contexts[t] = ctx;

        PDEConfig cfg_pde;
        cfg_pde.kind = spec.eq;
        cfg_pde.nu = spec.eq == Equation::Burgers ? spec.nu : 0.0;
        cfg_pde.epsilon = spec.epsilon;
        cfg_pde.mu = spec.mu;
        if (!rec.forcing_values.empty()) cfg_pde.forcing = rec.forcing_values;
        BCSpec bc = rec.bc_spec();

        const int n_frames = static_cast<int>(rec.traj.states.size());
        for (size_t i = 0; i < m.size(); ++i) {
            if (m.snap_traj[i] != t) continue;
            const int frame = m.snap_frame[i];
            const auto& u = rec.traj.states[frame];

            TrainSample s;
            s.cond = t;
            s.t0 = rec.traj.times[frame];
            s.a0 = transform(regrid(u, n_model));
            auto f_dns = full_rhs(cfg_pde, u, spec.h(), bc, s.t0);
            s.d_target = transform(regrid(f_dns, n_model));
            for (int step = 1; step <= cfg.traj_steps; ++step) {
                const int f = frame + step * frames_per_step;
                if (f >= n_frames) break;
                s.traj_targets.push_back(transform(regrid(rec.traj.states[f], n_model)));
            }
            (m.split[i] == 0 ? set.train : set.val).push_back(std::move(s));
        }
    }
    return set;
}

}  // namespace

TrainingSet prepare_training_set(const std::string& dir, const DatasetManifest& m,
                                 const StateTransform& st, const TrainConfig& cfg) {
    const double rho = reflection_scalar(st.comp.t, st.comp.J);
    return prepare_common(dir, m, st.fp.grid.N, cfg, rho, st.fp,
                          [&](const std::vector<double>& u) { return to_state(st, u); });
}

TrainingSet prepare_training_set_coarse(const std::string& dir, const DatasetManifest& m,
                                        const FilterPair& fp, const TrainConfig& cfg) {
    return prepare_common(dir, m, fp.grid.N, cfg, 0.0, fp,
                          [&](const std::vector<double>& u) { return apply_filter(fp, u); });
}

namespace {

template <class Model>
double rhs_nrmse_impl(const Model& m, const TrainingSet& set, const std::vector<double>& mass,
                      double domain_len) {
    require(!set.val.empty(), "validation_rhs_nrmse: empty validation split");
    double acc = 0.0;
    for (const auto& s : set.val) {
        Tape tape(&m.params);
        auto rhs = tape.val(trainable_rhs_taped(tape, m, tape.leaf(s.a0), set.contexts[s.cond],
                                                s.t0))
                       .v;
        acc += nrmse(rhs, s.d_target, mass, domain_len);
    }
    return acc / static_cast<double>(set.val.size());
}

}  // namespace

double validation_rhs_nrmse(const SPClosure& m, const TrainingSet& set) {
    std::vector<double> mass(2 * m.setup.grid.I, m.setup.grid.H);
    return rhs_nrmse_impl(m, set, mass, m.setup.grid.length());
}

double validation_rhs_nrmse(const VanillaCNNClosure& m, const TrainingSet& set) {
    std::vector<double> mass(m.setup.grid.I, m.setup.grid.H);
    return rhs_nrmse_impl(m, set, mass, m.setup.grid.length());
}

double fit_smagorinsky(const CoarseSetup& setup, const TrainingSet& set) {
    require(!set.train.empty(), "fit_smagorinsky: empty training split");
    double best_cs = 0.0;
    double best_loss = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 200; ++k) {
        const double cs = 0.01 * k;
        SmagorinskyClosure sm{setup, cs};
        double loss = 0.0;
        for (const auto& s : set.train) {
            auto rhs = smagorinsky_rhs(sm, s.a0, set.contexts[s.cond], s.t0);
            double d = 0.0;
            for (size_t i = 0; i < rhs.size(); ++i)
                d += (rhs[i] - s.d_target[i]) * (rhs[i] - s.d_target[i]);
            loss += d;
        }
        if (loss < best_loss) {
            best_loss = loss;
            best_cs = cs;
        }
    }
    return best_cs;
}

std::vector<SweepRow> hyperparameter_sweep(const CoarseSetup& setup, int kernel, int B,
                                           bool dissipative, const CompressionOperator& comp,
                                           const TrainingSet& set, const TrainConfig& cfg,
                                           bool vanilla) {
    std::vector<SweepRow> rows;
    TrainConfig sweep_cfg = cfg;
    sweep_cfg.epochs_trajectory = 0;  // derivative fitting only
    for (int layers : {0, 1, 2}) {
        for (int channels : {10, 20, 30}) {
            double err;
            if (vanilla) {
                VanillaCNNClosure m =
                    make_vanilla_closure(setup, layers, channels, kernel, cfg.seed);
                train_model(m, set, sweep_cfg);
                err = validation_rhs_nrmse(m, set);
            } else {
                SPClosure m = make_sp_closure(setup, layers, channels, kernel, B, dissipative,
                                              comp, cfg.seed);
                train_model(m, set, sweep_cfg);
                err = validation_rhs_nrmse(m, set);
            }
            rows.push_back({layers, channels, err});
        }
    }
    return rows;
}

}  // namespace spclosure
