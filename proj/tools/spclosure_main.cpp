// Command-line driver: dataset generation, SGS compression, closure training,
// coarse simulation, evaluation, spectra, property verification, and the
// hyperparameter sweep. Configuration is a flat key=value file plus
// command-line overrides; every command is reproducible from (config, seed).

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "spclosure/checkpoint.hpp"
#include "spclosure/metrics.hpp"
#include "spclosure/pipeline.hpp"
#include "spclosure/verify.hpp"

using namespace spclosure;

namespace {

class Config {
public:
    void load_file(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw std::runtime_error("config: cannot open '" + path + "'");
        std::string line;
        while (std::getline(f, line)) parse_line(line);
    }

    void parse_line(const std::string& raw) {
        auto line = trim(raw);
        if (line.empty() || line[0] == '#') return;
        auto pos = line.find('=');
        if (pos == std::string::npos)
            throw std::runtime_error("config: expected key=value, got '" + line + "'");
        kv_[trim(line.substr(0, pos))] = trim(line.substr(pos + 1));
    }

    bool has(const std::string& k) const { return kv_.count(k) > 0; }
    std::string str(const std::string& k, const std::string& def = "") const {
        auto it = kv_.find(k);
        return it == kv_.end() ? def : it->second;
    }
    double num(const std::string& k, double def) const {
        auto it = kv_.find(k);
        return it == kv_.end() ? def : std::stod(it->second);
    }
    long integer(const std::string& k, long def) const {
        auto it = kv_.find(k);
        return it == kv_.end() ? def : std::stol(it->second);
    }
    const std::map<std::string, std::string>& all() const { return kv_; }

private:
    static std::string trim(const std::string& s) {
        auto a = s.find_first_not_of(" \t\r\n");
        auto b = s.find_last_not_of(" \t\r\n");
        return a == std::string::npos ? "" : s.substr(a, b - a + 1);
    }
    std::map<std::string, std::string> kv_;
};

Equation parse_equation(const std::string& s) {
    if (s == "burgers") return Equation::Burgers;
    if (s == "kdv") return Equation::KdV;
    throw std::runtime_error("unknown equation '" + s + "' (burgers|kdv)");
}

DnsSpec spec_from_config(const Config& cfg) {
    DnsSpec spec = parse_equation(cfg.str("equation", "burgers")) == Equation::KdV
                       ? DnsSpec::kdv_defaults()
                       : DnsSpec::burgers_defaults();
    spec.nu = cfg.num("nu", spec.nu);
    spec.epsilon = cfg.num("epsilon", spec.epsilon);
    spec.mu = cfg.num("mu", spec.mu);
    spec.N = static_cast<int>(cfg.integer("N", spec.N));
    spec.domain_start = cfg.num("domain_start", spec.domain_start);
    spec.domain_end = cfg.num("domain_end", spec.domain_end);
    spec.dt = cfg.num("dt", spec.dt);
    spec.T = cfg.num("T", spec.T);
    spec.save_every = cfg.num("save_every", spec.save_every);
    return spec;
}

int resolve_i(const Config& cfg, const std::string& model) {
    if (cfg.has("I")) return static_cast<int>(cfg.integer("I", 0));
    if (cfg.has("dof")) {
        int dof = static_cast<int>(cfg.integer("dof", 0));
        return model == "sp" ? dof / 2 : dof;  // DOF = 2I for SP, I otherwise
    }
    throw std::runtime_error("config: need I or dof");
}

double default_dt_coarse(Equation eq) { return eq == Equation::Burgers ? 0.01 : 5e-3; }
int default_traj_steps(Equation eq) { return eq == Equation::Burgers ? 5 : 20; }

TrainConfig train_config(const Config& cfg, Equation eq) {
    TrainConfig tc;
    tc.lr = cfg.num("lr", tc.lr);
    tc.beta1 = cfg.num("beta1", tc.beta1);
    tc.beta2 = cfg.num("beta2", tc.beta2);
    tc.eps_adam = cfg.num("eps_adam", tc.eps_adam);
    tc.batch = static_cast<int>(cfg.integer("batch", tc.batch));
    tc.epochs_derivative = static_cast<int>(cfg.integer("epochs_derivative", 100));
    tc.epochs_trajectory = static_cast<int>(cfg.integer("epochs_trajectory", 20));
    tc.traj_steps = static_cast<int>(cfg.integer("traj_steps", default_traj_steps(eq)));
    tc.dt_coarse = cfg.num("dt_coarse", default_dt_coarse(eq));
    tc.seed = static_cast<uint64_t>(cfg.integer("seed", 0));
    return tc;
}

void echo_config(ArrayContainer& c, const Config& cfg) {
    for (const auto& [k, v] : cfg.all()) c.set_meta("config." + k, v);
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::string>& rows) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << header << "\n";
    for (const auto& r : rows) f << r << "\n";
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

// ---------------------------------------------------------------------------

int cmd_datagen(const Config& cfg) {
    DnsSpec spec = spec_from_config(cfg);
    const bool kdv = spec.eq == Equation::KdV;
    int n_periodic = static_cast<int>(cfg.integer("n_periodic", kdv ? 100 : 50));
    int n_io = static_cast<int>(cfg.integer("n_io", kdv ? 0 : 50));
    double subsample = cfg.num("subsample", 0.1);
    uint64_t seed = static_cast<uint64_t>(cfg.integer("seed", 0));
    std::string out = cfg.str("out", "dataset");

    auto m = build_dataset(out, spec, n_periodic, n_io, subsample, seed);
    std::cout << "dataset: " << out << "  trajectories=" << m.n_traj
              << "  snapshots=" << m.size() << "\n";
    return 0;
}

int cmd_compress(const Config& cfg) {
    std::string dir = cfg.str("dataset", "dataset");
    auto m = read_manifest(dir);
    int I = resolve_i(cfg, "sp");
    auto grid = resolve_model_grid(m.spec, I);
    auto fp = make_filter_pair(grid);

    auto comp = fit_compression_from_dataset(dir, m, fp);
    double ls_train = dataset_compression_loss(dir, m, 0, comp, fp);
    double ls_val = dataset_compression_loss(dir, m, 1, comp, fp);

    std::string out = cfg.str("out", "compression.spnc");
    ArrayContainer c;
    c.set_meta("I", static_cast<int64_t>(grid.I));
    c.set_meta("J", static_cast<int64_t>(grid.J));
    c.set_meta("loss_train", ls_train);
    c.set_meta("loss_val", ls_val);
    echo_config(c, cfg);
    c.add_vector("t_vec", comp.t);
    c.add_vector("t_hat", comp.t_hat);
    c.save(out);
    std::cout << "compression: I=" << grid.I << " J=" << grid.J << "  L_s(train)=" << ls_train
              << "  L_s(val)=" << ls_val << "  -> " << out << "\n";
    return 0;
}

int cmd_train(const Config& cfg) {
    std::string dir = cfg.str("dataset", "dataset");
    auto m = read_manifest(dir);
    std::string model_kind = cfg.str("model", "sp");
    int I = resolve_i(cfg, model_kind);
    auto grid = resolve_model_grid(m.spec, I);
    auto fp = make_filter_pair(grid);
    auto setup = setup_from(m.spec, grid);
    TrainConfig tc = train_config(cfg, m.spec.eq);

    const bool kdv = m.spec.eq == Equation::KdV;
    int hidden_layers = static_cast<int>(cfg.integer("hidden_layers", 2));
    int channels = static_cast<int>(
        cfg.integer("channels", model_kind == "sp" ? (kdv ? 30 : 20) : 20));
    int kernel = static_cast<int>(cfg.integer("kernel", model_kind == "sp" ? 5 : 7));
    int B = static_cast<int>(cfg.integer("B", kdv ? 2 : 1));

    std::string out_dir = cfg.str("out", ".");
    std::filesystem::create_directories(out_dir);
    std::string ckpt = out_dir + "/checkpoint.spnc";
    std::string losses = out_dir + "/losses.csv";

    TrainResult result;
    if (model_kind == "sp") {
        auto comp = fit_compression_from_dataset(dir, m, fp);
        StateTransform st{fp, comp};
        auto set = prepare_training_set(dir, m, st, tc);
        auto model = make_sp_closure(setup, hidden_layers, channels, kernel, B, !kdv, comp,
                                     tc.seed);
        result = train_model(model, set, tc);
        save_checkpoint(ckpt, model);
    } else if (model_kind == "cnn") {
        auto set = prepare_training_set_coarse(dir, m, fp, tc);
        auto model = make_vanilla_closure(setup, hidden_layers, channels, kernel, tc.seed);
        result = train_model(model, set, tc);
        save_checkpoint(ckpt, model);
    } else if (model_kind == "sm") {
        auto set = prepare_training_set_coarse(dir, m, fp, tc);
        double cs = fit_smagorinsky(setup, set);
        ArrayContainer c;
        c.set_meta("kind", "sm");
        c.set_meta("cs", cs);
        c.set_meta("I", static_cast<int64_t>(grid.I));
        echo_config(c, cfg);
        c.save(ckpt);
        std::cout << "smagorinsky: C_s=" << cs << "  -> " << ckpt << "\n";
        return 0;
    } else {
        throw std::runtime_error("train: model must be sp|cnn|sm");
    }

    std::vector<std::string> rows;
    for (const auto& r : result.curve)
        rows.push_back(std::to_string(r.epoch) + "," + r.phase + "," + fmt(r.train) + "," +
                       fmt(r.val));
    write_csv(losses, "epoch,phase,train,val", rows);
    std::cout << (result.diverged ? "training DIVERGED (partial artifacts kept)\n" : "")
              << "checkpoint: " << ckpt << "\nlosses: " << losses << "\n";
    return result.diverged ? 1 : 0;
}

int cmd_simulate(const Config& cfg) {
    DnsSpec spec = spec_from_config(cfg);
    BCKind bc = cfg.str("bc", "periodic") == "io" ? BCKind::InflowOutflow : BCKind::Periodic;
    uint64_t cond_seed = static_cast<uint64_t>(cfg.integer("condition_seed", 1));
    std::string model_kind = cfg.str("model", "dns");
    std::string out = cfg.str("out", "run.spnc");
    const int timing_runs = static_cast<int>(cfg.integer("timing_runs", 0));

    Rng rng(cond_seed);
    if (model_kind == "dns") {
        auto rec = run_reference(spec, bc, rng);
        write_trajectory(out, rec);
        if (timing_runs > 0) {
            // Median wall time over repeats. Opt-in: the metadata makes the
            // output bytes timing-dependent.
            std::vector<double> walls{rec.traj.wall_seconds};
            for (int r = 1; r < timing_runs; ++r) {
                Rng rr(cond_seed);
                walls.push_back(run_reference(spec, bc, rr).traj.wall_seconds);
            }
            std::sort(walls.begin(), walls.end());
            ArrayContainer c = ArrayContainer::load(out);
            c.set_meta("wall_seconds_median", walls[walls.size() / 2]);
            c.save(out);
            std::cout << "wall_seconds_median=" << walls[walls.size() / 2] << "\n";
        }
        std::cout << "dns run: " << out << (rec.traj.stable ? "" : " (DIVERGED)") << "\n";
        return rec.traj.stable ? 0 : 1;
    }

    // Coarse closure run sharing the DNS condition sampling.
    auto rec = run_reference(spec, bc, rng, /*integrate=*/false);
    double dt = cfg.num("dt_coarse", default_dt_coarse(spec.eq));
    double T = cfg.num("T_run", spec.T);
    double save_every = cfg.num("save_run", dt);
    bool s_init_true = cfg.str("s_init", "true") != "zero";

    AnyClosure model = [&]() -> AnyClosure {
        if (model_kind == "nc") {
            int I = resolve_i(cfg, "nc");
            return NoClosure{setup_from(spec, resolve_model_grid(spec, I))};
        }
        if (model_kind == "sm") {
            int I = resolve_i(cfg, "sm");
            return SmagorinskyClosure{setup_from(spec, resolve_model_grid(spec, I)),
                                      cfg.num("cs", 0.2)};
        }
        CheckpointExpect expect;
        expect.eq = spec.eq;
        if (cfg.has("I")) expect.I = static_cast<int>(cfg.integer("I", 0));
        auto loaded = load_checkpoint(cfg.str("checkpoint", "checkpoint.spnc"), expect);
        if (model_kind == "sp")
            require(std::holds_alternative<SPClosure>(loaded), "simulate: checkpoint is not sp");
        if (model_kind == "cnn")
            require(std::holds_alternative<VanillaCNNClosure>(loaded),
                    "simulate: checkpoint is not cnn");
        return loaded;
    }();

    auto traj = run_closure(model, rec, dt, T, save_every, s_init_true);
    double wall_median = -1.0;
    if (timing_runs > 0) {
        std::vector<double> walls{traj.wall_seconds};
        for (int r = 1; r < timing_runs; ++r)
            walls.push_back(run_closure(model, rec, dt, T, save_every, s_init_true).wall_seconds);
        std::sort(walls.begin(), walls.end());
        wall_median = walls[walls.size() / 2];
        std::cout << "wall_seconds_median=" << wall_median << "\n";
    }

    // Persist the coarse run with its conditions so evaluate can rebuild
    // everything.
    const CoarseSetup& setup = closure_setup(model);
    TrajectoryRecord out_rec = rec;
    out_rec.spec.N = closure_state_size(model);
    out_rec.spec.save_every = save_every;
    out_rec.spec.T = T;
    out_rec.spec.dt = dt;
    out_rec.traj = traj;
    write_trajectory(out, out_rec);

    ArrayContainer extra = ArrayContainer::load(out);
    extra.set_meta("model", model_kind);
    extra.set_meta("model_I", static_cast<int64_t>(setup.grid.I));
    extra.set_meta("model_J", static_cast<int64_t>(setup.grid.J));
    extra.set_meta("s_init", s_init_true ? "true" : "zero");
    if (wall_median >= 0.0) extra.set_meta("wall_seconds_median", wall_median);
    extra.save(out);

    std::cout << "coarse run: " << out
              << (traj.stable ? ""
                              : " (DIVERGED at t=" + std::to_string(traj.blowup_time) + ")")
              << "\n";
    return 0;
}

int cmd_evaluate(const Config& cfg) {
    std::string run_path = cfg.str("run", "run.spnc");
    std::string dns_path = cfg.str("dns", "dns.spnc");
    std::string out_dir = cfg.str("out", ".");
    std::filesystem::create_directories(out_dir);

    ArrayContainer run_c = ArrayContainer::load(run_path);
    TrajectoryRecord run = read_trajectory(run_path);
    TrajectoryRecord dns = read_trajectory(dns_path);
    const std::string model = run_c.has_meta("model") ? run_c.meta("model") : "dns";
    const int I = static_cast<int>(run_c.has_meta("model_I") ? run_c.meta_int("model_I")
                                                             : run.spec.N);
    const int J = static_cast<int>(run_c.has_meta("model_J")
                                       ? run_c.meta_int("model_J")
                                       : std::llround(double(dns.spec.N) / I));
    auto grid = make_grid_pair(run.spec.domain_start, run.spec.domain_end, I, J);
    auto fp = make_filter_pair(grid);
    const bool sp = model == "sp";

    auto errs = nrmse_series(run.traj, dns, fp);
    double inrmse = integrated_nrmse(errs, run.spec.save_every, run.traj.times.back());

    std::vector<double> mass_u(I, grid.H);
    std::vector<double> p_series, e_series;
    for (const auto& s : run.traj.states) {
        std::vector<double> ubar(s.begin(), s.begin() + I);
        p_series.push_back(momentum(ubar, mass_u));
        if (sp) {
            std::vector<double> mass2(2 * I, grid.H);
            e_series.push_back(energy(s, mass2));
        } else {
            e_series.push_back(energy(ubar, mass_u));
        }
    }
    auto dp = drift_series(p_series);
    auto de = drift_series(e_series);

    std::vector<std::string> rows;
    for (size_t i = 0; i < errs.size(); ++i)
        rows.push_back(fmt(run.traj.times[i]) + "," + fmt(errs[i]) + "," + fmt(dp[i]) + "," +
                       fmt(de[i]));
    write_csv(out_dir + "/metrics.csv", "time,nrmse,dP,dE", rows);

    std::cout << "model=" << model << " I=" << I << " stable=" << (run.traj.stable ? 1 : 0)
              << " I-NRMSE=" << inrmse << " max|dP|=" << max_abs(dp)
              << " max|dE|=" << max_abs(de);
    // Wall-time ratio when both runs were timed (simulate's timing_runs).
    ArrayContainer dns_c = ArrayContainer::load(dns_path);
    if (run_c.has_meta("wall_seconds_median") && dns_c.has_meta("wall_seconds_median")) {
        std::cout << " wall_ratio="
                  << run_c.meta_double("wall_seconds_median") /
                         dns_c.meta_double("wall_seconds_median");
    }
    std::cout << "\nmetrics: " << out_dir << "/metrics.csv\n";
    return 0;
}

int cmd_spectrum(const Config& cfg) {
    std::string run_path = cfg.str("run", "run.spnc");
    double t0 = cfg.num("t0", 3.0), t1 = cfg.num("t1", 7.0);
    std::string out_dir = cfg.str("out", ".");
    std::filesystem::create_directories(out_dir);

    ArrayContainer run_c = ArrayContainer::load(run_path);
    TrajectoryRecord run = read_trajectory(run_path);

    std::vector<std::vector<double>> window;
    double H;
    if (run_c.has_meta("model") && run_c.meta("model") != "dns") {
        const int I = static_cast<int>(run_c.meta_int("model_I"));
        H = (run.spec.domain_end - run.spec.domain_start) / I;
        for (size_t f = 0; f < run.traj.states.size(); ++f) {
            if (run.traj.times[f] < t0 || run.traj.times[f] > t1) continue;
            window.emplace_back(run.traj.states[f].begin(), run.traj.states[f].begin() + I);
        }
    } else {
        // DNS trajectory, optionally filtered to a coarse resolution.
        int I = static_cast<int>(cfg.integer("I", run.spec.N));
        auto grid = resolve_model_grid(run.spec, I);
        auto fp = make_filter_pair(grid);
        H = grid.H;
        for (size_t f = 0; f < run.traj.states.size(); ++f) {
            if (run.traj.times[f] < t0 || run.traj.times[f] > t1) continue;
            window.push_back(apply_filter(fp, regrid(run.traj.states[f], grid.N)));
        }
    }
    require(!window.empty(), "spectrum: no states in the requested window");
    auto spec = average_spectrum(window, H);

    std::vector<std::string> rows;
    for (size_t k = 0; k < spec.size(); ++k)
        rows.push_back(std::to_string(k) + "," + fmt(spec[k]));
    write_csv(out_dir + "/spectrum.csv", "k,E", rows);
    std::cout << "spectrum: " << out_dir << "/spectrum.csv (" << window.size() << " states)\n";
    return 0;
}

int cmd_verify(const Config& cfg) {
    uint64_t seed = static_cast<uint64_t>(cfg.integer("seed", 0));
    int n_cases = static_cast<int>(cfg.integer("cases", 100));
    std::string suites = cfg.str("suites", "filter,sp,dissipation");

    std::vector<VerifyResult> all;
    if (suites.find("filter") != std::string::npos) {
        auto r = filter_identity_suite(seed, n_cases);
        all.insert(all.end(), r.begin(), r.end());
    }
    if (suites.find("sp") != std::string::npos) {
        auto r = sp_conservation_suite(seed, n_cases);
        all.insert(all.end(), r.begin(), r.end());
    }
    if (suites.find("dissipation") != std::string::npos) {
        auto r = dissipation_grid_suite();
        all.insert(all.end(), r.begin(), r.end());
    }

    bool ok = true;
    for (const auto& r : all) {
        std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  (" << r.detail << ")\n";
        ok = ok && r.pass;
    }
    return ok ? 0 : 1;
}

int cmd_tune(const Config& cfg) {
    std::string dir = cfg.str("dataset", "dataset");
    auto m = read_manifest(dir);
    std::string model_kind = cfg.str("model", "sp");
    int I = resolve_i(cfg, model_kind);
    auto grid = resolve_model_grid(m.spec, I);
    auto fp = make_filter_pair(grid);
    auto setup = setup_from(m.spec, grid);
    TrainConfig tc = train_config(cfg, m.spec.eq);
    const bool kdv = m.spec.eq == Equation::KdV;
    int kernel = static_cast<int>(cfg.integer("kernel", model_kind == "sp" ? 5 : 7));
    int B = static_cast<int>(cfg.integer("B", kdv ? 2 : 1));

    std::vector<SweepRow> rows;
    if (model_kind == "sp") {
        auto comp = fit_compression_from_dataset(dir, m, fp);
        StateTransform st{fp, comp};
        auto set = prepare_training_set(dir, m, st, tc);
        rows = hyperparameter_sweep(setup, kernel, B, !kdv, comp, set, tc, false);
    } else {
        auto set = prepare_training_set_coarse(dir, m, fp, tc);
        rows = hyperparameter_sweep(setup, kernel, B, !kdv, CompressionOperator{}, set, tc, true);
    }

    std::string out_dir = cfg.str("out", ".");
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> lines;
    for (const auto& r : rows)
        lines.push_back(std::to_string(r.hidden_layers) + "," + std::to_string(r.channels) + "," +
                        fmt(r.val_nrmse));
    write_csv(out_dir + "/sweep.csv", "layers,channels,val_nrmse", lines);
    std::cout << "sweep: " << out_dir << "/sweep.csv (" << rows.size() << " rows)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structure-preserving neural closure models for 1D PDEs"};
    app.require_subcommand(1);

    std::string config_path, out_override;
    long seed_override = -1;
    std::vector<std::string> sets;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "flat key=value configuration file");
        sub->add_option("--seed", seed_override, "override the seed");
        sub->add_option("--out", out_override, "override the output path");
        sub->add_option("--set", sets, "extra key=value overrides");
    };

    std::map<std::string, std::function<int(const Config&)>> handlers{
        {"datagen", cmd_datagen},   {"compress", cmd_compress}, {"train", cmd_train},
        {"simulate", cmd_simulate}, {"evaluate", cmd_evaluate}, {"spectrum", cmd_spectrum},
        {"verify", cmd_verify},     {"tune", cmd_tune}};

    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, fn] : handlers) {
        auto* sub = app.add_subcommand(name);
        add_common(sub);
        subs[name] = sub;
        (void)fn;
    }

    CLI11_PARSE(app, argc, argv);

    try {
        for (const auto& [name, sub] : subs) {
            if (!sub->parsed()) continue;
            Config cfg;
            if (!config_path.empty()) cfg.load_file(config_path);
            for (const auto& kv : sets) cfg.parse_line(kv);
            if (seed_override >= 0) cfg.parse_line("seed=" + std::to_string(seed_override));
            if (!out_override.empty()) cfg.parse_line("out=" + out_override);
            return handlers[name](cfg);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
