#include "spclosure/datagen.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>

#include "spclosure/grid.hpp"
#include "spclosure/tensor.hpp"

namespace spclosure {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

FourierCondition sample_condition(double a1, double a2, double a3, Rng& rng) {
    require(a3 > 0.0, "sample_condition: period must be positive");
    FourierCondition fc;
    fc.a1 = a1;
    fc.a2 = a2;
    fc.a3 = a3;
    fc.M = static_cast<int>(rng.uniform_int(2, 8));
    fc.C.resize(static_cast<size_t>(fc.M) * 2);
    for (double& c : fc.C) {
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        c = sign * rng.uniform(0.5, 1.0);
    }
    return fc;
}

double eval_condition(const FourierCondition& fc, double y) {
    double s = 0.0;
    const double base = kTwoPi * y / fc.a3;
    for (int i = 2; i <= fc.M; ++i)
        s += fc.coeff(i, 0) * std::sin(i * base) + fc.coeff(i, 1) * std::cos(i * base);
    return fc.a1 + fc.a2 / std::sqrt(static_cast<double>(fc.M)) * s;
}

DnsSpec DnsSpec::burgers_defaults() { return DnsSpec{}; }

DnsSpec DnsSpec::kdv_defaults() {
    DnsSpec s;
    s.eq = Equation::KdV;
    s.nu = 0.0;
    s.epsilon = 6.0;
    s.mu = 1.0;
    s.N = 600;
    s.domain_start = 0.0;
    s.domain_end = 32.0;
    s.dt = 1e-4;
    return s;
}

BCSpec TrajectoryRecord::bc_spec() const {
    if (bc == BCKind::Periodic) return BCSpec::periodic();
    FourierCondition fc = inflow;
    return BCSpec::inflow_outflow([fc](double t) { return eval_condition(fc, t); });
}

double TrajectoryRecord::inflow_at(double t) const { return eval_condition(inflow, t); }

TrajectoryRecord run_reference(const DnsSpec& spec, BCKind bc, Rng& rng, bool integrate) {
    require(bc == BCKind::Periodic || spec.eq == Equation::Burgers,
            "run_reference: I/O BCs are a Burgers test case only");
    TrajectoryRecord rec;
    rec.spec = spec;
    rec.bc = bc;

    const double L = spec.domain_end - spec.domain_start;
    std::vector<double> u0(spec.N);
    PDEConfig cfg;
    cfg.kind = spec.eq;
    cfg.nu = spec.eq == Equation::Burgers ? spec.nu : 0.0;
    cfg.epsilon = spec.epsilon;
    cfg.mu = spec.mu;

    if (bc == BCKind::Periodic) {
        rec.ic = spec.eq == Equation::Burgers ? sample_condition(2.0, 1.0, L, rng)
                                              : sample_condition(0.0, 0.6, L, rng);
        for (int i = 0; i < spec.N; ++i)
            u0[i] = eval_condition(rec.ic, spec.domain_start + (i + 0.5) * spec.h());
    } else {
        rec.inflow = sample_condition(2.0, 1.0, kTwoPi, rng);
        rec.forcing = sample_condition(0.0, 0.5, L, rng);
        rec.forcing_values.resize(spec.N);
        for (int i = 0; i < spec.N; ++i)
            rec.forcing_values[i] =
                eval_condition(rec.forcing, spec.domain_start + (i + 0.5) * spec.h());
        cfg.forcing = rec.forcing_values;
        const double alpha0 = rec.inflow_at(0.0);
        for (int i = 0; i < spec.N; ++i) u0[i] = alpha0;
    }

    if (integrate) {
        rec.traj = simulate(cfg, rec.bc_spec(), u0, spec.h(), spec.dt, spec.T, spec.save_every);
    } else {
        rec.traj.times = {0.0};
        rec.traj.states = {u0};
    }
    return rec;
}

namespace {

void put_condition(ArrayContainer& c, const std::string& prefix, const FourierCondition& fc) {
    c.set_meta(prefix + ".a1", fc.a1);
    c.set_meta(prefix + ".a2", fc.a2);
    c.set_meta(prefix + ".a3", fc.a3);
    c.set_meta(prefix + ".M", static_cast<int64_t>(fc.M));
    if (!fc.C.empty()) c.add(prefix + ".C", {static_cast<uint64_t>(fc.M), 2}, fc.C);
}

FourierCondition get_condition(const ArrayContainer& c, const std::string& prefix) {
    FourierCondition fc;
    fc.a1 = c.meta_double(prefix + ".a1");
    fc.a2 = c.meta_double(prefix + ".a2");
    fc.a3 = c.meta_double(prefix + ".a3");
    fc.M = static_cast<int>(c.meta_int(prefix + ".M"));
    if (c.has(prefix + ".C")) fc.C = c.get(prefix + ".C").data;
    return fc;
}

void put_spec(ArrayContainer& c, const DnsSpec& s) {
    c.set_meta("equation", s.eq == Equation::Burgers ? "burgers" : "kdv");
    c.set_meta("nu", s.nu);
    c.set_meta("epsilon", s.epsilon);
    c.set_meta("mu", s.mu);
    c.set_meta("N", static_cast<int64_t>(s.N));
    c.set_meta("domain_start", s.domain_start);
    c.set_meta("domain_end", s.domain_end);
    c.set_meta("dt", s.dt);
    c.set_meta("T", s.T);
    c.set_meta("save_every", s.save_every);
}

DnsSpec get_spec(const ArrayContainer& c) {
    DnsSpec s;
    s.eq = c.meta("equation") == "kdv" ? Equation::KdV : Equation::Burgers;
    s.nu = c.meta_double("nu");
    s.epsilon = c.meta_double("epsilon");
    s.mu = c.meta_double("mu");
    s.N = static_cast<int>(c.meta_int("N"));
    s.domain_start = c.meta_double("domain_start");
    s.domain_end = c.meta_double("domain_end");
    s.dt = c.meta_double("dt");
    s.T = c.meta_double("T");
    s.save_every = c.meta_double("save_every");
    return s;
}

}  // namespace

void write_trajectory(const std::string& path, const TrajectoryRecord& rec) {
    ArrayContainer c;
    put_spec(c, rec.spec);
    // Wall time is deliberately not persisted: dataset bytes are a pure
    // function of the seed. Timing lives in the evaluate command's output.
    c.set_meta("bc", rec.bc == BCKind::Periodic ? "periodic" : "io");
    c.set_meta("stable", static_cast<int64_t>(rec.traj.stable ? 1 : 0));
    c.set_meta("blowup_time", rec.traj.blowup_time);
    if (rec.bc == BCKind::Periodic) {
        put_condition(c, "ic", rec.ic);
    } else {
        put_condition(c, "inflow", rec.inflow);
        put_condition(c, "forcing_cond", rec.forcing);
        c.add_vector("forcing", rec.forcing_values);
    }
    c.add_vector("times", rec.traj.times);
    const uint64_t frames = rec.traj.states.size();
    std::vector<double> flat;
    flat.reserve(frames * rec.spec.N);
    for (const auto& s : rec.traj.states) flat.insert(flat.end(), s.begin(), s.end());
    c.add("states", {frames, static_cast<uint64_t>(rec.spec.N)}, std::move(flat));
    c.save(path);
}

TrajectoryRecord read_trajectory(const std::string& path) {
    ArrayContainer c = ArrayContainer::load(path);
    TrajectoryRecord rec;
    rec.spec = get_spec(c);
    rec.bc = c.meta("bc") == "periodic" ? BCKind::Periodic : BCKind::InflowOutflow;
    rec.traj.stable = c.meta_int("stable") != 0;
    rec.traj.blowup_time = c.meta_double("blowup_time");
    if (rec.bc == BCKind::Periodic) {
        rec.ic = get_condition(c, "ic");
    } else {
        rec.inflow = get_condition(c, "inflow");
        rec.forcing = get_condition(c, "forcing_cond");
        rec.forcing_values = c.get("forcing").data;
    }
    rec.traj.times = c.get("times").data;
    const auto& st = c.get("states");
    const size_t frames = st.shape[0], n = st.shape[1];
    rec.traj.states.resize(frames);
    for (size_t f = 0; f < frames; ++f)
        rec.traj.states[f].assign(st.data.begin() + f * n, st.data.begin() + (f + 1) * n);
    return rec;
}

std::string DatasetManifest::traj_file(const std::string& dir, int idx) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "traj_%04d.spnc", idx);
    return dir + "/" + buf;
}

DatasetManifest build_dataset(const std::string& dir, const DnsSpec& spec, int n_periodic,
                              int n_io, double subsample, uint64_t seed) {
    require(n_periodic + n_io >= 1, "build_dataset: need at least one trajectory");
    require(subsample > 0.0 && subsample <= 1.0, "build_dataset: bad subsample fraction");
    std::filesystem::create_directories(dir);

    Rng rng(seed);
    DatasetManifest m;
    m.spec = spec;
    m.n_traj = n_periodic + n_io;
    m.seed = seed;

    // A diverged reference aborts that trajectory only: report and drop it.
    int frames_per_traj = -1;
    int kept = 0;
    for (int t = 0; t < n_periodic + n_io; ++t) {
        BCKind bc = t < n_periodic ? BCKind::Periodic : BCKind::InflowOutflow;
        TrajectoryRecord rec = run_reference(spec, bc, rng);
        if (!rec.traj.stable) {
            std::cerr << "datagen: reference simulation " << t << " diverged at t="
                      << rec.traj.blowup_time << ", dropped\n";
            continue;
        }
        write_trajectory(DatasetManifest::traj_file(dir, kept), rec);
        ++kept;
        if (frames_per_traj < 0) frames_per_traj = static_cast<int>(rec.traj.states.size());
    }
    require(kept >= 1, "build_dataset: every reference simulation diverged");
    m.n_traj = kept;

    // Uniform subsample of all (trajectory, frame) pairs without replacement,
    // then a 70/30 split, both driven by the same seed.
    std::vector<std::pair<int, int>> pool;
    pool.reserve(static_cast<size_t>(m.n_traj) * frames_per_traj);
    for (int t = 0; t < m.n_traj; ++t)
        for (int f = 0; f < frames_per_traj; ++f) pool.emplace_back(t, f);
    Rng pick = rng.split(1);
    pick.shuffle(pool);
    size_t keep = std::max<size_t>(1, static_cast<size_t>(std::llround(subsample * pool.size())));
    pool.resize(keep);

    size_t n_train = static_cast<size_t>(std::llround(0.7 * keep));
    if (keep > 1 && n_train == keep) n_train = keep - 1;
    for (size_t i = 0; i < keep; ++i) {
        m.snap_traj.push_back(pool[i].first);
        m.snap_frame.push_back(pool[i].second);
        m.split.push_back(i < n_train ? 0 : 1);
    }
    write_manifest(dir, m);
    return m;
}

void write_manifest(const std::string& dir, const DatasetManifest& m) {
    ArrayContainer c;
    put_spec(c, m.spec);
    c.set_meta("n_traj", static_cast<int64_t>(m.n_traj));
    c.set_meta("seed", static_cast<int64_t>(m.seed));
    std::vector<double> t(m.snap_traj.begin(), m.snap_traj.end());
    std::vector<double> f(m.snap_frame.begin(), m.snap_frame.end());
    std::vector<double> s(m.split.begin(), m.split.end());
    c.add_vector("snap_traj", std::move(t));
    c.add_vector("snap_frame", std::move(f));
    c.add_vector("split", std::move(s));
    c.save(dir + "/dataset.spnc");
}

DatasetManifest read_manifest(const std::string& dir) {
    ArrayContainer c = ArrayContainer::load(dir + "/dataset.spnc");
    DatasetManifest m;
    m.spec = get_spec(c);
    m.n_traj = static_cast<int>(c.meta_int("n_traj"));
    m.seed = static_cast<uint64_t>(c.meta_int("seed"));
    for (double v : c.get("snap_traj").data) m.snap_traj.push_back(static_cast<int>(v));
    for (double v : c.get("snap_frame").data) m.snap_frame.push_back(static_cast<int>(v));
    for (double v : c.get("split").data) m.split.push_back(static_cast<char>(v));
    return m;
}

std::vector<std::vector<double>> load_split_snapshots(const std::string& dir,
                                                      const DatasetManifest& m, int split,
                                                      int n_target) {
    std::vector<std::vector<double>> out;
    for (int t = 0; t < m.n_traj; ++t) {
        bool any = false;
        for (size_t i = 0; i < m.size(); ++i)
            if (m.snap_traj[i] == t && m.split[i] == split) {
                any = true;
                break;
            }
        if (!any) continue;
        TrajectoryRecord rec = read_trajectory(DatasetManifest::traj_file(dir, t));
        for (size_t i = 0; i < m.size(); ++i) {
            if (m.snap_traj[i] != t || m.split[i] != split) continue;
            const auto& u = rec.traj.states[m.snap_frame[i]];
            out.push_back(n_target > 0 ? regrid(u, n_target) : u);
        }
    }
    return out;
}

}  // namespace spclosure
