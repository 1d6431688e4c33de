#include "spclosure/checkpoint.hpp"

#include <cmath>

#include "spclosure/container.hpp"

namespace spclosure {

namespace {

void put_setup(ArrayContainer& c, const CoarseSetup& s) {
    c.set_meta("equation", s.eq == Equation::Burgers ? "burgers" : "kdv");
    c.set_meta("nu", s.nu);
    c.set_meta("epsilon", s.epsilon);
    c.set_meta("mu", s.mu);
    c.set_meta("domain_start", s.grid.domain_start);
    c.set_meta("domain_end", s.grid.domain_end);
    c.set_meta("I", static_cast<int64_t>(s.grid.I));
    c.set_meta("J", static_cast<int64_t>(s.grid.J));
}

CoarseSetup get_setup(const ArrayContainer& c) {
    CoarseSetup s;
    s.eq = c.meta("equation") == "kdv" ? Equation::KdV : Equation::Burgers;
    s.nu = c.meta_double("nu");
    s.epsilon = c.meta_double("epsilon");
    s.mu = c.meta_double("mu");
    s.grid = make_grid_pair(c.meta_double("domain_start"), c.meta_double("domain_end"),
                            static_cast<int>(c.meta_int("I")), static_cast<int>(c.meta_int("J")));
    return s;
}

void check(const ArrayContainer& c, const CheckpointExpect& e) {
    if (e.eq && c.meta("equation") != (*e.eq == Equation::Burgers ? "burgers" : "kdv"))
        throw std::runtime_error("checkpoint: equation mismatch");
    if (e.I && c.meta_int("I") != *e.I) throw std::runtime_error("checkpoint: I mismatch");
    if (e.J && c.meta_int("J") != *e.J) throw std::runtime_error("checkpoint: J mismatch");
    if (e.B && c.has_meta("B") && c.meta_int("B") != *e.B)
        throw std::runtime_error("checkpoint: B mismatch");
}

}  // namespace

void save_checkpoint(const std::string& path, const SPClosure& m) {
    ArrayContainer c;
    c.set_meta("kind", "sp");
    put_setup(c, m.setup);
    c.set_meta("arch", m.arch.to_string());
    c.set_meta("B", static_cast<int64_t>(m.B));
    c.set_meta("dissipative", static_cast<int64_t>(m.dissipative ? 1 : 0));
    c.add_vector("theta", m.params.values());
    c.add_vector("t_vec", m.comp.t);
    c.save(path);
}

void save_checkpoint(const std::string& path, const VanillaCNNClosure& m) {
    ArrayContainer c;
    c.set_meta("kind", "cnn");
    put_setup(c, m.setup);
    c.set_meta("arch", m.arch.to_string());
    c.add_vector("theta", m.params.values());
    c.save(path);
}

AnyClosure load_checkpoint(const std::string& path, const CheckpointExpect& expect) {
    ArrayContainer c = ArrayContainer::load(path);
    check(c, expect);
    const std::string kind = c.meta("kind");
    CoarseSetup setup = get_setup(c);
    ConvArch arch = ConvArch::parse(c.meta("arch"));
    const int hidden_layers = arch.n_layers() - 1;
    const int hidden_channels = hidden_layers > 0 ? arch.channels[1] : 0;

    if (kind == "sp") {
        CompressionOperator comp;
        comp.t = c.get("t_vec").data;
        comp.J = static_cast<int>(comp.t.size());
        comp.t_hat.resize(comp.J);
        const double scale = std::sqrt(static_cast<double>(comp.J));
        for (int j = 0; j < comp.J; ++j) comp.t_hat[j] = comp.t[j] * scale;
        SPClosure m = make_sp_closure(setup, hidden_layers, hidden_channels, arch.kernels[0],
                                      static_cast<int>(c.meta_int("B")),
                                      c.meta_int("dissipative") != 0, comp, 0);
        const auto& theta = c.get("theta").data;
        require(theta.size() == m.params.size(), "checkpoint: parameter count mismatch");
        m.params.values() = theta;
        return m;
    }
    if (kind == "cnn") {
        VanillaCNNClosure m =
            make_vanilla_closure(setup, hidden_layers, hidden_channels, arch.kernels[0], 0);
        const auto& theta = c.get("theta").data;
        require(theta.size() == m.params.size(), "checkpoint: parameter count mismatch");
        m.params.values() = theta;
        return m;
    }
    throw std::runtime_error("checkpoint: unknown kind '" + kind + "'");
}

}  // namespace spclosure
