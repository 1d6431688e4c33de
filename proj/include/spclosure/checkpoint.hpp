#pragma once

#include <optional>
#include <string>

#include "spclosure/closures.hpp"

namespace spclosure {

/// Expected identity of a checkpoint; loading refuses on any mismatch.
struct CheckpointExpect {
    std::optional<Equation> eq;
    std::optional<int> I, J, B;
};

void save_checkpoint(const std::string& path, const SPClosure& m);
void save_checkpoint(const std::string& path, const VanillaCNNClosure& m);

/// Load an SP or vanilla-CNN checkpoint (dispatch on the stored kind).
AnyClosure load_checkpoint(const std::string& path, const CheckpointExpect& expect = {});

}  // namespace spclosure
