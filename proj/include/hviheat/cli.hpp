#pragma once

namespace hviheat::cli {

// Entry point behind the hviheat binary. Commands: solve, study, envelope,
// check. Returns 0 on success, 1 on solver/check failure, 2 on usage or
// config errors.
int run(int argc, const char* const* argv);

}  // namespace hviheat::cli
