#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "linseq/randmat.hpp"

namespace linseq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Default seed when --seed is absent.
inline constexpr const char* kSeedEnv = "LINSEQ_SEED";

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Ensemble description used by `gen --ensemble`: components joined by '+',
/// each "<law>[:params][@weight]" with laws
///   uniform:A  gaussian:s  laplace:s  width:A1-A2  spectral:<family>:scale
/// or "ood:<name>" for a member of ood_suite(). Dims and symmetry are set by
/// the caller. Throws std::invalid_argument.
EnsembleSpec parse_ensemble(std::string_view text);

}  // namespace linseq::cli
