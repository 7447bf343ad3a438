// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Exit codes: 0 on success or --help, 1 on domain
// errors (one stderr line "error: <kind>: <message>"), 2 on usage errors.
#pragma once

#include <cstdint>
#include <iosfwd>

namespace ibpm {

// Seed used when neither --seed nor IBPM_SEED is given.
inline constexpr std::uint64_t kDefaultSeed = 1;
inline constexpr const char* kSeedEnv = "IBPM_SEED";

// Resolves the default seed from the environment; throws InvalidArgument on
// a malformed value.
std::uint64_t default_seed();

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace ibpm
