#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "ptrap/config.hpp"

namespace ptrap::cli {

struct Context {
    std::string command;
    RunConfig config;
    std::filesystem::path out_dir;
    /// Input grid dump for `fit`.
    std::filesystem::path grid_path;
    int threads = 0;
};

// Each command writes its outputs under ctx.out_dir plus a manifest.json and
// prints a short summary to `out`. Failures propagate as ptrap::Error.
void solve_field(const Context& ctx, std::ostream& out);
void fit(const Context& ctx, std::ostream& out);
void aq(const Context& ctx, std::ostream& out);
void simulate(const Context& ctx, std::ostream& out);
void trace(const Context& ctx, std::ostream& out);
void sweep(const Context& ctx, std::ostream& out);

}  // namespace ptrap::cli
