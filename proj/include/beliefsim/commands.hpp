#pragma once

#include <string>

namespace beliefsim {

struct Trajectory;
struct StateSpace;

// Snapshot rows as "t,agent,state,belief" with round-trip float precision.
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const StateSpace& states);

// Shared command-line options; unset fields fall back to the config file and
// then to the environment.
struct CliOptions {
    std::string config_path;
    std::string output_dir;   // overrides config and BELIEFSIM_OUTPUT_DIR
    int threads = 0;          // 0 = take from config
    double window = 0.5;      // trailing fraction used for empirical rates
};

void cmd_inspect(const CliOptions& opt);
void cmd_rates(const CliOptions& opt);
void cmd_simulate(const CliOptions& opt);
void cmd_coeffs(const CliOptions& opt);
void cmd_compare(const CliOptions& opt);

}  // namespace beliefsim
