#pragma once

#include <string>

#include "json.hpp"

#include "beliefsim/engine.hpp"

namespace beliefsim {

// A fully resolved experiment: the run itself plus ensemble and output
// settings. `canonical` is the config re-serialized with every default made
// explicit; `config_hash` fingerprints it (minus the output directory, which
// is an environment concern rather than part of the experiment).
struct ExperimentConfig {
    RunConfig run;
    int n_seeds = 1;
    int threads = 1;
    bool check_identity = false;
    std::string output_dir;  // empty = unset
    nlohmann::json canonical;
    std::string config_hash;
};

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config_file(const std::string& path);

nlohmann::json to_json(const ExperimentConfig& cfg);

// FNV-1a over the compact dump, as 16 hex digits.
std::string hash_json(const nlohmann::json& doc);

}  // namespace beliefsim
