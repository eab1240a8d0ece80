#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ambs/formula.hpp"
#include "ambs/markov.hpp"
#include "ambs/trainer.hpp"

namespace ambs {

/// Every problem found while loading a config, one per entry.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return _problems; }

private:
    std::vector<std::string> _problems;
};

/// A full experiment: environment, safety formula, training parameters, seeds and variants.
struct ExperimentConfig {
    /// Path of an MDP file; empty selects the gridworld below.
    std::string mdp_path;
    GridworldSpec gridworld = default_gridworld();
    std::string formula_text = "!hazard";
    TrainingConfig training;
    std::vector<std::uint64_t> seeds{1};
    std::vector<Variant> variants{Variant::Shielded, Variant::Unshielded};
    std::string out_dir = "runs";
    bool decision_log = false;
    bool checkpoints = true;

    LabeledMdp environment() const;
    Formula formula() const;
};

/// INI-style `key = value` lines under `[section]` headers. Unknown keys, malformed
/// values and every violated module constraint are reported together as a ConfigError.
/// A relative environment.mdp path is resolved against `base_dir`.
ExperimentConfig load_config(std::istream& in, const std::string& source, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config_file(const std::string& path);

}  // namespace ambs
