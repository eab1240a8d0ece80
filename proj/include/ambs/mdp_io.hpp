#pragma once

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "ambs/markov.hpp"

namespace ambs {

/// Malformed input file; what() reads "<source>:<line>: <message>".
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& source, std::size_t line, const std::string& message)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), _line{line} {}
    std::size_t line() const { return _line; }

private:
    std::size_t _line;
};

struct MdpReadOptions {
    /// Rescale each (s,a) row and the initial vector to sum to 1 instead of rejecting.
    bool normalize = false;
};

/// Line-oriented MDP format, `#` starts a comment:
///   states N | actions M | gamma G | atoms a1 a2 ... | label S a1 ...
///   init S P | trans S A S' P | reward S A R
/// Missing transitions and rewards are 0; a missing `init` means state 0 with probability 1.
/// Rows must sum to 1 within 1e-6 unless `normalize` is set.
LabeledMdp read_mdp(std::istream& in, const std::string& source, const MdpReadOptions& options = {});
LabeledMdp read_mdp_file(const std::string& path, const MdpReadOptions& options = {});
void write_mdp(std::ostream& out, const LabeledMdp& mdp);

/// Policy format: `policy S A P` lines (rows must be complete distributions),
/// or a single line `uniform`.
TabularPolicy read_policy(std::istream& in, const std::string& source, std::size_t num_states, std::size_t num_actions);
/// Accepts the literal "uniform" in place of a path.
TabularPolicy read_policy_file(const std::string& path, std::size_t num_states, std::size_t num_actions);
void write_policy(std::ostream& out, const TabularPolicy& policy);

}  // namespace ambs
