#pragma once

#include "fcdnet/data.hpp"
#include "fcdnet/tensor.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fcdnet::data {

/// Synthetic coupled system with known dependency graphs.
///
/// A latent state evolves as
///   s[t+1] = tanh(W_s s[t]) + 1{t in burst} W_b s[t] + noise,   s[0] = 0,
/// and the observed series adds a per-node seasonal term,
///   x[t] = s[t] + amplitude * sin(2 pi t / period + phase[n]).
/// Row i of W_s lists the nodes that drive node i.
struct PlantedSystem {
    Tensor static_graph;  // [N, N] support in {0, 1}, unit diagonal
    Tensor burst_graph;   // [N, N] support in {0, 1}
    std::vector<std::pair<std::size_t, std::size_t>> burst_schedule;  // half-open step intervals
    double noise_std = 0.1;
    double self_weight = 0.3;
    double coupling = 0.3;
    double burst_strength = 0.3;
    double season_amplitude = 1.0;
    std::size_t season_period = 48;

    std::size_t nodes() const { return static_graph.dim(0); }
    Tensor coupling_matrix() const;
    Tensor burst_matrix() const;
    bool in_burst(std::size_t t) const;
    // Throws ContractError on malformed supports and NumericError when the
    // static or burst-time coupling has spectral radius >= 1.
    void validate() const;
};

double spectral_radius(const Tensor& m);

struct PlantedSpec {
    std::size_t nodes = 8;
    double density = 0.25;        // off-diagonal static edge probability
    double burst_density = 0.0;   // off-diagonal burst edge probability
    std::vector<std::pair<std::size_t, std::size_t>> bursts;
    double noise_std = 0.1;
    double self_weight = 0.3;
    double coupling = 0.3;
    double burst_strength = 0.3;
    double season_amplitude = 1.0;
    std::size_t season_period = 48;
};

// `key = value` lines with the PlantedSpec field names; `bursts` lists
// half-open intervals as `start-end` separated by commas. `#` comments.
PlantedSpec parse_planted_spec(const std::string& text);
std::string format_planted_spec(const PlantedSpec& spec);

// Draws the static and burst supports from the seed.
PlantedSystem make_planted_system(const PlantedSpec& spec, std::uint64_t seed);

struct PlantedData {
    SeriesFrame frame;
    Tensor static_graph;
    Tensor burst_graph;
};

PlantedData generate_planted(const PlantedSystem& system, std::size_t steps, std::uint64_t seed);

} // namespace fcdnet::data
