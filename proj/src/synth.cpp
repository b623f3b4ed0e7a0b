#include "fcdnet/synth.hpp"

#include "fcdnet/errors.hpp"

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

namespace fcdnet::data {

Tensor PlantedSystem::coupling_matrix() const {
    const std::size_t n = nodes();
    Tensor w({n, n});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (static_graph[i * n + j] == 0.0) continue;
            w[i * n + j] = i == j ? self_weight : coupling;
        }
    return w;
}

Tensor PlantedSystem::burst_matrix() const {
    const std::size_t n = nodes();
    Tensor w({n, n});
    for (std::size_t i = 0; i < n * n; ++i) w[i] = burst_graph[i] != 0.0 ? burst_strength : 0.0;
    return w;
}

bool PlantedSystem::in_burst(std::size_t t) const {
    for (const auto& [start, end] : burst_schedule)
        if (t >= start && t < end) return true;
    return false;
}

double spectral_radius(const Tensor& m) {
    if (m.rank() != 2 || m.dim(0) != m.dim(1)) throw ShapeError("spectral_radius: expected a square matrix");
    const auto n = static_cast<Eigen::Index>(m.dim(0));
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = m[static_cast<std::size_t>(i * n + j)];
    Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

void PlantedSystem::validate() const {
    if (static_graph.rank() != 2 || static_graph.dim(0) != static_graph.dim(1) || static_graph.dim(0) == 0) {
        throw ContractError("planted system: static graph must be a non-empty square matrix");
    }
    const std::size_t n = nodes();
    if (burst_graph.shape() != static_graph.shape()) throw ContractError("planted system: burst graph shape mismatch");
    for (std::size_t i = 0; i < n * n; ++i) {
        const double s = static_graph[i], b = burst_graph[i];
        if ((s != 0.0 && s != 1.0) || (b != 0.0 && b != 1.0)) {
            throw ContractError("planted system: graph supports must be 0/1");
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (static_graph[i * n + i] != 1.0) throw ContractError("planted system: static graph diagonal must be 1");
    if (noise_std < 0.0) throw ContractError("planted system: noise_std must be nonnegative");
    if (season_period == 0) throw ContractError("planted system: season period must be positive");
    for (const auto& [start, end] : burst_schedule)
        if (end < start) throw ContractError("planted system: burst interval ends before it starts");

    const double rho = spectral_radius(coupling_matrix());
    if (rho >= 1.0) {
        throw NumericError("planted system: static coupling has spectral radius " + std::to_string(rho) + " >= 1");
    }
    if (!burst_schedule.empty()) {
        Tensor both = coupling_matrix();
        const Tensor wb = burst_matrix();
        for (std::size_t i = 0; i < both.size(); ++i) both[i] += wb[i];
        const double rho_b = spectral_radius(both);
        if (rho_b >= 1.0) {
            throw NumericError("planted system: burst-time coupling has spectral radius " + std::to_string(rho_b) +
                               " >= 1");
        }
    }
}

namespace {

std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double parse_real(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("planted spec: " + key + " = '" + v + "'");
    return out;
}

std::size_t parse_count(const std::string& key, const std::string& v) {
    std::size_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("planted spec: " + key + " = '" + v + "'");
    return out;
}

} // namespace

PlantedSpec parse_planted_spec(const std::string& text) {
    PlantedSpec spec;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = strip(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("planted spec line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = strip(line.substr(0, eq)), value = strip(line.substr(eq + 1));
        if (key == "nodes") spec.nodes = parse_count(key, value);
        else if (key == "density") spec.density = parse_real(key, value);
        else if (key == "burst_density") spec.burst_density = parse_real(key, value);
        else if (key == "noise_std") spec.noise_std = parse_real(key, value);
        else if (key == "self_weight") spec.self_weight = parse_real(key, value);
        else if (key == "coupling") spec.coupling = parse_real(key, value);
        else if (key == "burst_strength") spec.burst_strength = parse_real(key, value);
        else if (key == "season_amplitude") spec.season_amplitude = parse_real(key, value);
        else if (key == "season_period") spec.season_period = parse_count(key, value);
        else if (key == "bursts") {
            spec.bursts.clear();
            std::istringstream items(value);
            std::string item;
            while (std::getline(items, item, ',')) {
                item = strip(item);
                if (item.empty()) continue;
                const auto dash = item.find('-');
                if (dash == std::string::npos) throw ConfigError("planted spec: burst '" + item + "' is not start-end");
                const std::size_t a = parse_count(key, strip(item.substr(0, dash)));
                const std::size_t b = parse_count(key, strip(item.substr(dash + 1)));
                if (b <= a) throw ConfigError("planted spec: burst '" + item + "' is empty");
                spec.bursts.emplace_back(a, b);
            }
        } else {
            throw ConfigError("planted spec line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    return spec;
}

std::string format_planted_spec(const PlantedSpec& spec) {
    std::string bursts;
    for (const auto& [a, b] : spec.bursts) bursts += (bursts.empty() ? "" : ",") + std::to_string(a) + "-" + std::to_string(b);
    return "nodes = " + std::to_string(spec.nodes) + "\ndensity = " + format_number(spec.density) +
           "\nburst_density = " + format_number(spec.burst_density) + "\nbursts = " + bursts +
           "\nnoise_std = " + format_number(spec.noise_std) + "\nself_weight = " + format_number(spec.self_weight) +
           "\ncoupling = " + format_number(spec.coupling) + "\nburst_strength = " + format_number(spec.burst_strength) +
           "\nseason_amplitude = " + format_number(spec.season_amplitude) +
           "\nseason_period = " + std::to_string(spec.season_period) + "\n";
}

PlantedSystem make_planted_system(const PlantedSpec& spec, std::uint64_t seed) {
    if (spec.nodes == 0) throw ContractError("planted spec: nodes must be positive");
    if (spec.density < 0.0 || spec.density > 1.0 || spec.burst_density < 0.0 || spec.burst_density > 1.0) {
        throw ContractError("planted spec: densities must lie in [0, 1]");
    }
    const std::size_t n = spec.nodes;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    PlantedSystem sys;
    sys.static_graph = Tensor({n, n});
    sys.burst_graph = Tensor({n, n});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) {
                sys.static_graph[i * n + j] = 1.0;
                continue;
            }
            if (unif(rng) < spec.density) sys.static_graph[i * n + j] = 1.0;
        }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double u = unif(rng);
            if (i != j && sys.static_graph[i * n + j] == 0.0 && u < spec.burst_density) sys.burst_graph[i * n + j] = 1.0;
        }
    sys.burst_schedule = spec.bursts;
    sys.noise_std = spec.noise_std;
    sys.self_weight = spec.self_weight;
    sys.coupling = spec.coupling;
    sys.burst_strength = spec.burst_strength;
    sys.season_amplitude = spec.season_amplitude;
    sys.season_period = spec.season_period;
    sys.validate();
    return sys;
}

PlantedData generate_planted(const PlantedSystem& system, std::size_t steps, std::uint64_t seed) {
    system.validate();
    if (steps == 0) throw ContractError("generate_planted: steps must be positive");
    const std::size_t n = system.nodes();
    const Tensor ws = system.coupling_matrix();
    const Tensor wb = system.burst_matrix();

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> phase(n);
    for (double& p : phase) p = unif(rng);

    PlantedData out;
    out.frame.values = Tensor({steps, n, 1});
    out.frame.mask.assign(steps * n, 1);
    out.frame.sample_rate = "synthetic";
    out.static_graph = system.static_graph;
    out.burst_graph = system.burst_graph;

    std::vector<double> state(n, 0.0), next(n);
    for (std::size_t t = 0; t < steps; ++t) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(system.season_period);
        for (std::size_t i = 0; i < n; ++i) {
            out.frame.values[t * n + i] = state[i] + system.season_amplitude * std::sin(angle + phase[i]);
        }
        const bool burst = system.in_burst(t);
        for (std::size_t i = 0; i < n; ++i) {
            double drive = 0.0, extra = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                drive += ws[i * n + j] * state[j];
                if (burst) extra += wb[i * n + j] * state[j];
            }
            // Draw noise even when noise_std is 0 so the stream does not depend on it.
            const double eps = gauss(rng);
            next[i] = std::tanh(drive) + extra + system.noise_std * eps;
        }
        state.swap(next);
    }
    return out;
}

} // namespace fcdnet::data
