#pragma once

#include "fcdnet/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fcdnet::data {

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);
// Shortest round-trip decimal; non-finite values print as NaN.
std::string format_number(double v);

struct SplitFractions {
    double train = 0.6;
    double val = 0.2;
    double test = 0.2;

    static SplitFractions six_two_two() { return {0.6, 0.2, 0.2}; }
    static SplitFractions seven_one_two() { return {0.7, 0.1, 0.2}; }
    void validate() const;
};

enum class SplitPart { train, val, test };

SplitPart parse_split_part(const std::string& name);
std::string to_string(SplitPart part);

// Half-open step range [begin, end).
struct StepRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t length() const { return end - begin; }
};

/// Multivariate series of T steps, N nodes, D features with an observation mask.
struct SeriesFrame {
    Tensor values;                    // [T, N, D]
    std::vector<std::uint8_t> mask;   // [T * N], 1 = observed
    std::string sample_rate = "unspecified";
    SplitFractions split;
    std::size_t input_length = 12;
    std::size_t output_length = 12;

    std::size_t steps() const { return values.dim(0); }
    std::size_t nodes() const { return values.dim(1); }
    std::size_t features() const { return values.dim(2); }
    bool observed(std::size_t t, std::size_t n) const { return mask[t * nodes() + n] != 0; }

    // Contiguous, time-ordered: train, then val, then test.
    StepRange range(SplitPart part) const;
    std::string summary() const;
    void validate() const;
};

// Everything the file itself does not carry.
struct FormatDescriptor {
    std::string sample_rate = "unspecified";
    SplitFractions split;
    std::size_t input_length = 12;
    std::size_t output_length = 12;
};

/// Reads the `T,N,D` header followed by T rows of N*D comma-separated values
/// in node-major column order (column n * D + d). A cell that does not parse
/// as a finite number masks out its node at that step.
SeriesFrame load_series(const std::string& path, const FormatDescriptor& format = {});
SeriesFrame parse_series(const std::string& text, const FormatDescriptor& format = {});
void save_series(const std::string& path, const SeriesFrame& frame);
std::string format_series(const SeriesFrame& frame);

// N x N matrix as CSV, one row per line, full round-trip precision.
void save_matrix(const std::string& path, const Tensor& m);
std::string format_matrix(const Tensor& m);
Tensor load_matrix(const std::string& path);

/// Per-feature z-score statistics fitted on the training split.
struct NormStats {
    std::vector<double> mean;
    std::vector<double> std;

    double normalize(double v, std::size_t feature) const { return (v - mean[feature]) / std[feature]; }
    double denormalize(double v, std::size_t feature) const { return v * std[feature] + mean[feature]; }
};

NormStats zscore_fit(const SeriesFrame& frame);
// Normalizes observed entries; masked entries are left untouched.
SeriesFrame zscore_apply(const SeriesFrame& frame, const NormStats& stats);
SeriesFrame zscore_invert(const SeriesFrame& frame, const NormStats& stats);

struct Normalized {
    SeriesFrame frame;
    NormStats stats;
};
Normalized zscore_fit_apply(const SeriesFrame& frame);

// Start steps of every stride-1 window of T_in + E steps lying inside one split.
std::vector<std::size_t> window_starts(const SeriesFrame& frame, SplitPart part, std::size_t input_length,
                                       std::size_t horizon);

/// Paired input/target windows.
struct ForecastBatch {
    Tensor inputs;                          // [B, T_in, N, D], normalized, masked entries 0
    Tensor targets;                         // [B, E, N, D], raw scale, masked entries 0
    std::vector<std::uint8_t> target_mask;  // [B * E * N]; 0 for missing targets and padding
    std::vector<std::uint8_t> valid;        // [B]; 0 marks padding samples
    NormStats stats;

    std::size_t batch_size() const { return inputs.dim(0); }
};

/// Assembles a batch from window starts. `raw` supplies targets, `normalized`
/// (the same frame after zscore_apply) supplies inputs. `valid` may be empty
/// (all samples real).
ForecastBatch make_batch(const SeriesFrame& raw, const SeriesFrame& normalized, const NormStats& stats,
                         std::span<const std::size_t> starts, std::size_t input_length, std::size_t horizon,
                         std::span<const std::uint8_t> valid = {});

// Groups starts into consecutive batches of `batch_size`; drop_last discards a short tail.
std::vector<std::vector<std::size_t>> make_batches(std::span<const std::size_t> starts, std::size_t batch_size,
                                                   bool drop_last);

} // namespace fcdnet::data
