#include "fcdnet/data.hpp"

#include "fcdnet/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fcdnet::data {
namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_count(const std::string& s, std::size_t& out) {
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::size_t split_point(std::size_t steps, double frac) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(steps) * frac + 1e-9));
}

} // namespace

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << text;
    if (!out) throw DataError("write failed for '" + path + "'");
}

std::string format_number(double v) {
    if (!std::isfinite(v)) return "NaN";
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void SplitFractions::validate() const {
    if (train <= 0.0 || val < 0.0 || test < 0.0) throw ConfigError("split fractions must be nonnegative, train > 0");
    if (std::abs(train + val + test - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
}

SplitPart parse_split_part(const std::string& name) {
    if (name == "train") return SplitPart::train;
    if (name == "val" || name == "validation") return SplitPart::val;
    if (name == "test") return SplitPart::test;
    throw ConfigError("unknown split '" + name + "' (expected train, val or test)");
}

std::string to_string(SplitPart part) {
    switch (part) {
    case SplitPart::train: return "train";
    case SplitPart::val: return "val";
    case SplitPart::test: return "test";
    }
    return "?";
}

StepRange SeriesFrame::range(SplitPart part) const {
    const std::size_t t = steps();
    const std::size_t a = split_point(t, split.train);
    const std::size_t b = std::min(t, split_point(t, split.train + split.val));
    switch (part) {
    case SplitPart::train: return {0, a};
    case SplitPart::val: return {a, b};
    case SplitPart::test: return {b, t};
    }
    return {};
}

std::string SeriesFrame::summary() const {
    std::ostringstream os;
    os << "steps=" << steps() << " nodes=" << nodes() << " features=" << features() << " sample_rate=" << sample_rate
       << " input_length=" << input_length << " output_length=" << output_length;
    std::size_t missing = 0;
    for (auto m : mask) missing += m == 0;
    os << " missing=" << missing;
    for (SplitPart p : {SplitPart::train, SplitPart::val, SplitPart::test}) {
        const StepRange r = range(p);
        os << ' ' << to_string(p) << "=[" << r.begin << ',' << r.end << ')';
    }
    return os.str();
}

void SeriesFrame::validate() const {
    if (values.rank() != 3) throw DataError("series values must be [T, N, D]");
    if (mask.size() != steps() * nodes()) throw DataError("series mask must hold T * N entries");
    split.validate();
}

SeriesFrame parse_series(const std::string& text, const FormatDescriptor& format) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!trim(line).empty()) return true;
        }
        return false;
    };
    if (!next_line()) throw DataError("line 1: missing T,N,D header");
    const auto header = split_commas(line);
    std::size_t steps = 0, nodes = 0, feats = 0;
    if (header.size() != 3 || !parse_count(header[0], steps) || !parse_count(header[1], nodes) ||
        !parse_count(header[2], feats) || steps == 0 || nodes == 0 || feats == 0) {
        throw DataError("line " + std::to_string(line_no) + ": malformed header '" + line +
                        "', expected three positive integers T,N,D");
    }
    SeriesFrame frame;
    frame.values = Tensor({steps, nodes, feats});
    frame.mask.assign(steps * nodes, 1);
    frame.sample_rate = format.sample_rate;
    frame.split = format.split;
    frame.input_length = format.input_length;
    frame.output_length = format.output_length;
    const std::size_t width = nodes * feats;
    for (std::size_t t = 0; t < steps; ++t) {
        if (!next_line()) {
            throw DataError("line " + std::to_string(line_no + 1) + ": expected " + std::to_string(steps) +
                            " rows, found " + std::to_string(t));
        }
        const auto cells = split_commas(line);
        if (cells.size() != width) {
            throw DataError("line " + std::to_string(line_no) + ": ragged row with " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(width));
        }
        for (std::size_t c = 0; c < width; ++c) {
            double v = 0.0;
            const std::size_t n = c / feats;
            if (parse_double(cells[c], v) && std::isfinite(v)) {
                frame.values[t * width + c] = v;
            } else {
                frame.mask[t * nodes + n] = 0;
            }
        }
    }
    // Zero every feature of masked (t, n) so no stale value can leak.
    for (std::size_t t = 0; t < steps; ++t)
        for (std::size_t n = 0; n < nodes; ++n)
            if (!frame.mask[t * nodes + n])
                for (std::size_t d = 0; d < feats; ++d) frame.values[t * width + n * feats + d] = 0.0;
    if (next_line()) throw DataError("line " + std::to_string(line_no) + ": more rows than the header declares");
    frame.validate();
    return frame;
}

SeriesFrame load_series(const std::string& path, const FormatDescriptor& format) {
    return parse_series(read_text(path), format);
}

std::string format_series(const SeriesFrame& frame) {
    std::string out;
    out += std::to_string(frame.steps()) + "," + std::to_string(frame.nodes()) + "," +
           std::to_string(frame.features()) + "\n";
    const std::size_t width = frame.nodes() * frame.features();
    for (std::size_t t = 0; t < frame.steps(); ++t) {
        for (std::size_t c = 0; c < width; ++c) {
            if (c) out += ',';
            const std::size_t n = c / frame.features();
            out += frame.observed(t, n) ? format_number(frame.values[t * width + c]) : "NaN";
        }
        out += '\n';
    }
    return out;
}

void save_series(const std::string& path, const SeriesFrame& frame) { write_text(path, format_series(frame)); }

std::string format_matrix(const Tensor& m) {
    if (m.rank() != 2) throw ShapeError("format_matrix: expected a matrix");
    std::string out;
    for (std::size_t i = 0; i < m.dim(0); ++i) {
        for (std::size_t j = 0; j < m.dim(1); ++j) {
            if (j) out += ',';
            out += format_number(m[i * m.dim(1) + j]);
        }
        out += '\n';
    }
    return out;
}

void save_matrix(const std::string& path, const Tensor& m) { write_text(path, format_matrix(m)); }

Tensor load_matrix(const std::string& path) {
    std::istringstream in(read_text(path));
    std::string line;
    std::vector<double> values;
    std::size_t rows = 0, cols = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto cells = split_commas(line);
        if (rows == 0) cols = cells.size();
        if (cells.size() != cols) throw DataError(path + ": ragged matrix row " + std::to_string(rows + 1));
        for (const auto& c : cells) {
            double v = 0.0;
            if (!parse_double(c, v)) throw DataError(path + ": non-numeric cell '" + c + "'");
            values.push_back(v);
        }
        ++rows;
    }
    return Tensor({rows, cols}, std::move(values));
}

NormStats zscore_fit(const SeriesFrame& frame) {
    const StepRange train = frame.range(SplitPart::train);
    const std::size_t nodes = frame.nodes(), feats = frame.features();
    NormStats stats;
    for (std::size_t d = 0; d < feats; ++d) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t t = train.begin; t < train.end; ++t)
            for (std::size_t n = 0; n < nodes; ++n)
                if (frame.observed(t, n)) {
                    sum += frame.values[(t * nodes + n) * feats + d];
                    ++count;
                }
        if (count < 2) {
            throw DataError("feature " + std::to_string(d) + ": fewer than 2 observed training points");
        }
        const double mean = sum / static_cast<double>(count);
        double sq = 0.0;
        for (std::size_t t = train.begin; t < train.end; ++t)
            for (std::size_t n = 0; n < nodes; ++n)
                if (frame.observed(t, n)) {
                    const double e = frame.values[(t * nodes + n) * feats + d] - mean;
                    sq += e * e;
                }
        const double sd = std::sqrt(sq / static_cast<double>(count));
        if (!(sd > 0.0)) throw DataError("feature " + std::to_string(d) + ": zero variance on the training split");
        stats.mean.push_back(mean);
        stats.std.push_back(sd);
    }
    return stats;
}

namespace {

template <typename F>
SeriesFrame map_observed(const SeriesFrame& frame, const NormStats& stats, F f) {
    if (stats.mean.size() != frame.features()) throw ContractError("norm stats do not match the feature count");
    SeriesFrame out = frame;
    const std::size_t nodes = frame.nodes(), feats = frame.features();
    for (std::size_t t = 0; t < frame.steps(); ++t)
        for (std::size_t n = 0; n < nodes; ++n) {
            if (!frame.observed(t, n)) continue;
            for (std::size_t d = 0; d < feats; ++d) {
                double& v = out.values[(t * nodes + n) * feats + d];
                v = f(v, d);
            }
        }
    return out;
}

} // namespace

SeriesFrame zscore_apply(const SeriesFrame& frame, const NormStats& stats) {
    return map_observed(frame, stats, [&](double v, std::size_t d) { return stats.normalize(v, d); });
}

SeriesFrame zscore_invert(const SeriesFrame& frame, const NormStats& stats) {
    return map_observed(frame, stats, [&](double v, std::size_t d) { return stats.denormalize(v, d); });
}

Normalized zscore_fit_apply(const SeriesFrame& frame) {
    NormStats stats = zscore_fit(frame);
    SeriesFrame normalized = zscore_apply(frame, stats);
    return {std::move(normalized), std::move(stats)};
}

std::vector<std::size_t> window_starts(const SeriesFrame& frame, SplitPart part, std::size_t input_length,
                                       std::size_t horizon) {
    if (input_length == 0 || horizon == 0) throw ContractError("windows: input length and horizon must be positive");
    const StepRange r = frame.range(part);
    const std::size_t span = input_length + horizon;
    if (r.length() < span) {
        throw DataError(to_string(part) + " split has " + std::to_string(r.length()) + " steps, needs at least " +
                        std::to_string(span) + " for one window");
    }
    std::vector<std::size_t> starts;
    for (std::size_t s = r.begin; s + span <= r.end; ++s) starts.push_back(s);
    return starts;
}

ForecastBatch make_batch(const SeriesFrame& raw, const SeriesFrame& normalized, const NormStats& stats,
                         std::span<const std::size_t> starts, std::size_t input_length, std::size_t horizon,
                         std::span<const std::uint8_t> valid) {
    if (starts.empty()) throw ContractError("make_batch: empty batch");
    if (!valid.empty() && valid.size() != starts.size()) throw ContractError("make_batch: validity mask size mismatch");
    const std::size_t b = starts.size(), nodes = raw.nodes(), feats = raw.features();
    ForecastBatch batch;
    batch.inputs = Tensor({b, input_length, nodes, feats});
    batch.targets = Tensor({b, horizon, nodes, feats});
    batch.target_mask.assign(b * horizon * nodes, 0);
    batch.valid.assign(b, 1);
    if (!valid.empty()) batch.valid.assign(valid.begin(), valid.end());
    batch.stats = stats;
    const std::size_t width = nodes * feats;
    for (std::size_t i = 0; i < b; ++i) {
        const std::size_t s = starts[i];
        if (s + input_length + horizon > raw.steps()) throw ContractError("make_batch: window runs past the series");
        for (std::size_t t = 0; t < input_length; ++t)
            for (std::size_t n = 0; n < nodes; ++n) {
                if (!normalized.observed(s + t, n)) continue;
                for (std::size_t d = 0; d < feats; ++d)
                    batch.inputs[((i * input_length + t) * nodes + n) * feats + d] =
                        normalized.values[(s + t) * width + n * feats + d];
            }
        for (std::size_t e = 0; e < horizon; ++e)
            for (std::size_t n = 0; n < nodes; ++n) {
                const std::size_t step = s + input_length + e;
                if (!raw.observed(step, n)) continue;
                batch.target_mask[(i * horizon + e) * nodes + n] = batch.valid[i];
                for (std::size_t d = 0; d < feats; ++d)
                    batch.targets[((i * horizon + e) * nodes + n) * feats + d] = raw.values[step * width + n * feats + d];
            }
    }
    return batch;
}

std::vector<std::vector<std::size_t>> make_batches(std::span<const std::size_t> starts, std::size_t batch_size,
                                                   bool drop_last) {
    if (batch_size == 0) throw ContractError("make_batches: batch size must be positive");
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < starts.size(); i += batch_size) {
        const std::size_t end = std::min(starts.size(), i + batch_size);
        if (drop_last && end - i < batch_size) break;
        out.emplace_back(starts.begin() + static_cast<std::ptrdiff_t>(i), starts.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return out;
}

} // namespace fcdnet::data
