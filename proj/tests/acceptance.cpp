// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.
#include "fcdnet/checkpoint.hpp"
#include "fcdnet/errors.hpp"
#include "fcdnet/fft.hpp"
#include "fcdnet/gradient_suite.hpp"
#include "fcdnet/model.hpp"
#include "fcdnet/synth.hpp"
#include "fcdnet/training.hpp"
#include "fcdnet/wavelet.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace fcdnet;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

Tensor uniform(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    Initializer init(seed);
    return init.uniform(std::move(shape), lo, hi);
}

data::PlantedSpec planted_spec() {
    return data::parse_planted_spec(data::read_text(std::string(FCDNET_SOURCE_DIR) + "/configs/planted.spec"));
}

data::PlantedData planted(std::size_t steps, std::uint64_t seed, const data::PlantedSpec& spec = planted_spec()) {
    const data::PlantedSystem sys = data::make_planted_system(spec, seed);
    return data::generate_planted(sys, steps, seed + 1);
}

// Desk-scale model for the N = 8 planted corpus.
ModelConfig desk_model(std::uint64_t seed) {
    ModelConfig c;
    c.nodes = 8;
    c.input_length = 12;
    c.horizon = 12;
    c.batch_size = 16;
    c.ltfe.period = 48;
    c.ltfe.levels = 3;
    c.ltfe.conv_channels = 8;
    c.ltfe.hidden = 16;
    c.stfe_width = 10;
    c.fagru_hidden = 16;
    c.fagwn_channels = 8;
    c.fagwn_head = 16;
    c.rank = 1;  // substitute-graph rank scaled to N = 8 from the default of 10 on large graphs
    c.seed = seed;
    return c;
}

train::TrainConfig train_config(std::size_t epochs, std::uint64_t seed) {
    train::TrainConfig t;
    t.epochs = epochs;
    t.seed = seed;
    return t;
}

// ---------------------------------------------------------------------------

Outcome perfect_reconstruction() {
    const auto t0 = Clock::now();
    const auto w = signal::Wavelet::daubechies(4);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> x(288);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        for (double& v : x) v = gauss(rng);
        const Tensor parts = signal::reconstruct_levels(signal::dwt_decompose(x, w, 4), w);
        for (std::size_t t = 0; t < 288; ++t) {
            double sum = 0.0;
            for (std::size_t l = 0; l < 5; ++l) sum += parts[t * 5 + l];
            worst = std::max(worst, std::abs(sum - x[t]));
        }
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-8 && secs < 30.0, "max error " + fmt(worst) + " over 1000 signals, " + fmt(secs, 3) + " s"};
}

Outcome fft_correctness() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0, worst_parseval = 0.0;
    for (std::size_t n : {4u, 8u, 12u, 16u, 64u}) {
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> x(n);
            for (double& v : x) v = u(rng);
            const auto fast = signal::fft(std::span<const double>(x));
            double e_time = 0.0, e_freq = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                std::complex<double> acc = 0.0;
                for (std::size_t t = 0; t < n; ++t) {
                    const double ang = -2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n);
                    acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
                }
                worst = std::max(worst, std::abs(acc - fast[k]));
                e_freq += std::norm(fast[k]);
            }
            for (double v : x) e_time += v * v;
            worst_parseval = std::max(worst_parseval, std::abs(e_freq - static_cast<double>(n) * e_time) / e_freq);
        }
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-10 && worst_parseval < 1e-8 && secs < 10.0,
            "max error " + fmt(worst) + ", Parseval " + fmt(worst_parseval) + ", " + fmt(secs, 3) + " s"};
}

Outcome gradient_suite() {
    const auto t0 = Clock::now();
    const auto results = run_gradient_suite("all");
    const double secs = seconds_since(t0);
    bool ok = secs < 120.0;
    std::string failed;
    double worst_op = 0.0, worst_model = 0.0;
    for (const auto& r : results) {
        if (!r.passed()) {
            ok = false;
            failed += " " + r.report.name;
        }
        (r.scope == "model" ? worst_model : worst_op) = std::max(r.scope == "model" ? worst_model : worst_op, r.report.max_rel_error);
    }
    std::string detail = std::to_string(results.size()) + " checks, worst op " + fmt(worst_op) + ", full model " +
                         fmt(worst_model) + ", " + fmt(secs, 3) + " s";
    if (!failed.empty()) detail += "; failed:" + failed;
    return {ok, detail};
}

Outcome graph_validity() {
    const auto t0 = Clock::now();
    std::size_t bad_range = 0, lf_varies = 0, hf_static = 0, impure = 0;
    for (std::uint64_t draw = 0; draw < 100; ++draw) {
        ModelConfig c;
        c.nodes = 5;
        c.input_length = 12;
        c.horizon = 3;
        c.batch_size = 4;
        c.ltfe.period = 16;
        c.ltfe.levels = 3;
        c.ltfe.conv_channels = 4;
        c.ltfe.hidden = 8;
        c.stfe_width = 4;
        c.fagru_hidden = 4;
        c.fagwn_channels = 4;
        c.fagwn_head = 4;
        c.seed = draw;
        std::mt19937_64 rng(1000 + draw);
        std::uniform_real_distribution<double> scale(0.2, 4.0);
        FcdNet model(c, uniform({64, 5, 1}, 2000 + draw, -3, 3), data::NormStats{{0.0}, {1.0}});
        // Random parameter draw: rescale every tensor and jitter it.
        for (Parameter* p : model.parameters()) {
            const double s = scale(rng);
            const Tensor noise = uniform(p->value.shape(), rng(), -0.5, 0.5);
            for (std::size_t i = 0; i < p->value.size(); ++i) p->value[i] = s * p->value[i] + noise[i];
        }
        const Tensor x1 = uniform({4, 12, 5, 1}, 3000 + draw, -3, 3), x2 = uniform({4, 12, 5, 1}, 4000 + draw, -3, 3);
        Tape tape;
        const auto o1 = model.forward(tape, x1);
        const Tensor lf1 = o1.a_lf.value(), hf1 = o1.a_hf.value();
        const auto o2 = model.forward(tape, x2);
        const Tensor lf2 = o2.a_lf.value(), hf2 = o2.a_hf.value();
        const Tensor hf1_again = model.short_term_graph(x1);
        for (const Tensor* g : {&lf1, &hf1, &lf2, &hf2})
            for (double v : g->values())
                if (!std::isfinite(v) || v < 0.0 || v > 1.0) ++bad_range;
        if (!(lf1 == lf2)) ++lf_varies;
        if (hf1 == hf2) ++hf_static;
        if (!(hf1 == hf1_again)) ++impure;
    }
    const double secs = seconds_since(t0);
    return {bad_range == 0 && lf_varies == 0 && hf_static == 0 && impure == 0,
            "100 draws: out-of-range " + std::to_string(bad_range) + ", A_LF batch-dependent " + std::to_string(lf_varies) +
                ", A_HF batch-blind " + std::to_string(hf_static) + ", A_HF impure " + std::to_string(impure) + ", " +
                fmt(secs, 3) + " s"};
}

Outcome linear_parameter_growth() {
    const auto t0 = Clock::now();
    std::vector<long long> counts;
    for (std::size_t n : {50u, 100u, 200u, 400u}) {
        ModelConfig c;  // every default except the node count
        c.nodes = n;
        FcdNet model(c, uniform({576, n, 1}, n), data::NormStats{{0.0}, {1.0}});
        counts.push_back(static_cast<long long>(model.parameter_count()));
    }
    // Unequal spacing: slopes per node must agree exactly.
    const long long d1 = counts[1] - counts[0], d2 = counts[2] - counts[1], d3 = counts[3] - counts[2];
    const bool affine = d2 == 2 * d1 && d3 == 2 * d2;
    std::string detail = "counts";
    for (long long v : counts) detail += " " + std::to_string(v);
    detail += "; slope " + fmt(static_cast<double>(d1) / 50.0, 8) + " per node, second difference " +
              std::to_string(d2 - 2 * d1) + "/" + std::to_string(d3 - 2 * d2) + ", " + fmt(seconds_since(t0), 3) + " s";
    return {affine, detail};
}

Outcome overfit_sanity() {
    const auto t0 = Clock::now();
    // Strong season and little noise: persistence is poor, the windows are learnable.
    data::PlantedSpec spec = planted_spec();
    spec.noise_std = 0.01;
    spec.season_amplitude = 0.5;
    const data::PlantedData pd = planted(600, 11, spec);
    const train::Dataset ds = train::prepare(pd.frame);
    FcdNet model(desk_model(11), train::train_series(ds), ds.stats);
    const auto result = train::train(model, ds, train_config(500, 11));
    const double baseline = train::persistence_baseline(ds, data::SplitPart::train, 12, 12).average.mae;
    const double final_mae = result.log.back().train_mae;
    const double secs = seconds_since(t0);
    return {final_mae < 0.1 * baseline && secs < 300.0,
            "final train MAE " + fmt(final_mae) + " vs persistence " + fmt(baseline) + " (ratio " +
                fmt(final_mae / baseline, 3) + "), " + fmt(secs, 4) + " s"};
}

// One planted-corpus run, shared by the recovery and ablation criteria.
struct PlantedRun {
    double auc_trained = 0.0;
    double auc_untrained = 0.0;
    double test_mae = 0.0;
    double seconds = 0.0;
};

constexpr std::size_t kPlantedSteps = 2000;
constexpr std::size_t kPlantedEpochs = 100;

PlantedRun planted_run(std::uint64_t seed, Ablation mode) {
    const auto t0 = Clock::now();
    const data::PlantedData pd = planted(kPlantedSteps, seed);
    const train::Dataset ds = train::prepare(pd.frame);
    // One-step forecasts: neighbour information only pays off at short range.
    ModelConfig c = desk_model(seed);
    c.horizon = 1;
    c.ablation = mode;
    FcdNet model(c, train::train_series(ds), ds.stats);
    PlantedRun run;
    if (mode != Ablation::no_ltfe) run.auc_untrained = train::graph_auc(model.long_term_graph(), pd.static_graph);
    train::train(model, ds, train_config(kPlantedEpochs, seed));
    if (mode != Ablation::no_ltfe) run.auc_trained = train::graph_auc(model.long_term_graph(), pd.static_graph);
    run.test_mae = train::evaluate(model, ds, data::SplitPart::test).average.mae;
    run.seconds = seconds_since(t0);
    return run;
}

const std::vector<std::uint64_t> kSeeds{1, 2, 3};
std::vector<PlantedRun> full_runs;

const std::vector<PlantedRun>& full_model_runs() {
    if (full_runs.empty())
        for (std::uint64_t s : kSeeds) full_runs.push_back(planted_run(s, Ablation::full));
    return full_runs;
}

Outcome planted_recovery() {
    const auto& runs = full_model_runs();
    double trained = 0.0, untrained = 0.0, secs = 0.0;
    std::string per_seed;
    for (const auto& r : runs) {
        trained += r.auc_trained / 3.0;
        untrained += r.auc_untrained / 3.0;
        secs += r.seconds;
        per_seed += " " + fmt(r.auc_untrained, 3) + "->" + fmt(r.auc_trained, 3);
    }
    return {trained >= 0.7 && trained >= untrained + 0.15 && secs < 600.0,
            "mean AUC trained " + fmt(trained) + ", untrained " + fmt(untrained) + " (per seed" + per_seed + "), " +
                fmt(secs, 4) + " s"};
}

Outcome ablation_direction() {
    const auto& full = full_model_runs();
    double secs = 0.0, m_full = 0.0, m_no_ltfe = 0.0, m_no_stfe = 0.0;
    for (const auto& r : full) {
        m_full += r.test_mae / 3.0;
        secs += r.seconds;
    }
    for (std::uint64_t s : kSeeds) {
        const PlantedRun a = planted_run(s, Ablation::no_ltfe), b = planted_run(s, Ablation::no_stfe);
        m_no_ltfe += a.test_mae / 3.0;
        m_no_stfe += b.test_mae / 3.0;
        secs += a.seconds + b.seconds;
    }
    return {m_full <= m_no_ltfe && m_full <= m_no_stfe && secs < 1800.0,
            "mean test MAE full " + fmt(m_full) + ", no_ltfe " + fmt(m_no_ltfe) + ", no_stfe " + fmt(m_no_stfe) + ", " +
                fmt(secs, 4) + " s"};
}

// Metrics and log rendered bit-exactly.
std::string fingerprint(const train::TrainResult& r, const std::vector<train::MetricReport>& reports) {
    std::ostringstream os;
    for (const auto& row : r.log) os << train::format_log_row(row, false) << "\n";
    char buf[40];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%a ", v);
        os << buf;
    };
    for (const auto& rep : reports) {
        for (const auto* m : {&rep.average}) {
            put(m->mae);
            put(m->rmse);
            put(m->mape.value_or(-1.0));
        }
        for (const auto& h : rep.horizons) {
            put(h.mae);
            put(h.rmse);
            put(h.mape.value_or(-1.0));
        }
        os << "\n";
    }
    return os.str();
}

Outcome schedule_and_masking() {
    const auto t0 = Clock::now();
    const bool lr_ok = train::lr_schedule(0) == 3e-3 && train::lr_schedule(10) == 3e-4 && train::lr_schedule(40) == 3e-5;

    data::SeriesFrame raw = planted(400, 21).frame;
    std::mt19937_64 rng(22);
    std::bernoulli_distribution drop(0.05);
    std::size_t masked = 0;
    for (std::size_t i = 0; i < raw.mask.size(); ++i)
        if (drop(rng)) {
            raw.mask[i] = 0;
            ++masked;
        }
    data::SeriesFrame flipped = raw;
    std::uniform_real_distribution<double> junk(-50.0, 50.0);
    for (std::size_t i = 0; i < raw.mask.size(); ++i)
        if (!raw.mask[i]) flipped.values[i] = junk(rng);

    auto run = [](const data::SeriesFrame& frame) {
        const train::Dataset ds = train::prepare(frame);
        ModelConfig c = desk_model(23);
        c.ltfe.period = 32;
        FcdNet model(c, train::train_series(ds), ds.stats);
        const auto result = train::train(model, ds, train_config(3, 23));
        std::vector<train::MetricReport> reports;
        for (auto part : {data::SplitPart::train, data::SplitPart::val, data::SplitPart::test})
            reports.push_back(train::evaluate(model, ds, part));
        return fingerprint(result, reports);
    };
    const bool mask_ok = run(raw) == run(flipped);
    return {lr_ok && mask_ok, std::string("lr(0), lr(10), lr(40) ") + (lr_ok ? "exact" : "inexact") + "; " +
                                  std::to_string(masked) + " masked entries flipped, metrics and logs " +
                                  (mask_ok ? "bitwise identical" : "differ") + ", " + fmt(seconds_since(t0), 3) + " s"};
}

Outcome determinism() {
    const auto t0 = Clock::now();
    const train::Dataset ds = train::prepare(planted(400, 31).frame);
    auto run = [&] {
        ModelConfig c = desk_model(32);
        c.ltfe.period = 32;
        FcdNet model(c, train::train_series(ds), ds.stats);
        const auto result = train::train(model, ds, train_config(4, 32));
        std::string log;
        for (const auto& row : result.log) log += train::format_log_row(row, false) + "\n";
        return log + checkpoint_json(make_checkpoint(model, RunConfig{}));
    };
    const bool same = run() == run();
    return {same, std::string("two 4-epoch runs: logs and weights ") + (same ? "identical" : "differ") + ", " +
                      fmt(seconds_since(t0), 3) + " s"};
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"perfect reconstruction", perfect_reconstruction},
        {"FFT correctness", fft_correctness},
        {"gradient suite", gradient_suite},
        {"graph validity", graph_validity},
        {"linear parameter growth", linear_parameter_growth},
        {"overfit sanity", overfit_sanity},
        {"planted-graph recovery", planted_recovery},
        {"ablation direction", ablation_direction},
        {"schedule and masking", schedule_and_masking},
        {"determinism", determinism},
    };
    std::set<std::size_t> selected;
    for (int i = 1; i < argc; ++i) selected.insert(static_cast<std::size_t>(std::stoul(argv[i])));

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!selected.empty() && !selected.count(i + 1)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        if (!o.passed) ++failures;
        std::cout << "criterion " << i + 1 << " [" << (o.passed ? "PASS" : "FAIL") << "] " << criteria[i].first << ": "
                  << o.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
