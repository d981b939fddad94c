#pragma once

#include "bst/config.hpp"
#include "bst/io.hpp"
#include "bst/metrics.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

namespace bst {

struct AlgorithmSpec {
    Variant variant = Variant::t_gbomp;
    Index s = 1;
    std::string label;
};

/// "t-gbomp:3" -> {t_gbomp, s=3}; a bare name means s = 1.
inline AlgorithmSpec parse_algorithm(const std::string& text) {
    AlgorithmSpec spec;
    spec.label = text;
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        spec.variant = variant_from_name(text);
        return spec;
    }
    spec.variant = variant_from_name(text.substr(0, colon));
    spec.s = static_cast<Index>(std::stoll(text.substr(colon + 1)));
    if (spec.s < 1) throw std::invalid_argument("selection parameter must be >= 1");
    return spec;
}

struct ExperimentSpec {
    EnsembleStyle style = EnsembleStyle::gaussian;
    std::vector<std::vector<Index>> measurement_grid;  // >= 1 per-mode splits
    BlockStructure structure;
    SignalFamily family = SignalFamily::gaussian;
    std::vector<Index> k_grid;
    std::vector<double> snr_grid_db;  // empty = noiseless
    std::vector<AlgorithmSpec> algorithms;
    Index trials = 200;
    std::uint64_t seed = 1;
    std::string output = "results.csv";
    bool annotate_bounds = false;

    void validate() const {
        if (trials < 1) throw std::invalid_argument("trials must be >= 1");
        if (measurement_grid.empty() || k_grid.empty() || algorithms.empty())
            throw std::invalid_argument("experiment grids must be nonempty");
        for (const auto& m : measurement_grid)
            if (static_cast<int>(m.size()) != structure.modes())
                throw std::invalid_argument("measurement split must cover every mode");
        for (Index k : k_grid)
            if (k < 1 || k > structure.block_count())
                throw std::invalid_argument("block sparsity grid value out of range");
    }
};

inline EnsembleStyle ensemble_style_from_name(const std::string& name) {
    if (name == "gaussian") return EnsembleStyle::gaussian;
    if (name == "block-orthogonal") return EnsembleStyle::gaussian_block_orthogonal;
    if (name == "high-coherence") return EnsembleStyle::high_coherence_small_dim;
    throw std::invalid_argument("unknown ensemble style: " + name);
}

inline SignalFamily signal_family_from_name(const std::string& name) {
    if (name == "gaussian") return SignalFamily::gaussian;
    if (name == "2-pam") return SignalFamily::two_pam;
    throw std::invalid_argument("unknown signal family: " + name);
}

inline ExperimentSpec experiment_from_config(const ConfigTree& cfg) {
    ExperimentSpec spec;
    spec.style = ensemble_style_from_name(cfg.get_string("ensemble.style", "gaussian"));
    const std::vector<Index> n_dims = cfg.get_index_list("structure.N");
    const std::vector<Index> d = cfg.get_index_list("structure.d");
    if (n_dims.size() != d.size())
        throw std::invalid_argument("structure.N and structure.d must have equal length");
    std::vector<Index> s(n_dims.size());
    for (std::size_t i = 0; i < n_dims.size(); ++i) {
        if (d[i] < 1 || n_dims[i] % d[i] != 0)
            throw std::invalid_argument("structure.N must be divisible by structure.d per mode");
        s[i] = n_dims[i] / d[i];
    }
    spec.structure = BlockStructure(d, s);

    if (cfg.has("grid.M"))
        spec.measurement_grid = cfg.get_index_list_of_lists("grid.M");
    else
        spec.measurement_grid = {cfg.get_index_list("ensemble.M")};

    spec.family = signal_family_from_name(cfg.get_string("signal.family", "gaussian"));
    spec.k_grid = cfg.get_index_list("grid.k");
    if (cfg.has("grid.snr_db")) {
        const std::string raw = cfg.get_string("grid.snr_db");
        if (raw != "noiseless") spec.snr_grid_db = cfg.get_double_list("grid.snr_db");
    }
    for (const std::string& name : cfg.get_string_list("algorithms"))
        spec.algorithms.push_back(parse_algorithm(name));
    spec.trials = cfg.get_index("trials", 200);
    spec.seed = static_cast<std::uint64_t>(cfg.get_index("seed", 1));
    spec.output = cfg.get_string("output", "results.csv");
    spec.annotate_bounds = cfg.get_string("bounds", "false") == "true";
    spec.validate();
    return spec;
}

struct ResultRow {
    std::string algorithm;
    Index k = 0;
    Index d_prod = 0;
    Index m_prod = 0;
    Index n_prod = 0;
    double snr_db = std::numeric_limits<double>::infinity();  // infinity = noiseless
    Index trials = 0;
    double err = 0.0;
    double false_alarm = 0.0;
    double nmse = 0.0;
    std::vector<std::pair<std::string, double>> bounds;  // optional annotations
};

inline std::string result_csv_header(const std::vector<ResultRow>& rows) {
    std::string header = "algorithm,k,d_prod,M_prod,N_prod,snr_db,trials,err,false_alarm,nmse";
    if (!rows.empty())
        for (const auto& [key, value] : rows.front().bounds) header += ",bound_" + key;
    return header;
}

inline std::string to_csv(const std::vector<ResultRow>& rows) {
    std::string out = result_csv_header(rows) + "\n";
    for (const auto& r : rows) {
        out += r.algorithm + "," + std::to_string(r.k) + "," + std::to_string(r.d_prod) + "," +
               std::to_string(r.m_prod) + "," + std::to_string(r.n_prod) + "," +
               format_double(r.snr_db) + "," + std::to_string(r.trials) + "," +
               format_double(r.err) + "," + format_double(r.false_alarm) + "," +
               format_double(r.nmse);
        for (const auto& [key, value] : r.bounds) out += "," + format_double(value);
        out += "\n";
    }
    return out;
}

inline std::vector<ResultRow> parse_result_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty CSV");
    std::vector<std::string> headers;
    {
        std::istringstream hs(line);
        std::string tok;
        while (std::getline(hs, tok, ',')) headers.push_back(tok);
    }
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ',')) cells.push_back(tok);
        if (cells.size() != headers.size()) throw std::invalid_argument("ragged CSV row");
        ResultRow r;
        r.algorithm = cells[0];
        r.k = std::stoll(cells[1]);
        r.d_prod = std::stoll(cells[2]);
        r.m_prod = std::stoll(cells[3]);
        r.n_prod = std::stoll(cells[4]);
        r.snr_db = std::stod(cells[5]);
        r.trials = std::stoll(cells[6]);
        r.err = std::stod(cells[7]);
        r.false_alarm = std::stod(cells[8]);
        r.nmse = std::stod(cells[9]);
        for (std::size_t c = 10; c < cells.size(); ++c)
            r.bounds.emplace_back(headers[c].substr(6), std::stod(cells[c]));
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace detail {

inline unsigned worker_count(Index trials) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("BSTL_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
    }
    return std::min<unsigned>(hw, static_cast<unsigned>(std::max<Index>(1, trials)));
}

inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t point, std::uint64_t trial) {
    return mix64(mix64(master) ^ mix64(point * 0x9E3779B97F4A7C15ull) ^
                 (trial + 1) * 0xD1B54A32D192ED03ull);
}

struct TrialScore {
    bool failed = false;
    bool exact = false;
    double false_alarm = 0.0;
    double nmse = 0.0;
    std::vector<double> residual_norms;
    double orthogonality_defect = 0.0;
};

}  // namespace detail

/// One grid-point trial for every algorithm in the spec, on shared data.
/// The measurement matrices are fixed per grid point; the trial seed
/// drives the signal and the noise. The miss-detection ratio is computed
/// as |truth \ selected| / |truth|, which equals the false-alarm ratio
/// whenever the cardinalities agree and stays defined when an algorithm
/// terminated with a smaller support.
inline std::vector<detail::TrialScore> run_trial(const ExperimentSpec& spec,
                                                 const MeasurementEnsemble& ensemble, Index k,
                                                 double snr_target_db, bool noiseless,
                                                 std::uint64_t seed) {
    SignalSpec ss{spec.structure, k, spec.family, seed};
    const auto [x_true, support_true] = gen_signal(ss);
    const DenseTensor y_clean = ensemble.measure(x_true);
    DenseTensor y = y_clean;
    if (!noiseless) y = add_noise(y_clean, snr_target_db, seed).first;

    const std::set<Index> truth = scalar_support(support_true);
    std::vector<detail::TrialScore> scores;
    scores.reserve(spec.algorithms.size());
    for (const AlgorithmSpec& alg : spec.algorithms) {
        detail::TrialScore score;
        try {
            // Noisy runs must not stop on the residual tolerance; force the
            // full iteration budget with eps = 0.
            const double eps = noiseless ? -1.0 : 0.0;
            VariantOutcome out = run_variant(alg.variant, y, ensemble, k, alg.s, eps);
            score.exact = exact_match(out.estimate, x_true, out.selected_scalars, truth);
            std::size_t missed = 0;
            for (Index i : truth)
                if (!out.selected_scalars.count(i)) ++missed;
            score.false_alarm = static_cast<double>(missed) / static_cast<double>(truth.size());
            score.nmse = nmse(out.estimate, x_true);
            score.residual_norms = out.raw.residual_norms;
            score.orthogonality_defect = out.raw.orthogonality_defect;
        } catch (const std::exception&) {
            score.failed = true;
            score.false_alarm = 1.0;
            score.nmse = 1.0;
        }
        scores.push_back(std::move(score));
    }
    return scores;
}

/// Config-driven Monte Carlo sweep over (measurement split, k, SNR) x
/// algorithm; trials fan out to a worker pool and are folded in trial
/// order, so the output is deterministic under the master seed.
inline std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const std::vector<double> snr_points =
        spec.snr_grid_db.empty() ? std::vector<double>{std::numeric_limits<double>::infinity()}
                                 : spec.snr_grid_db;
    const bool noiseless = spec.snr_grid_db.empty();

    std::vector<ResultRow> rows;
    std::uint64_t point_id = 0;
    std::uint64_t m_index = 0;
    for (const auto& m_dims : spec.measurement_grid) {
        // One matrix set per measurement split, shared across the k and
        // SNR sweeps, as in the reported protocol (each figure quotes the
        // coherence of its one set).
        const MeasurementEnsemble ensemble = gen_ensemble(
            {m_dims, spec.structure, spec.style, detail::trial_seed(spec.seed, m_index, 0)});
        ++m_index;
        for (Index k : spec.k_grid) {
            for (double snr_point : snr_points) {
                std::vector<std::vector<detail::TrialScore>> per_trial(spec.trials);
                std::atomic<Index> cursor{0};
                const unsigned workers = detail::worker_count(spec.trials);
                std::vector<std::thread> pool;
                pool.reserve(workers);
                for (unsigned w = 0; w < workers; ++w)
                    pool.emplace_back([&]() {
                        for (;;) {
                            const Index t = cursor.fetch_add(1);
                            if (t >= spec.trials) return;
                            per_trial[t] =
                                run_trial(spec, ensemble, k, snr_point, noiseless,
                                          detail::trial_seed(spec.seed, point_id, t + 1));
                        }
                    });
                for (auto& th : pool) th.join();

                Index m_prod = 1, n_prod = 1, d_prod = spec.structure.block_volume();
                for (Index m : m_dims) m_prod *= m;
                for (int i = 0; i < spec.structure.modes(); ++i)
                    n_prod *= spec.structure.signal_dim(i);

                for (std::size_t a = 0; a < spec.algorithms.size(); ++a) {
                    ResultRow row;
                    row.algorithm = spec.algorithms[a].label;
                    row.k = k;
                    row.d_prod = d_prod;
                    row.m_prod = m_prod;
                    row.n_prod = n_prod;
                    row.snr_db = snr_point;
                    row.trials = spec.trials;
                    double exact = 0.0, fa = 0.0, nm = 0.0;
                    for (Index t = 0; t < spec.trials; ++t) {
                        exact += per_trial[t][a].exact ? 1.0 : 0.0;
                        fa += per_trial[t][a].false_alarm;
                        nm += per_trial[t][a].nmse;
                    }
                    row.err = exact / spec.trials;
                    row.false_alarm = fa / spec.trials;
                    row.nmse = nm / spec.trials;
                    if (spec.annotate_bounds) {
                        const CoherenceProfile profile = coherence_profile(ensemble);
                        const SparsityCaps caps = mixed_norm_sparsity_caps(profile, 1e-6);
                        row.bounds.emplace_back("sparsity_cap_least", caps.least.value);
                        const SnrThreshold snr_bound = snr_threshold(
                            profile, k, spec.algorithms[a].s, static_cast<double>(k), 1.0);
                        row.bounds.emplace_back("snr_asymptotic_db", snr_bound.asymptotic_db.value);
                    }
                    rows.push_back(std::move(row));
                }
                ++point_id;
            }
        }
    }
    return rows;
}

inline void write_result_csv(const std::string& path, const std::vector<ResultRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << to_csv(rows);
}

}  // namespace bst
