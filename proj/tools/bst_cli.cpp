// Command-line front end: coherence profiles, closed-form bounds, single
// recoveries, config-driven sweeps, and figure presets.

#include "bst/bounds.hpp"
#include "bst/experiment.hpp"
#include "bst/io.hpp"
#include "bst/recovery.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace {

using namespace bst;

CoherenceProfile profile_from_config(const ConfigTree& cfg) {
    CoherenceProfile p;
    p.modes = static_cast<int>(cfg.get_index("n"));
    if (p.modes < 1) throw std::invalid_argument("n must be >= 1");
    const std::vector<Index> d = cfg.get_index_list("d");
    if (static_cast<int>(d.size()) != p.modes)
        throw std::invalid_argument("d must list one block length per mode");
    p.d = d;

    auto broadcast = [&](const std::string& key) {
        std::vector<double> v = cfg.get_double_list(key);
        if (v.size() == 1) v.assign(p.modes, v[0]);
        if (static_cast<int>(v.size()) != p.modes)
            throw std::invalid_argument(key + " must have 1 or n entries");
        return v;
    };
    p.mutual_block = broadcast("varpi");
    p.mutual_sub = broadcast("tau");
    p.mu.assign(p.modes, p.mutual_block[0]);
    p.nu.assign(p.modes, p.mutual_sub[0]);
    p.mu_plain.assign(p.modes, p.mutual_block[0]);
    return p;
}

int cmd_coherence(const std::vector<std::string>& files, const std::vector<Index>& d_arg) {
    std::vector<Matrix> mats;
    for (const auto& f : files) mats.push_back(read_matrix(f));
    std::vector<Index> d = d_arg;
    if (d.empty()) d.assign(mats.size(), 1);
    if (d.size() != mats.size())
        throw std::invalid_argument("--d must list one block length per matrix");
    std::vector<Index> s(mats.size());
    for (std::size_t i = 0; i < mats.size(); ++i) {
        if (mats[i].cols() % d[i] != 0)
            throw std::invalid_argument("matrix width not divisible by block length");
        s[i] = mats[i].cols() / d[i];
    }
    MeasurementEnsemble e =
        MeasurementEnsemble::renormalized(std::move(mats), BlockStructure(d, s));
    const CoherenceProfile p = coherence_profile(e);
    for (int i = 0; i < p.modes; ++i)
        std::cout << "matrix " << i << ": coherence " << format_double(p.mu_plain[i])
                  << "  block " << format_double(p.mu[i]) << "  sub " << format_double(p.nu[i])
                  << "\n";
    for (int t = 0; t < p.modes; ++t)
        std::cout << "shared " << t << ": mutual_block " << format_double(p.mutual_block[t])
                  << "  mutual_sub " << format_double(p.mutual_sub[t]) << "\n";
    return 0;
}

int cmd_bounds(const std::string& config_path, const std::string& csv_out) {
    const ConfigTree cfg = ConfigTree::parse_file(config_path);
    const CoherenceProfile p = profile_from_config(cfg);
    const Index k = cfg.get_index("k", 1);
    const Index s = cfg.get_index("s", 1);
    const Index l_star = cfg.get_index("l_star", k);
    const double shadow = cfg.get_double("shadow_product", static_cast<double>(k));
    const double eps = cfg.get_double("eps", 0.0);
    const double noise = cfg.get_double("noise_norm", 0.0);
    const double mar = cfg.get_double("mar", 1.0);
    const double theta = cfg.get_double("theta", 1e-6);
    const double gamma = cfg.get_double("gamma", 1.0);
    const double eta = cfg.get_double("eta", 1.0);

    BoundReport report;
    report.add("k", static_cast<double>(k));
    report.add("s", static_cast<double>(s));
    report.add("block_volume", static_cast<double>(p.block_volume()));
    report.add("mutual_block_0", p.mutual_block[0]);
    report.add("mutual_sub_0", p.mutual_sub[0]);

    const GramBounds w = gram_eigenvalue_bounds(p, static_cast<double>(k));
    report.add("gram_lower_k", w.lower);
    report.add("gram_upper_k", w.upper);
    report.add("sparsity_cap_least",
               reconstructible_sparsity(p, s, SparsityRegime::least_restricted));
    report.add("sparsity_cap_most", reconstructible_sparsity(p, s, SparsityRegime::most_restricted));
    const SparsityCaps caps = mixed_norm_sparsity_caps(p, theta);
    report.add("mixed_norm_cap_least", caps.least);
    report.add("mixed_norm_cap_most", caps.most);
    report.add("residual_decay_factor", residual_decay_factor(p, k, s, shadow, k - 1));
    report.add("stopping_error_cap", stopping_error_bound(p, k, s, l_star, shadow, eps, noise));
    const SnrThreshold snr = snr_threshold(p, k, s, shadow, mar);
    report.add("snr_exact_db", snr.exact_db);
    report.add("snr_asymptotic_db", snr.asymptotic_db);
    report.add("recovery_error_cap", recovery_error_bound(p, k, s, shadow, noise));
    const ResidualNoiseFactors xi = residual_noise_factors(p, k, s, 0, k, eta, gamma);
    report.add("residual_factor_general", xi.general);
    report.add("residual_factor_self", xi.self_contained);
    report.add("stage_count", static_cast<double>(xi.stage_count_self));
    if (xi.self_contained.ok())
        report.add("residual_error_cap",
                   residual_based_error_bound(p, k, s, shadow, noise, xi.self_contained.value));

    for (const auto& entry : report.entries())
        std::cout << entry.key << " = "
                  << (entry.flag.empty() ? format_double(entry.value) : "violated: " + entry.flag)
                  << "\n";
    if (!csv_out.empty()) {
        std::ofstream out(csv_out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + csv_out);
        out << report.to_csv();
    }
    return 0;
}

int cmd_recover(const std::string& y_path, const std::vector<std::string>& matrix_paths,
                Index k, Index s, double eps, const std::vector<Index>& d_arg) {
    const DenseTensor y = read_tensor_text(y_path);
    std::vector<Matrix> mats;
    for (const auto& f : matrix_paths) mats.push_back(read_matrix(f));
    std::vector<Index> d = d_arg;
    if (d.empty()) d.assign(mats.size(), 1);
    std::vector<Index> s_counts(mats.size());
    for (std::size_t i = 0; i < mats.size(); ++i) s_counts[i] = mats[i].cols() / d[i];
    MeasurementEnsemble e =
        MeasurementEnsemble::renormalized(std::move(mats), BlockStructure(d, s_counts));

    RecoveryConfig cfg;
    cfg.k = k;
    cfg.s = s;
    cfg.eps = eps;
    const RecoveryResult result = tgbomp(y, e, cfg);

    std::cout << "iterations " << result.iterations << "\n";
    std::cout << "support (0-based tuples):\n";
    for (const auto& tuple : result.support.tuples()) {
        std::cout << " ";
        for (Index i : tuple) std::cout << " " << i;
        std::cout << "\n";
    }
    std::cout << "residual norms:";
    for (double r : result.residual_norms) std::cout << " " << format_double(r);
    std::cout << "\n";
    if (result.rank_deficient) std::cout << "note: minimum-norm fallback used\n";
    return 0;
}

int cmd_simulate(const std::string& config_path, Index trials_override, long long seed_override,
                 const std::string& output_override) {
    ConfigTree cfg = ConfigTree::parse_file(config_path);
    if (trials_override > 0) cfg.set("trials", std::to_string(trials_override));
    if (seed_override >= 0) cfg.set("seed", std::to_string(seed_override));
    if (!output_override.empty()) cfg.set("output", output_override);
    const ExperimentSpec spec = experiment_from_config(cfg);
    const std::vector<ResultRow> rows = run_experiment(spec);
    write_result_csv(spec.output, rows);
    std::cout << "wrote " << rows.size() << " rows to " << spec.output << "\n";
    return 0;
}

std::string preset_path(const std::string& figure) {
    namespace fs = std::filesystem;
    std::vector<fs::path> roots;
    if (const char* env = std::getenv("BSTL_CONFIG_DIR")) roots.emplace_back(env);
    roots.emplace_back("configs");
#ifdef BST_CONFIG_DIR
    roots.emplace_back(BST_CONFIG_DIR);
#endif
    for (const auto& root : roots) {
        const fs::path candidate = root / ("fig" + figure + ".cfg");
        if (fs::exists(candidate)) return candidate.string();
    }
    throw std::invalid_argument("no preset config found for figure " + figure);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"block-sparse tensor recovery toolkit"};
    app.require_subcommand(1);

    auto* coherence = app.add_subcommand("coherence", "print the coherence profile of a matrix set");
    std::vector<std::string> matrix_files;
    std::vector<Index> d_list;
    coherence->add_option("files", matrix_files, "matrix files (text or binary)")->required();
    coherence->add_option("--d", d_list, "block length per matrix (default 1)");

    auto* bounds = app.add_subcommand("bounds", "evaluate closed-form guarantees from a config");
    std::string bounds_config, bounds_csv;
    bounds->add_option("config", bounds_config, "bounds config file")->required();
    bounds->add_option("--csv", bounds_csv, "also write a flat key/value CSV row");

    auto* recover = app.add_subcommand("recover", "run block recovery on a measurement tensor");
    std::string y_file;
    std::vector<std::string> recover_mats;
    std::vector<Index> recover_d;
    Index rec_k = 1, rec_s = 1;
    double rec_eps = -1.0;
    recover->add_option("y", y_file, "measurement tensor file")->required();
    recover->add_option("matrices", recover_mats, "one measurement matrix per mode")->required();
    recover->add_option("--k", rec_k, "block sparsity budget");
    recover->add_option("--s", rec_s, "selection count per iteration");
    recover->add_option("--eps", rec_eps, "residual tolerance (absolute)");
    recover->add_option("--d", recover_d, "block length per mode (default 1)");

    auto* simulate = app.add_subcommand("simulate", "run a config-driven Monte Carlo sweep");
    std::string sim_config, sim_output;
    Index sim_trials = 0;
    long long sim_seed = -1;
    simulate->add_option("config", sim_config, "experiment config file")->required();
    simulate->add_option("--trials", sim_trials, "override trial count");
    simulate->add_option("--seed", sim_seed, "override master seed");
    simulate->add_option("--output", sim_output, "override output CSV path");

    auto* figure = app.add_subcommand("figure", "run a figure-reproduction preset");
    std::string fig_id, fig_output;
    Index fig_trials = 0;
    long long fig_seed = -1;
    figure->add_option("id", fig_id, "one of 3a 3b 3c 3d 4a 4b 5a 5b 6a 6b")->required();
    figure->add_option("--trials", fig_trials, "override trial count");
    figure->add_option("--seed", fig_seed, "override master seed");
    figure->add_option("--output", fig_output, "override output CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (coherence->parsed()) return cmd_coherence(matrix_files, d_list);
        if (bounds->parsed()) return cmd_bounds(bounds_config, bounds_csv);
        if (recover->parsed())
            return cmd_recover(y_file, recover_mats, rec_k, rec_s, rec_eps, recover_d);
        if (simulate->parsed()) return cmd_simulate(sim_config, sim_trials, sim_seed, sim_output);
        if (figure->parsed()) return cmd_simulate(preset_path(fig_id), fig_trials, fig_seed, fig_output);
    } catch (const std::invalid_argument& err) {
        std::cerr << "invalid input: " << err.what() << "\n";
        return 2;
    } catch (const std::out_of_range& err) {
        std::cerr << "invalid input: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "runtime failure: " << err.what() << "\n";
        return 3;
    }
    return 1;
}
