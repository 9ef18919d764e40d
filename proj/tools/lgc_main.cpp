// Command-line driver: simulate | fit | diagnose | replicate.
// JSON configuration in, CSV/JSON artifacts out; every run is a pure
// function of (config, seed).

#include <CLI11.hpp>
#include <json.hpp>

#include "lgc/csvio.hpp"
#include "lgc/diagnostics.hpp"
#include "lgc/errors.hpp"
#include "lgc/estimation.hpp"
#include "lgc/fitjson.hpp"
#include "lgc/link.hpp"
#include "lgc/parallel.hpp"
#include "lgc/sampler.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

using nlohmann::json;

namespace {

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> particles;
    std::optional<std::string> filter;
    std::string out_dir;
    bool debug_latent = false;
};

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw lgc::config_error("cannot open config '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw lgc::config_error("config '" + path + "': " + e.what());
    }
}

std::string out_path(const CliOverrides& cli, const std::string& name) {
    if (cli.out_dir.empty()) return name;
    std::filesystem::create_directories(cli.out_dir);
    return (std::filesystem::path(cli.out_dir) / name).string();
}

double need_number(const json& j, const std::string& path, const std::string& key) {
    if (!j.contains(key) || !j[key].is_number()) {
        throw lgc::config_error(path + "." + key + ": expected a number");
    }
    return j[key].get<double>();
}

std::vector<double> number_list(const json& j, const std::string& path) {
    if (!j.is_array()) throw lgc::config_error(path + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw lgc::config_error(path + ": expected numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

lgc::MarginalSpec parse_marginal(const json& j, const std::string& path) {
    if (!j.contains("family")) throw lgc::config_error(path + ".family: missing");
    const lgc::Family fam = lgc::family_from_name(j["family"].get<std::string>());
    const json& p = j.contains("params") ? j["params"] : j;
    switch (fam) {
        case lgc::Family::poisson:
            return {fam, {need_number(p, path, "lambda")}};
        case lgc::Family::binomial:
            return {fam, {need_number(p, path, "N"), need_number(p, path, "p")}};
        case lgc::Family::negbinomial:
            if (p.contains("mu")) {
                return lgc::from_glm(fam, need_number(p, path, "mu"), {need_number(p, path, "k")});
            }
            return {fam, {need_number(p, path, "r"), need_number(p, path, "p")}};
        case lgc::Family::genpoisson:
            if (p.contains("mu")) {
                return lgc::from_glm(fam, need_number(p, path, "mu"), {need_number(p, path, "alpha")});
            }
            return {fam, {need_number(p, path, "lambda"), need_number(p, path, "eta")}};
        case lgc::Family::cmp:
            return {fam, {need_number(p, path, "lambda"), need_number(p, path, "nu")}};
        case lgc::Family::mixpoisson: {
            if (!p.contains("lambda") || !p["lambda"].is_array()) {
                throw lgc::config_error(path + ".lambda: expected an array for mixpoisson");
            }
            std::vector<double> lam = number_list(p["lambda"], path + ".lambda");
            std::vector<double> w =
                p.contains("p") ? number_list(p["p"], path + ".p") : std::vector<double>{};
            if (w.size() + 1 != lam.size()) {
                throw lgc::config_error(path + ": mixpoisson needs M lambdas and M-1 weights");
            }
            lam.insert(lam.end(), w.begin(), w.end());
            return {fam, lam};
        }
    }
    throw lgc::config_error(path + ".family: unknown");
}

lgc::LatentModel parse_latent(const json& j, const std::string& path) {
    lgc::LatentModel m;
    if (j.contains("ar")) m.ar = number_list(j["ar"], path + ".ar");
    if (j.contains("ma")) m.ma = number_list(j["ma"], path + ".ma");
    m.validate();
    return m;
}

lgc::FilterKind parse_filter(const json& j, const CliOverrides& cli) {
    std::string name = j.value("filter", std::string("sisr"));
    if (cli.filter) name = *cli.filter;
    return lgc::filter_kind_from_name(name);
}

std::uint64_t pick_seed(const json& j, const CliOverrides& cli) {
    if (cli.seed) return *cli.seed;
    return j.value("seed", std::uint64_t{1});
}

int pick_particles(const json& j, const CliOverrides& cli) {
    if (cli.particles) return *cli.particles;
    return j.value("particles", 1000);
}

// ---------------------------------------------------------------------------

int cmd_simulate(const json& cfg, const CliOverrides& cli) {
    const int T = static_cast<int>(need_number(cfg, "config", "T"));
    if (T < 0) throw lgc::config_error("config.T: must be nonnegative");
    const std::uint64_t seed = pick_seed(cfg, cli);
    const lgc::LatentModel latent =
        cfg.contains("latent") ? parse_latent(cfg["latent"], "config.latent") : lgc::LatentModel{};
    const bool debug = cli.debug_latent || cfg.value("debug_latent", false);
    const std::string out = out_path(cli, cfg.value("out", std::string("sim.csv")));

    lgc::SimulatedSeries series;
    std::vector<std::vector<double>> cov;
    if (cfg.contains("regression")) {
        const json& r = cfg["regression"];
        lgc::RegressionSpec reg;
        reg.family = lgc::family_from_name(r.value("family", std::string("poisson")));
        reg.beta = number_list(r.at("beta"), "config.regression.beta");
        reg.link_param = r.value("link_param", std::string("mean"));
        if (r.contains("statics")) reg.statics = number_list(r["statics"], "config.regression.statics");
        if (r.contains("covariates_csv")) {
            const lgc::CsvTable tab = lgc::read_csv(r["covariates_csv"].get<std::string>());
            for (const auto& row : tab.rows) reg.covariates.push_back(row);
        } else if (r.contains("covariates")) {
            for (const auto& row : r["covariates"]) {
                reg.covariates.push_back(number_list(row, "config.regression.covariates"));
            }
        }
        if (static_cast<int>(reg.covariates.size()) != T + 1) {
            throw lgc::config_error("config.regression: covariate rows must number T+1");
        }
        cov = reg.covariates;
        series = lgc::simulate_series(reg, latent, seed);
    } else if (cfg.contains("marginal")) {
        const lgc::MarginalSpec spec = parse_marginal(cfg["marginal"], "config.marginal");
        series = lgc::simulate_series(spec, latent, T, seed);
    } else {
        throw lgc::config_error("config: need 'marginal' or 'regression'");
    }

    std::vector<std::string> cols{"t", "x"};
    if (debug) cols.push_back("z");
    for (std::size_t jx = 0; !cov.empty() && jx < cov[0].size(); ++jx) {
        cols.push_back("m" + std::to_string(jx + 1));
    }
    lgc::CsvWriter w(cols);
    for (std::size_t t = 0; t < series.x.size(); ++t) {
        std::vector<double> row{static_cast<double>(t), static_cast<double>(series.x[t])};
        if (debug) row.push_back(series.z[t]);
        if (!cov.empty()) row.insert(row.end(), cov[t].begin(), cov[t].end());
        w.add_row(row);
    }
    w.write(out);
    std::printf("wrote %s (%zu rows)\n", out.c_str(), series.x.size());
    return 0;
}

struct FitJob {
    std::string estimator;
    int p = 0;
    int q = 0;
};

int cmd_fit(const json& cfg, const CliOverrides& cli) {
    const std::string data_path = cfg.value("data_csv", std::string());
    if (data_path.empty()) throw lgc::config_error("config.data_csv: missing");
    const lgc::CsvTable tab = lgc::read_csv(data_path);
    const std::vector<std::int64_t> data = tab.int_column(cfg.value("count_column", std::string("x")));
    if (data.empty()) throw lgc::data_error("fit: no observations in '" + data_path + "'");

    lgc::ModelSpec model;
    model.family = lgc::family_from_name(cfg.value("family", std::string("poisson")));
    model.binomial_n = cfg.value("binomial_N", 1.0);
    model.link_param = cfg.value("link_param", std::string("mean"));
    if (cfg.contains("covariate_columns")) {
        std::vector<std::vector<double>> cov(data.size());
        for (const auto& c : cfg["covariate_columns"]) {
            const std::vector<double> col = tab.column(c.get<std::string>());
            for (std::size_t t = 0; t < data.size(); ++t) cov[t].push_back(col[t]);
        }
        model.covariates = std::move(cov);
    }

    lgc::EstimOptions opts;
    opts.seed = pick_seed(cfg, cli);
    opts.particles = pick_particles(cfg, cli);
    opts.filter = parse_filter(cfg, cli);
    opts.global_search = cfg.value("optimizer", std::string("crn")) == "global";

    std::vector<std::string> estimators;
    if (cfg.contains("estimators")) {
        for (const auto& e : cfg["estimators"]) estimators.push_back(e.get<std::string>());
    } else {
        estimators = {"pf"};
    }
    std::vector<std::pair<int, int>> orders;
    if (cfg.contains("orders")) {
        for (const auto& o : cfg["orders"]) {
            orders.emplace_back(o.value("p", 0), o.value("q", 0));
        }
    } else {
        orders.emplace_back(1, 0);
    }
    std::vector<FitJob> jobs;
    for (const std::string& e : estimators) {
        if (e != "gl" && e != "iyw" && e != "pf") {
            throw lgc::config_error("config.estimators: unknown estimator '" + e + "'");
        }
        for (const auto& [p, q] : orders) jobs.push_back({e, p, q});
    }

    const std::string prefix = cfg.value("out_prefix", std::string("fit"));
    json all = json::array();
    lgc::CsvWriter sel({"estimator", "p", "q", "loglik", "aic", "aicc", "bic", "converged"});
    for (const FitJob& job : jobs) {
        json entry;
        try {
            lgc::FitResult fr;
            lgc::ModelSpec m = model;
            m.p = job.p;
            m.q = job.q;
            if (job.estimator == "gl") {
                fr = lgc::fit_gl(data, m, opts);
            } else if (job.estimator == "pf") {
                fr = lgc::fit_pf(data, m, opts);
            } else {
                if (job.q != 0) {
                    throw lgc::config_error(
                        "implied Yule-Walker applies to pure AR latent models; drop the MA order");
                }
                if (m.has_regression()) {
                    throw lgc::config_error("implied Yule-Walker is a stationary-only estimator");
                }
                fr = lgc::fit_iyw(data, m.family, m.p, opts);
            }
            entry = json::parse(lgc::fit_to_json(fr));
            sel.add_row_raw({job.estimator, std::to_string(job.p), std::to_string(job.q),
                             fr.loglik ? lgc::format_double(*fr.loglik) : "",
                             fr.aic ? lgc::format_double(*fr.aic) : "",
                             fr.aicc ? lgc::format_double(*fr.aicc) : "",
                             fr.bic ? lgc::format_double(*fr.bic) : "",
                             fr.converged ? "1" : "0"});
        } catch (const lgc::error& e) {
            entry["estimator"] = job.estimator;
            entry["p"] = job.p;
            entry["q"] = job.q;
            entry["error"] = e.what();
            sel.add_row_raw({job.estimator, std::to_string(job.p), std::to_string(job.q), "", "", "",
                             "", "error"});
            std::fprintf(stderr, "fit %s p=%d q=%d failed: %s\n", job.estimator.c_str(), job.p,
                         job.q, e.what());
        }
        all.push_back(std::move(entry));
    }
    const std::string fits_path = out_path(cli, prefix + "_fits.json");
    std::ofstream out(fits_path);
    out << all.dump(2) << "\n";
    const std::string sel_path = out_path(cli, prefix + "_selection.csv");
    sel.write(sel_path);
    std::printf("wrote %s and %s\n", fits_path.c_str(), sel_path.c_str());
    return 0;
}

int cmd_diagnose(const json& cfg, const CliOverrides& cli) {
    const std::string data_path = cfg.value("data_csv", std::string());
    if (data_path.empty()) throw lgc::config_error("config.data_csv: missing");
    const lgc::CsvTable tab = lgc::read_csv(data_path);
    const std::vector<std::int64_t> data = tab.int_column(cfg.value("count_column", std::string("x")));

    const std::string fit_path = cfg.value("fit_json", std::string());
    if (fit_path.empty()) throw lgc::config_error("config.fit_json: missing");
    std::ifstream fin(fit_path);
    if (!fin) throw lgc::data_error("cannot open fit json '" + fit_path + "'");
    std::string text((std::istreambuf_iterator<char>(fin)), std::istreambuf_iterator<char>());
    const lgc::FitResult fit = lgc::fit_from_json(text);

    const lgc::LatentModel latent = fit.latent();
    lgc::PitOptions popt;
    popt.bins = static_cast<int>(cfg.value("H", 10));
    popt.particles = pick_particles(cfg, cli);
    popt.kind = parse_filter(cfg, cli);
    popt.seed = pick_seed(cfg, cli);

    lgc::PitHistogram pit;
    lgc::LatentResiduals res;
    if (fit.regression) {
        if (!cfg.contains("covariate_columns")) {
            throw lgc::config_error("config.covariate_columns: required for a regression fit");
        }
        std::vector<std::vector<double>> cov(data.size());
        for (const auto& c : cfg["covariate_columns"]) {
            const std::vector<double> col = tab.column(c.get<std::string>());
            for (std::size_t t = 0; t < data.size(); ++t) cov[t].push_back(col[t]);
        }
        const lgc::RegressionSpec reg = fit.regression_spec(cov);
        const std::vector<lgc::MarginalSpec> path = lgc::theta_path(reg);
        std::int64_t x_max = 0;
        for (auto x : data) x_max = std::max(x_max, x);
        std::vector<lgc::PreparedMarginal> margs;
        margs.reserve(path.size());
        for (const auto& s : path) margs.push_back(lgc::prepare(s, x_max));
        const int T = static_cast<int>(data.size()) - 1;
        const std::vector<double> acvf = lgc::arma_acvf(latent, T + 1);
        const lgc::DlCoeffs dl(acvf, T + 1);
        pit = lgc::pit_histogram(data, margs, dl, popt);
        res.zhat.resize(data.size());
        for (std::size_t t = 0; t < data.size(); ++t) {
            res.zhat[t] = lgc::conditional_latent_mean(margs[t], data[t]);
        }
        double mean = 0.0;
        for (double v : res.zhat) mean += v;
        mean /= static_cast<double>(res.zhat.size());
        std::vector<double> centered(res.zhat.size());
        for (std::size_t t = 0; t < res.zhat.size(); ++t) centered[t] = res.zhat[t] - mean;
        const lgc::DLState st = lgc::durbin_levinson(lgc::arma_acvf(latent, T), centered);
        res.eps.resize(data.size());
        for (std::size_t t = 0; t < data.size(); ++t) res.eps[t] = centered[t] - st.pred[t];
    } else {
        const lgc::MarginalSpec spec = fit.marginal();
        pit = lgc::pit_histogram(data, spec, latent, popt);
        res = lgc::latent_residuals(data, spec, latent);
    }

    const std::string prefix = cfg.value("out_prefix", std::string("diag"));
    {
        lgc::CsvWriter w({"bin", "upper_edge", "height"});
        for (int h = 1; h <= pit.bins; ++h) {
            w.add_row({static_cast<double>(h), static_cast<double>(h) / pit.bins,
                       pit.heights[static_cast<std::size_t>(h - 1)]});
        }
        w.write(out_path(cli, prefix + "_pit.csv"));
    }
    {
        lgc::CsvWriter w({"t", "x", "zhat", "eps"});
        for (std::size_t t = 0; t < data.size(); ++t) {
            w.add_row({static_cast<double>(t), static_cast<double>(data[t]), res.zhat[t], res.eps[t]});
        }
        w.write(out_path(cli, prefix + "_residuals.csv"));
    }
    {
        const lgc::ResidualSummary sum = lgc::residual_summaries(res.eps);
        lgc::CsvWriter w({"lag", "acf", "pacf", "band"});
        for (std::size_t h = 0; h < sum.acf.size(); ++h) {
            w.add_row({static_cast<double>(h + 1), sum.acf[h], sum.pacf[h], sum.band});
        }
        w.write(out_path(cli, prefix + "_residual_acf.csv"));
        lgc::CsvWriter w2({"skewness", "excess_kurtosis", "jarque_bera"});
        w2.add_row({sum.skewness, sum.excess_kurtosis, sum.jarque_bera});
        w2.write(out_path(cli, prefix + "_residual_stats.csv"));
    }
    std::printf("wrote diagnostics with prefix %s\n", out_path(cli, prefix).c_str());
    return 0;
}

int cmd_replicate(const json& cfg, const CliOverrides& cli) {
    const lgc::MarginalSpec spec = parse_marginal(cfg.at("marginal"), "config.marginal");
    const lgc::LatentModel latent =
        cfg.contains("latent") ? parse_latent(cfg["latent"], "config.latent") : lgc::LatentModel{};
    const int reps = static_cast<int>(cfg.value("replications", 200));
    std::vector<int> t_values;
    if (cfg.contains("T_values")) {
        for (const auto& v : cfg["T_values"]) t_values.push_back(v.get<int>());
    } else {
        t_values.push_back(static_cast<int>(need_number(cfg, "config", "T")));
    }
    std::vector<std::string> estimators;
    if (cfg.contains("estimators")) {
        for (const auto& e : cfg["estimators"]) estimators.push_back(e.get<std::string>());
    } else {
        estimators = {"gl", "pf"};
    }
    const int fit_repeats = static_cast<int>(cfg.value("repeat_fits", 1));
    std::vector<int> n_grid;
    if (cfg.contains("particles_grid")) {
        for (const auto& v : cfg["particles_grid"]) n_grid.push_back(v.get<int>());
    } else {
        n_grid.push_back(pick_particles(cfg, cli));
    }

    lgc::ModelSpec model;
    model.family = spec.family;
    model.p = latent.p();
    model.q = latent.q();
    model.binomial_n = spec.family == lgc::Family::binomial ? spec.params[0] : 1.0;
    if (cfg.contains("order")) {
        model.p = cfg["order"].value("p", model.p);
        model.q = cfg["order"].value("q", model.q);
    }

    const std::uint64_t root_seed = pick_seed(cfg, cli);
    const lgc::FilterKind kind = parse_filter(cfg, cli);

    struct Row {
        int rep, T, fit_idx, particles;
        std::string estimator, param;
        double estimate;
        bool converged;
    };
    struct Cell {
        int rep, T;
    };
    std::vector<Cell> cells;
    for (int t : t_values) {
        for (int r = 0; r < reps; ++r) cells.push_back({r, t});
    }
    std::vector<std::vector<Row>> results(cells.size());

#pragma omp parallel for schedule(dynamic)
    for (long long ci = 0; ci < static_cast<long long>(cells.size()); ++ci) {
        const Cell cell = cells[static_cast<std::size_t>(ci)];
        const std::uint64_t rep_seed =
            lgc::split_seed(root_seed, static_cast<std::uint64_t>(cell.rep) * 131071ull +
                                           static_cast<std::uint64_t>(cell.T));
        const std::vector<std::int64_t> data = lgc::simulate_counts(spec, latent, cell.T, rep_seed);
        std::vector<Row>& rows = results[static_cast<std::size_t>(ci)];
        for (const std::string& est : estimators) {
            for (int n : n_grid) {
                for (int f = 0; f < fit_repeats; ++f) {
                    lgc::EstimOptions opts;
                    opts.exec = lgc::Exec::serial; // replication-level parallelism
                    opts.std_errors = false;
                    opts.particles = n;
                    opts.filter = kind;
                    opts.seed = lgc::split_seed(rep_seed, 1000 + static_cast<std::uint64_t>(f));
                    try {
                        lgc::FitResult fr;
                        if (est == "gl") {
                            fr = lgc::fit_gl(data, model, opts);
                        } else if (est == "pf") {
                            fr = lgc::fit_pf(data, model, opts);
                        } else if (est == "iyw") {
                            fr = lgc::fit_iyw(data, model.family, model.p, opts);
                        } else {
                            throw lgc::config_error("unknown estimator '" + est + "'");
                        }
                        for (std::size_t i = 0; i < fr.names.size(); ++i) {
                            rows.push_back({cell.rep, cell.T, f, n, est, fr.names[i],
                                            fr.estimates[i], fr.converged});
                        }
                    } catch (const lgc::error& e) {
#pragma omp critical
                        std::fprintf(stderr, "replicate rep=%d T=%d %s failed: %s\n", cell.rep,
                                     cell.T, est.c_str(), e.what());
                    }
                }
            }
        }
    }

    lgc::CsvWriter w({"rep", "T", "estimator", "particles", "fit", "param", "estimate", "converged"});
    for (const auto& rows : results) {
        for (const Row& r : rows) {
            w.add_row_raw({std::to_string(r.rep), std::to_string(r.T), r.estimator,
                           std::to_string(r.particles), std::to_string(r.fit_idx), r.param,
                           lgc::format_double(r.estimate), r.converged ? "1" : "0"});
        }
    }
    const std::string out = out_path(cli, cfg.value("out", std::string("replicates.csv")));
    w.write(out);
    std::printf("wrote %s\n", out.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"latent-Gaussian count time series toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    CliOverrides cli;
    std::uint64_t seed_arg = 0;
    int particles_arg = 0;
    std::string filter_arg;
    int threads = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON configuration file")->required();
        sub->add_option("--seed", seed_arg, "override the config seed");
        sub->add_option("--particles", particles_arg, "override the particle count");
        sub->add_option("--filter", filter_arg, "override the filter (sis|sisr|apf)");
        sub->add_option("--threads", threads, "worker thread cap");
        sub->add_option("--out-dir", cli.out_dir, "directory for output files");
    };
    CLI::App* sim = app.add_subcommand("simulate", "draw a count series");
    add_common(sim);
    sim->add_flag("--debug-latent", cli.debug_latent, "also emit the latent path");
    CLI::App* fit = app.add_subcommand("fit", "estimate models from data");
    add_common(fit);
    CLI::App* diag = app.add_subcommand("diagnose", "PIT and residual diagnostics for a fit");
    add_common(diag);
    CLI::App* rep = app.add_subcommand("replicate", "Monte-Carlo replication study");
    add_common(rep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (threads > 0) lgc::set_max_threads(threads);
        for (CLI::App* sub : {sim, fit, diag, rep}) {
            if (sub->count("--seed")) cli.seed = seed_arg;
            if (sub->count("--particles")) cli.particles = particles_arg;
            if (sub->count("--filter")) cli.filter = filter_arg;
        }
        const json cfg = load_config(config_path);
        if (sim->parsed()) return cmd_simulate(cfg, cli);
        if (fit->parsed()) return cmd_fit(cfg, cli);
        if (diag->parsed()) return cmd_diagnose(cfg, cli);
        if (rep->parsed()) return cmd_replicate(cfg, cli);
        throw lgc::config_error("no subcommand given");
    } catch (const lgc::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const lgc::data_error& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const lgc::error& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
}
