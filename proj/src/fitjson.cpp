#include "lgc/fitjson.hpp"

#include "lgc/errors.hpp"

#include <json.hpp>

namespace lgc {

using nlohmann::json;

std::string fit_to_json(const FitResult& fit) {
    json j;
    j["method"] = fit.method;
    j["family"] = fit.family;
    j["p"] = fit.p;
    j["q"] = fit.q;
    j["regression"] = fit.regression;
    if (fit.regression) j["link_param"] = fit.link_param;
    json est = json::object();
    for (std::size_t i = 0; i < fit.names.size(); ++i) est[fit.names[i]] = fit.estimates[i];
    j["estimates"] = est;
    j["parameter_order"] = fit.names;
    if (!fit.std_errors.empty()) j["std_errors"] = fit.std_errors;
    if (fit.loglik) j["loglik"] = *fit.loglik;
    if (fit.aic) j["aic"] = *fit.aic;
    if (fit.aicc) j["aicc"] = *fit.aicc;
    if (fit.bic) j["bic"] = *fit.bic;
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["evaluations"] = fit.evaluations;
    if (!fit.warnings.empty()) j["warnings"] = fit.warnings;
    if (fit.method == "pf") {
        j["seed"] = fit.seed;
        j["particles"] = fit.particles;
        j["filter"] = fit.filter;
    }
    if (fit.family == "binomial") j["binomial_n"] = fit.binomial_n;
    return j.dump(2);
}

FitResult fit_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw data_error(std::string("fit json: parse error: ") + e.what());
    }
    FitResult fit;
    try {
        fit.method = j.at("method").get<std::string>();
        fit.family = j.at("family").get<std::string>();
        fit.p = j.at("p").get<int>();
        fit.q = j.at("q").get<int>();
        fit.regression = j.value("regression", false);
        fit.link_param = j.value("link_param", std::string("mean"));
        fit.names = j.at("parameter_order").get<std::vector<std::string>>();
        const json& est = j.at("estimates");
        for (const auto& n : fit.names) fit.estimates.push_back(est.at(n).get<double>());
        if (j.contains("std_errors")) {
            fit.std_errors = j["std_errors"].get<std::map<std::string, double>>();
        }
        if (j.contains("loglik")) fit.loglik = j["loglik"].get<double>();
        if (j.contains("aic")) fit.aic = j["aic"].get<double>();
        if (j.contains("aicc")) fit.aicc = j["aicc"].get<double>();
        if (j.contains("bic")) fit.bic = j["bic"].get<double>();
        fit.converged = j.value("converged", true);
        fit.iterations = j.value("iterations", 0);
        fit.evaluations = j.value("evaluations", 0);
        if (j.contains("warnings")) fit.warnings = j["warnings"].get<std::vector<std::string>>();
        fit.seed = j.value("seed", std::uint64_t{0});
        fit.particles = j.value("particles", 0);
        fit.filter = j.value("filter", std::string());
        fit.binomial_n = j.value("binomial_n", 1.0);
    } catch (const json::exception& e) {
        throw data_error(std::string("fit json: missing or malformed field: ") + e.what());
    }
    return fit;
}

} // namespace lgc
