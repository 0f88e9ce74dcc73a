#include "spdemil/cost.hpp"
#include "spdemil/eoc.hpp"
#include "spdemil/harness.hpp"
#include "spdemil/noise.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace spdemil;

namespace {

std::vector<SchemeKind> parse_schemes(const std::vector<std::string>& names) {
    std::vector<SchemeKind> out;
    for (const std::string& n : names) {
        out.push_back(parse_scheme(n));
    }
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    out << text;
}

struct StudyArgs {
    std::string config;
    int example = 1;
    std::vector<std::size_t> ladder{2, 4, 8, 16};
    std::vector<std::string> schemes{"DFM", "MIL", "EES"};
    std::size_t paths = 100;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    bool scaled = false;
    std::string error_at = "final";
    std::size_t packet_D = 0;
    bool allow_large = false;
    std::string out;
    std::string json;
};

int run_study_command(const StudyArgs& a, const CLI::App& sub) {
    nlohmann::json j;
    if (!a.config.empty()) {
        std::ifstream in(a.config);
        if (!in) {
            throw std::runtime_error("cannot read " + a.config);
        }
        j = nlohmann::json::parse(in);
    }
    // command-line values override the file only when given explicitly
    auto given = [&](const char* name) { return sub.count(name) > 0 || a.config.empty(); };
    if (given("--example") && !j.contains("problem")) {
        j["example"] = a.example;
    }
    if (given("--ladder") && !j.contains("entries")) {
        j["ladder"] = a.ladder;
    }
    if (given("--schemes")) {
        j["schemes"] = a.schemes;
    }
    if (given("--paths")) {
        j["paths"] = a.paths;
    }
    if (given("--seed")) {
        j["seed"] = a.seed;
    }
    if (given("--threads")) {
        j["threads"] = a.threads;
    }
    if (given("--error-at")) {
        j["error_at"] = a.error_at;
    }
    if (given("--packet-D")) {
        j["packet_D"] = a.packet_D;
    }
    if (a.allow_large) {
        j["allow_large"] = true;
    }
    if (!j.contains("reference") || sub.count("--scaled-reference") > 0) {
        const int ex = j.value("example", 0);
        j["reference"] = a.scaled || (ex != 1 && ex != 2) ? "scaled" : "paper";
    }

    const StudyConfig config = study_config_from_json(j);
    const StudyReport report = run_study(config);
    write_text(a.out, report.to_csv());
    if (!a.json.empty()) {
        write_text(a.json, report_json(config, report).dump(2) + "\n");
    }
    return 0;
}

int run_eoc_command(int example, const std::vector<std::string>& schemes, std::size_t N) {
    const ProblemConfig cfg = example_config(example);
    nlohmann::json out;
    out["example"] = example;
    const Classification c = classify(PlanInput::from_params(cfg.params, SchemeKind::DFM));
    out["case"] = static_cast<int>(c.id);
    out["case_label"] = c.label;
    nlohmann::json optimal = nlohmann::json::array();
    for (SchemeKind s : c.optimal) {
        optimal.push_back(scheme_name(s));
    }
    out["optimal"] = optimal;
    nlohmann::json rows = nlohmann::json::array();
    for (SchemeKind s : parse_schemes(schemes)) {
        const PlanInput in = PlanInput::from_params(cfg.params, s);
        const Resolution r = optimal_resolution(in, N);
        rows.push_back({{"scheme", scheme_name(s)},
                        {"eoc", to_string(eoc_exponent(in))},
                        {"q", to_string(in.q())},
                        {"N", r.N},
                        {"M", r.M},
                        {"K", r.K},
                        {"D", r.D},
                        {"exponent_M", to_string(r.exponent_M)},
                        {"exponent_K", to_string(r.exponent_K)}});
    }
    out["schemes"] = rows;
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_cost_command(int example, const std::vector<std::string>& schemes,
                     const std::vector<std::size_t>& Ns) {
    const ProblemConfig cfg = example_config(example);
    std::cout << "scheme,N,M,K,D,cost\n";
    for (SchemeKind s : parse_schemes(schemes)) {
        const PlanInput in = PlanInput::from_params(cfg.params, s);
        for (std::size_t N : Ns) {
            const Resolution r = optimal_resolution(in, N);
            std::cout << scheme_name(s) << ',' << r.N << ',' << r.M << ',' << r.K << ',' << r.D
                      << ',' << cost_formula(s, r.N, r.K, r.M, in.q()) << '\n';
        }
    }
    return 0;
}

int run_noise_command(std::size_t samples, std::size_t K, std::size_t D, double h, double rho_Q,
                      std::uint64_t seed) {
    const std::vector<double> eta = EigenLaw::power_decay(rho_Q).values(K);
    double s1 = 0.0;
    double s2 = 0.0;
    double worst = 0.0;
    std::uint64_t draws = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        RandomStream inc(seed, {s, 0, StreamPurpose::increments});
        RandomStream area(seed, {s, 0, StreamPurpose::levy_area});
        const NoisePacket p = sample_packet(inc, area, h, D, eta);
        draws += inc.normals_drawn() + area.normals_drawn();
        worst = std::max({worst, p.antisymmetry_defect(), p.diagonal_defect()});
        if (K >= 2) {
            s1 += p.iterated(0, 1);
            s2 += p.iterated(0, 1) * p.iterated(0, 1);
        }
    }
    const double n = static_cast<double>(samples);
    nlohmann::json out{{"samples", samples},
                       {"K", K},
                       {"D", D},
                       {"h", h},
                       {"draws_per_sample", static_cast<double>(draws) / n},
                       {"expected_draws_per_sample", K * (1 + 2 * D)},
                       {"max_identity_defect", worst}};
    if (K >= 2) {
        const double mean = s1 / n;
        out["mean_I12"] = mean;
        out["stderr_I12"] = std::sqrt((s2 / n - mean * mean) / n);
        out["second_moment_I12"] = s2 / n;
        out["exact_second_moment_I12"] = exact_second_moment(1, 2, h, eta);
        out["truncated_second_moment_I12"] = alg1_second_moment(1, 2, h, D, eta);
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral Galerkin Milstein-type schemes for SPDEs"};
    app.require_subcommand(1);

    StudyArgs sa;
    CLI::App* study = app.add_subcommand("study", "run a coupled error study and print CSV");
    study->add_option("--config", sa.config, "JSON study configuration");
    study->add_option("--example", sa.example, "example problem 1, 2 or 3")
        ->check(CLI::Range(1, 3));
    study->add_option("--ladder", sa.ladder, "values of N; M, K and D come from the planner")
        ->delimiter(',');
    study->add_option("--schemes", sa.schemes, "DFM, MIL, EES, LIE")->delimiter(',');
    study->add_option("--paths", sa.paths, "Monte Carlo paths");
    study->add_option("--seed", sa.seed, "master seed");
    study->add_option("--threads", sa.threads, "worker threads")->check(CLI::PositiveNumber);
    study->add_flag("--scaled-reference", sa.scaled, "LIE reference with N = 64, M = 2^14");
    study->add_option("--error-at", sa.error_at, "final or all-grid")
        ->check(CLI::IsMember({"final", "all-grid"}));
    study->add_option("--packet-D", sa.packet_D, "override D of the finest packets");
    study->add_flag("--allow-large", sa.allow_large, "lift the work guardrail");
    study->add_option("--out", sa.out, "CSV output file (default stdout)");
    study->add_option("--json", sa.json, "also write a JSON report");

    int eoc_example = 1;
    std::size_t eoc_N = 16;
    std::vector<std::string> eoc_schemes{"DFM", "MIL", "EES"};
    CLI::App* eoc = app.add_subcommand("eoc", "effective orders and planned resolutions as JSON");
    eoc->add_option("--example", eoc_example, "example problem")->check(CLI::Range(1, 3));
    eoc->add_option("--schemes", eoc_schemes, "schemes to report")->delimiter(',');
    eoc->add_option("--N", eoc_N, "anchor N for the planned resolution");

    int cost_example = 1;
    std::vector<std::size_t> cost_Ns{2, 4, 8, 16, 32};
    std::vector<std::string> cost_schemes{"DFM", "MIL", "EES"};
    CLI::App* cost = app.add_subcommand("cost", "planned costs as CSV");
    cost->add_option("--example", cost_example, "example problem")->check(CLI::Range(1, 3));
    cost->add_option("--ladder", cost_Ns, "values of N")->delimiter(',');
    cost->add_option("--schemes", cost_schemes, "schemes to report")->delimiter(',');

    std::size_t nt_samples = 100000;
    std::size_t nt_K = 2;
    std::size_t nt_D = 10;
    double nt_h = 0.1;
    double nt_rho = 3.0;
    std::uint64_t nt_seed = 1;
    CLI::App* noise = app.add_subcommand("noise-test", "moment report of the iterated integrals");
    noise->add_option("--samples", nt_samples, "number of packets");
    noise->add_option("--K", nt_K, "noise coordinates")->check(CLI::PositiveNumber);
    noise->add_option("--D", nt_D, "series terms")->check(CLI::PositiveNumber);
    noise->add_option("--step", nt_h, "step length")->check(CLI::PositiveNumber);
    noise->add_option("--rho-Q", nt_rho, "decay exponent of the covariance eigenvalues");
    noise->add_option("--seed", nt_seed, "seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*study) {
            return run_study_command(sa, *study);
        }
        if (*eoc) {
            return run_eoc_command(eoc_example, eoc_schemes, eoc_N);
        }
        if (*cost) {
            return run_cost_command(cost_example, cost_schemes, cost_Ns);
        }
        if (*noise) {
            return run_noise_command(nt_samples, nt_K, nt_D, nt_h, nt_rho, nt_seed);
        }
    } catch (const InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
