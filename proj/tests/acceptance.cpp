#include "spdemil/cost.hpp"
#include "spdemil/eoc.hpp"
#include "spdemil/harness.hpp"
#include "spdemil/noise.hpp"
#include "spdemil/problem.hpp"
#include "spdemil/schemes.hpp"

#include <CLI11.hpp>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

using namespace spdemil;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const std::array<std::size_t, 5> kTableN{2, 4, 8, 16, 32};

Outcome cost_reproduction() {
    const std::array<std::array<std::uint64_t, 5>, 6> expected{{
        {94, 864, 8481, 127744, 1344631},
        {110, 1248, 15649, 312064, 4392055},
        {96, 1792, 37674, 1097728, 24282684},
        {77, 556, 4137, 31314, 342791},
        {93, 940, 11305, 154194, 3390215},
        {64, 714, 9438, 129050, 2409221},
    }};
    const std::array<SchemeKind, 3> schemes{SchemeKind::DFM, SchemeKind::MIL, SchemeKind::EES};
    int mismatches = 0;
    std::string first;
    for (int ex = 1; ex <= 2; ++ex) {
        for (std::size_t s = 0; s < 3; ++s) {
            const PlanInput in = PlanInput::from_params(example_config(ex).params, schemes[s]);
            for (std::size_t k = 0; k < kTableN.size(); ++k) {
                const Resolution r = optimal_resolution(in, kTableN[k]);
                const std::uint64_t c = cost_formula(schemes[s], r.N, r.K, r.M, in.q());
                const std::uint64_t want = expected[std::size_t(ex - 1) * 3 + s][k];
                if (c != want && mismatches++ == 0) {
                    first = fmt("example %d %s N=%zu: %llu vs %llu", ex,
                                std::string(scheme_name(schemes[s])).c_str(), kTableN[k],
                                (unsigned long long)c, (unsigned long long)want);
                }
            }
        }
    }
    return {mismatches == 0, mismatches == 0 ? "30/30 integers equal" : first};
}

Outcome eoc_reproduction() {
    struct Want {
        int ex;
        SchemeKind s;
        Rational v;
    };
    const std::vector<Want> wants{
        {1, SchemeKind::DFM, make_rational(27, 58)},     {1, SchemeKind::MIL, make_rational(189, 460)},
        {1, SchemeKind::EES, make_rational(189, 514)},   {2, SchemeKind::DFM, make_rational(1309, 2976)},
        {2, SchemeKind::MIL, make_rational(1309, 3900)}, {2, SchemeKind::EES, make_rational(1309, 3746)},
        {3, SchemeKind::DFM, make_rational(14, 65)},     {3, SchemeKind::MIL, make_rational(7, 36)},
    };
    bool ok = true;
    std::string detail;
    for (const Want& w : wants) {
        const Rational got = eoc_exponent(PlanInput::from_params(example_config(w.ex).params, w.s));
        if (got != w.v) {
            ok = false;
            detail += fmt("example %d %s: %s; ", w.ex, std::string(scheme_name(w.s)).c_str(),
                          to_string(got).c_str());
        }
    }
    const std::array<PlanCase, 3> cases{PlanCase::moderate, PlanCase::weak_coupling,
                                        PlanCase::low_order};
    for (int ex = 1; ex <= 3; ++ex) {
        const Classification c =
            classify(PlanInput::from_params(example_config(ex).params, SchemeKind::DFM));
        if (c.id != cases[std::size_t(ex - 1)]) {
            ok = false;
            detail += fmt("example %d classified as %s; ", ex, c.label.c_str());
        }
    }
    return {ok, ok ? "8 exponents and 3 cases match" : detail};
}

Outcome planner_bounds() {
    std::mt19937_64 gen(17);
    std::uniform_int_distribution<int> num(1, 40);
    const std::size_t trials = 20000;
    std::size_t violations = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        PlanInput in;
        in.beta = make_rational(num(gen) - 1, 40);
        in.gamma = in.beta + make_rational(num(gen), 40);
        in.alpha = make_rational(num(gen), 8);
        in.rho_A = make_rational(num(gen), 8);
        in.rho_Q = 1 + make_rational(num(gen), 10);
        in.finite_dim_noise = t % 7 == 0;
        in.scheme = SchemeKind::DFM;
        const Rational dfm = eoc_exponent(in);
        in.scheme = SchemeKind::MIL;
        const Rational mil = eoc_exponent(in);
        in.scheme = SchemeKind::EES;
        const Rational ees = eoc_exponent(in);
        const Rational half = make_rational(1, 2);
        if (dfm < mil || dfm < ees || dfm > half || mil > half || ees > half) {
            ++violations;
        }
    }
    return {violations == 0, fmt("%zu tuples, %zu violations", trials, violations)};
}

Outcome linear_degeneracy() {
    const std::size_t N = 8;
    const std::size_t M = 64;
    double worst = 0.0;
    for (int ex = 1; ex <= 2; ++ex) {
        const ProblemSpec problem = make_example(ex);
        const double h = problem.T / double(M);
        const std::size_t D = choose_D1(M, problem.params.q_dfm());
        const std::vector<double> eta = problem.q_law.values(N);
        for (std::size_t path = 0; path < 100; ++path) {
            Stepper dfm(problem, SchemeKind::DFM, N, N, h);
            Stepper mil(problem, SchemeKind::MIL, N, N, h);
            const SpectralField xi = problem.initial_value(N);
            std::vector<double> a(xi.coeffs().begin(), xi.coeffs().end());
            std::vector<double> b = a;
            for (std::size_t m = 0; m < M; ++m) {
                RandomStream inc(42, {path, m, StreamPurpose::increments});
                RandomStream area(42, {path, m, StreamPurpose::levy_area});
                const NoisePacket p = sample_packet(inc, area, h, D, eta);
                dfm.advance(a, p);
                mil.advance(b, p);
                double num = 0.0;
                double den = 0.0;
                for (std::size_t i = 0; i < N; ++i) {
                    num += (a[i] - b[i]) * (a[i] - b[i]);
                    den += b[i] * b[i];
                }
                if (den > 0.0) {
                    worst = std::max(worst, std::sqrt(num / den));
                }
            }
        }
    }
    return {worst <= 1e-10, fmt("max relative gap %.3e over 2 x 100 paths x 64 steps", worst)};
}

Outcome iterated_statistics() {
    const std::size_t K = 2;
    const std::size_t D = 10;
    const double h = 0.1;
    const std::size_t samples = 1000000;
    const std::vector<double> eta = EigenLaw::power_decay(3.0).values(K);
    double s1 = 0.0;
    double s2 = 0.0;
    double s4 = 0.0;
    double worst_identity = 0.0;
    bool draws_ok = true;
    for (std::size_t s = 0; s < samples; ++s) {
        RandomStream inc(2024, {s, 0, StreamPurpose::increments});
        RandomStream area(2024, {s, 0, StreamPurpose::levy_area});
        const NoisePacket p = sample_packet(inc, area, h, D, eta);
        draws_ok = draws_ok && inc.normals_drawn() + area.normals_drawn() == K * (1 + 2 * D);
        worst_identity =
            std::max({worst_identity, p.antisymmetry_defect(), p.diagonal_defect()});
        const double v = p.iterated(0, 1);
        s1 += v;
        s2 += v * v;
        s4 += v * v * v * v;
    }
    const double n = double(samples);
    const double mean = s1 / n;
    const double se_mean = std::sqrt((s2 / n - mean * mean) / n);
    const double m2 = s2 / n;
    const double target = exact_second_moment(1, 2, h, eta);
    const double rel = m2 / target - 1.0;
    const bool mean_ok = std::abs(mean) <= 4.0 * se_mean;
    const bool m2_ok = std::abs(rel) <= 0.01;
    const bool id_ok = worst_identity <= 1e-12;
    const double series = alg1_second_moment(1, 2, h, D, eta) / target - 1.0;
    return {mean_ok && m2_ok && id_ok && draws_ok,
            fmt("mean %.2e (%.2f se) %s; second moment rel %+.4f vs 1%% %s (truncated-series law "
                "predicts %+.4f); identities %.1e %s; draws K(1+2D) %s",
                mean, std::abs(mean) / se_mean, mean_ok ? "ok" : "bad", rel,
                m2_ok ? "ok" : "bad", series, worst_identity, id_ok ? "ok" : "bad",
                draws_ok ? "ok" : "bad")};
}

Outcome d_rate() {
    const std::size_t K = 2;
    const double h = 0.1;
    const std::vector<double> eta = EigenLaw::power_decay(3.0).values(K);
    const std::vector<double> db{0.25, -0.15};
    const std::array<std::size_t, 4> Ds{4, 16, 64, 256};
    const std::size_t Dmax = 4096;
    const std::size_t samples = 4000;
    std::array<double, 4> acc{};
    for (std::size_t s = 0; s < samples; ++s) {
        RandomStream full(77, {s, 0, StreamPurpose::levy_area});
        const double ref = alg1_iterated(full, db, h, Dmax, eta)(0, 1);
        for (std::size_t k = 0; k < Ds.size(); ++k) {
            // same stream, so the first D series terms coincide with the reference
            RandomStream prefix(77, {s, 0, StreamPurpose::levy_area});
            const double d = alg1_iterated(prefix, db, h, Ds[k], eta)(0, 1) - ref;
            acc[k] += d * d;
        }
    }
    std::vector<double> x;
    std::vector<double> rms;
    for (std::size_t k = 0; k < Ds.size(); ++k) {
        x.push_back(double(Ds[k]));
        rms.push_back(std::sqrt(acc[k] / double(samples)));
    }
    const OrderFit fit = fit_loglog(x, rms);
    return {fit.slope >= -0.6 && fit.slope <= -0.4, fmt("slope %.3f", fit.slope)};
}

Outcome temporal_order(unsigned threads) {
    StudyConfig c;
    c.problem = example_config(1);
    const Rational q = c.problem.params.q_dfm();
    c.reference = {SchemeKind::DFM, 16, 16, 1 << 13, choose_D1(1 << 13, q)};
    for (SchemeKind s : {SchemeKind::DFM, SchemeKind::EES}) {
        for (std::size_t M = 16; M <= 512; M *= 2) {
            c.entries.push_back({s, 16, 16, M, uses_iterated(s) ? choose_D1(M, q) : 0});
        }
    }
    c.paths = 200;
    c.seed = 7;
    c.threads = threads;
    const StudyReport r = run_study(c);
    const double dfm = measure_order(r, OrderAxis::M, SchemeKind::DFM).slope;
    const double ees = measure_order(r, OrderAxis::M, SchemeKind::EES).slope;
    double dfm_last = 0.0;
    double ees_last = 0.0;
    for (const StudyRow& row : r.rows) {
        if (row.M == 512) {
            (row.scheme == SchemeKind::DFM ? dfm_last : ees_last) = row.error;
        }
    }
    const bool ok = dfm >= -1.05 && dfm <= -0.70 && ees >= -0.65 && ees <= -0.35 &&
                    dfm_last < ees_last;
    return {ok, fmt("DFM slope %.3f, EES slope %.3f, errors at M=512: %.3e < %.3e", dfm, ees,
                    dfm_last, ees_last)};
}

Outcome moment_bound(unsigned threads) {
    const ProblemSpec problem = make_example(1);
    const double r = to_double(problem.params.delta);
    bool ok = true;
    std::string detail;
    for (SchemeKind s : {SchemeKind::DFM, SchemeKind::MIL, SchemeKind::EES}) {
        double lo = 1e300;
        double hi = 0.0;
        for (std::size_t M : {16u, 64u, 256u, 1024u}) {
            const double v = max_sobolev_moment(problem, s, 8, 8, M, r, 200, 5, threads);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        ok = ok && hi < 2.0 * lo;
        detail += fmt("%s [%.3e, %.3e] ratio %.3f; ", std::string(scheme_name(s)).c_str(), lo,
                      hi, hi / lo);
    }
    return {ok, detail};
}

Outcome determinism() {
    auto make = [](unsigned threads) {
        StudyConfig c;
        c.problem = example_config(2);
        const std::vector<SchemeKind> schemes{SchemeKind::DFM, SchemeKind::MIL, SchemeKind::EES};
        const std::vector<std::size_t> Ns{2, 4, 8};
        c.entries = planned_ladder(c.problem, schemes, Ns);
        c.reference = {SchemeKind::LIE, 32, 3, 1 << 12, 0};
        c.paths = 24;
        c.seed = 99;
        c.threads = threads;
        const StudyReport r = run_study(c);
        return r.to_csv() + report_json(c, r).at("rows").dump();
    };
    const std::string one = make(1);
    const std::string eight = make(8);
    return {one == eight, fmt("%zu report bytes, %s", one.size(),
                              one == eight ? "identical" : "different")};
}

/// sqrt(sum_{i > N} (E X_i(T))^2), a lower bound for the mean-square error of
/// any approximation in span{e_1..e_N}. For F(y) = 1 - y, xi = 0 and
/// zero-mean noise, E X_i solves m' = -(lambda_i + 1) m + <1, e_i>.
double mean_tail_bound(std::size_t N, std::size_t N_ref) {
    double sum = 0.0;
    for (std::size_t i = N + 1; i <= N_ref; i += 1) {
        if (i % 2 == 0) {
            continue;
        }
        const double c = 2.0 * std::sqrt(2.0) / (double(i) * M_PI);
        const double rate = 0.01 * M_PI * M_PI * double(i * i) + 1.0;
        const double m = c / rate * (1.0 - std::exp(-rate));
        sum += m * m;
    }
    return std::sqrt(sum);
}

struct Band {
    std::size_t N;
    double value;
    double std;
};

Outcome table_bands(unsigned threads) {
    const std::array<SchemeKind, 3> schemes{SchemeKind::DFM, SchemeKind::MIL, SchemeKind::EES};
    const std::array<std::array<std::array<Band, 4>, 3>, 2> printed{{
        {{{{{2, 3.77e-2, 2.38e-3}, {4, 2.95e-2, 1.25e-3}, {8, 1.81e-2, 5.33e-4}, {16, 6.84e-3, 8.63e-5}}},
          {{{2, 3.78e-2, 2.30e-3}, {4, 2.95e-2, 1.25e-3}, {8, 1.81e-2, 5.15e-4}, {16, 6.84e-3, 8.31e-5}}},
          {{{2, 2.65e-2, 2.46e-3}, {4, 3.06e-2, 1.41e-3}, {8, 1.83e-2, 5.11e-4}, {16, 6.81e-3, 1.15e-4}}}}},
        {{{{{2, 4.42e-2, 4.10e-3}, {4, 3.56e-2, 2.08e-3}, {8, 2.13e-2, 8.73e-4}, {16, 8.66e-3, 5.30e-4}}},
          {{{2, 4.43e-2, 4.16e-3}, {4, 3.56e-2, 2.08e-3}, {8, 2.13e-2, 8.61e-4}, {16, 8.66e-3, 5.33e-4}}},
          {{{2, 3.48e-2, 4.07e-3}, {4, 3.70e-2, 1.43e-3}, {8, 2.22e-2, 9.95e-4}, {16, 9.07e-3, 5.73e-4}}}}},
    }};
    bool ok = true;
    std::string detail;
    for (int ex = 1; ex <= 2; ++ex) {
        StudyConfig c;
        c.problem = example_config(ex);
        const std::vector<std::size_t> Ns{2, 4, 8, 16};
        c.entries = planned_ladder(c.problem, schemes, Ns);
        c.reference = paper_reference(ex);
        c.paths = 500;
        c.seed = 2020 + std::uint64_t(ex);
        c.threads = threads;
        const StudyReport r = run_study(c);
        int inside = 0;
        for (const StudyRow& row : r.rows) {
            const std::size_t s = row.scheme == SchemeKind::DFM ? 0 : row.scheme == SchemeKind::MIL ? 1 : 2;
            const std::size_t k = std::size_t(std::log2(double(row.N))) - 1;
            const Band& b = printed[std::size_t(ex - 1)][s][k];
            const double gap = std::abs(row.error - b.value);
            const double band = 3.0 * (b.std + row.std);
            std::printf("  example %d %-3s N=%-2zu error %.3e std %.2e printed %.2e gap/band %.2f\n",
                        ex, std::string(scheme_name(row.scheme)).c_str(), row.N, row.error,
                        row.std, b.value, gap / band);
            if (gap <= band) {
                ++inside;
            } else {
                ok = false;
            }
        }
        detail += fmt("example %d: %d/12 inside; ", ex, inside);
        if (ex == 1) {
            detail += fmt("error lower bound from the mean of the modes above N: N=2 %.3e, N=4 "
                          "%.3e; ",
                          mean_tail_bound(2, c.reference.N), mean_tail_bound(4, c.reference.N));
        }
    }
    return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks for the spdemil library"};
    bool full = false;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<int> known;
    app.add_flag("--full", full, "also run the long table reproduction (criterion 8)");
    app.add_option("--threads", threads, "worker threads for Monte Carlo criteria");
    app.add_option("--known-failure", known,
                   "criteria whose failure is documented; they still print FAIL but do not set "
                   "the exit code, and an unexpected PASS does");
    CLI11_PARSE(app, argc, argv);

    const std::set<int> expected_fail(known.begin(), known.end());
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
        {1, cost_reproduction},
        {2, eoc_reproduction},
        {3, planner_bounds},
        {4, linear_degeneracy},
        {5, iterated_statistics},
        {6, d_rate},
        {7, [&] { return temporal_order(threads); }},
        {8, [&] { return table_bands(threads); }},
        {9, [&] { return moment_bound(threads); }},
        {10, determinism},
    };

    int status = 0;
    for (const auto& [id, run] : criteria) {
        if (id == 8 && !full) {
            std::printf("criterion %2d SKIP (pass --full to run the table reproduction)\n", id);
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool documented = expected_fail.count(id) > 0;
        std::printf("criterion %2d %s%s (%.1f s): %s\n", id, out.pass ? "PASS" : "FAIL",
                    !out.pass && documented ? " [documented]" : "", secs, out.detail.c_str());
        std::fflush(stdout);
        if (out.pass == documented) {
            status = 1;
        }
    }
    return status;
}
