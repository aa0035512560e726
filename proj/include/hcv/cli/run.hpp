#pragma once

// Command-line front end. Exit codes: 0 pass, 1 certification or verification
// failure, 2 usage error, 3 budget exceeded.

#include "hcv/blocks/solution_block.hpp"
#include "hcv/constructor/dichotomy.hpp"
#include "hcv/constructor/pipeline.hpp"
#include "hcv/constructor/plan.hpp"
#include "hcv/constructor/stage.hpp"
#include "hcv/core/errors.hpp"
#include "hcv/core/rational.hpp"
#include "hcv/core/wide_expr.hpp"
#include "hcv/io/json.hpp"
#include "hcv/poly/operator.hpp"
#include "hcv/weyl/rotation.hpp"
#include "hcv/weyl/ud.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hcv::cli {

enum Exit { kPass = 0, kFail = 1, kUsage = 2, kBudget = 3 };

using io::json;

namespace detail {

inline double num(const std::string& s, const char* what)
{
    try {
        return static_cast<double>(parse_wide_decimal(s));
    } catch (const std::invalid_argument&) {
        throw PreconditionError(std::string("--") + what + " expects a decimal number, got '" + s + "'");
    }
}

inline void write_text(const std::string& path, const std::string& text)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw PreconditionError("cannot write " + path);
    os << text;
}

inline json read_json(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw PreconditionError("cannot read " + path);
    try {
        return json::parse(is);
    } catch (const json::exception& e) {
        throw PreconditionError(path + ": " + e.what());
    }
}

inline void emit(const json& j, const std::string& path, std::ostream& out)
{
    if (path.empty()) {
        out << j.dump(2) << "\n";
    } else {
        write_text(path, j.dump(2) + "\n");
    }
}

/// Options shared by stage, rotate and the stage part of other commands.
struct StageArgs {
    std::string n0 = "1", rho = "1.05", p, j, s0 = "10", eps1 = "0.25", mode = "optimized", seq = "n", R0 = "0",
                delta0 = "0", cap = "1000000";
    bool allow_rho_below_2 = false;

    void attach(CLI::App* c)
    {
        c->add_option("--n0", n0, "disk index");
        c->add_option("--rho", rho, "interval [1/rho, rho]");
        c->add_option("--p", p, "target polynomial, e.g. \"1+z\"");
        c->add_option("--j", j, "target index into the enumeration of Gaussian-rational polynomials");
        c->add_option("--s0", s0, "accuracy 1/s0");
        c->add_option("--eps1", eps1, "closeness radius");
        c->add_option("--mode", mode, "optimized | faithful");
        c->add_option("--seq", seq, "base sequence: a*n+b, n^c or @file");
        c->add_option("--R0", R0, "certification radius (0: 1.05 n0)");
        c->add_option("--delta0", delta0, "faithful step scale (0: default)");
        c->add_option("--cap", cap, "maximum number of cells / coverage terms");
        c->add_flag("--allow-rho-below-2", allow_rho_below_2, "faithful mode with rho <= 2");
    }

    StageInputs inputs() const
    {
        StageInputs in;
        in.n0 = std::stoull(n0);
        in.rho0 = num(rho, "rho");
        if (!j.empty()) {
            in.j0 = std::stoull(j);
        } else {
            in.p = parse_polynomial(p.empty() ? "z" : p);
        }
        in.s0 = num(s0, "s0");
        in.eps1 = num(eps1, "eps1");
        in.mode = parse_mode(mode);
        in.base = parse_sequence(seq);
        in.R0 = num(R0, "R0");
        in.delta0 = num(delta0, "delta0");
        in.cap = std::stoull(cap);
        in.allow_rho_below_2 = allow_rho_below_2;
        return in;
    }
};

struct VerifyArgs {
    std::string grid = "10000", random = "0", seed = "1";
    void attach(CLI::App* c)
    {
        c->add_option("--grid", grid, "log-spaced lambda samples");
        c->add_option("--random", random, "additional uniform lambda samples");
        c->add_option("--seed", seed, "seed for the random samples");
    }
    VerifyOptions options() const
    {
        VerifyOptions o;
        o.grid = std::stoull(grid);
        o.random = std::stoull(random);
        o.seed = std::stoull(seed);
        return o;
    }
};

inline json budget_report(const BudgetExceeded& e)
{
    json j;
    j["error"] = "budget_exceeded";
    j["message"] = e.what();
    if (const auto* c = dynamic_cast<const CoverageExceeded*>(&e)) {
        const CoverageResult& r = c->result;
        j["required_coverage"] = io::dec(r.required);
        j["achieved"] = io::dec(r.achieved);
        j["terms_used"] = r.terms_used;
        j["extrapolation"] = to_string(r.extrapolation);
        j["supremum"] = r.supremum ? json(io::dec(*r.supremum)) : json(nullptr);
        j["log10_N0_estimate"] = r.log10_N0_estimate ? json(io::dec(*r.log10_N0_estimate)) : json(nullptr);
    }
    return j;
}

inline void summarize(std::ostream& out, const StageCertificate& c)
{
    out << c.label << ": mode " << to_string(c.plan.in.mode) << ", cells " << c.cells.size() << ", orders "
        << c.cells.front().order << ".." << c.m0 << ", gap " << c.plan.gap << "\n";
    out << "  min cell margin " << to_decimal(c.min_margin()) << " (1/s0 = " << 1.0 / c.plan.in.s0 << ")\n";
    out << "  closeness " << to_decimal(c.closeness.bound) << " (analytic " << to_decimal(c.closeness.analytic)
        << ") < eps0 = " << c.plan.eps0 << "\n";
    out << "  certificate " << (c.pass ? "PASS" : "FAIL") << "\n";
}

inline void summarize(std::ostream& out, const VerifyReport& r)
{
    out << "  verify: " << r.samples << " lambdas, " << r.failures << " failures, max error "
        << to_decimal(r.max_observed) << ", min margin " << to_decimal(r.min_margin) << ", worst observed/certified "
        << r.worst_ratio << " -> " << (r.pass ? "PASS" : "FAIL") << "\n";
}

} // namespace detail

/// Parses argv and runs one command. Human-readable output goes to `out`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"hcv: certified common hypercyclic vectors for T_{n,lambda} f = lambda^n f^(n)(lambda z)"};
    app.require_subcommand(1);
    std::string threads;
    app.add_option("--threads", threads, "worker threads (also HC_THREADS)");

    // solve
    auto* solve = app.add_subcommand("solve", "solution block with T_{m0,lambda0}(f) = p");
    std::string s_m0, s_lambda, s_p;
    solve->add_option("--m0", s_m0, "operator order")->required();
    solve->add_option("--lambda0", s_lambda, "positive rational anchor")->required();
    solve->add_option("--p", s_p, "target polynomial")->required();

    // stage
    auto* stage = app.add_subcommand("stage", "plan, build and verify one stage");
    detail::StageArgs st_args;
    detail::VerifyArgs st_verify;
    std::string st_out, st_fout;
    st_args.attach(stage);
    st_verify.attach(stage);
    stage->add_option("--out", st_out, "certificate JSON path");
    stage->add_option("--f-out", st_fout, "f description JSON path");

    // verify
    auto* verify = app.add_subcommand("verify", "re-verify a certificate against an f description");
    std::string v_cert, v_f, v_out;
    detail::VerifyArgs v_args;
    verify->add_option("--cert", v_cert, "certificate JSON")->required();
    verify->add_option("--f", v_f, "f description JSON")->required();
    verify->add_option("--out", v_out, "report JSON path");
    v_args.attach(verify);

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "several stages with margin budgeting");
    std::string p_sched, p_mode = "optimized", p_seq = "n", p_cap = "1000000", p_out, p_fout;
    detail::VerifyArgs p_verify;
    p_verify.grid = "2000";
    pipe->add_option("--schedule", p_sched, "n,rho,target,s;... (target '#j' selects p_j)");
    pipe->add_option("--mode", p_mode, "optimized | faithful");
    pipe->add_option("--seq", p_seq, "base sequence");
    pipe->add_option("--cap", p_cap, "maximum cells per stage");
    pipe->add_option("--out", p_out, "report JSON path");
    pipe->add_option("--f-out", p_fout, "final f description JSON path");
    p_verify.attach(pipe);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "lambda-grid CSV of certified and recomputed errors");
    std::string w_cert, w_f, w_out, w_grid = "1000";
    sweep->add_option("--cert", w_cert, "certificate JSON")->required();
    sweep->add_option("--f", w_f, "f description JSON")->required();
    sweep->add_option("--grid", w_grid, "number of log-spaced lambdas");
    sweep->add_option("--out", w_out, "CSV path (stdout if omitted)");

    // weyl
    auto* weyl = app.add_subcommand("weyl", "equidistribution of theta k_n mod 1");
    std::string y_theta, y_seq = "n", y_N = "100000", y_bins = "100", y_tol = "0.001", y_out;
    weyl->add_option("--theta", y_theta, "expression such as sqrt(5)-2")->required();
    weyl->add_option("--seq", y_seq, "sequence k_n");
    weyl->add_option("--N", y_N, "number of terms");
    weyl->add_option("--bins", y_bins, "histogram bins");
    weyl->add_option("--tol", y_tol, "pass threshold on the max bin deviation");
    weyl->add_option("--out", y_out, "report JSON path");

    // rotate
    auto* rotate = app.add_subcommand("rotate", "transfer a witness from lambda0 to lambda0 e^{2 pi i theta0}");
    std::string r_theta, r_eps0 = "0.3", r_lambda0 = "1", r_cert, r_f, r_out, r_tower = "4096", r_search = "1000000";
    detail::StageArgs r_stage;
    rotate->add_option("--theta", r_theta, "rotation angle in turns (expression)")->required();
    rotate->add_option("--eps0", r_eps0, "target accuracy");
    rotate->add_option("--lambda0", r_lambda0, "positive dilation");
    rotate->add_option("--cert", r_cert, "stage certificate JSON (built from the stage options if omitted)");
    rotate->add_option("--f", r_f, "f description JSON matching --cert");
    rotate->add_option("--tower", r_tower, "initial number of tower blocks");
    rotate->add_option("--search-cap", r_search, "maximum eligible candidates");
    rotate->add_option("--out", r_out, "witness JSON path");
    r_stage.attach(rotate);

    // dichotomy
    auto* dich = app.add_subcommand("dichotomy", "coverage feasibility for a base sequence");
    std::string d_seq = "n", d_rho = "1.5", d_p = "1", d_s0 = "10", d_eps1 = "0.25", d_n0 = "1", d_cap = "1000000",
                d_out;
    dich->add_option("--seq", d_seq, "base sequence");
    dich->add_option("--rho", d_rho, "interval [1/rho, rho]");
    dich->add_option("--p", d_p, "target polynomial");
    dich->add_option("--s0", d_s0, "accuracy 1/s0");
    dich->add_option("--eps1", d_eps1, "closeness radius");
    dich->add_option("--n0", d_n0, "disk index");
    dich->add_option("--cap", d_cap, "coverage terms to scan");
    dich->add_option("--out", d_out, "report JSON path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kPass;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kPass;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    }

    std::string report_path; // where a budget report goes
    try {
        if (!threads.empty()) setenv("HC_THREADS", threads.c_str(), 1);

        if (*solve) {
            const std::uint64_t m0 = std::stoull(s_m0);
            const Rational lam = parse_rational(s_lambda);
            if (!(lam > 0)) throw PreconditionError("--lambda0 must be positive");
            const ExactPolynomial p = parse_exact_polynomial(s_p);
            const ExactPolynomial f = solve_block_exact(m0, GaussianRational(lam), p);
            const ExactPolynomial res = apply_op(m0, GaussianRational(lam), f) - p;
            out << "f = " << to_string(f) << "\n";
            out << "residual = " << (res.is_zero() ? std::string("0") : to_string(res)) << "\n";
            return res.is_zero() ? kPass : kFail;
        }

        if (*stage) {
            report_path = st_out;
            const StagePlan plan = plan_stage(st_args.inputs());
            StageResult r = build_stage(plan);
            const VerifyReport v = verify_stage(r.f, r.cert, st_verify.options());
            json j = io::to_json(r.cert);
            j["verify"] = io::to_json(v);
            detail::emit(j, st_out, out);
            if (!st_fout.empty()) detail::write_text(st_fout, io::to_json(r.f).dump(2) + "\n");
            detail::summarize(out, r.cert);
            detail::summarize(out, v);
            if (plan.faithful.log10_N0) {
                out << "  faithful constants would need about 10^" << *plan.faithful.log10_N0 << " cells\n";
            }
            return r.cert.pass && v.pass ? kPass : kFail;
        }

        if (*verify) {
            const StageCertificate c = io::certificate_from_json(detail::read_json(v_cert));
            const BlockSum f = io::blocksum_from_json(detail::read_json(v_f));
            const VerifyReport v = verify_stage(f, c, v_args.options());
            if (!v_out.empty()) detail::write_text(v_out, io::to_json(v).dump(2) + "\n");
            detail::summarize(out, v);
            return c.pass && v.pass ? kPass : kFail;
        }

        if (*pipe) {
            report_path = p_out;
            PipelineOptions o;
            o.mode = parse_mode(p_mode);
            o.base = parse_sequence(p_seq);
            o.cap = std::stoull(p_cap);
            o.verify = p_verify.options();
            const auto schedule = p_sched.empty() ? default_schedule() : parse_schedule(p_sched);
            const PipelineResult r = run_pipeline(schedule, o);
            detail::emit(io::to_json(r), p_out, out);
            if (!p_fout.empty()) detail::write_text(p_fout, io::to_json(r.f).dump(2) + "\n");
            for (std::size_t k = 0; k < r.certs.size(); ++k) {
                detail::summarize(out, r.certs[k]);
                out << "  allowance " << to_decimal(r.certs[k].allowance) << "\n";
                detail::summarize(out, r.final_verify[k]);
            }
            for (const auto& c : r.cauchy) {
                out << "rho(f_" << c.t << ", f_" << c.t + 1 << ") = " << c.metric << " < " << c.bound << " "
                    << (c.ok ? "PASS" : "FAIL") << "\n";
            }
            out << "pipeline " << (r.pass ? "PASS" : "FAIL") << "\n";
            return r.pass ? kPass : kFail;
        }

        if (*sweep) {
            const StageCertificate c = io::certificate_from_json(detail::read_json(w_cert));
            const BlockSum f = io::blocksum_from_json(detail::read_json(w_f));
            VerifyOptions o;
            o.grid = std::stoull(w_grid);
            o.anchors_and_midpoints = false;
            std::vector<VerifySample> samples;
            const VerifyReport v = verify_stage(f, c, o, &samples);
            std::ostringstream csv;
            csv << "lambda,cell,order,certified_bound,grid_error,margin\n";
            const XReal limit(1.0 / c.plan.in.s0);
            for (const auto& s : samples) {
                csv << io::dec(s.lambda) << "," << s.cell << "," << s.order << "," << io::dec(s.certified) << ","
                    << io::dec(s.observed) << "," << io::dec(limit - s.observed) << "\n";
            }
            if (w_out.empty()) {
                out << csv.str();
            } else {
                detail::write_text(w_out, csv.str());
                detail::summarize(out, v);
            }
            return v.pass ? kPass : kFail;
        }

        if (*weyl) {
            const wide theta = parse_wide_expr(y_theta);
            const UdReport r = ud_test(theta, y_theta, parse_sequence(y_seq), std::stoull(y_N),
                                       static_cast<unsigned>(std::stoul(y_bins)), detail::num(y_tol, "tol"));
            detail::emit(io::to_json(r), y_out, out);
            return r.pass ? kPass : kFail;
        }

        if (*rotate) {
            report_path = r_out;
            const double lambda0 = detail::num(r_lambda0, "lambda0");
            const double eps0 = detail::num(r_eps0, "eps0");
            const wide theta = parse_wide_expr(r_theta);
            std::vector<StageCertificate> certs;
            BlockSum f;
            if (!r_cert.empty()) {
                if (r_f.empty()) throw PreconditionError("--cert needs --f");
                certs.push_back(io::certificate_from_json(detail::read_json(r_cert)));
                f = io::blocksum_from_json(detail::read_json(r_f));
            } else {
                StageResult s = build_stage(plan_stage(r_stage.inputs()));
                certs.push_back(std::move(s.cert));
                f = std::move(s.f);
            }
            const StageRotation r = rotate_stage(f, certs, theta, lambda0, eps0, std::stoull(r_tower), std::stoull(r_search));
            const RotationWitness& w = r.witness;
            const TowerResult& tower = r.tower;
            json j = io::to_json(w);
            j["tower"] = {{"floor", tower.floor}, {"gap", tower.gap}, {"blocks", tower.candidates.size()}};
            j["stage_allowance"] = io::dec(certs.front().allowance);
            detail::emit(j, r_out, out);
            out << "witness order " << w.order << ", {theta k} = " << w.frac_part << ", rotated error "
                << w.recomputed_error << " < " << eps0 << "\n";
            return kPass;
        }

        if (*dich) {
            report_path = d_out;
            const DichotomyReport r = dichotomy_probe(parse_sequence(d_seq), detail::num(d_rho, "rho"),
                                                      parse_polynomial(d_p), detail::num(d_s0, "s0"),
                                                      detail::num(d_eps1, "eps1"), std::stoull(d_n0), std::stoull(d_cap));
            detail::emit(io::to_json(r), d_out, out);
            out << r.sequence << ": " << to_string(r.verdict) << "\n";
            if (r.verdict == DichotomyReport::Verdict::Infeasible) return kBudget;
            return r.verdict == DichotomyReport::Verdict::Feasible ? kPass : kFail;
        }
    } catch (const BudgetExceeded& e) {
        err << "budget exceeded: " << e.what() << "\n";
        detail::emit(detail::budget_report(e), report_path, out);
        return kBudget;
    } catch (const PreconditionError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::out_of_range& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const Error& e) {
        err << "failure: " << e.what() << "\n";
        return kFail;
    }
    return kUsage;
}

} // namespace hcv::cli
