#pragma once

// JSON artifacts. Every real number is written as a decimal string; doubles use
// the shortest round-trip form, extended-range values use to_decimal.

#include "hcv/blocks/block_sum.hpp"
#include "hcv/constructor/dichotomy.hpp"
#include "hcv/constructor/pipeline.hpp"
#include "hcv/constructor/plan.hpp"
#include "hcv/constructor/stage.hpp"
#include "hcv/core/xreal.hpp"
#include "hcv/poly/polynomial.hpp"
#include "hcv/weyl/rotation.hpp"
#include "hcv/weyl/ud.hpp"

#include <json.hpp>

#include <charconv>
#include <string>
#include <system_error>

namespace hcv::io {

using json = nlohmann::ordered_json;

inline std::string dec(double x)
{
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

inline std::string dec(const XReal& x) { return to_decimal(x); }

inline double parse_double(const json& j)
{
    const std::string s = j.get<std::string>();
    double v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw std::invalid_argument("not a decimal number: " + s);
    return v;
}

inline XReal parse_x(const json& j) { return parse_xreal(j.get<std::string>()); }

inline json to_json(const StagePlan& p)
{
    json in;
    in["n0"] = p.in.n0;
    in["rho0"] = dec(p.in.rho0);
    in["target"] = p.target_text;
    if (p.in.j0) in["j0"] = *p.in.j0;
    in["s0"] = dec(p.in.s0);
    in["eps1"] = dec(p.in.eps1);
    in["mode"] = to_string(p.in.mode);
    in["sequence"] = p.in.base.text;
    in["R0"] = dec(p.in.R0);
    in["delta0"] = dec(p.in.delta0);
    in["cap"] = p.in.cap;
    in["order_floor"] = p.in.order_floor;
    in["exact_tail_blocks"] = p.in.exact_tail_blocks;
    in["allow_rho_below_2"] = p.in.allow_rho_below_2;

    json j;
    j["inputs"] = in;
    j["eps0"] = dec(p.eps0);
    j["R0"] = dec(p.R0);
    j["ell"] = p.ell;
    j["M0"] = dec(p.M0);
    j["M1"] = dec(p.M1);
    j["M1_sharp"] = dec(p.M1_sharp);
    j["delta0"] = dec(p.delta0);
    j["delta0_max"] = dec(p.delta0_max);
    j["v0"] = p.v0;
    j["v1"] = p.v1;
    j["v2"] = p.v2;
    j["v3"] = dec(p.v3);
    j["N0_prime"] = p.N0_prime;
    j["gap"] = p.gap;
    j["order_floor"] = p.order_floor;
    j["q_degree"] = p.q_degree;
    j["q_zero"] = p.q_zero;
    j["N0"] = p.N0;
    json f;
    f["delta0"] = dec(p.faithful.delta0);
    f["gap"] = p.faithful.gap;
    f["required_coverage"] = dec(p.faithful.required);
    f["required_sum"] = dec(p.faithful.required_sum);
    f["log10_N0"] = p.faithful.log10_N0 ? json(dec(*p.faithful.log10_N0)) : json(nullptr);
    f["extrapolation"] = to_string(p.faithful.extrapolation);
    f["supremum"] = p.faithful.supremum ? json(dec(*p.faithful.supremum)) : json(nullptr);
    j["faithful_estimate"] = f;
    return j;
}

inline StagePlan plan_from_json(const json& j)
{
    StagePlan p;
    const json& in = j.at("inputs");
    p.in.n0 = in.at("n0").get<std::uint64_t>();
    p.in.rho0 = parse_double(in.at("rho0"));
    p.target_text = in.at("target").get<std::string>();
    p.in.p = parse_polynomial(p.target_text);
    if (in.contains("j0")) p.in.j0 = in.at("j0").get<std::uint64_t>();
    p.in.s0 = parse_double(in.at("s0"));
    p.in.eps1 = parse_double(in.at("eps1"));
    p.in.mode = parse_mode(in.at("mode").get<std::string>());
    p.in.base = parse_sequence(in.at("sequence").get<std::string>());
    p.in.R0 = parse_double(in.at("R0"));
    p.in.delta0 = parse_double(in.at("delta0"));
    p.in.cap = in.at("cap").get<std::uint64_t>();
    p.in.order_floor = in.at("order_floor").get<std::uint64_t>();
    p.in.exact_tail_blocks = in.at("exact_tail_blocks").get<unsigned>();
    p.in.allow_rho_below_2 = in.at("allow_rho_below_2").get<bool>();
    p.eps0 = parse_double(j.at("eps0"));
    p.R0 = parse_double(j.at("R0"));
    p.ell = j.at("ell").get<unsigned>();
    p.M0 = parse_x(j.at("M0"));
    p.M1 = parse_x(j.at("M1"));
    p.M1_sharp = parse_x(j.at("M1_sharp"));
    p.delta0 = parse_double(j.at("delta0"));
    p.delta0_max = parse_double(j.at("delta0_max"));
    p.v0 = j.at("v0").get<std::uint64_t>();
    p.v1 = j.at("v1").get<std::uint64_t>();
    p.v2 = j.at("v2").get<std::uint64_t>();
    p.v3 = parse_double(j.at("v3"));
    p.N0_prime = j.at("N0_prime").get<std::uint64_t>();
    p.gap = j.at("gap").get<std::uint64_t>();
    p.order_floor = j.at("order_floor").get<std::uint64_t>();
    p.q_degree = j.at("q_degree").get<std::uint64_t>();
    p.q_zero = j.at("q_zero").get<bool>();
    p.N0 = j.at("N0").get<std::uint64_t>();
    if (j.contains("faithful_estimate")) {
        const json& f = j.at("faithful_estimate");
        p.faithful.delta0 = parse_double(f.at("delta0"));
        p.faithful.gap = f.at("gap").get<std::uint64_t>();
        p.faithful.required = parse_double(f.at("required_coverage"));
        p.faithful.required_sum = parse_double(f.at("required_sum"));
        if (!f.at("log10_N0").is_null()) p.faithful.log10_N0 = parse_double(f.at("log10_N0"));
        if (!f.at("supremum").is_null()) p.faithful.supremum = parse_double(f.at("supremum"));
        using E = CoverageResult::Extrapolation;
        const std::string x = f.at("extrapolation").get<std::string>();
        for (E e : {E::None, E::DivergesEventually, E::BoundedAbove, E::Unknown}) {
            if (x == to_string(e)) p.faithful.extrapolation = e;
        }
    }
    return p;
}

inline json to_json(const StageCertificate& c)
{
    json j;
    j["plan"] = to_json(c.plan);
    j["label"] = c.label;
    j["mode"] = to_string(c.plan.in.mode);
    j["m0"] = c.m0;
    j["endpoint"] = to_string(c.flag);
    json cells = json::array();
    for (const auto& x : c.cells) {
        json e;
        e["i"] = x.i;
        e["anchor"] = dec(x.anchor);
        e["right"] = dec(x.right);
        e["order"] = x.order;
        e["local"] = dec(x.local);
        e["tail"] = dec(x.tail);
        e["bound"] = dec(x.bound);
        e["margin"] = dec(x.margin);
        cells.push_back(std::move(e));
    }
    j["cells"] = std::move(cells);
    json cl;
    cl["bound"] = dec(c.closeness.bound);
    cl["analytic"] = dec(c.closeness.analytic);
    cl["eps0"] = dec(c.closeness.eps0);
    cl["margin"] = dec(c.closeness.margin);
    j["closeness"] = cl;
    j["min_margin"] = dec(c.min_margin());
    j["allowance"] = dec(c.allowance);
    j["pass"] = c.pass;
    j["deviations"] = c.plan.deviations;
    return j;
}

inline StageCertificate certificate_from_json(const json& j)
{
    StageCertificate c;
    c.plan = plan_from_json(j.at("plan"));
    c.plan.deviations = j.at("deviations").get<std::vector<std::string>>();
    c.label = j.at("label").get<std::string>();
    c.m0 = j.at("m0").get<std::uint64_t>();
    const std::string flag = j.at("endpoint").get<std::string>();
    c.flag = flag == "exact" ? EndpointFlag::Exact : flag == "appended" ? EndpointFlag::Appended : EndpointFlag::Optimized;
    for (const auto& e : j.at("cells")) {
        CellRecord x;
        x.i = e.at("i").get<std::uint64_t>();
        x.anchor = parse_double(e.at("anchor"));
        x.right = parse_double(e.at("right"));
        x.order = e.at("order").get<std::uint64_t>();
        x.local = parse_x(e.at("local"));
        x.tail = parse_x(e.at("tail"));
        x.bound = parse_x(e.at("bound"));
        x.margin = parse_x(e.at("margin"));
        c.cells.push_back(x);
    }
    require(!c.cells.empty(), "certificate has no cells");
    const json& cl = j.at("closeness");
    c.closeness.bound = parse_x(cl.at("bound"));
    c.closeness.analytic = parse_x(cl.at("analytic"));
    c.closeness.eps0 = parse_double(cl.at("eps0"));
    c.closeness.margin = parse_x(cl.at("margin"));
    c.allowance = parse_x(j.at("allowance"));
    c.pass = j.at("pass").get<bool>();
    return c;
}

/// {"base": poly, "groups": [{"label", "target", "blocks": [[m0, "lambda0"], ...]}]}
inline json to_json(const BlockSum& f)
{
    json j;
    j["base"] = to_string(f.base());
    json gs = json::array();
    for (const auto& g : f.groups()) {
        json e;
        e["label"] = g.label;
        e["target"] = to_string(f[g.begin].p());
        json bs = json::array();
        for (std::size_t k = g.begin; k < g.end; ++k) bs.push_back(json::array({f[k].m0, dec(f[k].lambda0)}));
        e["blocks"] = std::move(bs);
        gs.push_back(std::move(e));
    }
    j["groups"] = std::move(gs);
    return j;
}

inline BlockSum blocksum_from_json(const json& j)
{
    BlockSum f(parse_polynomial(j.at("base").get<std::string>()));
    for (const auto& g : j.at("groups")) {
        const TargetPtr t = make_target(parse_polynomial(g.at("target").get<std::string>()));
        std::vector<SolutionBlock> blocks;
        for (const auto& b : g.at("blocks")) blocks.push_back(solve_block(b.at(0).get<std::uint64_t>(), parse_double(b.at(1)), t));
        f.append_group(std::move(blocks), g.at("label").get<std::string>());
    }
    return f;
}

inline json to_json(const VerifyReport& r)
{
    json j;
    j["samples"] = r.samples;
    j["failures"] = r.failures;
    j["max_observed"] = dec(r.max_observed);
    j["min_margin"] = dec(r.min_margin);
    j["worst_ratio"] = dec(r.worst_ratio);
    json ff = json::array();
    for (const auto& s : r.first_failures) {
        ff.push_back({{"lambda", dec(s.lambda)}, {"cell", s.cell}, {"order", s.order},
                      {"certified", dec(s.certified)}, {"observed", dec(s.observed)}});
    }
    j["first_failures"] = std::move(ff);
    j["pass"] = r.pass;
    return j;
}

inline json to_json(const PipelineResult& r)
{
    json j;
    json stages = json::array();
    for (std::size_t k = 0; k < r.certs.size(); ++k) {
        json s;
        s["t"] = k + 1;
        s["eps1"] = dec(r.eps1[k]);
        s["retries"] = r.retries[k];
        s["certificate"] = to_json(r.certs[k]);
        s["final_verify"] = to_json(r.final_verify[k]);
        stages.push_back(std::move(s));
    }
    j["stages"] = std::move(stages);
    json cy = json::array();
    for (const auto& c : r.cauchy) cy.push_back({{"t", c.t}, {"metric", dec(c.metric)}, {"bound", dec(c.bound)}, {"ok", c.ok}});
    j["cauchy"] = std::move(cy);
    j["pass"] = r.pass;
    return j;
}

inline json to_json(const DichotomyReport& r)
{
    json j;
    j["sequence"] = r.sequence;
    j["rho0"] = dec(r.rho0);
    j["delta0"] = dec(r.delta0);
    j["gap"] = r.gap;
    j["required_coverage"] = dec(r.required);
    j["achieved"] = dec(r.achieved);
    j["verdict"] = to_string(r.verdict);
    j["N0"] = r.N0 ? json(*r.N0) : json(nullptr);
    j["log10_N0"] = r.log10_N0 ? json(dec(*r.log10_N0)) : json(nullptr);
    j["supremum"] = r.supremum ? json(dec(*r.supremum)) : json(nullptr);
    j["extrapolation"] = to_string(r.extrapolation);
    json d;
    d["terms"] = r.divergence.terms;
    d["partial_sum"] = dec(r.divergence.partial_sum);
    d["verdict"] = to_string(r.divergence.verdict);
    d["limit_bound"] = r.divergence.limit_bound ? json(dec(*r.divergence.limit_bound)) : json(nullptr);
    j["divergence"] = d;
    j["message"] = r.message;
    return j;
}

inline json to_json(const UdReport& r)
{
    return {{"theta", r.theta}, {"sequence", r.sequence}, {"N", r.N}, {"bins", r.bins}, {"tol", dec(r.tol)},
            {"max_bin_deviation", dec(r.max_bin_deviation)}, {"star_discrepancy", dec(r.star_discrepancy)},
            {"pass", r.pass}};
}

inline json to_json(const RotationWitness& w)
{
    json j;
    j["theta0"] = dec(w.theta0);
    j["lambda0"] = dec(w.lambda0);
    j["target"] = to_string(w.target);
    j["n0"] = w.n0;
    j["eps0"] = dec(w.params.eps0);
    j["M0"] = dec(w.params.M0);
    j["rho2"] = dec(w.params.rho2);
    j["eps1"] = dec(w.params.eps1);
    j["phi0"] = dec(w.params.phi0);
    j["arc"] = dec(w.params.arc);
    j["trinomial"] = dec(w.params.eps1 * w.params.eps1 + (w.params.M0 + 1) * w.params.eps1);
    j["order"] = w.order;
    j["candidate_rank"] = w.candidate_rank;
    j["scanned"] = w.scanned;
    j["frac_part"] = dec(w.frac_part);
    j["root_distance"] = dec(w.root_distance);
    j["base_error"] = dec(w.base_error);
    j["certified_error"] = dec(w.certified_error);
    j["recomputed_error"] = dec(w.recomputed_error);
    return j;
}

} // namespace hcv::io
