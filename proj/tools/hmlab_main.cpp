// hmlab: harmonic-measure and Carleson-functional experiments on planar
// domains with fractal boundaries.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hmlab/augment.hpp"
#include "hmlab/carleson.hpp"
#include "hmlab/corona.hpp"
#include "hmlab/cubes.hpp"
#include "hmlab/errors.hpp"
#include "hmlab/geometry.hpp"
#include "hmlab/ledger.hpp"
#include "hmlab/parallel.hpp"
#include "hmlab/potential.hpp"
#include "hmlab/svg.hpp"
#include "hmlab/whitney.hpp"

namespace fs = std::filesystem;
using namespace hmlab;
using nlohmann::json;

namespace {

struct CommonOpts {
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
    // domain
    std::string domain = "cantor";
    double lambda = 0.25;
    int level = 3;
    double window_radius = 4.0;
    double disc_radius = 1.0;
};

Domain make_domain(const CommonOpts& c) {
    if (c.domain == "cantor") return make_cantor({c.lambda, c.level}, c.window_radius);
    if (c.domain == "half-plane") return make_half_plane_window(c.window_radius);
    if (c.domain == "disc") return make_disc(c.disc_radius);
    throw UsageError("unknown domain kind '" + c.domain + "'");
}

json domain_json(const CommonOpts& c) {
    json j;
    j["kind"] = c.domain;
    if (c.domain == "cantor") {
        j["lambda"] = c.lambda;
        j["level"] = c.level;
    }
    j["window_radius"] = c.domain == "disc" ? c.disc_radius : c.window_radius;
    return j;
}

void write_file(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    f << content;
    if (!f) throw std::runtime_error("failed to write " + p.string());
}

void write_manifest(const fs::path& dir, const std::string& command, const json& config,
                    const ConstantsLedger& ledger, const json& results) {
    json j;
    j["command"] = command;
    j["config"] = config;
    j["constants"] = json::parse(ledger.to_json());
    j["results"] = results;
    write_file(dir / "manifest.json", j.dump(2) + "\n");
}

void add_common(CLI::App* cmd, CommonOpts& c) {
    const char* env_out = std::getenv("HMLAB_OUTDIR");
    c.out_dir = env_out ? env_out : "out";
    cmd->add_option("--out", c.out_dir, "output directory");
    cmd->add_option("--seed", c.seed, "RNG seed (required)")->required();
    cmd->add_option("--workers", c.workers, "worker threads (0 = auto)");
    cmd->add_option("--domain", c.domain, "cantor|half-plane|disc");
    cmd->add_option("--lambda", c.lambda, "Cantor ratio in (0, 1/2)");
    cmd->add_option("--level", c.level, "Cantor construction level");
    cmd->add_option("--window-radius", c.window_radius, "window ball radius");
    cmd->add_option("--disc-radius", c.disc_radius, "disc radius");
}

ConstantsLedger base_ledger(const Domain& dom) {
    ConstantsLedger led;
    led.set("alpha", dom.params.alpha, ConstantsLedger::Provenance::Fixed);
    led.set("beta", dom.params.beta, ConstantsLedger::Provenance::Fixed);
    led.set("c6", 17.0 / 16.0, ConstantsLedger::Provenance::Fixed);
    led.set("c7", 25.0 / 8.0, ConstantsLedger::Provenance::Fixed, {"c6"});
    led.set("c8", 33.0 / 32.0, ConstantsLedger::Provenance::Fixed, {"c6"});
    return led;
}

void merge_ledger(ConstantsLedger& dst, const ConstantsLedger& src) {
    for (const auto& e : src.entries()) {
        std::vector<std::string> deps;
        for (const auto& d : e.deps)
            if (dst.has(d)) deps.push_back(d);
        dst.set(e.name, e.value, e.prov, deps);
    }
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------

int cmd_gen_domain(const CommonOpts& c) {
    Domain dom = make_domain(c);
    fs::path dir(c.out_dir);
    write_file(dir / "domain.json", domain_spec_to_json(dom) + "\n");
    Box2 view{{dom.window.center.x - dom.window.radius, dom.window.center.y - dom.window.radius},
              {dom.window.center.x + dom.window.radius, dom.window.center.y + dom.window.radius}};
    SvgCanvas svg(view);
    svg.draw_domain(dom);
    write_file(dir / "domain.svg", svg.finish());
    json results;
    results["pieces"] = dom.pieces.size();
    write_manifest(dir, "gen-domain", domain_json(c), base_ledger(dom), results);
    return 0;
}

int cmd_whitney(const CommonOpts& c, double min_side, double region_radius) {
    Domain dom = make_domain(c);
    Vec2 center = dom.kind == DomainKind::CantorComplement ? Vec2{0.5, 0.5} : Vec2{0.0, 0.0};
    Ball region{center, region_radius > 0 ? region_radius : dom.window.radius};
    WhitneyDecomposition dec = whitney_decompose(dom, region, min_side);
    classify_all(dec, dom);
    fs::path dir(c.out_dir);
    write_file(dir / "cells.csv", cells_to_csv(dec));
    Box2 view{{center.x - region.radius, center.y - region.radius},
              {center.x + region.radius, center.y + region.radius}};
    SvgCanvas svg(view);
    for (const WhitneyCell& cell : dec.cells)
        svg.rect(cell.cube.box(), cell.label == CellCase::II ? "#cc4444" : "#4477cc");
    svg.draw_domain(dom);
    write_file(dir / "whitney.svg", svg.finish());
    ConstantsLedger led = base_ledger(dom);
    int overlap = measured_overlap(dec);
    led.set("whitney-overlap-N", overlap, ConstantsLedger::Provenance::Measured, {"c6", "c7"});
    json results;
    results["cells"] = dec.cells.size();
    results["remainder_volume"] = dec.remainder_volume;
    results["remainder_cells"] = dec.remainder_cells;
    results["overlap"] = overlap;
    json cfg = domain_json(c);
    cfg["min_side"] = min_side;
    cfg["seed"] = c.seed;
    write_manifest(dir, "whitney", cfg, led, results);
    return 0;
}

int cmd_cubes(const CommonOpts& c, int N, double eta, int jmax, int depth, bool attach,
              double eps, std::int64_t budget) {
    Domain dom = make_domain(c);
    CubeFamily fam = build_cubes(dom, N, eta, jmax, depth);
    if (attach) {
        BallAttachOptions opt;
        opt.eps = eps;
        opt.samples = budget;
        opt.seed = c.seed;
        attach_corkscrew_balls(fam, opt);
    }
    FamilyAudit audit = audit_family(fam);
    HausdorffAudit haus = audit_hausdorff(fam);
    fs::path dir(c.out_dir);
    write_file(dir / "cubes.json", fam.to_json() + "\n");
    write_file(dir / "cubes.svg", family_to_svg(fam));
    // small-boundary scan on a probe cube per level
    std::ostringstream sb;
    sb << "level,index,tau,n_tau,fitted_C\n";
    sb.precision(17);
    std::vector<double> taus;
    for (int k = 1; k <= 4; ++k) taus.push_back(std::ldexp(1.0, -N * k));
    for (int j = 0; j <= fam.jmax; ++j) {
        if (fam.levels[static_cast<std::size_t>(j)].empty()) continue;
        const Cube& probe = fam.levels[static_cast<std::size_t>(j)][0];
        auto stats = small_boundary_stats(fam, probe, taus);
        double fit = small_boundary_fit(stats, dom.params.d);
        for (const auto& st : stats)
            sb << j << ',' << probe.id.index << ',' << st.tau << ',' << st.n_tau << ',' << fit
               << '\n';
    }
    write_file(dir / "small_boundary.csv", sb.str());
    json results;
    results["levels"] = fam.levels.size();
    std::size_t total = 0;
    for (const auto& l : fam.levels) total += l.size();
    results["cubes"] = total;
    results["partition_ok"] = audit.partition_ok;
    results["nesting_ok"] = audit.nesting_ok;
    results["diam_ok"] = audit.diam_ok;
    results["anchor_ok"] = audit.anchor_ok;
    results["hausdorff_violations"] = haus.violations;
    results["hausdorff_worst_ratio"] = haus.worst_ratio;
    results["c3"] = fam.c3;
    json cfg = domain_json(c);
    cfg["N"] = N;
    cfg["eta"] = eta;
    cfg["jmax"] = jmax;
    cfg["depth"] = depth;
    cfg["seed"] = c.seed;
    ConstantsLedger led = base_ledger(dom);
    merge_ledger(led, fam.ledger);
    write_manifest(dir, "cubes", cfg, led, results);
    if (!(audit.partition_ok && audit.nesting_ok && audit.diam_ok && audit.anchor_ok) ||
        haus.violations > 0)
        throw CertificationError("cube family audit failed: " + audit.first_failure +
                                 haus.first_failure);
    return 0;
}

int cmd_corona(const CommonOpts& c, int N, double eta, int jmax, int depth,
               CoronaParams params, int kmax) {
    Domain dom = make_domain(c);
    CubeFamily fam = build_cubes(dom, N, eta, jmax, depth);
    BallAttachOptions opt;
    opt.eps = params.eps;
    opt.seed = c.seed;
    opt.certify_per_level = 0;  // geometric attach; corona certifies roots on demand
    attach_corkscrew_balls(fam, opt);
    params.seed = c.seed;
    CubeId root = fam.levels[0][0].id;
    CoronaTree tree = generations(fam, root, params, kmax);
    fs::path dir(c.out_dir);
    write_file(dir / "corona.json", tree.to_json(fam) + "\n");
    write_file(dir / "packing.csv", tree.packing_csv());
    ConstantsLedger led = base_ledger(dom);
    merge_ledger(led, fam.ledger);
    led.set("c5", tree.c5_observed, ConstantsLedger::Provenance::Measured);
    led.set("A", params.A, ConstantsLedger::Provenance::Fixed);
    led.set("delta", params.delta, ConstantsLedger::Provenance::Fixed);
    json results;
    results["generations"] = tree.generations.size();
    results["packing_partial"] = tree.packing_partial;
    results["undecided_leaf_mass"] = tree.undecided_leaf_mass;
    results["c5_observed"] = tree.c5_observed;
    json cfg = domain_json(c);
    cfg["N"] = N;
    cfg["eta"] = eta;
    cfg["jmax"] = jmax;
    cfg["A"] = params.A;
    cfg["delta"] = params.delta;
    cfg["eps"] = params.eps;
    cfg["budget"] = params.budget;
    cfg["kmax"] = kmax;
    cfg["scan_depth"] = params.scan_depth;
    cfg["seed"] = c.seed;
    write_manifest(dir, "corona", cfg, led, results);
    return 0;
}

int cmd_carleson(const CommonOpts& c, const std::string& mode, double r, double min_side,
                 std::int64_t budget, double shell) {
    Domain dom = make_domain(c);
    fs::path dir(c.out_dir);
    json results;
    json cfg = domain_json(c);
    cfg["mode"] = mode;
    cfg["seed"] = c.seed;
    if (mode == "functional") {
        HarmonicFunctionHandle u;
        Vec2 x;
        if (c.domain == "half-plane") {
            u = HarmonicFunctionHandle::halfplane_angle();
            x = {0.0, 0.0};
        } else {
            u = HarmonicFunctionHandle::wos_region(dom, cantor_checkerboard(dom), budget,
                                                   shell, c.seed);
            x = {0.0, 0.0};
        }
        CarlesonReport rep = carleson_functional(dom, u, x, r, min_side);
        results["value"] = rep.value;
        results["truncation_bound"] = rep.truncation_bound;
        results["cells"] = rep.quadrature_cells;
        std::ostringstream csv;
        csv << "cx,cy,radius,value,truncation_bound,cells\n"
            << g17(rep.center.x) << ',' << g17(rep.center.y) << ',' << g17(rep.radius) << ','
            << g17(rep.value) << ',' << g17(rep.truncation_bound) << ','
            << rep.quadrature_cells << '\n';
        write_file(dir / "carleson.csv", csv.str());
    } else if (mode == "dist-integral") {
        Vec2 x = c.domain == "cantor" ? Vec2{0.0, 0.0} : Vec2{0.0, 0.0};
        DistIntegralReport rep = dist_integral(dom, x, r, 20'000'000, min_side);
        results["value"] = rep.value;
        results["refine_values"] = rep.refine_values;
        results["saturated"] = rep.saturated;
        results["skipped_volume"] = rep.skipped_volume;
        std::ostringstream csv;
        csv << "pass,value\n";
        for (std::size_t i = 0; i < rep.refine_values.size(); ++i)
            csv << i << ',' << g17(rep.refine_values[static_cast<std::size_t>(i)]) << '\n';
        write_file(dir / "dist_integral.csv", csv.str());
    } else {
        throw UsageError("carleson: mode must be functional|dist-integral");
    }
    cfg["r"] = r;
    cfg["min_side"] = min_side;
    write_manifest(dir, "carleson", cfg, base_ledger(dom), results);
    return 0;
}

int cmd_eps_approx(const CommonOpts& c, double eps, double r, double min_side) {
    Domain dom = make_domain(c);
    HarmonicFunctionHandle u = c.domain == "half-plane"
                                   ? HarmonicFunctionHandle::halfplane_angle()
                                   : HarmonicFunctionHandle::wos_region(
                                         dom, cantor_checkerboard(dom), 4000, 1e-4, c.seed);
    Vec2 x{0.0, 0.0};
    EpsApproximant g = eps_approximant(dom, u, eps, Ball{x, r}, min_side);
    json results;
    results["success"] = g.success;
    results["bv_ratio"] = g.bv_ratio;
    results["cells"] = g.cells.size();
    results["failed_cells"] = g.failed_cells;
    results["subdivided"] = g.subdivided;
    json cfg = domain_json(c);
    cfg["eps"] = eps;
    cfg["r"] = r;
    cfg["min_side"] = min_side;
    cfg["seed"] = c.seed;
    write_manifest(fs::path(c.out_dir), "eps-approx", cfg, base_ledger(dom), results);
    return 0;
}

int cmd_augment(const CommonOpts& c, int N, double eta, int jmax, int fam_depth,
                AugmentParams params, int trials) {
    Domain dom = make_domain(c);
    CubeFamily fam = build_cubes(dom, N, eta, jmax, fam_depth);
    BallAttachOptions opt;
    opt.eps = params.eps;
    opt.seed = c.seed;
    opt.certify_per_level = 0;
    attach_corkscrew_balls(fam, opt);
    params.seed = c.seed;
    AugmentResult aug = build_augmented(fam, params);
    AhlforsReport rep = ahlfors_audit(fam, aug, trials, c.seed);
    fs::path dir(c.out_dir);
    write_file(dir / "augment.json", aug.to_json() + "\n");
    write_file(dir / "ahlfors.json", rep.to_json() + "\n");
    write_file(dir / "tilde_rerun.json", tilde_rerun_report(fam, aug, params) + "\n");
    std::ostringstream sig;
    sig << "piece,mass\n";
    sig << "mu_total," << g17(aug.sigma.mu_mass) << '\n';
    for (std::size_t i = 0; i < aug.sigma.caps.size(); ++i)
        sig << "cap_" << i << ',' << g17(aug.sigma.caps[i].area) << '\n';
    write_file(dir / "sigma.csv", sig.str());
    Box2 view{{-0.2, -0.2}, {1.2, 1.2}};
    SvgCanvas svg(view);
    svg.draw_domain(aug.augmented);
    write_file(dir / "augmented.svg", svg.finish());
    ConstantsLedger led = base_ledger(dom);
    merge_ledger(led, fam.ledger);
    led.set("c18", aug.c18, ConstantsLedger::Provenance::Calibrated, {"c3"});
    led.set("lambda-dilate", aug.lambda_dilate, ConstantsLedger::Provenance::Fixed, {"c3"});
    json results;
    results["c18"] = aug.c18;
    results["processed"] = aug.processed;
    results["gate_pass"] = aug.gate_pass;
    results["mu_mass"] = aug.sigma.mu_mass;
    results["nu_mass"] = aug.sigma.nu_mass;
    results["ahlfors_constant"] = rep.constant;
    json cfg = domain_json(c);
    cfg["N"] = N;
    cfg["eta"] = eta;
    cfg["jmax"] = jmax;
    cfg["depth"] = params.depth;
    cfg["A"] = params.A;
    cfg["delta"] = params.delta;
    cfg["eps"] = params.eps;
    cfg["budget"] = params.budget;
    cfg["seed"] = c.seed;
    write_manifest(dir, "augment", cfg, led, results);
    return 0;
}

int cmd_dichotomy(const CommonOpts& c, std::vector<double> lambdas, int level_lo, int level_hi,
                  std::int64_t budget) {
    fs::path dir(c.out_dir);
    std::ostringstream csv;
    csv << "lambda,level,carleson_value,dist_integral,packing_partial\n";
    json rows = json::array();
    for (double lam : lambdas) {
        for (int lvl = level_lo; lvl <= level_hi; ++lvl) {
            Domain dom = make_cantor({lam, lvl}, 4.0);
            double min_side = std::pow(lam, lvl) * (1.0 - 2.0 * lam) / 8.0;
            DistIntegralReport di = dist_integral(dom, {0.0, 0.0}, 1.0, 20'000'000, min_side);
            HarmonicFunctionHandle u = HarmonicFunctionHandle::wos_region(
                dom, cantor_checkerboard(dom), budget, 1e-4, c.seed);
            CarlesonReport cr =
                carleson_functional(dom, u, {0.0, 0.0}, 1.0, std::max(min_side, 1.0 / 1024));
            double packing = 0.0;
            if (lvl >= 2) {
                CubeFamily fam = build_cubes(dom, 4, 0.25, std::min(4, 2 * lvl), 4);
                BallAttachOptions opt;
                opt.seed = c.seed;
                opt.certify_per_level = 0;
                attach_corkscrew_balls(fam, opt);
                CoronaParams params;
                params.seed = c.seed;
                params.budget = budget;
                CoronaTree tree = generations(fam, fam.levels[0][0].id, params, 3);
                if (!tree.packing_partial.empty()) packing = tree.packing_partial.back();
            }
            csv << g17(lam) << ',' << lvl << ',' << g17(cr.value) << ',' << g17(di.value)
                << ',' << g17(packing) << '\n';
            json row;
            row["lambda"] = lam;
            row["level"] = lvl;
            row["carleson"] = cr.value;
            row["dist_integral"] = di.value;
            row["packing"] = packing;
            rows.push_back(row);
        }
    }
    write_file(dir / "dichotomy.csv", csv.str());
    // trend plot
    SvgCanvas svg({{0.0, 0.0}, {1.0, 1.0}}, 600);
    double vmax = 1e-300;
    for (const auto& row : rows) vmax = std::max(vmax, row["dist_integral"].get<double>());
    std::size_t li = 0;
    const char* colors[4] = {"#3366dd", "#dd3333", "#33aa33", "#aa33aa"};
    for (double lam : lambdas) {
        std::vector<Vec2> pts;
        for (const auto& row : rows)
            if (row["lambda"].get<double>() == lam)
                pts.push_back({(row["level"].get<double>() - level_lo) /
                                   std::max(1, level_hi - level_lo),
                               row["dist_integral"].get<double>() / vmax});
        svg.polyline(pts, colors[li % 4], 2.0);
        ++li;
    }
    write_file(dir / "dichotomy.svg", svg.finish());
    json results;
    results["rows"] = rows;
    json cfg;
    cfg["lambdas"] = lambdas;
    cfg["levels"] = {level_lo, level_hi};
    cfg["budget"] = budget;
    cfg["seed"] = c.seed;
    Domain probe = make_cantor({lambdas.empty() ? 0.25 : lambdas[0], 1}, 4.0);
    write_manifest(dir, "dichotomy", cfg, base_ledger(probe), results);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"harmonic measure / Carleson functional experiments"};
    app.require_subcommand(1);

    CommonOpts c;
    int N = 4, jmax = 4, depth = 4, kmax = 3, trials = 1000;
    double eta = 0.25, min_side = 1.0 / 256, r = 1.0, eps = 0.1, shell = 1e-4;
    double region_radius = -1.0;
    std::int64_t budget = 20000;
    CoronaParams corona_params;
    AugmentParams aug_params;
    std::vector<double> lambdas{0.2, 0.3};
    int level_lo = 2, level_hi = 5;
    std::string carleson_mode = "functional";
    bool attach = false;

    auto* gen = app.add_subcommand("gen-domain", "emit a domain spec + SVG");
    add_common(gen, c);

    auto* wh = app.add_subcommand("whitney", "Whitney decomposition");
    add_common(wh, c);
    wh->add_option("--min-side", min_side);
    wh->add_option("--region-radius", region_radius);

    auto* cu = app.add_subcommand("cubes", "Christ-David cube family + audits");
    add_common(cu, c);
    cu->add_option("--N", N);
    cu->add_option("--eta", eta);
    cu->add_option("--jmax", jmax);
    cu->add_option("--depth", depth);
    cu->add_option("--budget", budget);
    cu->add_option("--eps", eps);
    cu->add_flag("--attach-balls", attach);

    auto* co = app.add_subcommand("corona", "HD/LD stopping generations");
    add_common(co, c);
    co->add_option("--N", N);
    co->add_option("--eta", eta);
    co->add_option("--jmax", jmax);
    co->add_option("--depth", depth);
    co->add_option("--kmax", kmax)->check(CLI::PositiveNumber);
    co->add_option("--A", corona_params.A);
    co->add_option("--delta", corona_params.delta);
    co->add_option("--eps", corona_params.eps);
    co->add_option("--budget", corona_params.budget);
    co->add_option("--shell", corona_params.shell);
    co->add_option("--scan-depth", corona_params.scan_depth);

    auto* ca = app.add_subcommand("carleson", "square-function / dist-integral");
    add_common(ca, c);
    ca->add_option("--mode", carleson_mode, "functional|dist-integral");
    ca->add_option("--r", r);
    ca->add_option("--min-side", min_side);
    ca->add_option("--budget", budget);
    ca->add_option("--shell", shell);

    auto* ep = app.add_subcommand("eps-approx", "epsilon-approximant");
    add_common(ep, c);
    ep->add_option("--eps", eps);
    ep->add_option("--r", r);
    ep->add_option("--min-side", min_side);

    auto* au = app.add_subcommand("augment", "tilde domain + sigma measure");
    add_common(au, c);
    au->add_option("--N", N);
    au->add_option("--eta", eta);
    au->add_option("--jmax", jmax);
    au->add_option("--fam-depth", depth);
    au->add_option("--depth", aug_params.depth);
    au->add_option("--A", aug_params.A);
    au->add_option("--delta", aug_params.delta);
    au->add_option("--eps", aug_params.eps);
    au->add_option("--budget", aug_params.budget);
    au->add_option("--c18", aug_params.c18);
    au->add_option("--trials", trials);

    auto* di = app.add_subcommand("dichotomy", "Cantor dichotomy table");
    add_common(di, c);
    di->add_option("--lambdas", lambdas);
    di->add_option("--level-lo", level_lo);
    di->add_option("--level-hi", level_hi);
    di->add_option("--budget", budget);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        set_worker_count(c.workers);
        if (gen->parsed()) return cmd_gen_domain(c);
        if (wh->parsed()) return cmd_whitney(c, min_side, region_radius);
        if (cu->parsed()) return cmd_cubes(c, N, eta, jmax, depth, attach, eps, budget);
        if (co->parsed()) return cmd_corona(c, N, eta, jmax, depth, corona_params, kmax);
        if (ca->parsed()) return cmd_carleson(c, carleson_mode, r, min_side, budget, shell);
        if (ep->parsed()) return cmd_eps_approx(c, eps, r, min_side);
        if (au->parsed()) return cmd_augment(c, N, eta, jmax, depth, aug_params, trials);
        if (di->parsed()) return cmd_dichotomy(c, lambdas, level_lo, level_hi, budget);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const IndeterminacyError& e) {
        std::cerr << "indeterminacy: " << e.what() << "\n";
        return 4;
    } catch (const CertificationError& e) {
        std::cerr << "certification: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
