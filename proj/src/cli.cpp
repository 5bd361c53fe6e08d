#include "nilreg/cli.hpp"

#include "nilreg/distortion.hpp"
#include "nilreg/group.hpp"
#include "nilreg/interval.hpp"
#include "nilreg/markov.hpp"
#include "nilreg/orbit.hpp"
#include "nilreg/paths.hpp"
#include "nilreg/smoothing.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace nilreg {

namespace {

using nlohmann::json;

struct Output {
    std::string path; // empty = stdout
    std::ostringstream buf;

    template <class T> Output& operator<<(const T& v) {
        buf << v;
        return *this;
    }

    int flush() {
        if (path.empty()) {
            std::cout << buf.str();
            return 0;
        }
        std::ofstream f(path);
        if (!f) {
            std::cerr << "cannot open output file " << path << "\n";
            return 2;
        }
        f << buf.str();
        return 0;
    }
};

int cmd_orbit_growth(int d, int n, bool symmetrized, uint64_t mem_cap, const std::string& window,
                     Output& out) {
    CensusOptions opts;
    opts.symmetrized = symmetrized;
    if (mem_cap) opts.max_points = mem_cap;
    auto census = ball_census(d, n, opts);
    out << "radius,ball,sphere\n";
    for (int k = 0; k <= census.last_completed; ++k)
        out << k << "," << census.counts[size_t(k)] << "," << census.sphere(k) << "\n";
    int status = 0;
    if (census.truncated) {
        std::cerr << "census truncated by the memory cap at radius " << census.last_completed
                  << "\n";
        status = 3;
    }
    if (d == 3 && !symmetrized) {
        for (int k = 0; k <= census.last_completed; ++k) {
            if (census.counts[size_t(k)] != closed_form_d3(k)) {
                std::cerr << "closed-form mismatch at radius " << k << "\n";
                status = 1;
            }
        }
        std::cerr << "closed form (n^3+11n+6)/6 " << (status == 0 ? "confirmed" : "FAILED")
                  << " for n <= " << census.last_completed << "\n";
    }
    if (!window.empty()) {
        const auto colon = window.find(':');
        const int lo = std::stoi(window.substr(0, colon));
        const int hi = std::stoi(window.substr(colon + 1));
        std::cerr << "log-log slope on [" << lo << "," << hi
                  << "] = " << growth_exponent_estimate(census, lo, hi) << "\n";
    }
    return status;
}

int cmd_markov_check(int kmax, bool perturbed, int distribution, Output& out) {
    const auto rule = perturbed ? TransitionRule(transition_perturbed) : TransitionRule(transition);
    if (distribution > 0) {
        const auto d = arrival_distribution(distribution, rule);
        out << "x,y,numerator,denominator\n";
        for (const auto& [st, p] : d.probabilities)
            out << st.x << "," << st.y << "," << numerator(p) << "," << denominator(p) << "\n";
        return 0;
    }
    const auto rep = verify_equidistribution(kmax, rule);
    if (rep.success) {
        out << "equidistribution exact for all spheres k <= " << kmax << "\n";
        return perturbed ? 1 : 0;
    }
    out << "first failure at k = " << rep.first_failure << " at (" << rep.witness.x << ","
        << rep.witness.y << ") with probability " << rep.witness_probability << " (expected 1/"
        << 4 * rep.first_failure << ")\n";
    return perturbed ? 0 : 1;
}

int cmd_decompose(int64_t N, int64_t M, bool simple, int windows, uint64_t seed, Output& out) {
    const PathFamily fam = simple ? build_paths_simple(N, M) : build_paths(N, M);
    out << to_text(fam);
    bool ok = true;
    SplitMix64 rng(seed);
    for (int t = 0; t < windows; ++t) {
        const int64_t a = rng.range(0, 4 * N * (M - 1));
        const int64_t b = a + rng.range(0, 4 * N * (M - 1));
        const auto dev = deviation(fam, a, b);
        out << "window [" << a << "," << b << "] counts [" << dev.min_count << ","
            << dev.max_count << "] bound " << dev.bound << (dev.within ? " ok" : " VIOLATED")
            << (dev.degenerate ? " (degenerate)" : "") << "\n";
        ok = ok && dev.within;
    }
    const auto pdev = prefix_deviation(fam, 3 * N * (M - 1));
    out << "prefix [0," << 3 * N * (M - 1) << "] counts [" << pdev.min_count << ","
        << pdev.max_count << "] bound " << pdev.bound << (pdev.within ? " ok" : " VIOLATED")
        << "\n";
    ok = ok && pdev.within;
    return ok ? 0 : 1;
}

int cmd_select_path(int d, int levels, double alpha, double eps, double alpha_b, Output& out) {
    if (d == 3) {
        SelectionParams prm;
        prm.levels = levels;
        prm.alpha = alpha;
        prm.eps = eps;
        prm.alpha_b = alpha_b;
        const auto res = select_paths_d3(prm);
        if (!res.ok()) {
            std::cerr << "selection failed at level " << res.failure->level << ": "
                      << res.failure->reason << "\n";
            return 1;
        }
        out << to_certificate_text(*res.state);
        std::cerr << "selection succeeded; L_alpha = " << res.state->lalpha_total
                  << " <= " << res.state->lalpha_closed_form << "\n";
        return 0;
    }
    const auto sel = select_paths_general(d, levels, alpha, alpha_b);
    if (!sel.ok) {
        std::cerr << "selection failed: " << sel.failure << "\n";
        return 1;
    }
    out << "general-d selection d=" << d << " levels=" << levels << "\n";
    for (const auto& gc : sel.chosen) {
        out << "level " << gc.level << " path " << gc.path_id << " sum " << gc.sum
            << " threshold " << gc.threshold << " entry";
        for (auto v : gc.entry) out << " " << v;
        out << "\n";
    }
    out << "trajectory points " << sel.trajectory.size() << " lalpha "
        << (sel.lalpha_partial.empty() ? 0.0 : sel.lalpha_partial.back()) << "\n";
    return 0;
}

int cmd_lalpha(const std::string& cert_path, const std::string& alphas, Output& out) {
    std::ifstream f(cert_path);
    if (!f) {
        std::cerr << "cannot read certificate " << cert_path << "\n";
        return 2;
    }
    std::stringstream ss;
    ss << f.rdbuf();
    const SelectionState st = parse_certificate(ss.str());
    const ProjectedWeights w(choose_exponents_b(3, st.params.alpha_b));

    std::vector<double> avals;
    std::stringstream as(alphas);
    std::string tok;
    while (std::getline(as, tok, ',')) avals.push_back(std::stod(tok));
    if (avals.empty()) avals.push_back(st.params.alpha);

    // the connector walk from the origin is its own row (level 0); each
    // level then owns its path ascent and its row walk
    out << "alpha,level,contribution,cumulative\n";
    for (double a : avals) {
        const auto partial = lalpha_partial_sums(st.trajectory, w, a);
        size_t pos = 0;
        const auto& first = st.chosen.front();
        while (pos < st.trajectory.size() &&
               !(st.trajectory[pos][0] == first.column &&
                 st.trajectory[pos][1] == first.entry_height))
            ++pos;
        if (pos == 0 || pos == st.trajectory.size())
            throw std::logic_error("lalpha: certificate trajectory lacks the entry point");
        double prev_cum = partial[pos - 1];
        out << a << ",0," << prev_cum << "," << prev_cum << "\n";
        for (size_t li = 0; li < st.chosen.size(); ++li) {
            const auto& lc = st.chosen[li];
            // the level ends after the row walk: last point with y == exit
            // and x == next column (or the end of P(n))
            const int64_t end_x = li + 1 < st.chosen.size() ? st.chosen[li + 1].column
                                                            : 8 * lc.n - 1;
            while (pos < st.trajectory.size() &&
                   !(st.trajectory[pos][0] == end_x && st.trajectory[pos][1] == lc.exit_row))
                ++pos;
            const double cum = partial[pos];
            out << a << "," << lc.k << "," << cum - prev_cum << "," << cum << "\n";
            prev_cum = cum;
        }
    }
    return 0;
}

std::shared_ptr<const IntervalFamily> make_family_b(const LengthSchemeB& s, int64_t radius,
                                                    bool normalize) {
    return std::make_shared<IntervalFamily>(build_family_b(s, radius, normalize));
}

int cmd_build_maps(const std::string& theorem, int d, double alpha, int64_t radius,
                   bool normalize, bool dump, Output& out) {
    if (theorem == "B") {
        const auto s = choose_exponents_b(d, alpha);
        auto fam = make_family_b(s, radius, normalize);
        if (dump) {
            out << to_columnar_text(*fam);
            return 0;
        }
        out << "family intervals " << fam->count() << " total " << fam->total << "\n";
        for (int j = 1; j <= d; ++j) {
            const auto m = assemble_generator_b(s, fam, j);
            out << m.name() << " masked " << m.masked_count() << " of " << fam->count() << "\n";
        }
        return 0;
    }
    const auto s = choose_exponents_c(d, alpha);
    auto fam = std::make_shared<IntervalFamily>(
        build_family_c(s, radius, radius * radius, normalize));
    if (dump) {
        out << to_columnar_text(*fam);
        return 0;
    }
    out << "family intervals " << fam->count() << " total " << fam->total << " q " << s.q
        << " p " << s.p << "\n";
    const auto f = assemble_generator_c(s, fam, MetabelianGenerator::f());
    out << f.name() << " masked " << f.masked_count() << "\n";
    for (int k = 0; k <= d; ++k) {
        const auto g = assemble_generator_c(s, fam, MetabelianGenerator::g(k));
        out << g.name() << " masked " << g.masked_count() << "\n";
    }
    return 0;
}

int cmd_holder(const std::string& theorem, int d, double alpha, double halpha, int64_t radius,
               uint64_t pairs, uint64_t seed, Output& out) {
    auto emit = [&](const HolderEstimate& est, const std::string& name) {
        for (const auto& s : est.strata) {
            json j{{"map", name},
                   {"alpha", est.alpha},
                   {"stratum", s.name},
                   {"pairs", s.pairs},
                   {"max", s.max_quotient},
                   {"witness", {s.witness[0], s.witness[1]}}};
            out << j.dump() << "\n";
        }
        json j{{"map", name}, {"alpha", est.alpha}, {"seminorm", est.seminorm}};
        out << j.dump() << "\n";
    };
    if (theorem == "B") {
        const auto s = choose_exponents_b(d, alpha);
        auto fam = make_family_b(s, radius, true);
        for (int j = 1; j <= d; ++j) {
            const auto m = assemble_generator_b(s, fam, j);
            emit(holder_seminorm(m, halpha > 0 ? halpha : alpha, pairs, seed, &s.p), m.name());
        }
        return 0;
    }
    const auto s = choose_exponents_c(d, alpha);
    auto fam = std::make_shared<IntervalFamily>(
        build_family_c(s, radius, radius * radius, true));
    std::vector<double> pq{s.p, s.q};
    const auto f = assemble_generator_c(s, fam, MetabelianGenerator::f());
    emit(holder_seminorm(f, halpha > 0 ? halpha : alpha, pairs, seed, &pq), f.name());
    for (int k = 0; k <= d; ++k) {
        const auto g = assemble_generator_c(s, fam, MetabelianGenerator::g(k));
        emit(holder_seminorm(g, halpha > 0 ? halpha : alpha, pairs, seed, &pq), g.name());
    }
    return 0;
}

int cmd_relations(int d, double alpha, int64_t radius_i, int64_t radius_j, int64_t range,
                  uint64_t samples, uint64_t seed, double tol, Output& out) {
    const auto s = choose_exponents_c(d, alpha);
    auto fam = std::make_shared<IntervalFamily>(build_family_c(s, radius_i, radius_j, true));
    std::vector<AssembledMap> maps;
    maps.push_back(assemble_generator_c(s, fam, MetabelianGenerator::f()));
    for (int k = 0; k <= d; ++k)
        maps.push_back(assemble_generator_c(s, fam, MetabelianGenerator::g(k)));
    std::map<std::string, const AssembledMap*> by_name;
    for (const auto& m : maps) by_name[m.name()] = &m;

    bool ok = true;
    auto emit = [&](const RelationReport& r) {
        json j{{"relation", r.relation},
               {"index_ok", r.index_ok},
               {"index_points", r.index_points},
               {"sup_pointwise", r.sup_pointwise},
               {"pointwise_samples", r.pointwise_samples}};
        out << j.dump() << "\n";
        ok = ok && r.index_ok && r.sup_pointwise <= tol;
    };

    // [g_i, g_j] = id
    for (int i = 0; i <= d; ++i)
        for (int j = i + 1; j <= d; ++j) {
            MapWord lhs = MapWord::commutator("g" + std::to_string(j), "g" + std::to_string(i));
            MapWord rhs; // empty word = identity
            emit(verify_relation(by_name, lhs, rhs, range, samples, seed,
                                 "[g" + std::to_string(j) + ",g" + std::to_string(i) + "]=id"));
        }
    // [g_k, f] = g_{k-1}
    for (int k = 1; k <= d; ++k) {
        MapWord lhs = MapWord::commutator("g" + std::to_string(k), "f");
        MapWord rhs{{{"g" + std::to_string(k - 1), 1}}};
        emit(verify_relation(by_name, lhs, rhs, range, samples, seed,
                             "[g" + std::to_string(k) + ",f]=g" + std::to_string(k - 1)));
    }
    // [g_0, f] = id
    {
        MapWord lhs = MapWord::commutator("g0", "f");
        MapWord rhs;
        emit(verify_relation(by_name, lhs, rhs, range, samples, seed, "[g0,f]=id"));
    }
    return ok ? 0 : 1;
}

int cmd_verify_certificate(const std::string& cert_path, Output& out) {
    std::ifstream f(cert_path);
    if (!f) {
        std::cerr << "cannot read certificate " << cert_path << "\n";
        return 2;
    }
    std::stringstream ss;
    ss << f.rdbuf();
    SelectionState st;
    try {
        st = parse_certificate(ss.str());
    } catch (const std::exception& e) {
        out << "REJECT (parse): " << e.what() << "\n";
        return 1;
    }
    const auto rep = verify_certificate(st);
    if (rep.ok) {
        out << "certificate verified: " << st.chosen.size() << " levels, L_alpha "
            << st.lalpha_total << " <= " << st.lalpha_closed_form << "\n";
        return 0;
    }
    out << "REJECT:\n";
    for (const auto& msg : rep.failures) out << "  " << msg << "\n";
    return 1;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"desk-scale toolkit for nilpotent interval actions and their critical "
                 "regularity"};
    app.require_subcommand(1);

    uint64_t seed = 1;
    std::string out_path;
    uint64_t mem_cap = 0;
    app.add_option("--seed", seed, "deterministic seed")->capture_default_str();
    app.add_option("--out", out_path, "output file (default stdout)");
    app.add_option("--mem-cap", mem_cap, "memory cap in points for searches");

    // orbit-growth
    auto* og = app.add_subcommand("orbit-growth", "BFS census of the orbit graph");
    int og_d = 3, og_n = 40;
    bool og_sym = false;
    std::string og_window;
    og->add_option("--d", og_d, "dimension parameter")->capture_default_str();
    og->add_option("--n", og_n, "maximal radius")->capture_default_str();
    og->add_flag("--symmetrized", og_sym, "also use inverse generators");
    og->add_option("--window", og_window, "slope fit window lo:hi");

    // markov-check
    auto* mk = app.add_subcommand("markov-check", "exact sphere equidistribution check");
    int mk_kmax = 30, mk_dist = 0;
    bool mk_pert = false;
    mk->add_option("--kmax", mk_kmax, "maximal radius")->capture_default_str();
    mk->add_flag("--perturbed", mk_pert, "negative control with the swapped rule");
    mk->add_option("--distribution", mk_dist, "emit the arrival distribution CSV at this radius");

    // decompose
    auto* dc = app.add_subcommand("decompose", "path decomposition of the integers");
    int64_t dc_N = 5, dc_M = 12;
    bool dc_simple = false;
    int dc_windows = 10;
    dc->add_option("--N", dc_N, "path count (1+2^k)")->capture_default_str();
    dc->add_option("--M", dc_M, "jump size")->capture_default_str();
    dc->add_flag("--simple", dc_simple, "one-point blocks (Figure 3 variant)");
    dc->add_option("--windows", dc_windows, "random deviation windows")->capture_default_str();

    // select-path
    auto* sp = app.add_subcommand("select-path", "greedy path selection with certificate");
    int sp_d = 3, sp_levels = 3;
    double sp_alpha = 0.45, sp_eps = 0.10, sp_alpha_b = 0.30;
    sp->add_option("--d", sp_d, "dimension")->capture_default_str();
    sp->add_option("--levels", sp_levels, "levels")->capture_default_str();
    sp->add_option("--alpha", sp_alpha, "Hoelder exponent")->capture_default_str();
    sp->add_option("--eps", sp_eps, "epsilon")->capture_default_str();
    sp->add_option("--alpha-b", sp_alpha_b, "weight scheme exponent")->capture_default_str();

    // lalpha
    auto* la = app.add_subcommand("lalpha", "partial sums along a certificate trajectory");
    std::string la_cert, la_alphas;
    la->add_option("--cert", la_cert, "certificate file")->required();
    la->add_option("--alphas", la_alphas, "comma-separated exponents");

    // build-maps
    auto* bm = app.add_subcommand("build-maps", "interval family and assembled generators");
    std::string bm_theorem = "B";
    int bm_d = 3;
    double bm_alpha = 0.2;
    int64_t bm_radius = 8;
    bool bm_norm = false, bm_dump = false;
    bm->add_option("--theorem", bm_theorem, "B or C")->capture_default_str();
    bm->add_flag("--dump-family", bm_dump, "emit the columnar family table");
    bm->add_option("--d", bm_d, "dimension / nilpotence parameter")->capture_default_str();
    bm->add_option("--alpha", bm_alpha, "Hoelder exponent")->capture_default_str();
    bm->add_option("--radius", bm_radius, "box radius")->capture_default_str();
    bm->add_flag("--normalize", bm_norm, "normalize the truncated total to 1");

    // holder
    auto* hl = app.add_subcommand("holder", "empirical Hoelder seminorms (JSONL)");
    std::string hl_theorem = "B";
    int hl_d = 3;
    double hl_alpha = 0.2, hl_halpha = 0.0;
    int64_t hl_radius = 8;
    uint64_t hl_pairs = 100000;
    hl->add_option("--theorem", hl_theorem, "B or C")->capture_default_str();
    hl->add_option("--d", hl_d, "dimension")->capture_default_str();
    hl->add_option("--alpha", hl_alpha, "scheme exponent")->capture_default_str();
    hl->add_option("--holder-alpha", hl_halpha, "seminorm exponent (default: scheme alpha)");
    hl->add_option("--radius", hl_radius, "box radius")->capture_default_str();
    hl->add_option("--pairs", hl_pairs, "sample pair budget")->capture_default_str();

    // relations
    auto* rl = app.add_subcommand("relations", "metabelian relations at index level and "
                                               "pointwise (JSONL)");
    int rl_d = 2;
    double rl_alpha = 0.5, rl_tol = 1e-7;
    int64_t rl_ri = 4, rl_rj = 64, rl_range = 100;
    uint64_t rl_samples = 1000;
    rl->add_option("--d", rl_d, "nilpotence parameter")->capture_default_str();
    rl->add_option("--alpha", rl_alpha, "Hoelder exponent")->capture_default_str();
    rl->add_option("--radius-i", rl_ri, "box radius, first coordinate")->capture_default_str();
    rl->add_option("--radius-j", rl_rj, "box radius, second coordinate")->capture_default_str();
    rl->add_option("--range", rl_range, "index-level check range")->capture_default_str();
    rl->add_option("--samples", rl_samples, "pointwise samples")->capture_default_str();
    rl->add_option("--tol", rl_tol, "pointwise tolerance")->capture_default_str();

    // verify-certificate
    auto* vc = app.add_subcommand("verify-certificate", "independent certificate re-check");
    std::string vc_cert;
    vc->add_option("--cert", vc_cert, "certificate file")->required();

    for (auto* sub : {og, mk, dc, sp, la, bm, hl, rl, vc}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    Output out;
    out.path = out_path;
    int status = 0;
    try {
        if (og->parsed())
            status = cmd_orbit_growth(og_d, og_n, og_sym, mem_cap, og_window, out);
        else if (mk->parsed())
            status = cmd_markov_check(mk_kmax, mk_pert, mk_dist, out);
        else if (dc->parsed())
            status = cmd_decompose(dc_N, dc_M, dc_simple, dc_windows, seed, out);
        else if (sp->parsed())
            status = cmd_select_path(sp_d, sp_levels, sp_alpha, sp_eps, sp_alpha_b, out);
        else if (la->parsed())
            status = cmd_lalpha(la_cert, la_alphas, out);
        else if (bm->parsed())
            status = cmd_build_maps(bm_theorem, bm_d, bm_alpha, bm_radius, bm_norm, bm_dump, out);
        else if (hl->parsed())
            status = cmd_holder(hl_theorem, hl_d, hl_alpha, hl_halpha, hl_radius, hl_pairs, seed,
                                out);
        else if (rl->parsed())
            status = cmd_relations(rl_d, rl_alpha, rl_ri, rl_rj, rl_range, rl_samples, seed,
                                   rl_tol, out);
        else if (vc->parsed())
            status = cmd_verify_certificate(vc_cert, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    const int flush_status = out.flush();
    return status ? status : flush_status;
}

} // namespace nilreg
