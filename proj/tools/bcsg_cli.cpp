#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bcsg/embedding.hpp"
#include "bcsg/game.hpp"
#include "bcsg/npa.hpp"

using namespace bcsg;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "bcsg 0.1.0";

// exit codes: 2 parse error, 3 solver non-convergence, 4 certificate
// failure, 5 check failure
struct ExitWith {
    int code;
    std::string message;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ExitWith{2, "cannot open " + path};
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spew(const std::string& path, const std::string& text) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ExitWith{2, "cannot write " + path};
    out << text;
}

uint64_t fnv1a64(const std::string& data) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string input_line(const std::string& path, const std::string& content) {
    char buf[32];
    snprintf(buf, sizeof buf, "%016llx", (unsigned long long)fnv1a64(content));
    return "input " + path + " fnv1a64=" + buf;
}

std::string fmt(double v) {
    char buf[64];
    snprintf(buf, sizeof buf, "%.9f", v);
    return buf;
}

double solver_tol() {
    if (const char* env = std::getenv("BCSG_SOLVER_TOL")) {
        double t = std::atof(env);
        if (t >= 1e-10 && t <= 1e-4) return t;
        throw ExitWith{2, "BCSG_SOLVER_TOL outside [1e-10, 1e-4]"};
    }
    return 1e-7;
}

template <typename F>
auto parse_or_exit(F&& f) {
    try {
        return f();
    } catch (const ParseError& e) {
        throw ExitWith{2, e.what()};
    } catch (const std::exception& e) {
        throw ExitWith{2, e.what()};
    }
}

int cmd_value(const std::string& bcs_path, const std::string& game_path,
              const std::string& npa_levels, const std::string& strategy_path) {
    std::ostringstream rep;
    rep << kVersion << "\n";
    Game g;
    if (!bcs_path.empty()) {
        std::string text = slurp(bcs_path);
        rep << input_line(bcs_path, text) << "\n";
        Bcs b = parse_or_exit([&] { return parse_bcs(text); });
        g = bcs_to_game(b);
        if ((int)b.vars.size() <= kMaxBruteForceVars) {
            auto w = brute_force_satisfiability(b);
            rep << "satisfiable = " << (w ? "yes" : "no") << "\n";
        }
    } else {
        std::string text = slurp(game_path);
        rep << input_line(game_path, text) << "\n";
        g = parse_or_exit([&] { return parse_game(text); });
    }
    std::vector<int> levels;
    if (!npa_levels.empty()) {
        std::istringstream ls(npa_levels);
        std::string tok;
        while (std::getline(ls, tok, ',')) levels.push_back(std::stoi(tok));
    }
    std::vector<std::pair<std::string, Strategy>> strategies;
    if (!strategy_path.empty()) {
        std::string text = slurp(strategy_path);
        rep << input_line(strategy_path, text) << "\n";
        strategies.push_back({strategy_path, parse_or_exit([&] { return parse_strategy(text); })});
    }
    npa::GameValueReport vr;
    try {
        vr = npa::make_value_report(g, levels, strategies, solver_tol());
    } catch (const ExitWith&) {
        throw;
    } catch (const std::exception& e) {
        throw ExitWith{3, e.what()};
    }
    rep << "classical = " << vr.classical << " (" << fmt(vr.classical.to_double()) << ")\n";
    for (const auto& [k, v] : vr.npa_levels) rep << "npa[" << k << "] = " << fmt(v) << "\n";
    for (const auto& [label, v] : vr.strategy_values)
        rep << "strategy value = " << fmt(v) << "\n";
    std::cout << rep.str();
    return 0;
}

int cmd_transform_flatten(const std::string& nested_path, const std::string& out_dir) {
    std::string text = slurp(nested_path);
    GenRegistry reg;
    NestedBcs nb = parse_or_exit([&] { return parse_nested_bcs(text, reg); });
    FlatSystem fsys = flatten(nb, reg);
    spew(out_dir + "/flat.bcs", render_bcs(fsys.bcs));
    std::ostringstream rep;
    rep << kVersion << "\n" << input_line(nested_path, text) << "\n";
    rep << "flat variables = " << fsys.bcs.vars.size() << "\n";
    rep << "conjugacy relations = " << fsys.conjugacies.size() << "\n";
    for (size_t wi = 0; wi < nb.wvars.size(); ++wi) {
        int d = nb.wvars[wi].depth();
        if (d == 0) continue;
        rep << "psi-decomposition " << nested_var_name(nb.wvars[wi], reg) << " size "
            << rdecomp_size(fsys.psi_decomps[wi], fsys.relations) << " = depth^2 (" << d * d
            << ")\n";
    }
    std::cout << rep.str();
    spew(out_dir + "/flatten.report", rep.str());
    return 0;
}

int cmd_transform_embed(const std::string& nested_path, const std::string& out_dir) {
    std::string text = slurp(nested_path);
    GenRegistry reg;
    NestedBcs nb = parse_or_exit([&] { return parse_nested_bcs(text, reg); });
    EmbedResult res = embed_nested_bcs(nb, reg);
    spew(out_dir + "/target.bcs", render_bcs(res.target));
    CertBundle cb = bundle_from_embed(res, reg);
    spew(out_dir + "/certificate.json", bundle_to_json(cb));
    spew(out_dir + "/certificate.txt", res.certificate_text());
    std::ostringstream rep;
    rep << kVersion << "\n" << input_line(nested_path, text) << "\n";
    rep << "target variables = " << res.target.vars.size() << "\n";
    rep << "target constraints = " << res.target.constraints.size() << "\n";
    rep << "gadgets = " << res.num_gadgets << "\n";
    rep << "claimed bound = " << res.claimed_bound << "\n";
    rep << (res.all_verified ? "certificate verified\n" : "CERTIFICATE FAILURE\n");
    std::cout << rep.str();
    if (!res.all_verified) return 4;
    return 0;
}

int cmd_transform_gadget(const std::vector<std::string>& vars, const std::string& out_dir) {
    if (vars.size() != 3) throw ExitWith{2, "--vars takes exactly three names"};
    GenRegistry reg;
    int a = reg.intern(vars[0]), b = reg.intern(vars[1]), c = reg.intern(vars[2]);
    Gadget g = conjugacy_gadget(a, b, c, reg);
    spew(out_dir + "/gadget.bcs", render_bcs(g.bcs));
    CertBundle cb = bundle_from_gadget(g, a, b, c, reg);
    spew(out_dir + "/certificate.json", bundle_to_json(cb));
    std::ostringstream rep;
    rep << kVersion << "\n";
    rep << "variables = " << g.bcs.vars.size() << "\n";
    rep << "constraints = " << g.bcs.constraints.size() << "\n";
    rep << "decomposition size = " << g.measured_size << " <= 1750\n";
    bool ok = cb.items[0].verified;
    rep << (ok ? "certificate verified\n" : "CERTIFICATE FAILURE\n");
    std::cout << rep.str();
    return ok ? 0 : 4;
}

int cmd_transform_lcs(const std::string& matrix_path, const std::string& out_dir) {
    std::string text = slurp(matrix_path);
    std::istringstream is(text);
    int m, n;
    if (!(is >> m >> n)) throw ExitWith{2, "matrix file must start with: <rows> <cols>"};
    std::vector<std::vector<int>> A((size_t)m, std::vector<int>((size_t)n));
    std::vector<int> b((size_t)m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j)
            if (!(is >> A[(size_t)i][(size_t)j])) throw ExitWith{2, "truncated matrix"};
        if (!(is >> b[(size_t)i])) throw ExitWith{2, "missing right-hand side"};
    }
    Bcs sys = parse_or_exit([&] { return lcs_to_bcs(A, b); });
    spew(out_dir + "/system.bcs", render_bcs(sys));
    SolutionGroup sg = solution_group(A, b);
    std::ostringstream rep;
    rep << kVersion << "\n" << input_line(matrix_path, text) << "\n";
    rep << "constraints = " << sys.constraints.size() << "\n";
    rep << "solution group relators: g0=" << sg.g0.size() << " g1=" << sg.g1.size()
        << " g2=" << sg.g2.size() << " g3=" << sg.g3.size() << "\n";
    std::cout << rep.str();
    return 0;
}

int cmd_transform_gm(const std::string& bcs_path, const std::string& dist, long long C,
                     const std::string& out_dir) {
    std::string text = slurp(bcs_path);
    Bcs b = parse_or_exit([&] { return parse_bcs(text); });
    int id = b.var_id(dist);
    if (id < 0) throw ExitWith{2, "distinguished variable " + dist + " not found"};
    auto [g, p] = build_Gm(b, id, C);
    spew(out_dir + "/gm.game", "# p = " + p.str() + "\n" + render_game(g));
    std::ostringstream rep;
    rep << kVersion << "\n" << input_line(bcs_path, text) << "\n";
    rep << "p = " << p << "\n";
    rep << "questions: alice = " << g.alice_labels.size() << ", bob = " << g.bob_labels.size()
        << "\n";
    std::cout << rep.str();
    return 0;
}

int cmd_transform_shift(const std::string& game_path, const std::string& theta_str,
                        const std::string& out_dir) {
    std::string text = slurp(game_path);
    Game g = parse_or_exit([&] { return parse_game(text); });
    Rational theta = parse_or_exit([&] { return Rational::from_string(theta_str); });
    Game shifted = theta_shift(g, theta);
    Rational weight = theta >= Rational(1, 2)
                          ? Rational(1) / (Rational(2) * theta)
                          : Rational(1) / (Rational(2) * (Rational(1) - theta));
    spew(out_dir + "/shifted.game", "# weight = " + weight.str() + "\n" + render_game(shifted));
    std::ostringstream rep;
    rep << kVersion << "\n" << input_line(game_path, text) << "\n";
    rep << "theta = " << theta << "\n";
    rep << "weight on the original game = " << weight << "\n";
    std::cout << rep.str();
    return 0;
}

int cmd_check_gadget_rep(bool pauli, const std::string& strategy_path,
                         const std::vector<std::string>& vars) {
    GenRegistry reg;
    MatrixRep base;
    int a, b, c;
    std::ostringstream rep;
    rep << kVersion << "\n";
    if (pauli) {
        a = reg.intern("a");
        b = reg.intern("b");
        c = reg.intern("c");
        Eigen::MatrixXcd X(2, 2), Z(2, 2);
        X << 0, 1, 1, 0;
        Z << 1, 0, 0, -1;
        base.set(a, X);
        base.set(b, Z);
        base.set(c, X * Z * X);
        rep << "instance = pauli (a -> sigma_x, b -> sigma_z, c -> -sigma_z)\n";
    } else {
        if (vars.size() != 3 || strategy_path.empty())
            throw ExitWith{2, "need --pauli, or --rep FILE with --vars a b c"};
        std::string text = slurp(strategy_path);
        rep << input_line(strategy_path, text) << "\n";
        Strategy s = parse_or_exit([&] { return parse_strategy(text); });
        if (s.alice.size() < 3) throw ExitWith{2, "rep file must carry three alice observables"};
        a = reg.intern(vars[0]);
        b = reg.intern(vars[1]);
        c = reg.intern(vars[2]);
        base.set(a, s.alice[0][0] - s.alice[0][1]);
        base.set(b, s.alice[1][0] - s.alice[1][1]);
        base.set(c, s.alice[2][0] - s.alice[2][1]);
    }
    GadgetRepReport out;
    try {
        out = gadget_representation_check(base, a, b, c, reg);
    } catch (const std::exception& e) {
        throw ExitWith{5, e.what()};
    }
    rep << "extended dimension = " << out.extended_dim << "\n";
    char buf[64];
    snprintf(buf, sizeof buf, "%.3e", out.max_residual);
    rep << "max residual = " << buf << "\n";
    rep << (out.pass ? "pass\n" : "FAIL\n");
    std::cout << rep.str();
    return out.pass ? 0 : 5;
}

int cmd_check_epsilon(const std::string& bcs_path, const std::string& strategy_path) {
    std::string btext = slurp(bcs_path), stext = slurp(strategy_path);
    Bcs b = parse_or_exit([&] { return parse_bcs(btext); });
    Strategy s = parse_or_exit([&] { return parse_strategy(stext); });
    EpsilonReport er = epsilon_report(b, s);
    std::ostringstream rep;
    rep << kVersion << "\n";
    rep << input_line(bcs_path, btext) << "\n" << input_line(strategy_path, stext) << "\n";
    rep << "epsilon = " << fmt(er.eps) << "\n";
    rep << "T_B = " << er.t_b << "\n";
    double bound = er.t_b.to_double() * er.eps + 1e-8;
    for (const auto& [name, r] : er.residuals) {
        char buf[64];
        snprintf(buf, sizeof buf, "%.3e", r);
        rep << "residual " << name << " = " << buf << (r <= bound ? "" : "  EXCEEDS") << "\n";
    }
    rep << (er.all_within_bound ? "pass\n" : "FAIL\n");
    std::cout << rep.str();
    return er.all_within_bound ? 0 : 5;
}

int cmd_check_decomp(const std::string& cert_path) {
    std::string text = slurp(cert_path);
    CertBundle cb;
    try {
        cb = bundle_from_json(text);
    } catch (const std::exception& e) {
        throw ExitWith{2, e.what()};
    }
    std::string offender;
    bool ok = recheck_bundle(cb, &offender);
    std::ostringstream rep;
    rep << kVersion << "\n" << input_line(cert_path, text) << "\n";
    for (const auto& it : cb.items)
        rep << it.name << ": measured " << it.measured << " <= " << it.claimed << " : "
            << (it.verified ? "ok" : "FAIL") << "\n";
    rep << (ok ? "pass\n" : "FAIL at " + offender + "\n");
    std::cout << rep.str();
    return ok ? 0 : 5;
}

int cmd_export_sdpa(const std::string& game_path, int level, const std::string& out_path) {
    std::string text = slurp(game_path);
    Game g = parse_or_exit([&] { return parse_game(text); });
    npa::MomentRelaxation r = npa::build_relaxation(g, level);
    spew(out_path, export_sdpa(r.to_sdp()));
    std::cout << kVersion << "\n"
              << input_line(game_path, text) << "\n"
              << "block size = " << r.n() << "\nvariables = " << r.num_vars() << "\n"
              << "wrote " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"boolean constraint system games: values, relaxations, embeddings"};
    app.set_version_flag("--version", kVersion);
    unsigned long long seed = 0;
    app.add_option("--seed", seed, "seed echoed into reports for corpus tooling");

    std::string bcs_path, game_path, npa_levels, strategy_path, nested_path, out_dir = ".";
    std::string matrix_path, dist_var, theta_str, cert_path, out_path = "problem.dat-s";
    std::vector<std::string> gadget_vars;
    long long C = 1;
    int level = 1;
    bool pauli = false;

    auto* value = app.add_subcommand("value", "classical value, NPA bounds, strategy values");
    auto* vb = value->add_option("--bcs", bcs_path, "constraint system file");
    auto* vg = value->add_option("--game", game_path, "game file");
    value->add_option("--npa", npa_levels, "comma-separated relaxation levels");
    value->add_option("--strategy", strategy_path, "strategy file to evaluate");
    vb->excludes(vg);

    auto* transform = app.add_subcommand("transform", "pipeline constructions");
    auto* tf = transform->add_subcommand("flatten", "nested system -> flat system");
    tf->add_option("--nested", nested_path, "nested system file")->required();
    tf->add_option("--out", out_dir, "output directory");
    auto* te = transform->add_subcommand("embed", "nested system -> BCS with certificate");
    te->add_option("--nested", nested_path, "nested system file")->required();
    te->add_option("--out", out_dir, "output directory");
    auto* tg = transform->add_subcommand("gadget", "conjugacy gadget for a b a = c");
    tg->add_option("--vars", gadget_vars, "three variable names")->expected(3);
    tg->add_option("--out", out_dir, "output directory");
    auto* tl = transform->add_subcommand("lcs", "linear system -> parity constraints");
    tl->add_option("--matrix", matrix_path, "matrix file: m n, then rows with rhs")->required();
    tl->add_option("--out", out_dir, "output directory");
    auto* tm = transform->add_subcommand("gm", "mix with the distinguished-variable subgame");
    tm->add_option("--bcs", bcs_path, "constraint system file")->required();
    tm->add_option("--dist", dist_var, "distinguished variable name")->required();
    tm->add_option("--C", C, "soundness constant")->required();
    tm->add_option("--out", out_dir, "output directory");
    auto* ts = transform->add_subcommand("shift", "threshold shift toward 1/2");
    ts->add_option("--game", game_path, "game file")->required();
    ts->add_option("--theta", theta_str, "rational threshold in (0,1)")->required();
    ts->add_option("--out", out_dir, "output directory");

    auto* check = app.add_subcommand("check", "verification reports");
    auto* cg = check->add_subcommand("gadget-rep", "block representation of the gadget");
    cg->add_flag("--pauli", pauli, "use the Pauli instance");
    cg->add_option("--rep", strategy_path, "strategy file providing observables");
    cg->add_option("--vars", gadget_vars, "three variable names")->expected(3);
    auto* ce = check->add_subcommand("epsilon", "near-perfect strategy residuals");
    ce->add_option("--bcs", bcs_path, "constraint system file")->required();
    ce->add_option("--strategy", strategy_path, "strategy file")->required();
    auto* cd = check->add_subcommand("decomp", "re-verify a certificate file");
    cd->add_option("--cert", cert_path, "certificate JSON")->required();

    auto* ex = app.add_subcommand("export-sdpa", "write the moment relaxation in SDPA form");
    ex->add_option("--game", game_path, "game file")->required();
    ex->add_option("--level", level, "relaxation level")->required();
    ex->add_option("--out", out_path, "output file");

    app.require_subcommand(1);
    CLI11_PARSE(app, argc, argv);

    try {
        if (*value) {
            if (bcs_path.empty() && game_path.empty())
                throw ExitWith{2, "value needs --bcs or --game"};
            return cmd_value(bcs_path, game_path, npa_levels, strategy_path);
        }
        if (*tf) return cmd_transform_flatten(nested_path, out_dir);
        if (*te) return cmd_transform_embed(nested_path, out_dir);
        if (*tg) return cmd_transform_gadget(gadget_vars, out_dir);
        if (*tl) return cmd_transform_lcs(matrix_path, out_dir);
        if (*tm) return cmd_transform_gm(bcs_path, dist_var, C, out_dir);
        if (*ts) return cmd_transform_shift(game_path, theta_str, out_dir);
        if (*cg) return cmd_check_gadget_rep(pauli, strategy_path, gadget_vars);
        if (*ce) return cmd_check_epsilon(bcs_path, strategy_path);
        if (*cd) return cmd_check_decomp(cert_path);
        if (*ex) return cmd_export_sdpa(game_path, level, out_path);
    } catch (const ExitWith& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
