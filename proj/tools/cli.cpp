#include "cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ocft/cft.hpp"
#include "ocft/charpoly.hpp"
#include "ocft/errors.hpp"
#include "ocft/haar.hpp"
#include "ocft/jacobi.hpp"
#include "ocft/linalg.hpp"
#include "ocft/mc.hpp"

namespace ocft::cli {

using json = nlohmann::ordered_json;

bool parse_complex(const std::string& text, double& re, double& im) {
    const auto comma = text.find(',');
    try {
        std::size_t used = 0;
        if (comma == std::string::npos) {
            re = std::stod(text, &used);
            im = 0.0;
            return used == text.size();
        }
        const std::string a = text.substr(0, comma), b = text.substr(comma + 1);
        re = std::stod(a, &used);
        if (used != a.size()) return false;
        im = std::stod(b, &used);
        return used == b.size();
    } catch (const std::exception&) {
        return false;
    }
}

namespace {

struct Common {
    std::string format = "json";
    std::uint64_t seed = 0;
    unsigned workers = default_workers();
    std::size_t samples = 100000;
    double threshold = 4.0;
    bool no_timing = false;
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

Complex to_complex_arg(const std::string& s, const char* what) {
    double re = 0.0, im = 0.0;
    if (!parse_complex(s, re, im))
        throw ConfigError(std::string("invalid complex value for ") + what + ": '" + s + "'");
    return {re, im};
}

json cjson(Complex c) { return json{{"re", c.real()}, {"im", c.imag()}}; }

json ejson(const Estimate& e) {
    return json{{"mean", cjson(e.mean)}, {"std_error", e.std_error}, {"samples", e.samples}};
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string cnum(Complex c) { return c.imag() == 0.0 ? num(c.real()) : num(c.real()) + "," + num(c.imag()); }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

std::string render_csv(const Table& t) {
    std::string out;
    auto line = [&](const std::vector<std::string>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + csv_field(v[i]);
        out += "\n";
    };
    line(t.columns);
    for (const auto& r : t.rows) line(r);
    return out;
}

/// One-row CSV projection of the scalar fields of a flat object.
Table flat_table(const json& j) {
    Table t;
    std::vector<std::string> row;
    std::function<void(const std::string&, const json&)> walk = [&](const std::string& key, const json& v) {
        if (v.is_object()) {
            for (auto it = v.begin(); it != v.end(); ++it)
                walk(key.empty() ? it.key() : key + "." + it.key(), it.value());
        } else if (!v.is_array()) {
            t.columns.push_back(key);
            row.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        }
    };
    walk("", j);
    t.rows.push_back(row);
    return t;
}

McConfig mc_config(const Common& c) {
    McConfig cfg;
    cfg.samples = c.samples;
    cfg.rng = RngStream{c.seed, 0};
    cfg.workers = c.workers;
    return cfg;
}

void add_common(CLI::App* sub, Common& c, bool with_samples) {
    sub->add_option("--format", c.format, "output format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--seed", c.seed, "random seed");
    sub->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--no-timing", c.no_timing, "omit elapsed time (byte-stable output)");
    if (with_samples) {
        sub->add_option("--samples", c.samples, "Monte-Carlo samples")->check(CLI::PositiveNumber);
        sub->add_option("--threshold", c.threshold, "max |z-score| for a pass");
    }
}

struct Result {
    json body;
    std::optional<Table> table;  // CSV projection when not a flat record
    bool failed = false;
};

// ---------------------------------------------------------------------------

Result cmd_pfaffian(std::size_t dim, const std::vector<std::string>& upper, const Common& c) {
    ComplexMatrix a;
    std::string source;
    if (!upper.empty()) {
        std::vector<Complex> u;
        for (const auto& s : upper) u.push_back(to_complex_arg(s, "--upper"));
        const std::size_t m = u.size();
        std::size_t n = 0;
        while (n * (n - 1) / 2 < m) ++n;
        if (n * (n - 1) / 2 != m)
            throw ShapeError("--upper: entry count " + std::to_string(m) + " is not n(n-1)/2");
        a = skew_from_upper(n, u);
        source = "upper";
    } else {
        if (dim == 0) throw ConfigError("pfaffian: give --dim or --upper");
        auto eng = RngStream{c.seed, 0}.engine();
        std::normal_distribution<double> normal;
        std::vector<Complex> u(skew_entries(dim));
        for (auto& v : u) v = Complex(normal(eng), normal(eng));
        a = skew_from_upper(dim, u);
        source = "random";
    }
    const Complex pf = pfaffian(a);
    const Complex det = determinant(a);
    Result r;
    r.body = {{"command", "pfaffian"},
              {"inputs", {{"dim", a.rows()}, {"source", source}, {"seed", c.seed}}},
              {"method", "parlett-reid"},
              {"pfaffian", cjson(pf)},
              {"determinant", cjson(det)},
              {"pf2_minus_det_rel", std::abs(pf * pf - det) / std::max(1e-300, std::abs(det))}};
    return r;
}

Result cmd_haar_moment(std::size_t n, const std::string& group, const Common& c) {
    if (n == 0) throw DimensionError("haar-moment: --n must be at least 1");
    const Group g = group == "SO" ? Group::SO : Group::O;
    const auto est = second_moments(n, mc_config(c), g);
    const std::size_t n2 = n * n;
    json entries = json::array();
    Table t{{"i", "j", "k", "l", "mean", "std_error", "expected", "z"}, {}};
    double max_z = 0.0;
    for (std::size_t p = 0; p < n2; ++p)
        for (std::size_t q = 0; q < n2; ++q) {
            const std::size_t i = p / n, j = p % n, k = q / n, l = q % n;
            const double expected = (i == k && j == l) ? 1.0 / double(n) : 0.0;
            const Estimate& e = est[p * n2 + q];
            const double z = z_score(e, Estimate{expected, 0.0, 0});
            max_z = std::max(max_z, z);
            entries.push_back({{"i", i}, {"j", j}, {"k", k}, {"l", l}, {"mean", e.mean.real()},
                               {"std_error", e.std_error}, {"expected", expected}, {"z", z}});
            t.rows.push_back({std::to_string(i), std::to_string(j), std::to_string(k), std::to_string(l),
                              num(e.mean.real()), num(e.std_error), num(expected), num(z)});
        }
    Result r;
    const bool pass = max_z <= c.threshold;
    r.body = {{"command", "haar-moment"},
              {"inputs", {{"n", n}, {"group", to_string(g)}, {"samples", c.samples}, {"seed", c.seed}}},
              {"method", "haar-mc"},
              {"max_abs_z", max_z},
              {"threshold", c.threshold},
              {"pass", pass},
              {"entries", entries}};
    r.table = t;
    r.failed = !pass;
    return r;
}

Result cmd_moment(std::size_t n, std::size_t m, const std::string& zs, const std::vector<double>& g,
                  const std::string& method, const Common& c) {
    MomentQuery q;
    q.z = to_complex_arg(zs, "--z");
    q.m = m;
    q.g = g;
    if (g.size() != n)
        throw ShapeError("moment: --g has " + std::to_string(g.size()) + " entries, --n is " +
                         std::to_string(n));
    json body = {{"command", "moment"},
                 {"inputs",
                  {{"n", n}, {"m", m}, {"z", cjson(q.z)}, {"g", g}, {"samples", c.samples}, {"seed", c.seed}}},
                 {"method", method}};
    if (method == "closed") {
        body["value"] = moment_m1_closed(q);
    } else if (method == "mc") {
        const Estimate e = moment_mc(q, mc_config(c));
        body["value"] = e.mean.real();
        body["std_error"] = e.std_error;
        body["samples"] = e.samples;
    } else {
        PfaffianIntegralOptions opt;
        opt.mc = mc_config(c);
        const auto res = moment_pfaffian_integral(q, opt);
        body["value"] = res.estimate.mean.real();
        body["std_error"] = res.estimate.std_error;
        body["samples"] = res.estimate.samples;
        if (m > 1) body["effective_samples"] = res.effective_samples;
    }
    return {body, std::nullopt, false};
}

Result cmd_jacobi(std::size_t n, int a, int b, const std::string& ls, const std::string& gs,
                  const std::string& method) {
    JacobiQuery q;
    q.n = n;
    q.a = a;
    q.b = b;
    q.lambda = to_complex_arg(ls, "--lambda");
    q.gamma = to_complex_arg(gs, "--gamma");
    JacobiResult res;
    if (method == "pfaffian")
        res = jacobi_pfaffian(q);
    else if (method == "mehta")
        res = jacobi_mehta_ratio(q);
    else
        res = jacobi_quadrature(q);
    json flagged = json::array();
    for (const auto& [i, j] : res.flagged_alpha) flagged.push_back({i, j});
    json body = {{"command", "jacobi"},
                 {"inputs",
                  {{"n", n}, {"a", a}, {"b", b}, {"lambda", cjson(q.lambda)}, {"gamma", cjson(q.gamma)}}},
                 {"method", method},
                 {"reference", "lambda*gamma = 1"},
                 {"ratio", cjson(res.ratio)}};
    if (method == "pfaffian") body["flagged_alpha"] = flagged;
    return {body, std::nullopt, false};
}

Result cmd_ginibre(std::size_t n, const std::string& ls, const std::string& gs, const Common& c) {
    const Complex l = to_complex_arg(ls, "--lambda"), g = to_complex_arg(gs, "--gamma");
    const Complex closed = ginibre_closed(l, g, n);
    const Estimate mc = ginibre_mc(l, g, n, mc_config(c));
    json body = {{"command", "ginibre-check"},
                 {"inputs",
                  {{"n", n}, {"lambda", cjson(l)}, {"gamma", cjson(g)}, {"samples", c.samples}, {"seed", c.seed}}},
                 {"method", "closed+pipeline+mc"},
                 {"reference", "lambda*gamma = 0"},
                 {"closed", cjson(closed)}};
    if (n <= 3) body["pipeline"] = cjson(ginibre_pipeline(l, g, n));
    const double z = z_score(mc, Estimate{closed, 0.0, 0});
    body["mc"] = ejson(mc);
    body["z"] = z;
    body["threshold"] = c.threshold;
    body["pass"] = z <= c.threshold;
    return {body, std::nullopt, z > c.threshold};
}

Result cmd_verify(const std::string& variant, std::size_t colours, std::size_t flavours,
                  std::size_t probes, const std::string& normalization, const Common& c) {
    CftOptions opt;
    opt.mc = mc_config(c);
    opt.threshold = c.threshold;
    opt.paper_normalization = normalization == "paper";
    VerificationReport rep;
    if (variant == "fermionic") {
        rep = verify_fermionic_cft(colours, flavours, opt);
    } else if (variant == "bosonic") {
        const auto pts = random_bosonic_probes(colours, flavours, probes, RngStream{c.seed, 0}.substream(7));
        rep = verify_bosonic_cft(colours, flavours, pts, opt);
    } else {
        rep = verify_son_cft(colours, flavours, opt);
    }
    json rows = json::array();
    Table t{{"label", "lhs", "lhs_std_error", "rhs", "rhs_std_error", "z"}, {}};
    for (const auto& r : rep.rows) {
        rows.push_back({{"label", r.label}, {"lhs", ejson(r.lhs)}, {"rhs", ejson(r.rhs)}, {"z", r.z_score}});
        t.rows.push_back({r.label, cnum(r.lhs.mean), num(r.lhs.std_error), cnum(r.rhs.mean),
                          num(r.rhs.std_error), num(r.z_score)});
    }
    json body = {{"command", "verify-cft"},
                 {"inputs",
                  {{"variant", variant},
                   {"colors", colours},
                   {"flavors", flavours},
                   {"samples", c.samples},
                   {"seed", c.seed},
                   {"normalization", normalization}}},
                 {"method", "haar-mc vs importance-sampled z-integral"},
                 {"max_abs_z", rep.max_abs_z},
                 {"threshold", rep.threshold},
                 {"pass", rep.pass},
                 {"rhs_effective_samples", rep.rhs_effective_samples}};
    if (rep.fitted_k) body["fitted_k"] = cjson(*rep.fitted_k);
    if (rep.normalization) {
        const auto& a = *rep.normalization;
        body["normalization_audit"] = {{"c0_paper", a.paper},
                                       {"c0_self_consistent", ejson(a.self_consistent)},
                                       {"ratio", a.ratio}};
    }
    body["rows"] = rows;
    return {body, t, !rep.pass};
}

}  // namespace

Outcome run(const std::vector<std::string>& args) {
    CLI::App app{"O(N) colour-flavour transformation toolkit", "ocft"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    Common common;

    auto* pf = app.add_subcommand("pfaffian", "Pfaffian and determinant of a complex skew matrix");
    std::size_t pf_dim = 0;
    std::vector<std::string> pf_upper;
    pf->add_option("--dim", pf_dim, "random matrix dimension (even)");
    pf->add_option("--upper", pf_upper, "strict upper triangle, row-major, as re,im values");
    add_common(pf, common, false);

    auto* hm = app.add_subcommand("haar-moment", "second moments of Haar O(N) / SO(N)");
    std::size_t hm_n = 2;
    std::string hm_group = "O";
    hm->add_option("--n", hm_n, "matrix dimension")->required();
    hm->add_option("--group", hm_group, "O or SO")->check(CLI::IsMember({"O", "SO"}));
    add_common(hm, common, true);

    auto* mo = app.add_subcommand("moment", "<|det(z - G O)|^{2m}> over O(N)");
    std::size_t mo_n = 1, mo_m = 1;
    std::string mo_z = "0", mo_method = "closed";
    std::vector<double> mo_g;
    mo->add_option("--n", mo_n, "matrix dimension")->required();
    mo->add_option("--m", mo_m, "moment order")->check(CLI::PositiveNumber);
    mo->add_option("--z", mo_z, "complex z as re,im")->required();
    mo->add_option("--g", mo_g, "diagonal of G, comma separated")->delimiter(',')->required();
    mo->add_option("--method", mo_method, "closed|pfaffian|mc")
        ->check(CLI::IsMember({"closed", "pfaffian", "mc"}));
    add_common(mo, common, true);

    auto* ja = app.add_subcommand("jacobi", "Jacobi-weight characteristic polynomial average");
    std::size_t ja_n = 2;
    int ja_a = 0, ja_b = 0;
    std::string ja_l = "1", ja_g = "1", ja_method = "pfaffian";
    ja->add_option("--n", ja_n, "matrix dimension")->required();
    ja->add_option("--a", ja_a, "exponent a >= 0")->check(CLI::NonNegativeNumber);
    ja->add_option("--b", ja_b, "exponent b >= 0")->check(CLI::NonNegativeNumber);
    ja->add_option("--lambda", ja_l, "complex lambda as re,im");
    ja->add_option("--gamma", ja_g, "complex gamma as re,im");
    ja->add_option("--method", ja_method, "pfaffian|quadrature|mehta")
        ->check(CLI::IsMember({"pfaffian", "quadrature", "mehta"}));
    add_common(ja, common, false);

    auto* gi = app.add_subcommand("ginibre-check", "Gaussian real ensemble consistency check");
    std::size_t gi_n = 1;
    std::string gi_l = "1", gi_g = "1";
    gi->add_option("--n", gi_n, "matrix dimension")->required();
    gi->add_option("--lambda", gi_l, "complex lambda as re,im");
    gi->add_option("--gamma", gi_g, "complex gamma as re,im");
    add_common(gi, common, true);

    auto* vc = app.add_subcommand("verify-cft", "coefficient-level colour-flavour transformation check");
    std::string vc_variant = "fermionic", vc_norm = "self";
    std::size_t vc_colours = 1, vc_flavours = 1, vc_probes = 10;
    vc->add_option("--variant", vc_variant, "fermionic|bosonic|son")
        ->check(CLI::IsMember({"fermionic", "bosonic", "son"}));
    vc->add_option("--colors", vc_colours, "N")->required();
    vc->add_option("--flavors", vc_flavours, "n")->required();
    vc->add_option("--probes", vc_probes, "bosonic probe points")->check(CLI::PositiveNumber);
    vc->add_option("--normalization", vc_norm, "self|paper")->check(CLI::IsMember({"self", "paper"}));
    add_common(vc, common, true);

    Outcome o;
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        std::ostringstream os;
        app.exit(e, os, os);
        o.out = os.str();
        return o;
    } catch (const CLI::CallForAllHelp& e) {
        std::ostringstream os;
        app.exit(e, os, os);
        o.out = os.str();
        return o;
    } catch (const CLI::ParseError& e) {
        std::ostringstream os;
        app.exit(e, os, os);
        o.err = os.str() + app.help();
        o.exit_code = kUsage;
        return o;
    }

    const auto t0 = std::chrono::steady_clock::now();
    Result res;
    try {
        if (pf->parsed())
            res = cmd_pfaffian(pf_dim, pf_upper, common);
        else if (hm->parsed())
            res = cmd_haar_moment(hm_n, hm_group, common);
        else if (mo->parsed())
            res = cmd_moment(mo_n, mo_m, mo_z, mo_g, mo_method, common);
        else if (ja->parsed())
            res = cmd_jacobi(ja_n, ja_a, ja_b, ja_l, ja_g, ja_method);
        else if (gi->parsed())
            res = cmd_ginibre(gi_n, gi_l, gi_g, common);
        else
            res = cmd_verify(vc_variant, vc_colours, vc_flavours, vc_probes, vc_norm, common);
    } catch (const Error& e) {
        o.err = std::string("error: ") + e.what() + "\n";
        o.exit_code = kUsage;
        return o;
    }
    const double elapsed =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (!common.no_timing) res.body["elapsed_ms"] = elapsed;

    if (common.format == "csv")
        o.out = render_csv(res.table ? *res.table : flat_table(res.body));
    else
        o.out = res.body.dump(2) + "\n";
    o.exit_code = res.failed ? kVerificationFailed : kOk;
    return o;
}

}  // namespace ocft::cli
