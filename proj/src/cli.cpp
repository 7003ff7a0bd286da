#include "nh/cli.hpp"

#include "nh/io.hpp"
#include "nh/oscillatory.hpp"
#include "nh/parity.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>

namespace nh {

namespace {

struct csv_row {
    double scale;
    double value;
    double bound;
};

struct report {
    json body;
    std::vector<csv_row> table;
    bool has_table = false;
    int exit = exit_ok;
};

struct context {
    std::string text;
    problem_input in;
    unsigned threads = 1;
    std::uint64_t seed = 1;
};

[[noreturn]] void probe_fail(const context& c, const std::string& ptr, const std::string& msg)
{
    throw input_error(input_error_code::bad_probe, locate_line(c.text, "/probe" + ptr), msg);
}

json index_list(const std::vector<std::size_t>& xs)
{
    json a = json::array();
    for (auto x : xs) a.push_back(x + 1);
    return a;
}

json problem_json(const std::vector<exponent_set>& lam, const domain_spec& spec)
{
    return {{"n", spec.n}, {"S", index_list(spec.s)}, {"lambda", lambda_json(lam)}};
}

std::vector<double> probe_doubles(const context& c, const char* key, std::size_t len, double fallback)
{
    const json& p = c.in.probe;
    if (!p.contains(key)) return std::vector<double>(len, fallback);
    const json& v = p[key];
    if (!v.is_array() || v.size() != len || !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); }))
        probe_fail(c, std::string("/") + key, std::string(key) + " must be an array of " + std::to_string(len) + " numbers");
    return v.get<std::vector<double>>();
}

long probe_long(const context& c, const char* key, long fallback, long lo, long hi)
{
    const json& p = c.in.probe;
    if (!p.contains(key)) return fallback;
    const json& v = p[key];
    if (!v.is_number_integer() || v.get<long>() < lo || v.get<long>() > hi)
        probe_fail(c, std::string("/") + key, std::string(key) + " must be an integer in " + std::to_string(lo) + ".." + std::to_string(hi));
    return v.get<long>();
}

std::vector<long> probe_vector(const context& c, const json& v, const std::string& ptr)
{
    std::size_t n = c.in.spec.n;
    if (!v.is_array() || v.size() != n || !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number_integer(); }))
        probe_fail(c, ptr, "expected an integer vector of length " + std::to_string(n));
    auto out = v.get<std::vector<long>>();
    for (auto j : c.in.spec.s)
        if (out[j] < 0) probe_fail(c, ptr, "vector must lie in Z(S)");
    return out;
}

lambda_tuple tuple_of(const context& c) { return {c.in.lambda, c.in.spec}; }

// Face tuple named by probe.faces, or nothing when absent.
std::optional<face_tuple> probe_faces(const context& c, const lambda_geometry& g)
{
    if (!c.in.probe.contains("faces")) return std::nullopt;
    const json& fs = c.in.probe["faces"];
    if (!fs.is_array() || fs.size() != g.polys.size()) probe_fail(c, "/faces", "faces must list one face per component");
    face_tuple t;
    for (std::size_t nu = 0; nu < fs.size(); ++nu) {
        std::string ptr = "/faces/" + std::to_string(nu);
        face_spec want;
        try {
            want = certificate_from_json({{"witness_faces", json::array({fs[nu]})},
                                          {"odd_subset", json::array()},
                                          {"overlap_witness", json(std::vector<std::string>(c.in.spec.n, "0"))},
                                          {"union_rank", 0},
                                          {"levels", json::array()}},
                                         c.in.spec.n)
                       .faces.front();
        } catch (const input_error& e) {
            probe_fail(c, ptr, e.what());
        }
        std::optional<face> hit;
        for (const auto& f : g.faces[nu]) {
            face_spec d = describe(f);
            std::sort(d.vertices.begin(), d.vertices.end());
            auto w = want;
            std::sort(w.vertices.begin(), w.vertices.end());
            if (d.empty == w.empty && d.vertices == w.vertices && d.rays == w.rays) hit = f;
        }
        if (!hit) probe_fail(c, ptr, "not a face of component " + std::to_string(nu + 1));
        t.faces.push_back(*hit);
    }
    t.union_rank = rank(union_points(t.faces));
    t.overlap_witness = cones_interior_intersection(t.faces);
    return t;
}

void attach_certificate(json& body, const unbounded_certificate& cert, const std::vector<exponent_set>& lam,
                        const domain_spec& spec)
{
    json cj = certificate_json(cert);
    for (auto& [k, v] : cj.items()) body[k] = v;
    body["certificate_kind"] = "lo";
    body["certificate_problem"] = problem_json(lam, spec);
}

json stats_json(const enumeration_stats& s)
{
    return {{"tuples_examined", s.examined}, {"lo_tuples", s.lo}, {"low_rank_tuples", s.low_rank}, {"pruned", s.pruned}};
}

report run_decide(const context& c)
{
    auto v = decide_lo(tuple_of(c));
    report r;
    r.body = stats_json(v.stats);
    r.body["verdict"] = v.kind == verdict_kind::bounded ? "bounded" : "unbounded";
    if (v.certificate) {
        attach_certificate(r.body, *v.certificate, c.in.lambda, c.in.spec);
        r.exit = exit_unbounded;
    }
    return r;
}

report run_decide_graph(const context& c)
{
    const auto& lam = c.in.lambda;
    std::size_t n = c.in.spec.n;
    const exponent_set* last = nullptr;
    if (lam.size() == 1) {
        last = &lam.front();
    } else if (lam.size() == n + 1) {
        for (std::size_t i = 0; i < n; ++i) {
            exponent e(n, 0);
            e[i] = 1;
            if (lam[i].points != std::vector<exponent>{e})
                throw input_error(input_error_code::wrong_length, locate_line(c.text, "/lambda/" + std::to_string(i)),
                                  "graph case needs component " + std::to_string(i + 1) + " to be {e_" + std::to_string(i + 1) + "}");
        }
        last = &lam.back();
    } else {
        throw input_error(input_error_code::wrong_length, locate_line(c.text, "/lambda"),
                          "graph case takes one component or n unit components followed by one");
    }
    auto v = decide_graph(*last, c.in.spec);
    report r;
    r.body["verdict"] = v.kind == verdict_kind::bounded ? "bounded" : "unbounded";
    r.body["pairs_examined"] = v.pairs_examined;
    if (v.certificate) {
        json cj = graph_certificate_json(*v.certificate);
        for (auto& [k, val] : cj.items()) r.body[k] = val;
        r.body["certificate_kind"] = "graph";
        r.body["certificate_problem"] = problem_json({*last}, c.in.spec);
        r.exit = exit_unbounded;
    }
    return r;
}

report run_decide_general(const context& c)
{
    std::optional<std::size_t> cap;
    if (c.in.probe.contains("depth_cap")) cap = static_cast<std::size_t>(probe_long(c, "depth_cap", 0, 0, 1 << 20));
    auto v = decide_general(c.in.poly, c.in.spec, cap);
    report r;
    r.body = stats_json(v.result.stats);
    r.body["verdict"] = v.result.kind == verdict_kind::bounded ? "bounded" : "unbounded";
    r.body["depth_cap"] = v.depth_cap;
    r.body["depth_cap_hit"] = v.depth_cap_hit;
    json classes = json::array();
    for (const auto& cl : v.classes) {
        json m = json::array();
        for (const auto& row : cl.matrix.rows) m.push_back(vector_json(row));
        classes.push_back({{"matrix", m}, {"lambda", lambda_json(cl.lambdas)}});
    }
    r.body["classes"] = classes;
    if (v.failing_class) r.body["failing_class"] = *v.failing_class + 1;
    if (v.result.certificate && v.failing_class) {
        attach_certificate(r.body, *v.result.certificate, v.classes[*v.failing_class].lambdas, c.in.spec);
        r.exit = exit_unbounded;
    }
    return r;
}

report run_faces(const context& c)
{
    auto g = build_geometry(tuple_of(c));
    report r;
    json comps = json::array();
    for (std::size_t nu = 0; nu < g.polys.size(); ++nu) {
        const auto& p = g.polys[nu];
        json cj;
        cj["dim"] = p->dim();
        json verts = json::array();
        for (const auto& v : p->vertices()) verts.push_back(vector_json(v));
        cj["vertices"] = verts;
        cj["rays"] = index_list(p->rays());
        json facets = json::array();
        for (const auto& h : p->facets()) facets.push_back({{"normal", vector_json(h.normal)}, {"level", rational_text(h.level)}});
        cj["facets"] = facets;
        json eqs = json::array();
        for (const auto& h : p->basis_b()) eqs.push_back({{"normal", vector_json(h.normal)}, {"level", rational_text(h.level)}});
        cj["equalities"] = eqs;
        json faces = json::array();
        for (const auto& f : g.faces[nu]) {
            json fj = face_json(describe(f));
            fj["dim"] = f.dim;
            fj["improper"] = f.is_improper;
            if (!p->is_null()) {
                cone k = face_cone(f);
                json gens = json::array(), lin = json::array();
                for (const auto& x : k.generators) gens.push_back(vector_json(x));
                for (const auto& x : k.lineality) lin.push_back(vector_json(x));
                fj["cone"] = {{"generators", gens}, {"lineality", lin}};
            }
            faces.push_back(fj);
        }
        cj["faces"] = faces;
        comps.push_back(cj);
    }
    r.body["components"] = comps;
    return r;
}

report run_decompose(const context& c)
{
    if (!c.in.probe.contains("J")) probe_fail(c, "", "decompose needs probe.J, a list of integer vectors");
    const json& js = c.in.probe["J"];
    if (!js.is_array()) probe_fail(c, "/J", "J must be an array");
    auto g = build_geometry(tuple_of(c));
    report r;
    json pieces = json::array();
    for (std::size_t k = 0; k < js.size(); ++k) {
        auto j = probe_vector(c, js[k], "/J/" + std::to_string(k));
        rvector jr;
        for (long x : j) jr.emplace_back(x);
        json tuples = json::array();
        for (const auto& t : classify_dyadic(g, jr)) {
            json fs = json::array();
            for (const auto& f : t.faces) fs.push_back(face_json(describe(f)));
            tuples.push_back({{"faces", fs}, {"union_rank", t.union_rank}});
        }
        pieces.push_back({{"J", j}, {"tuples", tuples}});
    }
    r.body["pieces"] = pieces;
    return r;
}

report run_probe_divergence(const context& c)
{
    auto g = build_geometry(tuple_of(c));
    auto tuple = probe_faces(c, g);
    if (!tuple) {
        enumerate_lo_tuples(g, [&](const face_tuple& t) {
            if (is_even(exponent_set(c.in.spec.n, union_lattice_points(t.faces)))) return true;
            tuple = t;
            return false;
        });
        if (!tuple) probe_fail(c, "", "no odd overlapping face tuple; name one in probe.faces");
    }
    if (!tuple->overlap_witness) probe_fail(c, "/faces", "face cones have no common interior point");
    auto xi = probe_doubles(c, "xi", c.in.poly.d(), 1.0);
    long k_min = probe_long(c, "k_min", 4, 0, 60);
    long k_max = probe_long(c, "k_max", 14, k_min + 1, 60);
    auto b = probe_doubles(c, "b", c.in.spec.n, 1.0);
    for (std::size_t j = 0; j < b.size(); ++j)
        if (!(b[j] > std::ldexp(1.0, static_cast<int>(-k_min)))) probe_fail(c, "/b/" + std::to_string(j), "b must exceed 2^-k_min");
    std::vector<probe_box> boxes;
    for (long k = k_min; k <= k_max; ++k)
        boxes.push_back({static_cast<double>(k), std::vector<double>(c.in.spec.n, std::ldexp(1.0, static_cast<int>(-k))), b});
    auto rep = divergence_probe(c.in.poly, *tuple, xi, boxes);

    report r;
    r.has_table = true;
    json samples = json::array();
    for (const auto& s : rep.samples) {
        double v = std::abs(s.integral.value);
        samples.push_back({{"scale", s.scale},
                           {"value", v},
                           {"re", s.integral.value.real()},
                           {"im", s.integral.value.imag()},
                           {"log_volume", s.log_volume},
                           {"error", s.integral.abs_error_estimate},
                           {"converged", s.integral.converged}});
        r.table.push_back({s.scale, v, rep.vs_scale.intercept + rep.vs_scale.slope * s.scale});
    }
    json faces = json::array();
    for (const auto& f : tuple->faces) faces.push_back(face_json(describe(f)));
    r.body = {{"samples", samples},
              {"faces", faces},
              {"x_block", index_list(rep.x_block)},
              {"y_block", index_list(rep.y_block)},
              {"s0", index_list(rep.s0)},
              {"slope", rep.vs_scale.slope},
              {"slope_stderr", rep.vs_scale.slope_stderr},
              {"intercept", rep.vs_scale.intercept},
              {"r2", rep.vs_scale.r2},
              {"slope_vs_log_volume", rep.vs_volume.slope},
              {"inconclusive", rep.inconclusive}};
    return r;
}

report run_probe_sum(const context& c)
{
    std::size_t d = c.in.poly.d();
    std::vector<std::vector<double>> xis;
    if (c.in.probe.contains("xi")) {
        const json& v = c.in.probe["xi"];
        if (!v.is_array()) probe_fail(c, "/xi", "xi must be a list of vectors");
        for (std::size_t k = 0; k < v.size(); ++k) {
            const json& x = v[k];
            if (!x.is_array() || x.size() != d || !std::all_of(x.begin(), x.end(), [](const json& e) { return e.is_number(); }))
                probe_fail(c, "/xi/" + std::to_string(k), "each xi needs " + std::to_string(d) + " numbers");
            xis.push_back(x.get<std::vector<double>>());
        }
    } else {
        long count = probe_long(c, "samples", 20, 1, 100000);
        std::mt19937_64 rng(c.seed);
        std::uniform_real_distribution<double> expo(-3, 1);
        std::bernoulli_distribution sign(0.5);
        for (long k = 0; k < count; ++k) {
            std::vector<double> x(d);
            for (auto& e : x) e = (sign(rng) ? -1.0 : 1.0) * std::exp2(expo(rng));
            xis.push_back(x);
        }
    }
    std::vector<long> radii{10, 15};
    if (c.in.probe.contains("radii")) {
        const json& v = c.in.probe["radii"];
        if (!v.is_array() || v.empty() || !std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number_integer() && e.get<long>() >= 0 && e.get<long>() <= 200; }))
            probe_fail(c, "/radii", "radii must be integers in 0..200");
        radii = v.get<std::vector<long>>();
    }
    auto rep = multiplier_sum_probe(c.in.poly, c.in.spec, xis, radii, c.threads);
    report r;
    r.has_table = true;
    json rows = json::array();
    for (const auto& row : rep.rows)
        rows.push_back({{"xi", row.xi}, {"partial_sums", row.partial_sums}, {"error", row.error}, {"converged", row.converged}});
    double max_increment = 0;
    for (std::size_t q = 0; q < rep.radii.size(); ++q) {
        double best = 0, err = 0;
        for (const auto& row : rep.rows) {
            best = std::max(best, row.partial_sums[q]);
            err = std::max(err, row.error);
            if (q > 0) max_increment = std::max(max_increment, row.partial_sums[q] - row.partial_sums[q - 1]);
        }
        r.table.push_back({static_cast<double>(rep.radii[q]), best, err});
    }
    r.body = {{"radii", rep.radii}, {"rows", rows}, {"pieces", rep.pieces}, {"skipped", rep.skipped},
              {"max_increment", max_increment}};
    return r;
}

report run_probe_decay(const context& c)
{
    if (!c.in.probe.contains("ray")) probe_fail(c, "", "probe-decay needs probe.ray");
    auto ray = probe_vector(c, c.in.probe["ray"], "/ray");
    auto g = build_geometry(tuple_of(c));
    auto tuple = probe_faces(c, g);
    if (!tuple) {
        face_tuple t;
        rvector rr;
        for (long x : ray) rr.emplace_back(x);
        for (const auto& p : g.polys) t.faces.push_back(p->is_null() ? empty_face(p) : argmin_face(p, rr));
        tuple = t;
    }
    auto xi = probe_doubles(c, "xi", c.in.poly.d(), 256.0);
    long k_max = probe_long(c, "k_max", 8, 1, 60);
    auto rep = decay_check(c.in.poly, *tuple, ray, xi, k_max);
    report r;
    r.has_table = true;
    json rows = json::array();
    for (const auto& row : rep.rows) {
        rows.push_back({{"k", row.k}, {"scale", row.scale}, {"value", row.value}, {"bound", row.bound}, {"error", row.error}});
        r.table.push_back({row.scale, row.value, rep.constant * row.bound});
    }
    json faces = json::array();
    for (const auto& f : tuple->faces) faces.push_back(face_json(describe(f)));
    r.body = {{"rows", rows}, {"faces", faces}, {"delta", rep.delta}, {"constant", rep.constant}, {"fitted", rep.fitted}};
    return r;
}

report run_verify(const std::string& text)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw input_error(input_error_code::malformed_json, 0, e.what());
    }
    auto bad = [&](const std::string& ptr, const std::string& msg) {
        throw input_error(input_error_code::bad_certificate, locate_line(text, ptr), msg);
    };
    if (!root.is_object() || !root.contains("certificate_problem") || !root.contains("certificate_kind"))
        bad("", "no certificate in the report");
    // Reuse the problem validator on the embedded problem.
    problem_input prob;
    try {
        prob = parse_input(root["certificate_problem"].dump());
    } catch (const input_error& e) {
        bad("/certificate_problem", e.what());
    }
    certificate_check chk;
    try {
        if (root["certificate_kind"] == "graph") {
            if (prob.lambda.size() != 1) bad("/certificate_problem/lambda", "graph certificates name one component");
            chk = verify_graph_certificate(prob.lambda.front(), prob.spec, graph_certificate_from_json(root, prob.spec.n));
        } else if (root["certificate_kind"] == "lo") {
            chk = verify_certificate({prob.lambda, prob.spec}, certificate_from_json(root, prob.spec.n));
        } else {
            bad("/certificate_kind", "unknown certificate kind");
        }
    } catch (const input_error& e) {
        if (e.code() != input_error_code::bad_certificate || e.line() != 0) throw;
        chk = {false, e.what()};
    }
    report r;
    r.body["valid"] = chk.ok;
    if (!chk.ok) {
        r.body["reason"] = chk.reason;
        r.exit = exit_input_error;
    }
    return r;
}

void text_lines(std::ostream& out, const json& j, const std::string& prefix)
{
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) text_lines(out, v, prefix.empty() ? k : prefix + "." + k);
        return;
    }
    bool nested = j.is_array() && std::any_of(j.begin(), j.end(), [](const json& e) { return e.is_object(); });
    if (nested) {
        for (std::size_t i = 0; i < j.size(); ++i) text_lines(out, j[i], prefix + "[" + std::to_string(i + 1) + "]");
        return;
    }
    out << prefix << ": " << (j.is_string() ? j.get<std::string>() : j.dump()) << "\n";
}

std::string read_input(const std::string& path)
{
    std::stringstream ss;
    if (path == "-") {
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream f(path);
    if (!f) throw input_error(input_error_code::missing_field, 0, "cannot open input file " + path);
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Boundedness decisions and multiplier probes for multi-parameter Hilbert transforms", "nh"};
    app.require_subcommand(1);
    std::string input, format = "json";
    unsigned threads = 1;
    std::uint64_t seed = 1;
    const std::vector<std::pair<const char*, const char*>> commands{
        {"decide", "evenness test over overlapping low-rank face tuples (disjoint supports)"},
        {"decide-graph", "graph case: components e_1..e_n followed by one support"},
        {"decide-general", "elimination classes for overlapping supports, then the evenness test"},
        {"faces", "vertices, facets and face lattice of each Newton polyhedron"},
        {"decompose", "face tuples owning the given dyadic indices J"},
        {"probe-divergence", "truncated integral of an odd face tuple over shrinking boxes"},
        {"probe-sum", "partial sums of |I_J(xi)| over growing J balls"},
        {"probe-decay", "|I_J| along a ray against its decay bound"},
        {"verify", "re-check the certificate in an unbounded report"},
    };
    for (const auto& [name, what] : commands) {
        auto* sub = app.add_subcommand(name, what);
        sub->add_option("--input", input, "problem JSON file, or - for stdin")->required();
        sub->add_option("--format", format, "json, text or csv")->check(CLI::IsMember({"json", "text", "csv"}));
        sub->add_option("--threads", threads, "worker threads for probes")->check(CLI::Range(1u, 256u));
        sub->add_option("--seed", seed, "seed for sampled frequencies");
    }
    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_input_error;
    }
    std::string mode_name = app.get_subcommands().front()->get_name();
    run_mode mode = *parse_mode(mode_name);

    try {
        auto start = std::chrono::steady_clock::now();
        context c;
        c.text = read_input(input);
        c.threads = threads;
        c.seed = seed;
        report r;
        bool probe = mode == run_mode::probe_divergence || mode == run_mode::probe_sum || mode == run_mode::probe_decay;
        if (format == "csv" && !probe) throw input_error(input_error_code::unknown_mode, 0, "csv output is only for probe commands");
        if (mode == run_mode::verify) {
            r = run_verify(c.text);
        } else {
            c.in = parse_input(c.text);
            switch (mode) {
                case run_mode::decide: r = run_decide(c); break;
                case run_mode::decide_graph: r = run_decide_graph(c); break;
                case run_mode::decide_general: r = run_decide_general(c); break;
                case run_mode::faces: r = run_faces(c); break;
                case run_mode::decompose: r = run_decompose(c); break;
                case run_mode::probe_divergence: r = run_probe_divergence(c); break;
                case run_mode::probe_sum: r = run_probe_sum(c); break;
                case run_mode::probe_decay: r = run_probe_decay(c); break;
                case run_mode::verify: break;
            }
            json prov = {{"engine", engine_version}, {"command", mode_name}, {"input", emit_input(c.in)}};
            if (probe) prov["seed"] = seed, prov["threads"] = threads;
            r.body["provenance"] = prov;
        }
        auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        r.body["timing_ms"] = std::round(ms * 1000) / 1000;

        if (format == "json") {
            out << r.body.dump(2) << "\n";
        } else if (format == "csv") {
            out << "scale,value,bound\n";
            std::ostringstream line;
            line.precision(17);
            for (const auto& row : r.table) line << row.scale << "," << row.value << "," << row.bound << "\n";
            out << line.str();
        } else {
            json summary = r.body;
            summary.erase("provenance");
            out << "command: " << mode_name << "\n";
            text_lines(out, summary, "");
        }
        return r.exit;
    } catch (const input_error& e) {
        err << "input error: " << e.what() << "\n";
        return exit_input_error;
    } catch (const not_disjoint_error& e) {
        err << "input error: " << e.what() << "\n";
        return exit_input_error;
    } catch (const std::invalid_argument& e) {
        err << "input error: " << e.what() << "\n";
        return exit_input_error;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return exit_internal;
    }
}

}  // namespace nh
