#include "nh/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <map>
#include <regex>
#include <sstream>

namespace nh {

namespace {

struct code_name {
    input_error_code code;
    const char* name;
};

constexpr code_name code_names[] = {
    {input_error_code::malformed_json, "malformed_json"},
    {input_error_code::missing_field, "missing_field"},
    {input_error_code::wrong_type, "wrong_type"},
    {input_error_code::negative_exponent, "negative_exponent"},
    {input_error_code::wrong_length, "wrong_length"},
    {input_error_code::s_out_of_range, "s_out_of_range"},
    {input_error_code::zero_coefficient, "zero_coefficient"},
    {input_error_code::malformed_rational, "malformed_rational"},
    {input_error_code::bad_coefficient_key, "bad_coefficient_key"},
    {input_error_code::unknown_mode, "unknown_mode"},
    {input_error_code::bad_probe, "bad_probe"},
    {input_error_code::bad_certificate, "bad_certificate"},
};

const std::pair<run_mode, const char*> mode_names[] = {
    {run_mode::decide, "decide"},
    {run_mode::decide_graph, "decide-graph"},
    {run_mode::decide_general, "decide-general"},
    {run_mode::faces, "faces"},
    {run_mode::decompose, "decompose"},
    {run_mode::probe_divergence, "probe-divergence"},
    {run_mode::probe_sum, "probe-sum"},
    {run_mode::probe_decay, "probe-decay"},
    {run_mode::verify, "verify"},
};

// Minimal JSON walker that records the starting line of every value.
class line_scanner {
public:
    explicit line_scanner(const std::string& s) : s_(s) {}

    std::map<std::string, std::size_t> run()
    {
        try {
            value("");
        } catch (const std::out_of_range&) {
        }
        return lines_;
    }

private:
    const std::string& s_;
    std::size_t i_ = 0;
    std::size_t line_ = 1;
    std::map<std::string, std::size_t> lines_;

    char peek() const
    {
        if (i_ >= s_.size()) throw std::out_of_range("eof");
        return s_[i_];
    }

    void ws()
    {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) {
            if (s_[i_] == '\n') ++line_;
            ++i_;
        }
    }

    static std::string escape(const std::string& key)
    {
        std::string out;
        for (char c : key) {
            if (c == '~') out += "~0";
            else if (c == '/') out += "~1";
            else out += c;
        }
        return out;
    }

    std::string str()
    {
        ++i_;
        std::string out;
        while (true) {
            char c = peek();
            ++i_;
            if (c == '"') return out;
            if (c == '\\') {
                char e = peek();
                ++i_;
                if (e == 'u') {
                    i_ += 4;
                    out += '?';
                } else {
                    out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
                }
                continue;
            }
            if (c == '\n') ++line_;
            out += c;
        }
    }

    void value(const std::string& ptr)
    {
        ws();
        lines_.emplace(ptr, line_);
        char c = peek();
        if (c == '{') {
            ++i_;
            ws();
            if (peek() == '}') {
                ++i_;
                return;
            }
            while (true) {
                ws();
                std::string key = str();
                ws();
                if (peek() != ':') return;
                ++i_;
                value(ptr + "/" + escape(key));
                ws();
                char d = peek();
                ++i_;
                if (d != ',') return;
            }
        }
        if (c == '[') {
            ++i_;
            ws();
            if (peek() == ']') {
                ++i_;
                return;
            }
            for (std::size_t k = 0;; ++k) {
                value(ptr + "/" + std::to_string(k));
                ws();
                char d = peek();
                ++i_;
                if (d != ',') return;
            }
        }
        if (c == '"') {
            str();
            return;
        }
        while (i_ < s_.size() && !std::strchr(",]} \t\r\n", s_[i_])) ++i_;
    }
};

class input_parser {
public:
    explicit input_parser(const std::string& text) : text_(text) {}

    problem_input run()
    {
        json root;
        try {
            root = json::parse(text_);
        } catch (const json::parse_error& e) {
            std::size_t line = 1;
            for (std::size_t k = 0; k < e.byte && k < text_.size(); ++k)
                if (text_[k] == '\n') ++line;
            throw input_error(input_error_code::malformed_json, line, e.what());
        }
        if (!root.is_object()) fail(input_error_code::wrong_type, "", "top level must be an object");

        problem_input in;
        long n = integer(field(root, "n", ""), "/n");
        if (n < 1) fail(input_error_code::wrong_length, "/n", "n must be positive");

        const json& s = field(root, "S", "");
        if (!s.is_array()) fail(input_error_code::wrong_type, "/S", "S must be an array");
        std::vector<std::size_t> local;
        for (std::size_t k = 0; k < s.size(); ++k) {
            std::string ptr = "/S/" + std::to_string(k);
            long j = integer(s[k], ptr);
            if (j < 1 || j > n) fail(input_error_code::s_out_of_range, ptr, "S entry " + std::to_string(j) + " outside 1.." + std::to_string(n));
            if (std::find(local.begin(), local.end(), static_cast<std::size_t>(j - 1)) != local.end())
                fail(input_error_code::s_out_of_range, ptr, "S entry repeated");
            local.push_back(static_cast<std::size_t>(j - 1));
        }
        std::sort(local.begin(), local.end());
        in.spec = domain_spec(static_cast<std::size_t>(n), local);

        const json& lam = field(root, "lambda", "");
        if (!lam.is_array() || lam.empty()) fail(input_error_code::wrong_type, "/lambda", "lambda must be a nonempty array");
        in.poly.n = static_cast<std::size_t>(n);
        for (std::size_t nu = 0; nu < lam.size(); ++nu) {
            std::string cptr = "/lambda/" + std::to_string(nu);
            if (!lam[nu].is_array()) fail(input_error_code::wrong_type, cptr, "component must be an array");
            std::vector<exponent> pts;
            for (std::size_t k = 0; k < lam[nu].size(); ++k)
                pts.push_back(exponent_at(lam[nu][k], cptr + "/" + std::to_string(k), static_cast<std::size_t>(n)));
            in.lambda.emplace_back(static_cast<std::size_t>(n), pts);
            std::map<exponent, rational> row;
            for (const auto& m : in.lambda.back().points) row[m] = 1;
            in.poly.rows.push_back(std::move(row));
        }

        if (root.contains("coefficients")) {
            const json& co = root["coefficients"];
            if (!co.is_object()) fail(input_error_code::wrong_type, "/coefficients", "coefficients must be an object");
            static const std::regex key_re(R"(^\s*(\d+)\s*:\s*\(([^()]*)\)\s*$)");
            for (const auto& [key, val] : co.items()) {
                std::string ptr = "/coefficients/" + key;
                std::smatch mt;
                if (!std::regex_match(key, mt, key_re)) fail(input_error_code::bad_coefficient_key, ptr, "key must look like nu:(e1,...,en)");
                std::size_t nu = std::stoul(mt[1].str());
                if (nu < 1 || nu > in.lambda.size()) fail(input_error_code::bad_coefficient_key, ptr, "component index out of range");
                exponent m;
                std::string body = mt[2].str();
                std::stringstream ss(body);
                std::string part;
                while (std::getline(ss, part, ',')) {
                    static const std::regex int_re(R"(^\s*(-?\d+)\s*$)");
                    std::smatch im;
                    if (!std::regex_match(part, im, int_re)) fail(input_error_code::bad_coefficient_key, ptr, "exponent entries must be integers");
                    m.push_back(std::stol(im[1].str()));
                }
                if (m.size() != static_cast<std::size_t>(n)) fail(input_error_code::wrong_length, ptr, "exponent has the wrong length");
                if (std::any_of(m.begin(), m.end(), [](long v) { return v < 0; }))
                    fail(input_error_code::negative_exponent, ptr, "negative exponent");
                if (!in.lambda[nu - 1].contains(m)) fail(input_error_code::bad_coefficient_key, ptr, "monomial not in lambda of its component");
                rational q;
                if (val.is_number_integer()) {
                    q = rational(val.get<long>());
                } else if (val.is_string()) {
                    try {
                        q = parse_rational(val.get<std::string>());
                    } catch (const std::invalid_argument& e) {
                        fail(input_error_code::malformed_rational, ptr, e.what());
                    }
                } else {
                    fail(input_error_code::malformed_rational, ptr, "coefficient must be a string p/q");
                }
                if (q == 0) fail(input_error_code::zero_coefficient, ptr, "coefficient is zero");
                in.poly.rows[nu - 1][m] = q;
            }
        }

        if (root.contains("mode")) {
            const json& md = root["mode"];
            if (!md.is_string()) fail(input_error_code::wrong_type, "/mode", "mode must be a string");
            auto m = parse_mode(md.get<std::string>());
            if (!m || *m == run_mode::verify) fail(input_error_code::unknown_mode, "/mode", "unknown mode " + md.get<std::string>());
            in.mode = m;
        }
        if (root.contains("probe")) {
            if (!root["probe"].is_object()) fail(input_error_code::wrong_type, "/probe", "probe must be an object");
            in.probe = root["probe"];
        }
        return in;
    }

private:
    const std::string& text_;

    [[noreturn]] void fail(input_error_code code, const std::string& ptr, const std::string& msg) const
    {
        throw input_error(code, locate_line(text_, ptr), msg);
    }

    const json& field(const json& obj, const char* name, const std::string& ptr) const
    {
        if (!obj.contains(name)) fail(input_error_code::missing_field, ptr, std::string("missing field ") + name);
        return obj[name];
    }

    long integer(const json& v, const std::string& ptr) const
    {
        if (!v.is_number_integer()) fail(input_error_code::wrong_type, ptr, "expected an integer");
        return v.get<long>();
    }

    exponent exponent_at(const json& v, const std::string& ptr, std::size_t n) const
    {
        if (!v.is_array()) fail(input_error_code::wrong_type, ptr, "exponent must be an array");
        if (v.size() != n) fail(input_error_code::wrong_length, ptr, "exponent must have length " + std::to_string(n));
        exponent m;
        for (std::size_t k = 0; k < v.size(); ++k) {
            long e = integer(v[k], ptr + "/" + std::to_string(k));
            if (e < 0) fail(input_error_code::negative_exponent, ptr + "/" + std::to_string(k), "negative exponent");
            m.push_back(e);
        }
        return m;
    }
};

std::string coefficient_key(std::size_t nu, const exponent& m)
{
    std::string s = std::to_string(nu + 1) + ":(";
    for (std::size_t k = 0; k < m.size(); ++k) s += (k ? "," : "") + std::to_string(m[k]);
    return s + ")";
}

void require(bool ok, const std::string& msg)
{
    if (!ok) throw input_error(input_error_code::bad_certificate, 0, msg);
}

rvector rvector_from(const json& j, std::size_t n)
{
    require(j.is_array() && j.size() == n, "vector of length " + std::to_string(n) + " expected");
    rvector v;
    for (const auto& x : j) {
        require(x.is_string() || x.is_number_integer(), "rational entries must be strings");
        try {
            v.push_back(x.is_string() ? parse_rational(x.get<std::string>()) : rational(x.get<long>()));
        } catch (const std::invalid_argument& e) {
            throw input_error(input_error_code::bad_certificate, 0, e.what());
        }
    }
    return v;
}

exponent exponent_from(const json& j, std::size_t n)
{
    require(j.is_array() && j.size() == n, "exponent of length " + std::to_string(n) + " expected");
    exponent m;
    for (const auto& x : j) {
        require(x.is_number_integer(), "exponent entries must be integers");
        m.push_back(x.get<long>());
    }
    return m;
}

face_spec face_from(const json& j, std::size_t n)
{
    require(j.is_object(), "face must be an object");
    face_spec f;
    f.empty = j.value("empty", false);
    if (j.contains("vertices")) {
        require(j["vertices"].is_array(), "vertices must be an array");
        for (const auto& v : j["vertices"]) f.vertices.push_back(rvector_from(v, n));
    }
    if (j.contains("rays")) {
        require(j["rays"].is_array(), "rays must be an array");
        for (const auto& r : j["rays"]) {
            require(r.is_number_integer() && r.get<long>() >= 1 && r.get<long>() <= static_cast<long>(n),
                    "ray index out of range");
            f.rays.push_back(static_cast<std::size_t>(r.get<long>() - 1));
        }
    }
    return f;
}

}  // namespace

std::string to_string(input_error_code c)
{
    for (const auto& e : code_names)
        if (e.code == c) return e.name;
    return "unknown";
}

input_error::input_error(input_error_code code, std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + to_string(code) + " (E" +
                         std::to_string(static_cast<int>(code)) + "): " + what),
      code_(code),
      line_(line)
{
}

std::string to_string(run_mode m)
{
    for (const auto& [k, name] : mode_names)
        if (k == m) return name;
    return "unknown";
}

std::optional<run_mode> parse_mode(const std::string& s)
{
    for (const auto& [k, name] : mode_names)
        if (s == name) return k;
    return std::nullopt;
}

bool problem_input::operator==(const problem_input& o) const
{
    return spec.n == o.spec.n && spec.s == o.spec.s && lambda == o.lambda && poly.rows == o.poly.rows &&
           mode == o.mode && probe == o.probe;
}

std::size_t locate_line(const std::string& text, const std::string& pointer)
{
    auto lines = line_scanner(text).run();
    std::string p = pointer;
    while (true) {
        auto it = lines.find(p);
        if (it != lines.end()) return it->second;
        if (p.empty()) return 0;
        p = p.substr(0, p.rfind('/'));
    }
}

problem_input parse_input(const std::string& text) { return input_parser(text).run(); }

json emit_input(const problem_input& in)
{
    json j;
    j["n"] = in.spec.n;
    json s = json::array();
    for (auto k : in.spec.s) s.push_back(k + 1);
    j["S"] = s;
    j["lambda"] = lambda_json(in.lambda);
    json co = json::object();
    for (std::size_t nu = 0; nu < in.poly.d(); ++nu)
        for (const auto& [m, c] : in.poly.rows[nu]) co[coefficient_key(nu, m)] = rational_text(c);
    j["coefficients"] = co;
    if (in.mode) j["mode"] = to_string(*in.mode);
    if (!in.probe.empty()) j["probe"] = in.probe;
    return j;
}

std::string rational_text(const rational& q)
{
    rational c = q;
    c.canonicalize();
    return c.get_num().get_str() + "/" + c.get_den().get_str();
}

rational parse_rational(const std::string& s)
{
    static const std::regex re(R"(^\s*(-?\d+)(?:\s*/\s*(\d+))?\s*$)");
    std::smatch m;
    if (!std::regex_match(s, m, re)) throw std::invalid_argument("malformed rational '" + s + "'");
    mpz_class num(m[1].str()), den(m[2].matched ? m[2].str() : "1");
    if (den == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
    rational q(num, den);
    q.canonicalize();
    return q;
}

json vector_json(const rvector& v)
{
    json a = json::array();
    for (const auto& x : v) a.push_back(rational_text(x));
    return a;
}

json exponent_json(const exponent& m) { return json(m); }

json face_json(const face_spec& f)
{
    json j;
    j["empty"] = f.empty;
    json vs = json::array();
    for (const auto& v : f.vertices) vs.push_back(vector_json(v));
    j["vertices"] = vs;
    json rs = json::array();
    for (auto r : f.rays) rs.push_back(r + 1);
    j["rays"] = rs;
    return j;
}

json lambda_json(const std::vector<exponent_set>& lam)
{
    json a = json::array();
    for (const auto& l : lam) {
        json c = json::array();
        for (const auto& m : l.points) c.push_back(exponent_json(m));
        a.push_back(c);
    }
    return a;
}

json certificate_json(const unbounded_certificate& c)
{
    json j;
    json fs = json::array();
    for (const auto& f : c.faces) fs.push_back(face_json(f));
    j["witness_faces"] = fs;
    json odd = json::array();
    for (const auto& m : c.odd_subset) odd.push_back(exponent_json(m));
    j["odd_subset"] = odd;
    j["overlap_witness"] = vector_json(c.overlap_witness);
    j["union_rank"] = c.union_rank;
    json lv = json::array();
    for (const auto& l : c.levels) lv.push_back(l ? json(rational_text(*l)) : json(nullptr));
    j["levels"] = lv;
    return j;
}

unbounded_certificate certificate_from_json(const json& j, std::size_t n)
{
    require(j.is_object(), "certificate must be an object");
    for (const char* k : {"witness_faces", "odd_subset", "overlap_witness", "union_rank", "levels"})
        require(j.contains(k), std::string("certificate lacks ") + k);
    unbounded_certificate c;
    require(j["witness_faces"].is_array(), "witness_faces must be an array");
    for (const auto& f : j["witness_faces"]) c.faces.push_back(face_from(f, n));
    require(j["odd_subset"].is_array(), "odd_subset must be an array");
    for (const auto& m : j["odd_subset"]) c.odd_subset.push_back(exponent_from(m, n));
    c.overlap_witness = rvector_from(j["overlap_witness"], n);
    require(j["union_rank"].is_number_integer() && j["union_rank"].get<long>() >= 0, "union_rank must be a nonnegative integer");
    c.union_rank = j["union_rank"].get<std::size_t>();
    require(j["levels"].is_array(), "levels must be an array");
    for (const auto& l : j["levels"]) {
        if (l.is_null()) {
            c.levels.push_back(std::nullopt);
            continue;
        }
        require(l.is_string(), "levels must be strings or null");
        try {
            c.levels.push_back(parse_rational(l.get<std::string>()));
        } catch (const std::invalid_argument& e) {
            throw input_error(input_error_code::bad_certificate, 0, e.what());
        }
    }
    return c;
}

json graph_certificate_json(const graph_certificate& c)
{
    json j;
    j["witness_face"] = face_json(c.face);
    json a = json::array();
    for (auto i : c.a_set) a.push_back(i + 1);
    j["a_set"] = a;
    json odd = json::array();
    for (const auto& m : c.odd_subset) odd.push_back(exponent_json(m));
    j["odd_subset"] = odd;
    j["union_rank"] = c.union_rank;
    return j;
}

graph_certificate graph_certificate_from_json(const json& j, std::size_t n)
{
    require(j.is_object(), "certificate must be an object");
    for (const char* k : {"witness_face", "a_set", "odd_subset", "union_rank"})
        require(j.contains(k), std::string("certificate lacks ") + k);
    graph_certificate c;
    c.face = face_from(j["witness_face"], n);
    require(j["a_set"].is_array(), "a_set must be an array");
    for (const auto& i : j["a_set"]) {
        require(i.is_number_integer() && i.get<long>() >= 1 && i.get<long>() <= static_cast<long>(n), "a_set index out of range");
        c.a_set.push_back(static_cast<std::size_t>(i.get<long>() - 1));
    }
    require(j["odd_subset"].is_array(), "odd_subset must be an array");
    for (const auto& m : j["odd_subset"]) c.odd_subset.push_back(exponent_from(m, n));
    require(j["union_rank"].is_number_integer() && j["union_rank"].get<long>() >= 0, "union_rank must be a nonnegative integer");
    c.union_rank = j["union_rank"].get<std::size_t>();
    return c;
}

}  // namespace nh
