#include "jacspec/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace jacspec {

using ojson = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
    throw Error(ErrorKind::Config, (line > 0 ? "line " + std::to_string(line) + ": " : std::string()) + msg);
}

bool is_key_char(char ch) { return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-'; }

/// Single-line value reader.
class ValueReader {
public:
    ValueReader(const std::string& s, int line) : s_(s), line_(line) {}

    ojson read_all() {
        ojson v = read();
        skip_ws();
        if (pos_ != s_.size()) fail(line_, "unexpected text after value: '" + s_.substr(pos_) + "'");
        return v;
    }

private:
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    ojson read() {
        skip_ws();
        if (pos_ >= s_.size()) fail(line_, "missing value");
        const char ch = s_[pos_];
        if (ch == '"') return read_string();
        if (ch == '[') return read_array();
        if (s_.compare(pos_, 4, "true") == 0) {
            pos_ += 4;
            return true;
        }
        if (s_.compare(pos_, 5, "false") == 0) {
            pos_ += 5;
            return false;
        }
        return read_number();
    }

    ojson read_string() {
        std::string out;
        ++pos_;
        while (pos_ < s_.size() && s_[pos_] != '"') {
            char ch = s_[pos_++];
            if (ch == '\\') {
                if (pos_ >= s_.size()) break;
                const char e = s_[pos_++];
                ch = e == 'n' ? '\n' : e == 't' ? '\t' : e;
            }
            out.push_back(ch);
        }
        if (pos_ >= s_.size()) fail(line_, "unterminated string");
        ++pos_;
        return out;
    }

    ojson read_array() {
        ojson arr = ojson::array();
        ++pos_;
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == ']') {
            ++pos_;
            return arr;
        }
        while (true) {
            arr.push_back(read());
            skip_ws();
            if (pos_ >= s_.size()) fail(line_, "unterminated array");
            if (s_[pos_] == ',') {
                ++pos_;
                skip_ws();
                if (pos_ < s_.size() && s_[pos_] == ']') {
                    ++pos_;
                    return arr;
                }
                continue;
            }
            if (s_[pos_] == ']') {
                ++pos_;
                return arr;
            }
            fail(line_, "expected ',' or ']' in array");
        }
    }

    ojson read_number() {
        std::size_t end = pos_;
        while (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '.' ||
                                   s_[end] == '-' || s_[end] == '+' || s_[end] == '_'))
            ++end;
        std::string tok = s_.substr(pos_, end - pos_);
        tok.erase(std::remove(tok.begin(), tok.end(), '_'), tok.end());
        if (tok.empty()) fail(line_, "expected a value");
        const bool integral = tok.find_first_of(".eEn") == std::string::npos;
        if (integral) {
            long long v = 0;
            auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec == std::errc() && ptr == tok.data() + tok.size()) {
                pos_ = end;
                return v;
            }
        }
        double d = 0.0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), d);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) fail(line_, "cannot read value '" + tok + "'");
        pos_ = end;
        return d;
    }

    const std::string& s_;
    std::size_t pos_ = 0;
    int line_;
};

std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_str = !in_str;
        if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_path(const std::string& p, int line) {
    std::vector<std::string> parts;
    std::stringstream ss(p);
    std::string part;
    while (std::getline(ss, part, '.')) {
        part = trim(part);
        if (part.empty() || !std::all_of(part.begin(), part.end(), is_key_char)) fail(line, "bad key '" + p + "'");
        parts.push_back(part);
    }
    if (parts.empty()) fail(line, "empty key");
    return parts;
}

// ---- schema ----

/// Typed access to one table of the document with line-anchored errors.
class Table {
public:
    Table(const ConfigDocument& doc, const ojson& node, std::string path)
        : doc_(doc), node_(node), path_(std::move(path)) {}

    const std::string& path() const { return path_; }
    bool has(const std::string& key) const { return node_.contains(key); }

    std::string full(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    int line(const std::string& key) const {
        const int l = doc_.line_of(full(key));
        return l > 0 ? l : doc_.line_of(path_);
    }
    [[noreturn]] void error(const std::string& key, const std::string& msg) const {
        fail(line(key), "'" + full(key) + "': " + msg);
    }

    void allow(std::initializer_list<const char*> keys) const {
        const std::set<std::string> ok(keys.begin(), keys.end());
        for (auto it = node_.begin(); it != node_.end(); ++it)
            if (!ok.count(it.key())) error(it.key(), "unknown field");
    }

    double number(const std::string& key, std::optional<double> dflt = std::nullopt) const {
        if (!has(key)) {
            if (dflt) return *dflt;
            error(key, "missing required field");
        }
        const ojson& v = node_.at(key);
        if (!v.is_number()) error(key, "expected a number");
        return v.get<double>();
    }
    double positive(const std::string& key, std::optional<double> dflt = std::nullopt) const {
        const double v = number(key, dflt);
        if (!(v > 0)) error(key, "must be positive");
        return v;
    }
    long integer(const std::string& key, std::optional<long> dflt = std::nullopt) const {
        if (!has(key)) {
            if (dflt) return *dflt;
            error(key, "missing required field");
        }
        const ojson& v = node_.at(key);
        if (!v.is_number_integer()) error(key, "expected an integer");
        return v.get<long>();
    }
    std::string string(const std::string& key, std::optional<std::string> dflt = std::nullopt) const {
        if (!has(key)) {
            if (dflt) return *dflt;
            error(key, "missing required field");
        }
        const ojson& v = node_.at(key);
        if (!v.is_string()) error(key, "expected a string");
        return v.get<std::string>();
    }
    std::vector<double> numbers(const std::string& key) const {
        const ojson& v = node_.at(key);
        if (!v.is_array()) error(key, "expected an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) error(key, "expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }
    Table sub(const std::string& key) const {
        if (!has(key)) error(key, "missing required table");
        if (!node_.at(key).is_object()) error(key, "expected a table");
        return Table(doc_, node_.at(key), full(key));
    }
    const ojson& raw(const std::string& key) const { return node_.at(key); }

private:
    const ConfigDocument& doc_;
    const ojson& node_;
    std::string path_;
};

ScalarSequence parse_sequence(const Table& t) {
    const std::string kind_name = t.string("kind");
    SeqKind kind;
    try {
        kind = seq_kind_from_string(kind_name);
    } catch (const Error&) {
        t.error("kind", "unknown sequence kind '" + kind_name +
                            "' (geometric, power, dyukarev_d, superexp, explicit, product-weighted)");
    }
    ScalarSequence s;
    switch (kind) {
        case SeqKind::Geometric: {
            t.allow({"kind", "ratio", "scale", "shift"});
            const double ratio = t.positive("ratio");
            s = ScalarSequence::geometric(ratio, t.positive("scale", 1.0));
            break;
        }
        case SeqKind::Power:
            t.allow({"kind", "exponent", "scale", "shift"});
            s = ScalarSequence::power(t.number("exponent"), t.positive("scale", 1.0));
            break;
        case SeqKind::DyukarevD:
            t.allow({"kind", "c", "shift"});
            s = ScalarSequence::dyukarev_d(t.positive("c", 1.0));
            break;
        case SeqKind::Superexp: {
            t.allow({"kind", "base", "exponent", "scale", "shift"});
            const double base = t.number("base");
            if (!(base > 1.0)) t.error("base", "must exceed 1");
            s = ScalarSequence::superexp(base, t.positive("exponent"), t.positive("scale", 1.0));
            break;
        }
        case SeqKind::Explicit: {
            t.allow({"kind", "values", "log_values", "shift"});
            std::vector<double> logs;
            if (t.has("log_values")) {
                logs = t.numbers("log_values");
            } else {
                if (!t.has("values")) t.error("values", "missing required field");
                for (double v : t.numbers("values")) {
                    if (!(v > 0)) t.error("values", "entries must be positive");
                    logs.push_back(std::log(v));
                }
            }
            if (logs.empty()) t.error("values", "needs at least one entry");
            s = ScalarSequence::explicit_logs(std::move(logs));
            break;
        }
        case SeqKind::ProductWeighted: {
            t.allow({"kind", "scale", "r", "exponent", "shift"});
            const double r = t.number("r", 0.0);
            if (r < 0) t.error("r", "must be non-negative");
            s = ScalarSequence::product_weighted(t.positive("scale", 1.0), r, t.number("exponent", 2.0));
            break;
        }
    }
    s.shift = t.integer("shift", 0L);
    if (s.shift < 0 && kind != SeqKind::Geometric && kind != SeqKind::Explicit && kind != SeqKind::DyukarevD)
        t.error("shift", "negative shifts are only allowed for geometric and dyukarev_d");
    return s;
}

BlockSequence parse_block_sequence(const Table& t, int p) {
    const std::string kind = t.string("kind");
    if (kind == "zero") {
        t.allow({"kind"});
        return BlockSequence::zero();
    }
    if (kind == "constant-scalar") {
        t.allow({"kind", "value"});
        return BlockSequence::constant_scalar(t.number("value"));
    }
    if (kind == "constant-matrix") {
        t.allow({"kind", "rows"});
        if (!t.has("rows")) t.error("rows", "missing required field");
        const ojson& rows = t.raw("rows");
        if (!rows.is_array() || static_cast<int>(rows.size()) != p) t.error("rows", "expected p rows");
        Block m(p, p);
        for (int i = 0; i < p; ++i) {
            if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != p) t.error("rows", "expected p columns");
            for (int j = 0; j < p; ++j) {
                const ojson& e = rows[i][j];
                if (e.is_number()) {
                    m(i, j) = e.get<double>();
                } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
                    m(i, j) = cplx(e[0].get<double>(), e[1].get<double>());
                } else {
                    t.error("rows", "entries must be numbers or [re, im] pairs");
                }
            }
        }
        if (!is_hermitian(m)) t.error("rows", "matrix must be Hermitian");
        return BlockSequence::constant_matrix(m);
    }
    if (kind == "diagonal-list") {
        t.allow({"kind", "values"});
        if (!t.has("values")) t.error("values", "missing required field");
        std::vector<double> v = t.numbers("values");
        if (static_cast<int>(v.size()) != p) t.error("values", "expected p entries");
        return BlockSequence::diagonal_list(std::move(v));
    }
    if (kind == "scaled-identity") {
        t.allow({"kind", "factor", "shift", "seq"});
        return BlockSequence::scaled_identity(parse_sequence(t.sub("seq")), t.number("factor", 1.0),
                                              t.number("shift", 0.0));
    }
    if (kind == "block-split") {
        t.allow({"kind", "p1", "upper", "lower"});
        const long p1 = t.integer("p1");
        if (p1 < 0 || p1 > p) t.error("p1", "must lie in [0, p]");
        const int q1 = static_cast<int>(p1);
        BlockSequence up = q1 > 0 ? parse_block_sequence(t.sub("upper"), q1) : BlockSequence::zero();
        BlockSequence lo = q1 < p ? parse_block_sequence(t.sub("lower"), p - q1) : BlockSequence::zero();
        return BlockSequence::block_split(q1, std::move(up), std::move(lo));
    }
    t.error("kind", "unknown block-sequence kind '" + kind +
                        "' (zero, constant-scalar, constant-matrix, diagonal-list, scaled-identity, block-split)");
}

enum class Needs { Alpha, Beta, None };

Needs family_needs(const std::string& f) {
    if (f == "dirac-alpha" || f == "dirac-alpha-display" || f == "dirac-alpha-simple" || f == "boundary-alpha" || f == "perturbed-alpha" ||
        f == "schrodinger-j1" || f == "schrodinger-j2")
        return Needs::Alpha;
    if (f == "dirac-beta" || f == "dirac-beta-simple" || f == "perturbed-beta") return Needs::Beta;
    return Needs::None;
}

}  // namespace

int ConfigDocument::line_of(const std::string& path) const {
    for (const auto& [k, l] : lines)
        if (k == path) return l;
    return 0;
}

ConfigDocument parse_document(const std::string& text) {
    ConfigDocument doc;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    std::vector<std::string> table;
    std::set<std::string> opened;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) fail(line_no, "malformed table header");
            const std::string name = trim(line.substr(1, line.size() - 2));
            table = split_path(name, line_no);
            if (!opened.insert(name).second) fail(line_no, "table [" + name + "] defined twice");
            ojson* node = &doc.root;
            std::string path;
            for (const auto& part : table) {
                path = path.empty() ? part : path + "." + part;
                if (!node->contains(part)) {
                    (*node)[part] = ojson::object();
                    doc.lines.emplace_back(path, line_no);
                } else if (!(*node)[part].is_object()) {
                    fail(line_no, "'" + path + "' is already a value");
                }
                node = &(*node)[part];
            }
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty() || !std::all_of(key.begin(), key.end(), is_key_char)) fail(line_no, "bad key '" + key + "'");
        const std::string value_text = trim(line.substr(eq + 1));
        ojson* node = &doc.root;
        std::string path;
        for (const auto& part : table) {
            node = &(*node)[part];
            path = path.empty() ? part : path + "." + part;
        }
        path = path.empty() ? key : path + "." + key;
        if (node->contains(key)) fail(line_no, "duplicate key '" + path + "'");
        (*node)[key] = ValueReader(value_text, line_no).read_all();
        doc.lines.emplace_back(path, line_no);
    }
    return doc;
}

const std::vector<std::string>& family_names() {
    static const std::vector<std::string> names = {
        "general",         "dirac-alpha",    "dirac-alpha-display", "dirac-alpha-simple", "boundary-alpha",
        "dirac-beta",      "dirac-beta-simple", "perturbed-alpha", "perturbed-beta",
        "schrodinger-j1",  "schrodinger-j2", "dyukarev"};
    return names;
}

RunConfig parse_config(const std::string& text) {
    const ConfigDocument doc = parse_document(text);
    const Table top(doc, doc.root, "");
    top.allow({"family", "p", "p1", "c", "n_max", "dense_cap", "tol", "z_points", "ladder", "ladder_max_pow", "d",
               "alpha", "beta", "perturbation", "general", "criteria", "spectrum", "build", "output"});

    RunConfig cfg;
    cfg.echo = doc.root;
    cfg.family = top.string("family");
    const auto& names = family_names();
    if (std::find(names.begin(), names.end(), cfg.family) == names.end())
        top.error("family", "unknown family '" + cfg.family + "'");

    const long p = top.integer("p", 1L);
    if (p < 1 || p > 64) top.error("p", "must lie in [1, 64]");
    cfg.p = static_cast<int>(p);
    const long p1 = top.integer("p1", 0L);
    if (p1 < 0 || p1 > p) top.error("p1", "must lie in [0, p]");
    cfg.p1 = static_cast<int>(p1);
    cfg.c = top.positive("c", 1.0);

    cfg.n_max = top.integer("n_max", 10000L);
    if (cfg.n_max < 16) top.error("n_max", "must be at least 16");
    const long cap = top.integer("dense_cap", static_cast<long>(kDefaultDenseCap));
    if (cap < 1) top.error("dense_cap", "must be positive");
    cfg.dense_cap = static_cast<std::size_t>(cap);
    cfg.tol = top.positive("tol", 1e-8);
    cfg.ladder_max_pow = static_cast<int>(top.integer("ladder_max_pow", 12L));
    if (cfg.ladder_max_pow < 5 || cfg.ladder_max_pow > 20) top.error("ladder_max_pow", "must lie in [5, 20]");
    if (top.has("ladder")) {
        for (double v : top.numbers("ladder")) {
            if (v < 1 || v != std::floor(v)) top.error("ladder", "entries must be positive integers");
            cfg.ladder.push_back(static_cast<std::size_t>(v));
        }
        if (!std::is_sorted(cfg.ladder.begin(), cfg.ladder.end())) top.error("ladder", "must be increasing");
    }
    if (top.has("z_points")) {
        cfg.z_points.clear();
        const ojson& zs = top.raw("z_points");
        if (!zs.is_array() || zs.empty()) top.error("z_points", "expected a list of [re, im] pairs");
        for (const auto& z : zs) {
            if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number())
                top.error("z_points", "expected a list of [re, im] pairs");
            const cplx v(z[0].get<double>(), z[1].get<double>());
            if (v.imag() == 0.0) top.error("z_points", "points must be off the real axis");
            cfg.z_points.push_back(v);
        }
    }

    const Needs needs = family_needs(cfg.family);
    const bool has_alpha = top.has("alpha"), has_beta = top.has("beta");
    cfg.model.p = cfg.p;
    cfg.model.c = cfg.c;
    if (needs != Needs::None) {
        cfg.model.d = parse_sequence(top.sub("d"));
        if (needs == Needs::Alpha) {
            if (!has_alpha) top.error("alpha", "family '" + cfg.family + "' needs an alpha table");
            if (has_beta) top.error("beta", "family '" + cfg.family + "' takes alpha, not beta");
            cfg.model.alpha = parse_block_sequence(top.sub("alpha"), cfg.p);
        } else {
            if (!has_beta) top.error("beta", "family '" + cfg.family + "' needs a beta table");
            if (has_alpha) top.error("alpha", "family '" + cfg.family + "' takes beta, not alpha");
            cfg.model.beta = parse_block_sequence(top.sub("beta"), cfg.p);
        }
    } else {
        if (has_alpha) top.error("alpha", "family '" + cfg.family + "' takes no interaction strengths");
        if (has_beta) top.error("beta", "family '" + cfg.family + "' takes no interaction strengths");
        if (top.has("d")) top.error("d", "family '" + cfg.family + "' takes no d sequence");
    }

    const bool perturbed = cfg.family == "perturbed-alpha" || cfg.family == "perturbed-beta";
    if (perturbed) {
        const Table t = top.sub("perturbation");
        t.allow({"aprime", "bprime"});
        PerturbationData pd;
        if (t.has("aprime")) pd.Aprime = parse_block_sequence(t.sub("aprime"), cfg.p);
        if (t.has("bprime")) pd.Bprime = parse_block_sequence(t.sub("bprime"), cfg.p);
        cfg.perturbation = std::move(pd);
    } else if (top.has("perturbation")) {
        top.error("perturbation", "only the perturbed families take a perturbation table");
    }

    if (cfg.family == "general") {
        const Table t = top.sub("general");
        t.allow({"diag", "offdiag"});
        cfg.general_diag = parse_block_sequence(t.sub("diag"), cfg.p);
        cfg.general_offdiag = parse_block_sequence(t.sub("offdiag"), cfg.p);
    } else if (top.has("general")) {
        top.error("general", "only family 'general' takes a general table");
    }

    if (top.has("criteria")) {
        const Table t = top.sub("criteria");
        t.allow({"s", "q", "N"});
        cfg.s = t.number("s", 1.0);
        if (cfg.s < 1.0) t.error("s", "must be >= 1");
        cfg.q = t.positive("q", 1.0);
        cfg.N_start = t.integer("N", 0L);
        if (cfg.N_start < 0 || cfg.N_start >= cfg.n_max) t.error("N", "must lie in [0, n_max)");
    }
    if (top.has("spectrum")) {
        const Table t = top.sub("spectrum");
        t.allow({"N"});
        cfg.spectrum_N = t.integer("N", 64L);
        if (cfg.spectrum_N < 1) t.error("N", "must be positive");
    }
    if (top.has("build")) {
        const Table t = top.sub("build");
        t.allow({"blocks"});
        cfg.build_blocks = t.integer("blocks", 4L);
        if (cfg.build_blocks < 1) t.error("blocks", "must be positive");
    }
    if (top.has("output")) {
        const Table t = top.sub("output");
        t.allow({"json", "csv"});
        cfg.json_path = t.string("json", std::string());
        cfg.csv_path = t.string("csv", std::string());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

BlockJacobiMatrix build_matrix(const RunConfig& cfg) {
    const std::string& f = cfg.family;
    if (f == "general") {
        const BlockSequence diag = *cfg.general_diag, off = *cfg.general_offdiag;
        const int p = cfg.p;
        return BlockJacobiMatrix(
            p, [diag, p](std::size_t n) { return diag.at_scaled(static_cast<long>(n) + 1, p); },
            [off, p](std::size_t n) { return off.at_scaled(static_cast<long>(n) + 1, p); }, "general");
    }
    if (f == "dirac-alpha") return make_dirac_alpha(cfg.model);
    if (f == "dirac-alpha-display") return make_dirac_alpha_display(cfg.model);
    if (f == "dirac-alpha-simple") return make_dirac_alpha_simple(cfg.model);
    if (f == "boundary-alpha") return make_boundary_alpha(cfg.model);
    if (f == "dirac-beta") return make_dirac_beta(cfg.model);
    if (f == "dirac-beta-simple") return make_dirac_beta_simple(cfg.model);
    if (f == "perturbed-alpha") return make_perturbed_alpha(cfg.model, *cfg.perturbation);
    if (f == "perturbed-beta") return make_perturbed_beta(cfg.model, *cfg.perturbation);
    if (f == "schrodinger-j1") return make_schrodinger_J1(cfg.model);
    if (f == "schrodinger-j2") return make_schrodinger_J2(cfg.model);
    if (f == "dyukarev") return make_dyukarev(cfg.p, cfg.p1);
    throw Error(ErrorKind::Config, "unknown family '" + f + "'");
}

}  // namespace jacspec
