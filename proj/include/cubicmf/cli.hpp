#pragma once

#include <cerrno>
#include <limits>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "cubicmf/csv.hpp"
#include "cubicmf/finite_oracle.hpp"
#include "cubicmf/svg.hpp"
#include "cubicmf/transitions.hpp"
#include "cubicmf/version.hpp"

namespace cubicmf::cli {

namespace exit_code {
constexpr int ok = 0;
constexpr int bad_input = 2;
constexpr int solver_failure = 3;
constexpr int no_transition = 4;
}  // namespace exit_code

struct cli_error : std::runtime_error {
    int code;
    cli_error(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

inline double parse_double(const std::string& name, const std::string& s) {
    if (s.empty()) throw cli_error(exit_code::bad_input, "empty value for --" + name);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v))
        throw cli_error(exit_code::bad_input,
                        "invalid number for --" + name + ": '" + s + "'");
    return v;
}

inline std::int64_t parse_int(const std::string& name, const std::string& s) {
    if (s.empty()) throw cli_error(exit_code::bad_input, "empty value for --" + name);
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size() || errno == ERANGE)
        throw cli_error(exit_code::bad_input,
                        "invalid integer for --" + name + ": '" + s + "'");
    return v;
}

inline int checked_int(const std::string& name, std::int64_t v, std::int64_t lo,
                       std::int64_t hi) {
    if (v < lo || v > hi)
        throw cli_error(exit_code::bad_input,
                        "--" + name + " must lie in [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "]");
    return static_cast<int>(v);
}

inline std::uint64_t parse_uint(const std::string& name, const std::string& s) {
    if (s.empty() || s[0] == '-')
        throw cli_error(exit_code::bad_input,
                        "invalid unsigned integer for --" + name + ": '" + s + "'");
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size() || errno == ERANGE)
        throw cli_error(exit_code::bad_input,
                        "invalid unsigned integer for --" + name + ": '" + s + "'");
    return v;
}

}  // namespace detail

/// Flat `key = value` config file, '#' comments, keys named like flags.
inline std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw cli_error(exit_code::bad_input, "cannot read config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw cli_error(exit_code::bad_input, path + ":" + std::to_string(lineno) +
                                                      ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty())
            throw cli_error(exit_code::bad_input,
                            path + ":" + std::to_string(lineno) + ": empty key");
        if (!kv.emplace(key, value).second)
            throw cli_error(exit_code::bad_input, path + ":" + std::to_string(lineno) +
                                                      ": duplicate key " + key);
    }
    return kv;
}

/// Merged flag store. Every flag is --name value; command-line values win
/// over config-file values; a flag given twice on the command line is an
/// error; flags left unconsumed after a subcommand resolves its inputs are
/// reported as unknown.
class Flags {
public:
    static Flags from_tokens(const std::vector<std::string>& tokens) {
        Flags f;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            const std::string& t = tokens[i];
            if (t.size() < 3 || t.compare(0, 2, "--") != 0)
                throw cli_error(exit_code::bad_input, "expected --flag, got '" + t + "'");
            const std::string name = t.substr(2);
            if (i + 1 >= tokens.size())
                throw cli_error(exit_code::bad_input, "missing value for --" + name);
            if (!f.values_.emplace(name, tokens[++i]).second)
                throw cli_error(exit_code::bad_input,
                                "flag --" + name + " given more than once");
        }
        return f;
    }

    void merge_defaults(const std::map<std::string, std::string>& kv) {
        for (const auto& [k, v] : kv) values_.emplace(k, v);
    }

    bool contains(const std::string& name) const { return values_.count(name) != 0; }

    std::optional<std::string> take(const std::string& name) {
        const auto it = values_.find(name);
        if (it == values_.end()) return std::nullopt;
        std::string v = it->second;
        values_.erase(it);
        return v;
    }

    std::string take_required(const std::string& name) {
        auto v = take(name);
        if (!v)
            throw cli_error(exit_code::bad_input, "missing required flag --" + name);
        return *v;
    }

    double take_double(const std::string& name, double fallback) {
        const auto v = take(name);
        return v ? detail::parse_double(name, *v) : fallback;
    }

    std::int64_t take_int(const std::string& name, std::int64_t fallback) {
        const auto v = take(name);
        return v ? detail::parse_int(name, *v) : fallback;
    }

    void finish() const {
        if (values_.empty()) return;
        std::string msg = "unknown flag(s):";
        for (const auto& [k, v] : values_) msg += " --" + k;
        throw cli_error(exit_code::bad_input, msg);
    }

private:
    std::map<std::string, std::string> values_;
};

using Echo = std::vector<std::pair<std::string, std::string>>;

struct ResolvedModel {
    bool two = false;
    OneComponentParams one;
    TwoComponentParams pair;
    Echo echo;

    double alpha() const { return two ? pair.alpha : 1.0; }
};

inline ResolvedModel resolve_model(Flags& f) {
    ResolvedModel m;
    const std::string kind = f.take_required("model");
    if (kind == "one") {
        m.one.K = f.take_double("K", 0.0);
        m.one.J = f.take_double("J", 0.0);
        m.one.h = f.take_double("h", 0.0);
        validate(m.one);
        m.echo = {{"model", "one"},
                  {"K", format_double(m.one.K)},
                  {"J", format_double(m.one.J)},
                  {"h", format_double(m.one.h)}};
        return m;
    }
    if (kind != "two")
        throw cli_error(exit_code::bad_input, "--model must be 'one' or 'two'");
    m.two = true;
    TwoComponentParams& p = m.pair;
    p.K111 = f.take_double("K111", 0.0);
    p.K112 = f.take_double("K112", 0.0);
    p.K122 = f.take_double("K122", 0.0);
    p.K222 = f.take_double("K222", 0.0);
    p.J11 = f.take_double("J11", 0.0);
    p.J12 = f.take_double("J12", 0.0);
    p.J22 = f.take_double("J22", 0.0);
    p.alpha = f.take_double("alpha", 0.5);
    // biases: directly, or through the internal-equilibrium reparameterization
    for (int comp : {1, 2}) {
        const std::string h_name = comp == 1 ? "h1" : "h2";
        const std::string m_name = comp == 1 ? "m1star" : "m2star";
        if (f.contains(h_name) && f.contains(m_name))
            throw cli_error(exit_code::bad_input,
                            "give either --" + h_name + " or --" + m_name + ", not both");
        double& h = comp == 1 ? p.h1 : p.h2;
        if (const auto ms = f.take(m_name)) {
            const double m_star = detail::parse_double(m_name, *ms);
            if (!(std::fabs(m_star) < 1.0))
                throw cli_error(exit_code::bad_input,
                                "--" + m_name + " must lie strictly inside (-1,1)");
            h = bias_from_internal_equilibrium(m_star, comp == 1 ? p.K111 : p.K222,
                                               comp == 1 ? p.J11 : p.J22);
        } else {
            h = f.take_double(h_name, 0.0);
        }
    }
    validate(p);
    m.echo = {{"model", "two"},
              {"K111", format_double(p.K111)},
              {"K112", format_double(p.K112)},
              {"K122", format_double(p.K122)},
              {"K222", format_double(p.K222)},
              {"J11", format_double(p.J11)},
              {"J12", format_double(p.J12)},
              {"J22", format_double(p.J22)},
              {"h1", format_double(p.h1)},
              {"h2", format_double(p.h2)},
              {"alpha", format_double(p.alpha)}};
    return m;
}

inline SolverConfig resolve_solver(Flags& f, Echo& echo) {
    SolverConfig c;
    c.fp_tol = f.take_double("fp-tol", c.fp_tol);
    c.max_iter = detail::checked_int("max-iter", f.take_int("max-iter", c.max_iter), 1,
                                     std::numeric_limits<int>::max());
    c.damping = f.take_double("damping", c.damping);
    c.n_starts = detail::checked_int("n-starts", f.take_int("n-starts", c.n_starts), 3, 2000);
    c.dedup_tol = f.take_double("dedup-tol", c.dedup_tol);
    c.grid_resolution = f.take_double("grid-resolution", c.grid_resolution);
    validate(c);
    echo.emplace_back("fp-tol", format_double(c.fp_tol));
    echo.emplace_back("max-iter", format_int(c.max_iter));
    echo.emplace_back("damping", format_double(c.damping));
    echo.emplace_back("n-starts", format_int(c.n_starts));
    echo.emplace_back("dedup-tol", format_double(c.dedup_tol));
    echo.emplace_back("grid-resolution", format_double(c.grid_resolution));
    return c;
}

struct Globals {
    std::optional<std::string> out;
    std::string format = "csv";
    unsigned threads = 1;
};

inline Globals resolve_globals(Flags& f, Echo& echo) {
    Globals g;
    g.out = f.take("out");
    g.format = f.take("format").value_or("csv");
    if (g.format != "csv" && g.format != "csv+svg")
        throw cli_error(exit_code::bad_input, "--format must be csv or csv+svg");
    g.threads = static_cast<unsigned>(
        detail::checked_int("threads", f.take_int("threads", 1), 1, 1024));
    echo.emplace_back("threads", format_int(g.threads));
    echo.emplace_back("format", g.format);
    return g;
}

inline std::vector<std::string> metadata_lines(const std::string& subcommand,
                                               const Echo& echo) {
    std::string resolved;
    for (const auto& [k, v] : echo) resolved += " --" + k + " " + v;
    return {std::string("tool: ") + kToolName + " " + kToolVersion,
            "subcommand: " + subcommand, "resolved:" + resolved};
}

/// dir/name.csv -> dir/name.<tag>.csv
inline std::string sibling_path(const std::string& path, const std::string& tag,
                                const std::string& new_ext = "") {
    const std::filesystem::path p(path);
    const std::string ext = new_ext.empty()
                                ? (p.has_extension() ? p.extension().string() : ".csv")
                                : new_ext;
    std::filesystem::path base = p;
    base.replace_extension();
    return tag.empty() ? base.string() + ext : base.string() + "." + tag + ext;
}

inline void emit_table(const CsvTable& t, const std::optional<std::string>& path,
                       std::ostream& out) {
    if (path)
        write_file_atomic(*path, t.to_string());
    else
        out << t.to_string();
}

namespace detail {

inline void append_point_row(CsvTable& t, double m1, double m2, double m_total,
                             double phi, Stability s) {
    t.add_row({format_double(m1), format_double(m2), format_double(m_total),
               format_double(phi), to_string(s)});
}

}  // namespace detail

inline int cmd_solve(Flags& f, std::ostream& out) {
    ResolvedModel model = resolve_model(f);
    Echo echo = model.echo;
    const SolverConfig cfg = resolve_solver(f, echo);
    const Globals g = resolve_globals(f, echo);
    f.finish();

    CsvTable t;
    t.columns = {"m1", "m2", "m_total", "phi", "stability"};
    if (!model.two) {
        for (const auto& pt : find_all_stationary_one(model.one, cfg).points)
            detail::append_point_row(t, pt.location, pt.location, pt.location, pt.phi,
                                     pt.stability);
    } else {
        for (const auto& pt : find_all_stationary_two(model.pair, cfg).points)
            detail::append_point_row(t, pt.location.m1, pt.location.m2,
                                     total_magnetization(model.pair.alpha, pt.location),
                                     pt.phi, pt.stability);
    }
    t.metadata = metadata_lines("solve", echo);
    emit_table(t, g.out, out);
    return exit_code::ok;
}

namespace detail {

template <class Params>
int run_sweep(const Params& base, const std::vector<std::string>& vary, double from,
              double to, int steps, double jump_threshold, double transition_tol,
              const SolverConfig& cfg, const Globals& g, const Echo& echo,
              std::ostream& err) {
    const SweepSpec<Params> spec{base, vary, from, to, steps};
    const auto rows = sweep_1d(spec, cfg, g.threads);

    CsvTable table;
    table.columns = {"param", "m_total", "m1", "m2", "phi", "n_roots", "coexistence"};
    for (const auto& r : rows)
        table.add_row({format_double(r.param), format_double(r.m_total),
                       format_double(r.m1), format_double(r.m2), format_double(r.phi),
                       format_int(r.n_roots), r.coexistence ? "1" : "0"});
    table.metadata = metadata_lines("sweep", echo);

    CsvTable jumps;
    jumps.columns = {"location", "width", "m_left", "m_right", "delta"};
    for (const auto& bracket : detect_jumps(rows, jump_threshold)) {
        try {
            const auto ev =
                refine_transition(base, vary, bracket.x_lo, bracket.x_hi, transition_tol, cfg);
            jumps.add_row({format_double(ev.location), format_double(ev.width),
                           format_double(ev.m_left), format_double(ev.m_right),
                           format_double(ev.delta)});
        } catch (const solver_error& e) {
            err << kToolName << ": jump refinement failed in [" << format_double(bracket.x_lo)
                << ", " << format_double(bracket.x_hi) << "]: " << e.what() << "\n";
        }
    }
    jumps.metadata = table.metadata;

    write_file_atomic(*g.out, table.to_string());
    write_file_atomic(sibling_path(*g.out, "jumps"), jumps.to_string());
    return exit_code::ok;
}

}  // namespace detail

inline int cmd_sweep(Flags& f, std::ostream& err) {
    ResolvedModel model = resolve_model(f);
    const auto vary = detail::split(f.take_required("vary"), ',');
    const double from = detail::parse_double("from", f.take_required("from"));
    const double to = detail::parse_double("to", f.take_required("to"));
    const int steps =
        detail::checked_int("steps", detail::parse_int("steps", f.take_required("steps")), 2, 1000000);
    const double jump_threshold = f.take_double("jump-threshold", 0.1);
    const double transition_tol = f.take_double("transition-tol", 1e-8);

    Echo echo = model.echo;
    std::string joined;
    for (std::size_t i = 0; i < vary.size(); ++i) joined += (i ? "," : "") + vary[i];
    echo.emplace_back("vary", joined);
    echo.emplace_back("from", format_double(from));
    echo.emplace_back("to", format_double(to));
    echo.emplace_back("steps", format_int(steps));
    echo.emplace_back("jump-threshold", format_double(jump_threshold));
    echo.emplace_back("transition-tol", format_double(transition_tol));

    const SolverConfig cfg = resolve_solver(f, echo);
    const Globals g = resolve_globals(f, echo);
    f.finish();
    if (!g.out)
        throw cli_error(exit_code::bad_input, "sweep requires --out <path>");
    return model.two ? detail::run_sweep(model.pair, vary, from, to, steps,
                                         jump_threshold, transition_tol, cfg, g, echo, err)
                     : detail::run_sweep(model.one, vary, from, to, steps, jump_threshold,
                                         transition_tol, cfg, g, echo, err);
}

namespace detail {

inline AxisSpec parse_axis(const std::string& flag, const std::string& s) {
    const auto parts = split(s, ':');
    if (parts.size() != 4)
        throw cli_error(exit_code::bad_input,
                        "--" + flag + " must look like name[,name]:from:to:steps");
    AxisSpec a;
    a.vary = split(parts[0], ',');
    a.from = parse_double(flag, parts[1]);
    a.to = parse_double(flag, parts[2]);
    a.steps = checked_int(flag, parse_int(flag, parts[3]), 2, 1000000);
    return a;
}

inline std::string axis_echo(const AxisSpec& a) {
    std::string s;
    for (std::size_t i = 0; i < a.vary.size(); ++i) s += (i ? "," : "") + a.vary[i];
    return s + ":" + format_double(a.from) + ":" + format_double(a.to) + ":" +
           format_int(a.steps);
}

template <class Params>
int run_diagram(const Params& base, const AxisSpec& x, const AxisSpec& y, int grid_cap,
                double jump_threshold, double transition_tol, const SolverConfig& cfg,
                const Globals& g, const Echo& echo, std::ostream& err) {
    PhaseDiagramSpec<Params> spec;
    spec.base = base;
    spec.x = x;
    spec.y = y;
    spec.grid_cap = grid_cap;
    const auto d = phase_diagram_2d(spec, cfg, g.threads, jump_threshold, transition_tol);
    if (d.refine_failures > 0)
        err << kToolName << ": " << d.refine_failures
            << " transition refinement(s) failed; polyline is incomplete\n";

    CsvTable grid;
    grid.columns = {"x", "y", "m_total", "phi", "jump"};
    for (int iy = 0; iy < d.ny; ++iy)
        for (int ix = 0; ix < d.nx; ++ix) {
            const auto& c = d.at(ix, iy);
            grid.add_row({format_double(c.x), format_double(c.y), format_double(c.m_total),
                          format_double(c.phi), c.jump ? "1" : "0"});
        }
    grid.metadata = metadata_lines("diagram", echo);

    CsvTable lines;
    lines.columns = {"y", "location", "width", "m_left", "m_right", "delta"};
    for (const auto& t : d.transitions)
        lines.add_row({format_double(t.y), format_double(t.event.location),
                       format_double(t.event.width), format_double(t.event.m_left),
                       format_double(t.event.m_right), format_double(t.event.delta)});
    lines.metadata = grid.metadata;

    write_file_atomic(*g.out, grid.to_string());
    write_file_atomic(sibling_path(*g.out, "transitions"), lines.to_string());
    if (g.format == "csv+svg") {
        std::string xl, yl;
        for (std::size_t i = 0; i < x.vary.size(); ++i) xl += (i ? "," : "") + x.vary[i];
        for (std::size_t i = 0; i < y.vary.size(); ++i) yl += (i ? "," : "") + y.vary[i];
        write_file_atomic(sibling_path(*g.out, "", ".svg"), render_heatmap_svg(d, xl, yl));
    }
    return exit_code::ok;
}

}  // namespace detail

inline int cmd_diagram(Flags& f, std::ostream& err) {
    ResolvedModel model = resolve_model(f);
    const AxisSpec x = detail::parse_axis("x", f.take_required("x"));
    const AxisSpec y = detail::parse_axis("y", f.take_required("y"));
    const int grid_cap = detail::checked_int("grid-cap", f.take_int("grid-cap", 512), 2, 65536);
    const double jump_threshold = f.take_double("jump-threshold", 0.1);
    const double transition_tol = f.take_double("transition-tol", 1e-8);

    Echo echo = model.echo;
    echo.emplace_back("x", detail::axis_echo(x));
    echo.emplace_back("y", detail::axis_echo(y));
    echo.emplace_back("grid-cap", format_int(grid_cap));
    echo.emplace_back("jump-threshold", format_double(jump_threshold));
    echo.emplace_back("transition-tol", format_double(transition_tol));

    const SolverConfig cfg = resolve_solver(f, echo);
    const Globals g = resolve_globals(f, echo);
    f.finish();
    if (!g.out)
        throw cli_error(exit_code::bad_input, "diagram requires --out <path>");
    return model.two ? detail::run_diagram(model.pair, x, y, grid_cap, jump_threshold,
                                           transition_tol, cfg, g, echo, err)
                     : detail::run_diagram(model.one, x, y, grid_cap, jump_threshold,
                                           transition_tol, cfg, g, echo, err);
}

inline int cmd_critical(Flags& f, std::ostream& out, std::ostream& err) {
    ResolvedModel model = resolve_model(f);
    const std::string target = f.take_required("target");
    const int steps = detail::checked_int("steps", f.take_int("steps", 201), 2, 1000000);
    const double jump_threshold = f.take_double("jump-threshold", 0.1);
    const double transition_tol = f.take_double("transition-tol", 1e-8);

    Echo echo = model.echo;
    echo.emplace_back("target", target);
    echo.emplace_back("steps", format_int(steps));
    echo.emplace_back("jump-threshold", format_double(jump_threshold));
    echo.emplace_back("transition-tol", format_double(transition_tol));
    const SolverConfig cfg = resolve_solver(f, echo);
    const Globals g = resolve_globals(f, echo);
    f.finish();

    CsvTable t;
    t.columns = {"target", "value", "width"};
    t.metadata = metadata_lines("critical", echo);

    if (target == "K") {
        if (model.two)
            throw cli_error(exit_code::bad_input, "--target K requires --model one");
        if (model.one.h != 0.0)
            throw cli_error(exit_code::bad_input,
                            "--target K locates the symmetric crossing and requires h = 0");
        const auto kc = critical_K_symmetric(model.one.J, cfg);
        if (!kc) {
            err << kToolName << ": no positive-branch crossing exists (J >= 1)\n";
            return exit_code::no_transition;
        }
        t.add_row({"K", format_double(kc->value), format_double(kc->width)});
    } else if (target == "alpha") {
        if (!model.two)
            throw cli_error(exit_code::bad_input, "--target alpha requires --model two");
        const SweepSpec<TwoComponentParams> spec{model.pair, {"alpha"}, 0.0, 1.0, steps};
        const auto rows = sweep_1d(spec, cfg, g.threads);
        const auto brackets = detect_jumps(rows, jump_threshold);
        if (brackets.empty()) {
            err << kToolName << ": no jump of the order parameter along alpha\n";
            return exit_code::no_transition;
        }
        const auto ev = refine_transition(model.pair, {"alpha"}, brackets.front().x_lo,
                                          brackets.front().x_hi, transition_tol, cfg);
        t.add_row({"alpha", format_double(ev.location), format_double(ev.width)});
    } else {
        throw cli_error(exit_code::bad_input, "--target must be K or alpha");
    }
    emit_table(t, g.out, out);
    return exit_code::ok;
}

inline int cmd_oracle(Flags& f, std::ostream& out) {
    ResolvedModel model = resolve_model(f);
    Echo echo = model.echo;

    CsvTable t;
    t.columns = {"N", "p_N", "mean_m", "mean_abs_m", "mean_m2"};
    if (!model.two) {
        const std::string n_list = f.take_required("N");
        echo.emplace_back("N", n_list);
        const SolverConfig cfg = resolve_solver(f, echo);
        const Globals g = resolve_globals(f, echo);
        f.finish();
        (void)cfg;
        for (const auto& tok : detail::split(n_list, ',')) {
            const std::int64_t n = detail::parse_int("N", tok);
            const auto r = exact_one(model.one, n);
            t.add_row({format_int(n), format_double(r.p_N), format_double(r.mean_m),
                       format_double(r.mean_abs_m), format_double(r.mean_m2)});
        }
        t.metadata = metadata_lines("oracle", echo);
        emit_table(t, g.out, out);
        return exit_code::ok;
    }
    const std::int64_t n1 = detail::parse_int("N1", f.take_required("N1"));
    const std::int64_t n2 = detail::parse_int("N2", f.take_required("N2"));
    echo.emplace_back("N1", format_int(n1));
    echo.emplace_back("N2", format_int(n2));
    const SolverConfig cfg = resolve_solver(f, echo);
    const Globals g = resolve_globals(f, echo);
    f.finish();
    (void)cfg;
    const auto r = exact_two(model.pair, n1, n2, g.threads);
    t.add_row({format_int(n1 + n2), format_double(r.p_N), format_double(r.mean_m),
               format_double(r.mean_abs_m), format_double(r.mean_m2)});
    t.metadata = metadata_lines("oracle", echo);
    emit_table(t, g.out, out);
    return exit_code::ok;
}

inline int cmd_mc(Flags& f, std::ostream& out) {
    ResolvedModel model = resolve_model(f);
    std::int64_t n1 = 0, n2 = 0;
    Echo echo = model.echo;
    if (!model.two) {
        n1 = detail::parse_int("N", f.take_required("N"));
        echo.emplace_back("N", format_int(n1));
    } else {
        n1 = detail::parse_int("N1", f.take_required("N1"));
        n2 = detail::parse_int("N2", f.take_required("N2"));
        echo.emplace_back("N1", format_int(n1));
        echo.emplace_back("N2", format_int(n2));
    }
    MCConfig mc;
    mc.total_sweeps = f.take_int("sweeps", mc.total_sweeps);
    mc.burn_in_sweeps = f.take_int("burn-in", mc.burn_in_sweeps);
    mc.seed = detail::parse_uint("seed", f.take("seed").value_or("0"));
    mc.thinning = f.take_int("thin", mc.thinning);
    validate(mc);
    echo.emplace_back("sweeps", format_int(mc.total_sweeps));
    echo.emplace_back("burn-in", format_int(mc.burn_in_sweeps));
    echo.emplace_back("seed", std::to_string(mc.seed));
    echo.emplace_back("thin", format_int(mc.thinning));
    const SolverConfig cfg = resolve_solver(f, echo);
    const Globals g = resolve_globals(f, echo);
    f.finish();
    (void)cfg;

    const MCResult r = model.two ? metropolis(model.pair, n1, n2, mc)
                                 : metropolis(model.one, n1, mc);
    CsvTable t;
    t.columns = {"N", "mean_m", "std_error", "n_samples", "seed"};
    t.add_row({format_int(n1 + n2), format_double(r.mean_m), format_double(r.std_error),
               format_int(r.n_samples), std::to_string(mc.seed)});
    t.metadata = metadata_lines("mc", echo);
    t.metadata.push_back(std::string("rng: ") + SplitMix64::name());
    t.metadata.push_back("seed: " + std::to_string(mc.seed));
    emit_table(t, g.out, out);
    return exit_code::ok;
}

inline void print_usage(std::ostream& out) {
    out << "usage: " << kToolName << " <subcommand> [--flag value ...]\n"
        << "\n"
        << "subcommands:\n"
        << "  solve      all stationary points with stability classes\n"
        << "  sweep      1D parameter sweep plus refined jump report\n"
        << "  diagram    2D phase diagram (CSV grid, transition lines, optional SVG)\n"
        << "  critical   critical coupling (--target K) or AI fraction (--target alpha)\n"
        << "  oracle     exact finite-N Gibbs averages\n"
        << "  mc         Metropolis sampler (seeded, reproducible)\n"
        << "\n"
        << "model:      --model one --K --J --h | --model two --K111 --K112 --K122\n"
        << "            --K222 --J11 --J12 --J22 --alpha (--h1|--m1star) (--h2|--m2star)\n"
        << "sweep:      --vary name[,name..] --from a --to b --steps n\n"
        << "diagram:    --x name[,name..]:from:to:steps --y ... [--grid-cap n]\n"
        << "oracle/mc:  --N n[,n..] | --N1 n --N2 n; mc adds --sweeps --burn-in --seed --thin\n"
        << "solver:     --fp-tol --max-iter --damping --n-starts --dedup-tol --grid-resolution\n"
        << "global:     --out path --config file --threads n --format csv|csv+svg\n";
}

/// Entry point used by the binary and by tests. Exit codes: 0 success,
/// 2 bad input, 3 solver failure, 4 no transition found.
inline int run(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
    try {
        if (args.empty()) {
            print_usage(err);
            return exit_code::bad_input;
        }
        if (args[0] == "help" || args[0] == "--help" || args[0] == "-h") {
            print_usage(out);
            return exit_code::ok;
        }
        const std::string sub = args[0];
        Flags flags = Flags::from_tokens({args.begin() + 1, args.end()});
        if (const auto cfg_path = flags.take("config"))
            flags.merge_defaults(read_config_file(*cfg_path));

        if (sub == "solve") return cmd_solve(flags, out);
        if (sub == "sweep") return cmd_sweep(flags, err);
        if (sub == "diagram") return cmd_diagram(flags, err);
        if (sub == "critical") return cmd_critical(flags, out, err);
        if (sub == "oracle") return cmd_oracle(flags, out);
        if (sub == "mc") return cmd_mc(flags, out);
        throw cli_error(exit_code::bad_input, "unknown subcommand: " + sub);
    } catch (const cli_error& e) {
        err << kToolName << ": " << e.what() << "\n";
        return e.code;
    } catch (const solver_error& e) {
        err << kToolName << ": " << e.what() << "\n";
        return exit_code::solver_failure;
    } catch (const std::invalid_argument& e) {
        err << kToolName << ": " << e.what() << "\n";
        return exit_code::bad_input;
    } catch (const std::domain_error& e) {
        err << kToolName << ": " << e.what() << "\n";
        return exit_code::bad_input;
    } catch (const std::exception& e) {
        err << kToolName << ": internal error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace cubicmf::cli
