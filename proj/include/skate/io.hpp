#pragma once

// File formats: JSON task files, trajectory / energy CSV and SVG renderings.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "skate/arcfit.hpp"
#include "skate/arcopt.hpp"
#include "skate/errors.hpp"
#include "skate/pattern.hpp"
#include "skate/trajectory.hpp"

namespace skate::io {

using json = nlohmann::json;

// ---------------------------------------------------------------- tasks

struct FlowerSpec {
    std::string arc1 = "arc1";
    std::string arc2 = "arc2";
    std::string arc3 = "arc3";
    FlowerOptions options{};
};

struct TaskFile {
    std::vector<ArcTask> arcs;
    std::map<std::string, std::vector<double>> controls;  ///< fixed control vectors for simulate / energy
    std::optional<FlowerSpec> pattern;
    double spike_multiple = 100.0;

    [[nodiscard]] const ArcTask& arc(const std::string& name) const {
        for (const auto& a : arcs)
            if (a.name == name) return a;
        throw ParseError("no arc named '" + name + "'");
    }
};

namespace detail {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ParseError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; }))
            throw ParseError(where + ": unknown key '" + it.key() + "'");
    }
}

inline double number(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ParseError(where + ": missing '" + key + "'");
    const json& v = j.at(key);
    if (!v.is_number()) throw ParseError(where + ": '" + key + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ParseError(where + ": '" + key + "' must be finite");
    return x;
}

inline double number_or(const json& j, const char* key, double fallback, const std::string& where) {
    return j.contains(key) ? number(j, key, where) : fallback;
}

inline std::vector<double> numbers(const json& j, const std::string& where) {
    if (!j.is_array()) throw ParseError(where + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw ParseError(where + ": expected an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

inline SleighParams parse_params(const json& j, SleighParams base, const std::string& where) {
    check_keys(j, {"M", "m", "I", "l"}, where);
    base.M = number_or(j, "M", base.M, where);
    base.m = number_or(j, "m", base.m, where);
    base.I = number_or(j, "I", base.I, where);
    base.l = number_or(j, "l", base.l, where);
    if (!base.valid()) throw ParseError(where + ": need M > 0, m >= 0, I > 0, l >= 0");
    return base;
}

inline IntegratorConfig parse_integrator(const json& j, IntegratorConfig c, const std::string& where) {
    check_keys(j, {"rel_tol", "abs_tol", "max_step", "event_tol", "output_interval", "max_steps"}, where);
    c.rel_tol = number_or(j, "rel_tol", c.rel_tol, where);
    c.abs_tol = number_or(j, "abs_tol", c.abs_tol, where);
    c.max_step = number_or(j, "max_step", c.max_step, where);
    c.event_tol = number_or(j, "event_tol", c.event_tol, where);
    c.output_interval = number_or(j, "output_interval", c.output_interval, where);
    if (j.contains("max_steps")) c.max_steps = static_cast<std::size_t>(number(j, "max_steps", where));
    if (!c.valid()) throw ParseError(where + ": tolerances must be positive");
    return c;
}

inline ArcOptimizerConfig parse_optimizer(const json& j, ArcOptimizerConfig c, const std::string& where) {
    check_keys(j, {"fail_threshold", "speed_penalty", "initial_rel_step", "initial_abs_step", "x_tol", "f_tol",
                   "max_evals", "restarts"},
               where);
    c.fail_threshold = number_or(j, "fail_threshold", c.fail_threshold, where);
    c.speed_penalty = number_or(j, "speed_penalty", c.speed_penalty, where);
    auto& nm = c.nelder_mead;
    nm.initial_rel_step = number_or(j, "initial_rel_step", nm.initial_rel_step, where);
    nm.initial_abs_step = number_or(j, "initial_abs_step", nm.initial_abs_step, where);
    nm.x_tol = number_or(j, "x_tol", nm.x_tol, where);
    nm.f_tol = number_or(j, "f_tol", nm.f_tol, where);
    if (j.contains("max_evals")) nm.max_evals = static_cast<std::size_t>(number(j, "max_evals", where));
    if (j.contains("restarts")) nm.restarts = static_cast<std::size_t>(number(j, "restarts", where));
    return c;
}

inline ArcTarget parse_target(const json& j, double r, const std::string& where) {
    check_keys(j, {"length", "length_pi_r", "point"}, where);
    if (j.size() != 1) throw ParseError(where + ": give exactly one of length, length_pi_r, point");
    if (j.contains("length")) return LengthTarget{number(j, "length", where)};
    if (j.contains("length_pi_r")) return LengthTarget{number(j, "length_pi_r", where) * r * kPi};
    const auto xy = numbers(j.at("point"), where + ".point");
    if (xy.size() != 2) throw ParseError(where + ".point: expected [x, y]");
    return PointTarget{xy[0], xy[1]};
}

inline SleighState parse_init(const json& j, const std::string& where) {
    check_keys(j, {"p1", "p2", "theta", "x", "y", "a", "b"}, where);
    SleighState s{number(j, "p1", where), number(j, "p2", where), number_or(j, "theta", 0.0, where),
                  number_or(j, "x", 0.0, where), number_or(j, "y", 0.0, where), std::nullopt};
    if (j.contains("a") && j.contains("b")) throw ParseError(where + ": give at most one of 'a', 'b'");
    if (j.contains("a")) s.control_coord = number(j, "a", where);
    if (j.contains("b")) s.control_coord = number(j, "b", where);
    return s;
}

}  // namespace detail

/// Parses a task document. Top-level params/integrator/optimizer apply to
/// every arc unless the arc overrides them.
inline TaskFile parse_tasks(const json& doc) {
    using namespace detail;
    check_keys(doc, {"params", "integrator", "optimizer", "arcs", "pattern", "spike_multiple"}, "task file");
    TaskFile tf;
    const SleighParams params = doc.contains("params") ? parse_params(doc["params"], {}, "params") : SleighParams{};
    const IntegratorConfig integ =
        doc.contains("integrator") ? parse_integrator(doc["integrator"], {}, "integrator") : IntegratorConfig{};
    const ArcOptimizerConfig optim =
        doc.contains("optimizer") ? parse_optimizer(doc["optimizer"], {}, "optimizer") : ArcOptimizerConfig{};
    tf.spike_multiple = number_or(doc, "spike_multiple", 100.0, "task file");

    if (!doc.contains("arcs") || !doc["arcs"].is_array() || doc["arcs"].empty())
        throw ParseError("task file: 'arcs' must be a non-empty array");
    for (std::size_t i = 0; i < doc["arcs"].size(); ++i) {
        const json& a = doc["arcs"][i];
        const std::string where = "arcs[" + std::to_string(i) + "]";
        check_keys(a, {"name", "T", "r", "target", "init", "family", "guess", "control", "p", "params", "integrator",
                       "optimizer", "singular_eps"},
                   where);
        ArcTask t;
        t.name = a.contains("name") && a["name"].is_string() ? a["name"].get<std::string>() : "arc" + std::to_string(i + 1);
        if (t.name.empty() || t.name.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") !=
                                  std::string::npos)
            throw ParseError(where + ": arc name must be non-empty and use only letters, digits, '_' and '-'");
        for (const auto& prev : tf.arcs)
            if (prev.name == t.name) throw ParseError(where + ": duplicate arc name '" + t.name + "'");
        t.T = number(a, "T", where);
        t.r = number(a, "r", where);
        if (!a.contains("target")) throw ParseError(where + ": missing 'target'");
        t.target = parse_target(a["target"], t.r, where + ".target");
        if (!a.contains("init")) throw ParseError(where + ": missing 'init'");
        t.init = parse_init(a["init"], where + ".init");
        if (a.contains("family")) {
            if (!a["family"].is_string()) throw ParseError(where + ": 'family' must be a string");
            t.family = family_from_string(a["family"].get<std::string>());
        }
        if (!a.contains("guess")) throw ParseError(where + ": missing 'guess'");
        t.guess = numbers(a["guess"], where + ".guess");
        t.p_exp = number_or(a, "p", 2.0, where);
        t.singular_eps = number_or(a, "singular_eps", kDefaultSingularEps, where);
        t.params = a.contains("params") ? parse_params(a["params"], params, where + ".params") : params;
        t.integrator = a.contains("integrator") ? parse_integrator(a["integrator"], integ, where + ".integrator") : integ;
        t.optimizer = a.contains("optimizer") ? parse_optimizer(a["optimizer"], optim, where + ".optimizer") : optim;
        t.validate();
        if (a.contains("control")) {
            auto c = numbers(a["control"], where + ".control");
            if (c.size() != parameter_count(t.family)) throw ParseError(where + ": 'control' has the wrong length");
            tf.controls[t.name] = std::move(c);
        }
        tf.arcs.push_back(std::move(t));
    }

    if (doc.contains("pattern")) {
        const json& p = doc["pattern"];
        check_keys(p, {"kind", "arc1", "arc2", "arc3", "petals", "join_tol_rel"}, "pattern");
        if (!p.contains("kind") || p["kind"] != "double_flower")
            throw ParseError("pattern: only kind 'double_flower' is supported");
        FlowerSpec fs;
        for (auto [key, dst] : {std::pair{"arc1", &fs.arc1}, {"arc2", &fs.arc2}, {"arc3", &fs.arc3}}) {
            if (p.contains(key)) {
                if (!p[key].is_string()) throw ParseError(std::string("pattern.") + key + " must be a string");
                *dst = p[key].get<std::string>();
            }
            (void)tf.arc(*dst);
        }
        const double petals = number_or(p, "petals", 8.0, "pattern");
        if (!(petals >= 1) || petals != std::floor(petals)) throw ParseError("pattern.petals must be a positive integer");
        fs.options.petals = static_cast<std::size_t>(petals);
        fs.options.join_tol_rel = number_or(p, "join_tol_rel", fs.options.join_tol_rel, "pattern");
        if (!(fs.options.join_tol_rel > 0)) throw ParseError("pattern.join_tol_rel must be positive");
        tf.pattern = fs;
    }
    return tf;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    out.flush();
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline TaskFile parse_tasks_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("task file is not valid JSON: ") + e.what());
    }
    return parse_tasks(doc);
}

/// Applies one `key=value` override to every arc of a task file.
inline void apply_override(TaskFile& tf, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ParseError("override '" + kv + "' is not key=value");
    const std::string key = kv.substr(0, eq);
    double v;
    try {
        std::size_t used = 0;
        v = std::stod(kv.substr(eq + 1), &used);
        if (used != kv.size() - eq - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw ParseError("override '" + kv + "': value is not a number");
    }
    if (key == "spike_multiple") {
        tf.spike_multiple = v;
        return;
    }
    if (key == "join_tol_rel") {
        if (tf.pattern) tf.pattern->options.join_tol_rel = v;
        return;
    }
    for (auto& t : tf.arcs) {
        if (key == "rel_tol") t.integrator.rel_tol = v;
        else if (key == "abs_tol") t.integrator.abs_tol = v;
        else if (key == "max_step") t.integrator.max_step = v;
        else if (key == "event_tol") t.integrator.event_tol = v;
        else if (key == "output_interval") t.integrator.output_interval = v;
        else if (key == "fail_threshold") t.optimizer.fail_threshold = v;
        else if (key == "speed_penalty") t.optimizer.speed_penalty = v;
        else if (key == "max_evals") t.optimizer.nelder_mead.max_evals = static_cast<std::size_t>(v);
        else if (key == "x_tol") t.optimizer.nelder_mead.x_tol = v;
        else if (key == "initial_rel_step") t.optimizer.nelder_mead.initial_rel_step = v;
        else if (key == "singular_eps") t.singular_eps = v;
        else if (key == "stop_on_singular") t.integrator.stop_on_singular = v != 0.0;
        else if (key == "p") t.p_exp = v;
        else throw ParseError("unknown override key '" + key + "'");
        if (!t.integrator.valid()) throw ParseError("override '" + kv + "' makes the integrator settings invalid");
    }
}

// ---------------------------------------------------------------- CSV

inline constexpr const char* kTrajectoryHeader = "t,p1,p2,theta,x,y,xi1,xi2,eta,arclen,a,b,da,db";

inline std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string trajectory_csv(const Trajectory& tr) {
    std::string out = kTrajectoryHeader;
    out += '\n';
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const auto& s = tr.states[i];
        const auto& w = tr.quasis[i];
        const auto& c = tr.controls[i];
        const double row[] = {tr.times[i], s.p1, s.p2, s.theta, s.x, s.y, w.xi1, w.xi2,
                              w.eta, tr.arclen[i], c.a, c.b, c.da, c.db};
        for (std::size_t k = 0; k < std::size(row); ++k) {
            if (k) out += ',';
            out += fmt17(row[k]);
        }
        out += '\n';
    }
    return out;
}

inline Trajectory parse_trajectory_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kTrajectoryHeader) throw ParseError("trajectory CSV: bad header");
    Trajectory tr;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream row(line);
        for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        if (cells.size() != 14)
            throw ParseError("trajectory CSV line " + std::to_string(lineno) + ": expected 14 columns");
        double v[14];
        for (std::size_t k = 0; k < 14; ++k) {
            char* end = nullptr;
            v[k] = std::strtod(cells[k].c_str(), &end);
            if (cells[k].empty() || *end != '\0')
                throw ParseError("trajectory CSV line " + std::to_string(lineno) + ": bad number");
        }
        tr.push_back(v[0], SleighState{v[1], v[2], v[3], v[4], v[5], std::nullopt}, Quasivelocities{v[6], v[7], v[8]},
                     ControlSample{v[10], v[11], v[12], v[13]}, v[9]);
    }
    return tr;
}

inline std::string energy_csv(const EnergyProfile& e) {
    std::string out = "t,skate_energy,mass_energy\n";
    for (std::size_t i = 0; i < e.times.size(); ++i)
        out += fmt17(e.times[i]) + ',' + fmt17(e.skate[i]) + ',' + fmt17(e.mass[i]) + '\n';
    return out;
}

/// Sampled curve for `fit`: "x,y" rows, optional header, '#' comments.
/// A comment "# cusps: i j ..." lists cusp sample indices; "# closed" marks a
/// closed curve.
inline TargetCurve parse_curve_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<Point> pts;
    std::vector<std::size_t> cusps;
    bool closed = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            body.erase(0, body.find_first_not_of(' '));
            if (body.rfind("cusps:", 0) == 0) {
                std::istringstream cs(body.substr(6));
                std::string tok;
                while (cs >> tok) {
                    if (tok.find_first_not_of("0123456789,") != std::string::npos)
                        throw ParseError("curve CSV line " + std::to_string(lineno) + ": bad cusp index '" + tok + "'");
                    tok.erase(std::remove(tok.begin(), tok.end(), ','), tok.end());
                    if (!tok.empty()) cusps.push_back(std::stoul(tok));
                }
            } else if (body == "closed") {
                closed = true;
            }
            continue;
        }
        if (pts.empty() && (line == "x,y" || line == "x, y")) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ParseError("curve CSV line " + std::to_string(lineno) + ": expected x,y");
        const std::string xs = line.substr(0, comma), ys = line.substr(comma + 1);
        char* e1 = nullptr;
        char* e2 = nullptr;
        const double x = std::strtod(xs.c_str(), &e1);
        const double y = std::strtod(ys.c_str(), &e2);
        if (xs.empty() || ys.empty() || *e1 != '\0' || (*e2 != '\0' && *e2 != ' ') || !std::isfinite(x) || !std::isfinite(y))
            throw ParseError("curve CSV line " + std::to_string(lineno) + ": bad number");
        pts.push_back({x, y});
    }
    return arclength_parametrize(pts, cusps, closed);
}

// ---------------------------------------------------------------- JSON results

inline json to_json(const Point& p) { return json::array({p.x, p.y}); }

inline json to_json(const CircularArcSpec& a) {
    return {{"center", to_json(a.center)}, {"r", a.r},           {"psi_start", a.psi_start},
            {"psi_end", a.psi_end},       {"orientation", a.orientation}, {"start", to_json(a.start)},
            {"end", to_json(a.end)},      {"length", a.length()}, {"straight", a.straight()}};
}

inline json to_json(const ArcDiagnostics& d) {
    return {{"circle_center", to_json(d.circle.center)},
            {"circle_radius", d.circle.radius},
            {"circle_max_residual", d.circle.max_residual},
            {"momentum_drift", d.momentum_drift},
            {"momentum_reference", d.momentum_reference},
            {"max_curvature_residual", d.max_curvature_residual},
            {"start_speed", d.start_speed},
            {"end_speed", d.end_speed}};
}

inline json arc_summary(const ArcTask& task, const ArcSolution& sol) {
    json j = {{"name", task.name},
              {"family", std::string(to_string(task.family))},
              {"r", task.r},
              {"params", sol.opt_params},
              {"cost", sol.cost},
              {"initial_cost", sol.initial_cost},
              {"length", sol.length},
              {"forward_length", sol.forward.length()},
              {"backward_length", sol.backward.length()},
              {"forward_stopped", sol.forward_stopped},
              {"backward_stopped", sol.backward_stopped},
              {"forward_singular", sol.forward_singular},
              {"backward_singular", sol.backward_singular},
              {"evaluations", sol.evaluations}};
    if (const auto* lt = std::get_if<LengthTarget>(&task.target)) j["target_length"] = lt->length;
    else {
        const auto& pt = std::get<PointTarget>(task.target);
        j["target_point"] = json::array({pt.x, pt.y});
    }
    if (sol.combined.size() >= 3) j["diagnostics"] = to_json(diagnose_arc(sol, task.r));
    if (task.family == ControlFamily::general) {
        const auto& v = sol.opt_params;
        j["regular"] = regularity_check(GeneralControl{v[0], v[1], v[2], v[3]});
    }
    return j;
}

// ---------------------------------------------------------------- SVG

struct SvgItem {
    std::string cls;            ///< class of the full-arc path
    std::vector<Point> points;  ///< path vertices in the plane
    std::size_t split = 0;      ///< 0: no halves; otherwise backward | forward boundary
};

struct SvgStyle {
    double stroke_rel = 0.003;  ///< stroke width relative to the larger view extent
    bool halves = true;         ///< overlay backward / forward halves as polylines
};

/// SVG 1.1 document with one path per item (y axis flipped so the plane's
/// +y points up) and a viewBox fitted to the data with a 5% margin.
inline std::string render_svg(const std::vector<SvgItem>& items, const SvgStyle& style = {}) {
    double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
    for (const auto& it : items)
        for (const auto& p : it.points) {
            x0 = std::min(x0, p.x);
            x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y);
            y1 = std::max(y1, p.y);
        }
    if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    const double w = std::max(x1 - x0, 1e-9), h = std::max(y1 - y0, 1e-9);
    const double mx = 0.05 * w, my = 0.05 * h;
    const double vw = w + 2 * mx, vh = h + 2 * my;
    const double stroke = style.stroke_rel * std::max(vw, vh);

    std::ostringstream o;
    o.precision(10);
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"" << x0 - mx << ' ' << -(y1 + my) << ' '
      << vw << ' ' << vh << "\">\n"
      << "<style>path{fill:none;stroke:#1f3b73;stroke-width:" << stroke
      << "}polyline{fill:none;stroke-width:" << 0.6 * stroke
      << ";stroke-opacity:0.55}.backward{stroke:#c0392b}.forward{stroke:#27ae60}.mass{stroke:#8e44ad}"
      << ".target{stroke:#999}</style>\n";
    auto coords = [&](const std::vector<Point>& pts, std::size_t from, std::size_t to) {
        std::ostringstream c;
        c.precision(10);
        for (std::size_t i = from; i < to; ++i) c << (i > from ? " " : "") << pts[i].x << ',' << -pts[i].y;
        return c.str();
    };
    for (const auto& it : items) {
        if (it.points.empty()) continue;
        o << "<g>\n<path class=\"" << it.cls << "\" d=\"M";
        for (std::size_t i = 0; i < it.points.size(); ++i)
            o << (i ? " L" : "") << ' ' << it.points[i].x << ' ' << -it.points[i].y;
        o << "\"/>\n";
        if (style.halves && it.split > 0 && it.split < it.points.size()) {
            o << "<polyline class=\"half backward\" points=\"" << coords(it.points, 0, it.split + 1) << "\"/>\n";
            o << "<polyline class=\"half forward\" points=\"" << coords(it.points, it.split, it.points.size())
              << "\"/>\n";
        }
        o << "</g>\n";
    }
    o << "</svg>\n";
    return o.str();
}

inline std::vector<SvgItem> svg_items(const Pattern& p) {
    std::vector<SvgItem> items;
    for (const auto& pc : p.pieces) items.push_back({"arc " + pc.ring, points_of(pc.traj), pc.split});
    return items;
}

inline SvgItem svg_item(const ArcSolution& sol, const std::string& cls = "arc single") {
    return {cls, points_of(sol.combined), sol.backward.empty() ? 0 : sol.backward.size() - 1};
}

inline std::vector<Point> sample_arcs(const std::vector<CircularArcSpec>& arcs, std::size_t per_arc = 64) {
    std::vector<Point> out;
    for (const auto& a : arcs)
        for (std::size_t k = out.empty() ? 0 : 1; k <= per_arc; ++k)
            out.push_back(a.at(static_cast<double>(k) / static_cast<double>(per_arc)));
    return out;
}

}  // namespace skate::io
