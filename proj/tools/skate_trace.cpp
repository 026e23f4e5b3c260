// skate-trace: command-line front end for the sleigh arc tracer.
//
//   skate-trace <command> --input <file> --out <dir> [--tol k=v ...]
//
// Every command computes all of its outputs in memory first and writes them
// only once nothing can fail any more, so a bad input leaves no files behind.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "skate/skate.hpp"

namespace fs = std::filesystem;
using skate::io::json;

namespace {

using Outputs = std::vector<std::pair<std::string, std::string>>;  // file name, contents

struct Overrides {
    std::vector<std::string> task_keys;
    std::map<std::string, double> local;  // consumed by the command itself
};

Overrides split_overrides(const std::vector<std::string>& kvs, std::initializer_list<const char*> local_keys) {
    Overrides o;
    for (const auto& kv : kvs) {
        const auto eq = kv.find('=');
        const std::string key = eq == std::string::npos ? kv : kv.substr(0, eq);
        bool is_local = false;
        for (const char* k : local_keys) is_local = is_local || key == k;
        if (!is_local) {
            o.task_keys.push_back(kv);
            continue;
        }
        try {
            std::size_t used = 0;
            const std::string val = kv.substr(eq + 1);
            o.local[key] = std::stod(val, &used);
            if (used != val.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw skate::ParseError("override '" + kv + "': value is not a number");
        }
    }
    return o;
}

skate::io::TaskFile load_tasks(const std::string& path, const std::vector<std::string>& overrides) {
    auto tf = skate::io::parse_tasks_text(skate::io::read_text_file(path));
    for (const auto& kv : overrides) skate::io::apply_override(tf, kv);
    return tf;
}

/// Optimizes the given tasks concurrently; results keep the input order.
std::vector<skate::ArcSolution> optimize_all(const std::vector<const skate::ArcTask*>& tasks) {
    std::vector<std::future<skate::ArcSolution>> jobs;
    for (const auto* t : tasks) jobs.push_back(std::async(std::launch::async, [t] { return skate::optimize_arc(*t); }));
    std::vector<skate::ArcSolution> out;
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

Outputs cmd_simulate(const skate::io::TaskFile& tf) {
    Outputs out;
    json summary = json::array();
    std::vector<skate::io::SvgItem> items;
    for (const auto& t : tf.arcs) {
        const auto it = tf.controls.find(t.name);
        const std::vector<double>& ctrl = it != tf.controls.end() ? it->second : t.guess;
        skate::ArcSolution sol = skate::simulate_arc(t, ctrl, true);
        sol.initial_cost = sol.cost;
        out.emplace_back(t.name + ".csv", skate::io::trajectory_csv(sol.combined));
        summary.push_back(skate::io::arc_summary(t, sol));
        items.push_back(skate::io::svg_item(sol));
    }
    out.emplace_back("summary.json", summary.dump(2) + "\n");
    out.emplace_back("arcs.svg", skate::io::render_svg(items));
    return out;
}

Outputs cmd_optimize(const skate::io::TaskFile& tf) {
    std::vector<const skate::ArcTask*> tasks;
    for (const auto& t : tf.arcs) tasks.push_back(&t);
    const auto sols = optimize_all(tasks);
    Outputs out;
    json summary = json::array();
    std::vector<skate::io::SvgItem> items;
    for (std::size_t i = 0; i < sols.size(); ++i) {
        out.emplace_back(tasks[i]->name + ".csv", skate::io::trajectory_csv(sols[i].combined));
        summary.push_back(skate::io::arc_summary(*tasks[i], sols[i]));
        items.push_back(skate::io::svg_item(sols[i]));
    }
    out.emplace_back("result.json", summary.dump(2) + "\n");
    out.emplace_back("arcs.svg", skate::io::render_svg(items));
    return out;
}

Outputs cmd_pattern(const skate::io::TaskFile& tf) {
    if (!tf.pattern) throw skate::ParseError("task file has no 'pattern' section");
    const auto& spec = *tf.pattern;
    // Distinct arcs only, in first-use order.
    std::vector<std::string> names;
    for (const auto* n : {&spec.arc1, &spec.arc2, &spec.arc3})
        if (std::find(names.begin(), names.end(), *n) == names.end()) names.push_back(*n);
    std::vector<const skate::ArcTask*> tasks;
    for (const auto& n : names) tasks.push_back(&tf.arc(n));
    const auto sols = optimize_all(tasks);
    auto sol_of = [&](const std::string& n) -> const skate::ArcSolution& {
        return sols[static_cast<std::size_t>(std::find(names.begin(), names.end(), n) - names.begin())];
    };

    const skate::Pattern p = skate::double_flower(sol_of(spec.arc1), sol_of(spec.arc2), sol_of(spec.arc3), spec.options);

    Outputs out;
    json arcs = json::array();
    for (std::size_t i = 0; i < names.size(); ++i) {
        out.emplace_back(names[i] + ".csv", skate::io::trajectory_csv(sols[i].combined));
        arcs.push_back(skate::io::arc_summary(*tasks[i], sols[i]));
    }
    json joins = json::array();
    for (const auto& j : p.joins) {
        joins.push_back({{"before", j.before},
                         {"after", j.after},
                         {"ring", p.pieces[j.before].ring},
                         {"gap", j.gap},
                         {"turn_angle", j.turn_angle},
                         {"speed_before", j.speed_before},
                         {"speed_after", j.speed_after}});
    }
    json pieces = json::array();
    for (const auto& pc : p.pieces) {
        pieces.push_back({{"arc", pc.name},
                          {"ring", pc.ring},
                          {"rotation", pc.placement.rotation},
                          {"translation", json::array({pc.placement.dx, pc.placement.dy})}});
    }
    const json doc = {{"kind", "double_flower"},
                      {"petals", p.fold},
                      {"join_tol", p.join_tol},
                      {"closure_defect", p.closure_defect},
                      {"symmetry_residual", p.symmetry_residual},
                      {"arcs", arcs},
                      {"pieces", pieces},
                      {"joins", joins}};
    out.emplace_back("pattern.json", doc.dump(2) + "\n");
    out.emplace_back("pattern.svg", skate::io::render_svg(skate::io::svg_items(p)));
    return out;
}

Outputs cmd_energy(const skate::io::TaskFile& tf) {
    std::vector<const skate::ArcTask*> to_optimize;
    for (const auto& t : tf.arcs)
        if (!tf.controls.count(t.name)) to_optimize.push_back(&t);
    const auto optimized = optimize_all(to_optimize);

    Outputs out;
    json summary = json::array();
    std::size_t next = 0;
    for (const auto& t : tf.arcs) {
        skate::ArcSolution sol;
        const auto it = tf.controls.find(t.name);
        if (it != tf.controls.end()) {
            // Fixed controls may be irregular; stop at the singularity and
            // report the profile up to it.
            skate::ArcTask probe = t;
            probe.integrator.stop_on_singular = true;
            sol = skate::simulate_arc(probe, it->second, true);
        } else {
            sol = optimized[next++];
        }
        const auto e = skate::energy_profile(sol, t.r, t.params, tf.spike_multiple);
        out.emplace_back(t.name + "_energy.csv", skate::io::energy_csv(e));
        json j = {{"name", t.name},
                  {"params", sol.opt_params},
                  {"max_mass_energy", e.max_mass_energy},
                  {"median_mass_energy", e.median_mass_energy},
                  {"spike", e.spike},
                  {"spike_multiple", tf.spike_multiple},
                  {"forward_singular", sol.forward_singular},
                  {"backward_singular", sol.backward_singular}};
        if (t.family == skate::ControlFamily::general) {
            const auto& v = sol.opt_params;
            j["regular"] = skate::regularity_check(skate::GeneralControl{v[0], v[1], v[2], v[3]});
        }
        summary.push_back(j);
    }
    out.emplace_back("energy.json", summary.dump(2) + "\n");
    return out;
}

Outputs cmd_fit(const std::string& input, const std::map<std::string, double>& opts) {
    const skate::TargetCurve curve = skate::io::parse_curve_csv(skate::io::read_text_file(input));
    double x0 = curve.points[0].x, x1 = x0, y0 = curve.points[0].y, y1 = y0;
    for (const auto& p : curve.points) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    const double diag = std::hypot(x1 - x0, y1 - y0);
    const double tol = opts.count("fit_tol") ? opts.at("fit_tol") : 1e-3 * diag;
    const double cusp_deg = opts.count("cusp_deg") ? opts.at("cusp_deg") : 30.0;
    if (!(tol > 0)) throw skate::ParseError("fit_tol must be positive");

    skate::TargetCurve marked = curve;
    marked.cusp_indices = skate::detect_cusps(curve, cusp_deg);
    const auto fits = skate::fit_curve(curve, tol, cusp_deg);
    const auto segments = skate::split_at_cusps(marked);

    json segs = json::array();
    std::vector<skate::io::SvgItem> items;
    items.push_back({"target", curve.points, 0});
    double worst = 0.0;
    for (std::size_t k = 0; k < fits.size(); ++k) {
        const double err = skate::fit_error(fits[k], segments[k]);
        worst = std::max(worst, err);
        json arcs = json::array();
        for (const auto& a : fits[k]) {
            arcs.push_back(skate::io::to_json(a));
            items.push_back({"arc fit", skate::io::sample_arcs({a}), 0});
        }
        segs.push_back({{"arcs", arcs}, {"error", err}, {"length", segments[k].length()}});
    }
    const json doc = {{"tolerance", tol}, {"cusps", marked.cusp_indices}, {"max_error", worst}, {"segments", segs}};
    return {{"fit.json", doc.dump(2) + "\n"}, {"fit.svg", skate::io::render_svg(items, {.halves = false})}};
}

void write_all(const fs::path& dir, const Outputs& outputs) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw skate::IoError("cannot create '" + dir.string() + "': " + ec.message());
    for (const auto& [name, text] : outputs) skate::io::write_text_file(dir / name, text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trace skating figures with a controlled Chaplygin sleigh"};
    app.require_subcommand(1);
    std::string input, out_dir;
    std::vector<std::string> tol;

    const std::vector<std::pair<const char*, const char*>> commands = {
        {"simulate", "Integrate each arc with its given control (or guess)"},
        {"optimize", "Optimize the control parameters of each arc"},
        {"fit", "Approximate a sampled curve by circular arcs"},
        {"pattern", "Optimize the arcs and assemble the double flower"},
        {"energy", "Energy profiles of the control mass and the skate"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--input", input, "Task file (JSON) or, for fit, curve CSV")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "Output directory")->required();
        sub->add_option("--tol", tol, "Override k=v (repeatable)")->take_all();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        Outputs outputs;
        if (command == "fit") {
            const auto o = split_overrides(tol, {"fit_tol", "cusp_deg"});
            if (!o.task_keys.empty()) throw skate::ParseError("fit: unknown override '" + o.task_keys.front() + "'");
            outputs = cmd_fit(input, o.local);
        } else {
            const auto tf = load_tasks(input, tol);
            if (command == "simulate") outputs = cmd_simulate(tf);
            else if (command == "optimize") outputs = cmd_optimize(tf);
            else if (command == "pattern") outputs = cmd_pattern(tf);
            else outputs = cmd_energy(tf);
        }
        write_all(out_dir, outputs);
        for (const auto& [name, text] : outputs) std::cout << (fs::path(out_dir) / name).string() << '\n';
    } catch (const skate::ParseError& e) {
        std::cerr << "skate-trace " << command << ": parse error: " << e.what() << '\n';
        return 2;
    } catch (const skate::Error& e) {
        std::cerr << "skate-trace " << command << ": " << e.what() << '\n';
        return 1;
    }
    return 0;
}
