#pragma once

// Pattern assembly: rigid placement of optimized arcs, zero-speed joins with
// finite cusp turns, the eight-fold double flower, and energy profiles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "skate/arcopt.hpp"
#include "skate/errors.hpp"
#include "skate/geometry.hpp"
#include "skate/model.hpp"
#include "skate/trajectory.hpp"

namespace skate {

/// Rotation about the origin followed by translation.
struct RigidTransform {
    double rotation = 0.0;
    double dx = 0.0;
    double dy = 0.0;

    [[nodiscard]] Point apply(Point p) const noexcept {
        const double c = std::cos(rotation), s = std::sin(rotation);
        return {c * p.x - s * p.y + dx, s * p.x + c * p.y + dy};
    }

    /// Transform taking point `from` with direction `from_dir` onto `to` with
    /// direction `to_dir`.
    static RigidTransform mapping(Point from, double from_dir, Point to, double to_dir) noexcept {
        RigidTransform g{to_dir - from_dir, 0.0, 0.0};
        const Point moved = g.apply(from);
        g.dx = to.x - moved.x;
        g.dy = to.y - moved.y;
        return g;
    }
};

/// Moves a trajectory rigidly. Body-frame quantities (momenta, quasivelocities,
/// controls, arc length) are unchanged; theta shifts by the rotation.
inline Trajectory transform(const Trajectory& tr, const RigidTransform& g) {
    Trajectory out = tr;
    for (auto& s : out.states) {
        const Point p = g.apply({s.x, s.y});
        s.x = p.x;
        s.y = p.y;
        s.theta += g.rotation;
    }
    return out;
}

struct PatternPiece {
    std::string name;
    std::string ring;  ///< "inner", "outer" or "single"
    Trajectory traj;
    std::size_t split = 0;  ///< index of the shared initial state (backward | forward)
    RigidTransform placement;
};

struct Join {
    std::size_t before = 0;
    std::size_t after = 0;
    double gap = 0.0;
    double turn_angle = 0.0;  ///< heading change at the cusp, in (-pi, pi]
    double speed_before = 0.0;
    double speed_after = 0.0;
};

struct Pattern {
    std::vector<PatternPiece> pieces;
    std::vector<Join> joins;
    double join_tol = 0.0;
    double closure_defect = 0.0;  ///< polygon closure error spread over the joins
    double symmetry_residual = 0.0;
    std::size_t fold = 1;
    Point center;
};

/// Checks each junction of consecutive pieces (and last to first when
/// closed) and records the finite turn executed at the cusp.
inline std::vector<Join> join(const std::vector<PatternPiece>& pieces, std::size_t first, std::size_t count,
                              double join_tol, double speed_tol, bool closed) {
    std::vector<Join> joins;
    if (count < 2 && !closed) return joins;
    const std::size_t n_joins = closed ? count : count - 1;
    for (std::size_t k = 0; k < n_joins; ++k) {
        const std::size_t i = first + k, j = first + (k + 1) % count;
        const Trajectory& a = pieces[i].traj;
        const Trajectory& b = pieces[j].traj;
        if (a.empty() || b.empty()) throw JoinGap("join: empty piece");
        Join jn;
        jn.before = i;
        jn.after = j;
        jn.gap = distance(a.point(a.size() - 1), b.point(0));
        jn.speed_before = std::abs(a.quasis.back().xi2);
        jn.speed_after = std::abs(b.quasis.front().xi2);
        jn.turn_angle = angle_diff(a.states.back().theta, b.states.front().theta);
        if (!(jn.gap <= join_tol)) {
            throw JoinGap("join " + pieces[i].name + " -> " + pieces[j].name + ": gap " + std::to_string(jn.gap) +
                          " exceeds " + std::to_string(join_tol));
        }
        if (!(jn.speed_before <= speed_tol && jn.speed_after <= speed_tol)) {
            throw NonzeroJoinSpeed("join " + pieces[i].name + " -> " + pieces[j].name + ": speeds " +
                                   std::to_string(jn.speed_before) + ", " + std::to_string(jn.speed_after));
        }
        joins.push_back(jn);
    }
    return joins;
}

inline Pattern join(std::vector<PatternPiece> pieces, double join_tol, double speed_tol = 1e-8, bool closed = false) {
    Pattern p;
    p.join_tol = join_tol;
    p.joins = join(pieces, 0, pieces.size(), join_tol, speed_tol, closed && pieces.size() > 1);
    p.pieces = std::move(pieces);
    return p;
}

/// Hausdorff distance between the sampled pattern and its rotation by
/// 2 pi / fold about `center`.
inline double symmetry_residual(const std::vector<PatternPiece>& pieces, Point center, std::size_t fold) {
    std::vector<Point> pts;
    for (const auto& pc : pieces)
        for (std::size_t i = 0; i < pc.traj.size(); ++i) pts.push_back(pc.traj.point(i));
    if (pts.empty() || fold < 2) return 0.0;
    const double ang = 2 * kPi / static_cast<double>(fold);
    const double c = std::cos(ang), s = std::sin(ang);
    std::vector<Point> rot;
    rot.reserve(pts.size());
    for (const auto& p : pts) {
        const double x = p.x - center.x, y = p.y - center.y;
        rot.push_back({center.x + c * x - s * y, center.y + s * x + c * y});
    }
    auto directed = [](const std::vector<Point>& from, const std::vector<Point>& to) {
        double worst = 0.0;
        for (const auto& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : to) {
                const double d = (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y);
                if (d < best) best = d;
            }
            worst = std::max(worst, best);
        }
        return std::sqrt(worst);
    };
    return std::max(directed(rot, pts), directed(pts, rot));
}

struct FlowerOptions {
    std::size_t petals = 8;
    double join_tol_rel = 1e-3;  ///< join tolerance relative to the pattern diameter
    double speed_tol = 1e-8;
};

namespace detail {

struct Chord {
    Point start;
    double direction = 0.0;
    double length = 0.0;
};

inline Chord chord_of(const Trajectory& tr) {
    const Point a = tr.point(0), b = tr.point(tr.size() - 1);
    return {a, std::atan2(b.y - a.y, b.x - a.x), distance(a, b)};
}

/// Lays pieces head to tail along the given chord directions, centres the
/// vertex polygon on the origin and spreads any closure defect evenly.
inline double place_ring(const std::vector<const ArcSolution*>& arcs, const std::vector<std::string>& names,
                         const std::vector<double>& directions, const std::string& ring, bool closed,
                         std::vector<PatternPiece>& out) {
    const std::size_t n = arcs.size();
    std::vector<Point> v(n + 1);
    for (std::size_t k = 0; k < n; ++k) {
        const double len = chord_of(arcs[k]->combined).length;
        v[k + 1] = {v[k].x + len * std::cos(directions[k]), v[k].y + len * std::sin(directions[k])};
    }
    double defect = 0.0;
    if (closed) {
        const Point d{v[n].x - v[0].x, v[n].y - v[0].y};
        defect = std::hypot(d.x, d.y);
        for (std::size_t k = 0; k <= n; ++k) {
            const double w = static_cast<double>(k) / static_cast<double>(n);
            v[k].x -= w * d.x;
            v[k].y -= w * d.y;
        }
    }
    Point c;
    const std::size_t nv = closed ? n : n + 1;
    for (std::size_t k = 0; k < nv; ++k) {
        c.x += v[k].x / static_cast<double>(nv);
        c.y += v[k].y / static_cast<double>(nv);
    }
    for (std::size_t k = 0; k < n; ++k) {
        const Chord ch = chord_of(arcs[k]->combined);
        const Point start{v[k].x - c.x, v[k].y - c.y};
        const double dir = std::atan2(v[k + 1].y - v[k].y, v[k + 1].x - v[k].x);
        const RigidTransform g = RigidTransform::mapping(ch.start, ch.direction, start, dir);
        const std::size_t split = arcs[k]->backward.empty() ? 0 : arcs[k]->backward.size() - 1;
        out.push_back({names[k], ring, transform(arcs[k]->combined, g), split, g});
    }
    return defect;
}

}  // namespace detail

/// Double flower: an inner ring of `petals` copies of arc 1 and an outer ring
/// of `petals` leaves (arc 3, arc 2, arc 3). Chords of each ring form an
/// equiangular polygon traversed counter-clockwise, so every arc bulges
/// outward; leaves sit between inner petals. With petals = 1 the result is a
/// single arc 1 and a single open leaf.
inline Pattern double_flower(const ArcSolution& arc1, const ArcSolution& arc2, const ArcSolution& arc3,
                             const FlowerOptions& opt = {}) {
    if (opt.petals < 1) throw OutOfRange("double_flower: petals must be >= 1");
    for (const ArcSolution* a : {&arc1, &arc2, &arc3})
        if (a->combined.size() < 2) throw DegenerateArc("double_flower: arc has no samples");
    const std::size_t n = opt.petals;
    const bool closed = n > 1;
    const double step = 2 * kPi / static_cast<double>(n);

    Pattern p;
    p.fold = n;
    std::vector<const ArcSolution*> inner, outer;
    std::vector<std::string> inner_names, outer_names;
    std::vector<double> inner_dirs, outer_dirs;
    const double delta = step / 3.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double base = static_cast<double>(k) * step + kPi / 2;
        inner.push_back(&arc1);
        inner_names.push_back("arc1");
        inner_dirs.push_back(base);
        const double mid = base + step / 2;
        const ArcSolution* leaf[3] = {&arc3, &arc2, &arc3};
        const char* leaf_names[3] = {"arc3", "arc2", "arc3"};
        for (int j = 0; j < 3; ++j) {
            outer.push_back(leaf[j]);
            outer_names.push_back(leaf_names[j]);
            outer_dirs.push_back(mid + (j - 1) * delta);
        }
    }
    const double d_in = detail::place_ring(inner, inner_names, inner_dirs, "inner", closed, p.pieces);
    const double d_out = detail::place_ring(outer, outer_names, outer_dirs, "outer", closed, p.pieces);
    p.closure_defect = std::max(d_in, d_out);

    double radius = 0.0;
    for (const auto& pc : p.pieces)
        for (std::size_t i = 0; i < pc.traj.size(); ++i) radius = std::max(radius, std::hypot(pc.traj.states[i].x, pc.traj.states[i].y));
    p.join_tol = opt.join_tol_rel * 2.0 * radius;

    const auto in_joins = join(p.pieces, 0, n, p.join_tol, opt.speed_tol, closed);
    const auto out_joins = join(p.pieces, n, 3 * n, p.join_tol, opt.speed_tol, closed);
    p.joins = in_joins;
    p.joins.insert(p.joins.end(), out_joins.begin(), out_joins.end());
    p.symmetry_residual = symmetry_residual(p.pieces, p.center, n);
    return p;
}

struct EnergyProfile {
    std::vector<double> times;
    std::vector<double> skate;  ///< skate kinetic energy per sample
    std::vector<double> mass;   ///< control-mass kinetic energy per sample
    double max_mass_energy = 0.0;
    double median_mass_energy = 0.0;
    bool spike = false;  ///< max exceeds spike_multiple times the median
};

inline EnergyProfile energy_profile(const Trajectory& tr, double r, const SleighParams& q,
                                    double spike_multiple = 100.0) {
    EnergyProfile e;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        e.times.push_back(tr.times[i]);
        e.skate.push_back(skate_energy(tr.quasis[i].xi2, r, q));
        e.mass.push_back(std::max(0.0, mass_energy(tr.quasis[i], tr.controls[i], q)));
    }
    if (e.mass.empty()) return e;
    std::vector<double> sorted = e.mass;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    e.median_mass_energy = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    e.max_mass_energy = sorted.back();
    e.spike = e.max_mass_energy > spike_multiple * e.median_mass_energy;
    return e;
}

inline EnergyProfile energy_profile(const ArcSolution& sol, double r, const SleighParams& q,
                                    double spike_multiple = 100.0) {
    return energy_profile(sol.combined, r, q, spike_multiple);
}

/// Path of the control mass in the plane, (x, y) + R(theta) (a, b).
inline std::vector<Point> mass_path(const Trajectory& tr) {
    std::vector<Point> out;
    out.reserve(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const auto [x, y] = mass_position(tr.states[i], tr.controls[i]);
        out.push_back({x, y});
    }
    return out;
}

}  // namespace skate
