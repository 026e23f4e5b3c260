// Builds the eight-fold double flower from the three main-text arcs and
// writes it as SVG to the path given on the command line (default
// flower.svg).

#include <cstdio>
#include <future>
#include <string>

#include "skate/skate.hpp"

namespace {

skate::ArcTask arc(const char* name, double T, double r, double turns, double p1, double p2, double A) {
    skate::ArcTask t;
    t.name = name;
    t.T = T;
    t.r = r;
    t.target = skate::LengthTarget{turns * r * skate::kPi};
    t.init = {p1, p2, 0.0, 0.0, -r, std::nullopt};
    t.guess = {A, 1.0};
    return t;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string path = argc > 1 ? argv[1] : "flower.svg";
    const skate::ArcTask tasks[3] = {arc("arc1", 6.0, 1.2, 1.1, 2.0, 3.0, 1.0),
                                     arc("arc2", 4.1, 0.8, 0.2, 0.15, 0.5, 0.1),
                                     arc("arc3", 4.1, 1.0, 1.0, 2.0, 3.0, 1.0)};
    std::future<skate::ArcSolution> jobs[3];
    for (int i = 0; i < 3; ++i) jobs[i] = std::async(std::launch::async, [&, i] { return skate::optimize_arc(tasks[i]); });
    const skate::ArcSolution a1 = jobs[0].get(), a2 = jobs[1].get(), a3 = jobs[2].get();

    const skate::Pattern p = skate::double_flower(a1, a2, a3);
    std::printf("%zu pieces, %zu joins, join tolerance %.3e, symmetry residual %.2e\n", p.pieces.size(),
                p.joins.size(), p.join_tol, p.symmetry_residual);
    skate::io::write_text_file(path, skate::io::render_svg(skate::io::svg_items(p)));
    std::printf("wrote %s\n", path.c_str());
    return 0;
}
