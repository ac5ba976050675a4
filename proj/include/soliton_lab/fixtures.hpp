#pragma once

// Named metrics, soliton pairs, SKRP parameter sets and one-variable arc
// profiles shared by the tests, the acceptance suite and the command line.

#include <string>
#include <vector>

#include "soliton_lab/completeness.hpp"
#include "soliton_lab/skrp_family.hpp"
#include "soliton_lab/soliton_core.hpp"

namespace soliton_lab::fixtures {

/// euclidean (n = 3), polar, sphere2-stereo, sphere3-stereo, hyperbolic2.
MetricChart metric(const std::string& name);
std::vector<std::string> metric_names();

/// Flat [-1, 1]^n with lambda |x|^2 / 2.
SolitonPair gaussian(int n, double lambda = 1.0);
/// Stereographic round n-sphere, 4 delta / (1 + |x|^2)^2 on [-0.8, 0.8]^n.
MetricChart round_sphere(int n);

/// gaussian-soliton (n = 3), gaussian-soliton-n4, gaussian-soliton-n5,
/// sphere-trivial (3-sphere, f = 0), non-soliton-cubic (flat, f = x1^3), and
/// every SKRP name with m = 2 and kappa > 0 (assembled Calabi chart).
SolitonPair pair(const std::string& name);
std::vector<std::string> pair_names();

/// koiso-m2-A1B0, koiso-m2-compact, koiso-m2-A0B1, koiso-m2-A0B1-lower.
SkrpParams skrp(const std::string& name);
std::vector<std::string> skrp_names();
bool is_skrp(const std::string& name);
CalabiChart calabi(const std::string& name);

/// synthetic-simple-zero (Q = f on (0, 1)), synthetic-two-caps (Q = f (1 - f)),
/// synthetic-double-zero (Q = f^2 (1 - f)^2), plus the anchor components of the
/// SKRP names.
ArcProfile arc(const std::string& name);
std::vector<std::string> arc_names();

}  // namespace soliton_lab::fixtures
