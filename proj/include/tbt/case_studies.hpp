// Ready-made problems: the mobile-robot battery example, the two-agent
// corridor example and the Seq-chain scaling family.

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "tbt/synthesis.hpp"

namespace tbt {

struct Region {
    std::string name;
    std::vector<std::size_t> coords;  // state coordinates of the planar position
    std::vector<Bound> box;
    double delta = 0.0;
    bool obstacle = false;
};

struct CaseStudy {
    SynthesisProblem problem;
    std::vector<Region> regions;
};

struct RobotOptions {
    int horizon = 25;
    double dt = 0.5;
    double battery = 0.9;
    /// With false only the first obstacle is kept.
    bool both_obstacles = true;
};

/// Double integrator plus a constant battery coordinate (index 4).
/// Spec: and(seq(F A, seq(sel(batt >= 0.8, F C), F B)), G safety).
CaseStudy robot_case(const RobotOptions& opts);

/// Two block-diagonal double integrators with L1 separation d_min.
/// Spec: and(seq(phi1, phi2), G obstacles, G separation).
CaseStudy multi_agent_case(int horizon = 15, double d_min = 0.6);

/// Scalar single integrator x+ = x + u with a k-ary chain
/// seq(F[0,T] p1, ..., F[0,T] pk), alternating thresholds, root at (0, T).
SynthesisProblem seq_chain_problem(int horizon, int k);

/// First step t >= from whose sample lies inside the region with its delta
/// margin, or -1.
int first_entry(const Trace& x, const Region& r, int from = 0);

/// Minimum over t of the L1 distance between two planar positions.
double min_l1_distance(const Trace& x, const std::vector<std::size_t>& a,
                       const std::vector<std::size_t>& b);

/// `name,kind,xlo,xhi,ylo,yhi` for plotting.
void write_regions_csv(std::ostream& out, const std::vector<Region>& regions);

}  // namespace tbt
