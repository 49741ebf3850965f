#pragma once

#include "rbto/fea.hpp"

namespace rbto {

/// A loaded grid plus the DOF whose displacement magnitude is constrained.
struct BenchmarkCase {
    StructuredGrid grid;
    int output_dof;
    double allowable;
};

/// Symmetric half of the simply supported MBB beam (60 x 20 by default).
/// Symmetry edge x = 0 has zero horizontal displacement, the outer bottom
/// corner is a vertical roller, and the load acts downward at the top node of
/// the symmetry edge (point A).
BenchmarkCase make_mbb_half(int nx = 60, int ny = 20, double load = 1.0, double allowable = 170.0);

/// L-shaped beam on an n x n grid with the upper-right quarter passive. The
/// top edge of the remaining column is clamped and a downward load acts at the
/// mid-height node of the right edge of the lower arm (point B).
BenchmarkCase make_lbeam(int n = 60, double load = 1.0, double allowable = 100.0);

/// Cantilever: left edge clamped, downward load at the mid-height node of the
/// right edge.
BenchmarkCase make_cantilever(int nx, int ny, double load = 1.0, double allowable = 1.0);

} // namespace rbto
