#pragma once

#include "centroaffine/body.hpp"

#include <span>
#include <vector>

namespace centroaffine {

/// Volume from cone densities: (1/n) integral of h f_K.
double volume(const FieldTable& fields);

/// Volume of the polar body via the curvature identity (1/n) integral of
/// K0 h f_K; does not construct the polar body.
double polar_volume(const FieldTable& fields);

/// Surface area (perimeter in the plane): integral of f_K.
double surface_area(const FieldTable& fields);

/// Mixed curvature of smooth spherical functions, differentiated spectrally:
/// s(f) = f'' + f in the plane; in space s(f, g) is the mixed discriminant of
/// the matrices Hess f + f I and Hess g + g I, symmetric and bilinear.
std::vector<double> mixed_curvature(const Grid& grid, std::span<const double> f);
std::vector<double> mixed_curvature(const Grid& grid, std::span<const double> f,
                                    std::span<const double> g);

/// Mixed volume V(f0, f1[, f2]) = (1/n) integral of f0 s(f1[, f2]); with every
/// slot holding the same support samples this is the volume.
double mixed_integral(const Grid& grid, std::span<const double> f0, std::span<const double> f1);
double mixed_integral(const Grid& grid, std::span<const double> f0, std::span<const double> f1,
                      std::span<const double> f2);

/// Numerical polar body; equivalent to Body::polar(body, scan).
Body polar_body(const Body& body, const Grid& scan);

/// Radial function rho(v) = max {t >= 0 : t v in K} = min over u dot v > 0 of
/// h(u) / (u dot v), via coarse scan plus local refinement.
double radial_function(const Body& body, const Eigen::Vector3d& v);

/// Aleksandrov body of a positive function sampled at the nodes of a circle
/// grid: the polar of the convex hull of the points u_i / f(u_i), i.e. the
/// largest body whose support function stays below f at the nodes.  Returns a
/// polygonal body: h <= f at every node, with equality at nodes whose dual
/// point survives as a hull vertex.
Body aleksandrov_body(const Grid& grid, std::span<const double> f);

}  // namespace centroaffine
