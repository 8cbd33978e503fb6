#pragma once

#include "planwarp/geometry.hpp"

namespace planwarp::predicates {

// Sign-exact geometric predicates. A floating-point filter answers almost
// every query; ambiguous cases are re-evaluated in exact rational arithmetic.

/// +1 when a, b, c turn counter-clockwise, -1 clockwise, 0 collinear.
int orient(Point2 a, Point2 b, Point2 c);

/// +1 when d lies strictly inside the circumcircle of the counter-clockwise
/// triangle (a, b, c), -1 strictly outside, 0 on the circle.
int incircle(Point2 a, Point2 b, Point2 c, Point2 d);

/// True when p lies on the closed segment [a, b].
bool on_segment(Point2 p, Point2 a, Point2 b);

/// True when closed segments [a, b] and [c, d] share at least one point.
bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d);

/// True when segments cross at a single point interior to both.
bool segments_cross_properly(Point2 a, Point2 b, Point2 c, Point2 d);

/// True when the closed segment [a, b] meets the closed axis-aligned box.
bool segment_meets_box(Point2 a, Point2 b, Point2 box_min, Point2 box_max);

}  // namespace planwarp::predicates
