#!/usr/bin/env python3
"""Gaze rays, focus objects, and hit testing.

A focus object is a sphere that detects whether a gaze ray collides with it.
At distance d the sphere of radius r subtends a cone of half-angle
asin(r / d); a gaze within that cone of the center is a hit.
"""

import math

from oculab import GazeRay, TargetSphere, angular_error, direction_from_yaw, hit_test

target = TargetSphere(center=(0.0, 0.0, 2.0), radius=0.1)
cone = math.degrees(math.asin(0.1 / 2.0))
print(f"focus object: r=0.1 m at 2 m -> acceptance cone {cone:.3f} deg")

for yaw in (0.0, 1.0, 2.5, 2.87, 4.0, 10.0):
    ray = GazeRay(origin=(0.0, 0.0, 0.0), dir=direction_from_yaw(yaw))
    err = angular_error(ray, target)
    verdict = "HIT " if hit_test(ray, target) else "miss"
    print(f"  gaze yaw {yaw:5.2f} deg -> angular error {err:6.3f} deg  {verdict}")

print("\nhit_test is a ray-sphere intersection; angular_error is its continuous form.")
print("The two agree everywhere: hit <=> error <= asin(r/d).")
