"""
The forward model: from a depth profile to its squared speed
============================================================

A planar curve seen from the origin is described by its depth rho(theta),
the distance to the curve along the viewing angle.  The squared norm of
the curve's velocity under this parametrization is

    U(theta) = rho'(theta)^2 + rho(theta)^2,

and U is the only data the reconstruction problem gets to see.
"""

import numpy as np

from depthrec import DepthFunction, from_depth, polar_to_cartesian, velocity

# A circle of radius 3: the depth is constant, so U is the constant 9.
circle = DepthFunction.from_text("3", (0.0, np.pi))
u_circle = from_depth(circle)
print("circle of radius 3:")
for th in (0.3, 1.0, 2.5):
    print(f"   U({th}) = {u_circle.value(th):.12f}")

# The depth cos(theta) draws a circle through the origin; its speed is
# identically 1, the classic fixture.
cosine = DepthFunction.from_text("cos(theta)", (0.0, 1.5))
u_cosine = from_depth(cosine)
print("depth cos(theta):")
print("   max |U - 1| on a grid:",
      max(abs(u_cosine.value(t) - 1.0) for t in np.linspace(0, 1.5, 200)))

# A vertical line x = 5: depth 5/cos(theta), squared speed 25/cos^4.
line = DepthFunction.from_text("5/cos(theta)", (0.0, 1.3))
u_line = from_depth(line)
print("vertical line x = 5:")
print(f"   U(0)    = {u_line.value(0.0):.12f}   (expected 25)")
print(f"   U(0.3)  = {u_line.value(0.3):.12f}   (expected 25/cos^4(0.3) = "
      f"{25 / np.cos(0.3) ** 4:.12f})")

# The velocity vector itself is available too.
vec, speed2 = velocity(line, 0.0)
print(f"   velocity at 0: ({vec.x:.3f}, {vec.y:.3f}), squared norm {speed2:.3f}")

# Depth and angle recover the plane point.
print("   plane point at theta=0.3:", polar_to_cartesian(0.3, line.value(0.3)))
