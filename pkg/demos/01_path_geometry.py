"""Paths, poses and projections: the coordinate backbone of everything else.

Every vehicle is pinned to a piecewise-linear path with an arc-length
parameter. Predictions shift that parameter forward; footprints and partner
selection all reason in this path coordinate.
"""

import numpy as np

from riskspot import Path, pose_at_arclength, poses_at_arclengths, project_to_path


def main():
    corner = Path([[0.0, 0.0], [10.0, 0.0], [10.0, 10.0]])
    print(f"L-shaped path: {corner}")
    print(f"  cumulative arc length: {corner.cumulative_arclength}")

    for l in (5.0, 10.0, 15.0, 25.0):
        position, heading = pose_at_arclength(corner, l)
        note = " (extrapolated past the end)" if l > corner.total_arclength else ""
        print(f"  pose at l={l:5.1f} m -> position {position}, heading {heading:+.3f} rad{note}")

    print("\nProjection assigns off-path positions an arc length:")
    for point in ((3.0, 2.0), (11.0, 11.0), (-5.0, 0.0)):
        print(f"  {point} -> l = {project_to_path(corner, point):.3f} m")

    print("\nRound trip along the whole path (pose then project):")
    ls = np.linspace(0.0, corner.total_arclength, 9)
    positions, _ = poses_at_arclengths(corner, ls)
    recovered = np.array([project_to_path(corner, p) for p in positions])
    print(f"  max |l - project(pose(l))| = {np.max(np.abs(recovered - ls)):.2e} m")


if __name__ == "__main__":
    main()
