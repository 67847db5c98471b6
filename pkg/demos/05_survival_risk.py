"""From instantaneous collision probabilities to one scalar risk.

Collision probabilities along the prediction horizon become event rates of
an inhomogeneous Poisson process. The survival function discounts events
that require nothing else to have happened first; integrating the
discounted critical-event density yields R(t) in [0, 1].
"""

import math

import numpy as np

from riskspot import (
    CollisionConfig,
    KinematicState,
    Path,
    RateProfile,
    integrated_risk,
    predict,
    scene_risk,
    survival_function,
)


def main():
    ds = 0.1
    grid = np.arange(121) * ds

    print("Escape rate only (tau0 = 3 s): S(s) = exp(-s/3)")
    empty = RateProfile(grid, (), np.zeros((0, 121)))
    surv = survival_function(empty, 3.0)
    for s in (0.0, 3.0, 6.0, 12.0):
        print(f"  S({s:4.1f}) = {surv[int(round(s / ds))]:.4f}")

    print("\nA one-second burst of collision rate, early vs late:")
    for start in (1.0, 8.0):
        rates = np.where((grid >= start) & (grid < start + 1.0), 1.0, 0.0)
        profile = RateProfile(grid, (1,), rates[None, :])
        print(f"  burst at s={start:.0f}s  -> R = {integrated_risk(profile, 3.0):.3f}")
    print("  -> later threats are discounted: escaping routes may resolve them first.")

    print("\nTwo-vehicle scene: follower 20 m (bumper) behind a leader, both 10 m/s:")
    road = Path([[-50.0, 0.0], [400.0, 0.0]])
    ego = KinematicState(position=[0.0, 0.0], heading=0.0, velocity=10.0, arclength=50.0)
    leader = KinematicState(position=[24.0, 0.0], heading=0.0, velocity=10.0, arclength=74.0)
    pred_ego = predict(ego, road, vehicle_id=1)
    pred_leader = predict(leader, road, vehicle_id=2)
    result = scene_risk(pred_ego, [pred_leader], CollisionConfig(), tau0_s=3.0, dt_s=0.1)
    print(f"  integrated risk R = {result.risk:.4f}")
    print(f"  rate peaks at s = {0.1 * int(np.argmax(result.rate.total)):.1f} s, "
          f"survival ends at S(12) = {result.survival[-1]:.3f}")

    slow_leader = KinematicState(position=[24.0, 0.0], heading=0.0, velocity=5.0, arclength=74.0)
    pred_slow = predict(slow_leader, road, vehicle_id=2)
    closing = scene_risk(pred_ego, [pred_slow], CollisionConfig(), tau0_s=3.0, dt_s=0.1)
    print(f"  same gap but closing at 5 m/s -> R = {closing.risk:.4f}")


if __name__ == "__main__":
    main()
