"""Small builders shared by the test modules."""

import numpy as np

from socmorse.pulse_design import PulseSchedule


def constant_schedule(spec, coupling, amp, gap, n=64):
    """Flat two-channel schedule, handy for degenerate-control tests."""
    times = np.linspace(0.0, spec.t_f, n)
    return PulseSchedule(
        times=times,
        channel_a=np.full(n, amp),
        channel_b=np.full(n, gap),
        label_a="Omega" if spec.scheme == "raman" else "theta1",
        label_b="Delta" if spec.scheme == "raman" else "beta",
        spec=spec,
        coupling=coupling,
        phi=0.0,
        fn_a=lambda t: np.full_like(np.asarray(t, dtype=float), amp),
        fn_b=lambda t: np.full_like(np.asarray(t, dtype=float), gap),
    )
