"""Trial-level parallelism with order-independent results.

Every trial is a pure function of (fixed args, trial index), so the worker
pool only changes wall time, never output: results are collected in trial
order regardless of completion order.
"""

from concurrent.futures import ProcessPoolExecutor
from functools import partial


def run_trials(fn, fixed_args: tuple, trials: int, jobs: int) -> list:
    """Run fn(*fixed_args, index) for index in range(trials)."""
    if jobs <= 1:
        return [fn(*fixed_args, i) for i in range(trials)]
    chunksize = max(1, trials // (jobs * 8))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(partial(fn, *fixed_args), range(trials), chunksize=chunksize))
