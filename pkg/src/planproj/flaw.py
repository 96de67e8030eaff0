"""Monte-Carlo flaw detection over sampled projection scenarios.

A flaw is a declarative timeline query (FlawPredicate).  The detector
projects n scenarios with derived seeds, counts the scenarios where the
flaw query holds, and fires when the count reaches k.  The analytic side
computes the detector's power exactly from the binomial law, and sizes
(n, k) for requested eliminate/ignore thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, Infeasible
from .projector import HorizonExceeded, ProjectorConfig, project_plan
from .rules import FlawPredicate, RuleSet
from .timeline import Timeline
from .worldmodel import BeliefState, World

DEFAULT_HORIZON = 600.0
MAX_SAMPLE_SIZE = 10_000


@dataclass(frozen=True)
class DetectorSpec:
    """Detector shape: sample n scenarios, fire at k hits; theta and tau
    are the eliminate/ignore probability thresholds the shape targets."""

    n: int
    k: int
    theta: float
    tau: float

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise DomainError(f"need 1 <= k <= n, got k={self.k} n={self.n}")
        if not 0.0 < self.tau < self.theta < 1.0:
            raise DomainError(
                f"need 0 < tau < theta < 1, got tau={self.tau} theta={self.theta}")


def sample_scenarios(plan, world: World, beliefs: BeliefState | None,
                     rules: RuleSet, n: int, root_seed,
                     horizon: float = DEFAULT_HORIZON,
                     config: ProjectorConfig | None = None,
                     start=None) -> list[Timeline]:
    """n independent projections with seeds derived from root_seed.

    Scenario i uses seed "{root_seed}/{i}", so the same root seed gives
    the identical scenario list.  A projection that runs past the horizon
    contributes its flagged partial timeline; any other projection error
    is recorded on an otherwise empty timeline under stats["error"]
    rather than aborting the batch.
    """
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    out: list[Timeline] = []
    for i in range(n):
        seed = f"{root_seed}/{i}"
        try:
            tl = project_plan(plan, world, beliefs, rules, seed, horizon,
                              config=config, start=start)
        except HorizonExceeded as err:
            tl = err.timeline
        except Exception as err:  # recorded, not fatal, per scenario
            tl = Timeline()
            tl.stats = {"error": f"{type(err).__name__}: {err}"}
        out.append(tl)
    return out


def count_flaw(scenarios, f: FlawPredicate) -> int:
    return sum(1 for tl in scenarios if f.holds(tl))


def detect_flaw(scenarios, f: FlawPredicate, k: int) -> bool:
    """True iff the flaw holds in at least k of the scenarios."""
    if not scenarios:
        raise DomainError("detect_flaw needs at least one scenario")
    if not 1 <= k <= len(scenarios):
        raise DomainError(f"need 1 <= k <= {len(scenarios)}, got {k}")
    return count_flaw(scenarios, f) >= k


def detection_probability(n: int, k: int, p) -> float:
    """P(detector fires) = P(Binomial(n, p) >= k), evaluated exactly.

    Floats are read as their shortest decimal representation, so literal
    probabilities like 0.6 enter the binomial sum as exact rationals.
    """
    if not (isinstance(n, int) and isinstance(k, int)):
        raise DomainError("n and k must be integers")
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k} n={n}")
    prob = Fraction(str(p)) if isinstance(p, float) else Fraction(p)
    if not 0 <= prob <= 1:
        raise DomainError(f"need 0 <= p <= 1, got {p}")
    q = 1 - prob
    cdf = sum(math.comb(n, j) * prob ** j * q ** (n - j) for j in range(k))
    return float(1 - cdf)


def _power(n: int, k: int, p: float) -> float:
    """P(Binomial(n, p) >= k) in floats, by the stable pmf recurrence."""
    if p <= 0.0:
        return 0.0
    if p >= 1.0:
        return 1.0
    q = 1.0 - p
    pmf = math.exp(n * math.log1p(-p))
    cdf = pmf
    for j in range(k - 1):
        pmf *= (n - j) / (j + 1) * (p / q)
        cdf += pmf
    return max(0.0, 1.0 - cdf)


def required_sample_size(theta: float, tau: float, beta: float = 0.95,
                         max_n: int = MAX_SAMPLE_SIZE) -> tuple[int, int]:
    """Smallest n admitting a k with power at theta >= beta and false-alarm
    at tau <= 1 - beta; returns that (n, k) with the smallest such k.

    The search scans n up to max_n using the float pmf recurrence.
    Infeasible covers tau >= theta (no k can be both sensitive at theta
    and quiet at tau) and exhaustion of the n bound.
    """
    for name, v in (("theta", theta), ("tau", tau), ("beta", beta)):
        if not 0.0 < v < 1.0:
            raise DomainError(f"{name} must lie in (0, 1), got {v}")
    if tau >= theta or math.isclose(tau, theta, rel_tol=1e-12):
        raise Infeasible(f"tau={tau} does not lie strictly below theta={theta}")
    for n in range(1, max_n + 1):
        k = 1
        while k <= n and _power(n, k, tau) > 1.0 - beta:
            k += 1
        if k > n:
            continue
        if _power(n, k, theta) >= beta:
            return n, k
    raise Infeasible(
        f"no (n, k) with n <= {max_n} separates theta={theta} from tau={tau}")


def flaw_report(scenarios, f: FlawPredicate, spec: DetectorSpec) -> dict:
    """Detector outcome plus its analytic operating characteristics."""
    count = count_flaw(scenarios, f)
    return {
        "flaw": f.name,
        "n": spec.n,
        "k": spec.k,
        "count": count,
        "decision": count >= spec.k,
        "analytic_power_at_theta": detection_probability(spec.n, spec.k, spec.theta),
        "analytic_false_alarm_at_tau": detection_probability(spec.n, spec.k, spec.tau),
    }
